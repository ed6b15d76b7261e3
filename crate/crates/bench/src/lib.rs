//! Shared fixtures for the benchmarks.

use pinchlab_core::mesh::{gen_perturbed_sphere, ImmersedMesh};
use pinchlab_core::spaceform::SpaceForm;

/// Unit sphere with a 5% `Y_31` bump at the origin of the curvature-`delta` model.
pub fn bumped_sphere(delta: f64, subdiv: u32) -> ImmersedMesh {
    let space = SpaceForm::new(delta).expect("finite curvature");
    gen_perturbed_sphere(&space, &space.origin(), 1.0, 0.05, (3, 1), subdiv).expect("valid parameters")
}
