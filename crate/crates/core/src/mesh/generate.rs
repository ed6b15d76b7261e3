//! Test-family generators: geodesic spheres, harmonic perturbations,
//! ellipsoids and tori.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::Vector3;

use super::ImmersedMesh;
use crate::error::{domain, Result};
use crate::spaceform::{AmbientPoint, SpaceForm, Vec4};

pub const MAX_SUBDIV: u32 = 8;

/// Unit directions and outward faces of an icosahedron (poles on the z axis)
/// refined `subdiv` times by edge midpoints pushed back to the unit sphere.
pub fn icosphere(subdiv: u32) -> Result<(Vec<Vector3<f64>>, Vec<[usize; 3]>)> {
    if subdiv > MAX_SUBDIV {
        return Err(domain(format!(
            "subdiv must be in [0, {MAX_SUBDIV}], got {subdiv}"
        )));
    }
    let z = 1.0 / 5f64.sqrt();
    let ring = 2.0 / 5f64.sqrt();
    let mut dirs = vec![Vector3::new(0.0, 0.0, 1.0)];
    for k in 0..5 {
        let t = 2.0 * PI * k as f64 / 5.0;
        dirs.push(Vector3::new(ring * t.cos(), ring * t.sin(), z));
    }
    for k in 0..5 {
        let t = 2.0 * PI * k as f64 / 5.0 + PI / 5.0;
        dirs.push(Vector3::new(ring * t.cos(), ring * t.sin(), -z));
    }
    dirs.push(Vector3::new(0.0, 0.0, -1.0));
    let mut faces = Vec::with_capacity(20);
    for k in 0..5 {
        let (u0, u1) = (1 + k, 1 + (k + 1) % 5);
        let (l0, l1) = (6 + k, 6 + (k + 1) % 5);
        faces.push([0, u0, u1]);
        faces.push([u0, l0, u1]);
        faces.push([u1, l0, l1]);
        faces.push([11, l1, l0]);
    }
    for _ in 0..subdiv {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, dirs: &mut Vec<Vector3<f64>>| {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                dirs.push((dirs[a] + dirs[b]).normalize());
                dirs.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut dirs);
            let bc = midpoint(b, c, &mut dirs);
            let ca = midpoint(c, a, &mut dirs);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    Ok((dirs, faces))
}

/// Associated Legendre function `P_l^m(x)` with the Condon-Shortley phase.
fn legendre(l: u32, m: u32, x: f64) -> f64 {
    let mut pmm = 1.0;
    let somx2 = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
    let mut fact = 1.0;
    for _ in 0..m {
        pmm *= -fact * somx2;
        fact += 2.0;
    }
    if l == m {
        return pmm;
    }
    let mut pmmp1 = x * (2 * m + 1) as f64 * pmm;
    for ll in (m + 2)..=l {
        let pll = (x * (2 * ll - 1) as f64 * pmmp1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pmmp1;
        pmmp1 = pll;
    }
    pmmp1
}

/// Real orthonormal spherical harmonic `Y_{l,m}` at the unit direction `u`
/// (`cos` for `m > 0`, `sin` for `m < 0`).
pub fn real_spherical_harmonic(l: u32, m: i32, u: &Vector3<f64>) -> f64 {
    let am = m.unsigned_abs();
    debug_assert!(am <= l);
    let mut ratio = 1.0;
    for k in (l - am + 1)..=(l + am) {
        ratio /= k as f64;
    }
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
    let p = legendre(l, am, u[2].clamp(-1.0, 1.0));
    let phi = u[1].atan2(u[0]);
    match m {
        0 => norm * p,
        m if m > 0 => 2f64.sqrt() * norm * (m as f64 * phi).cos() * p,
        _ => 2f64.sqrt() * norm * (am as f64 * phi).sin() * p,
    }
}

fn radial_mesh(
    space: &SpaceForm,
    p: &AmbientPoint,
    subdiv: u32,
    profile: impl Fn(&Vector3<f64>) -> f64,
) -> Result<ImmersedMesh> {
    let (dirs, faces) = icosphere(subdiv)?;
    let limit = if space.delta() > 0.0 {
        PI / (2.0 * space.delta().sqrt())
    } else {
        f64::INFINITY
    };
    let frame = space.frame_at(p);
    let mut vertices = Vec::with_capacity(dirs.len());
    for u in &dirs {
        let r = profile(u);
        if !(r > 0.0 && r < limit) {
            return Err(domain(format!(
                "radial profile {r} at direction ({:.4}, {:.4}, {:.4}) leaves (0, {limit})",
                u[0], u[1], u[2]
            )));
        }
        let v = SpaceForm::from_frame(&frame, u) * r;
        vertices.push(space.point(space.exp_unchecked(p.coords(), &v))?);
    }
    ImmersedMesh::new(*space, vertices, faces)
}

/// Geodesic sphere `S(p, rho)`: a refined icosahedron pushed out along
/// geodesics from `p`.
pub fn gen_geodesic_sphere(
    space: &SpaceForm,
    p: &AmbientPoint,
    rho: f64,
    subdiv: u32,
) -> Result<ImmersedMesh> {
    check_rho(space, rho)?;
    radial_mesh(space, p, subdiv, |_| rho)
}

/// Radial graph `r(u) = rho + amplitude * Y_{l,m}(u)` over the geodesic
/// sphere of radius `rho` at `p`.
pub fn gen_perturbed_sphere(
    space: &SpaceForm,
    p: &AmbientPoint,
    rho: f64,
    amplitude: f64,
    harmonic: (u32, i32),
    subdiv: u32,
) -> Result<ImmersedMesh> {
    check_rho(space, rho)?;
    let (l, m) = harmonic;
    if m.unsigned_abs() > l {
        return Err(domain(format!("harmonic index needs |m| <= l, got ({l},{m})")));
    }
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(domain(format!("amplitude must be >= 0, got {amplitude}")));
    }
    radial_mesh(space, p, subdiv, |u| {
        rho + amplitude * real_spherical_harmonic(l, m, u)
    })
}

fn check_rho(space: &SpaceForm, rho: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(domain(format!("rho must be positive, got {rho}")));
    }
    if space.delta() > 0.0 {
        let limit = PI / (2.0 * space.delta().sqrt());
        if rho >= limit {
            return Err(domain(format!(
                "rho = {rho} must be below pi/(2 sqrt(delta)) = {limit}"
            )));
        }
    }
    Ok(())
}

fn require_euclidean(space: &SpaceForm, what: &str) -> Result<()> {
    if space.delta() != 0.0 {
        return Err(domain(format!(
            "{what} is only available for delta = 0, got {}",
            space.delta()
        )));
    }
    Ok(())
}

/// Axis-aligned ellipsoid with semiaxes `(a, b, c)` centered at the origin.
pub fn gen_ellipsoid(space: &SpaceForm, axes: [f64; 3], subdiv: u32) -> Result<ImmersedMesh> {
    require_euclidean(space, "ellipsoid")?;
    if axes.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
        return Err(domain(format!("semiaxes must be positive, got {axes:?}")));
    }
    let (dirs, faces) = icosphere(subdiv)?;
    let vertices = dirs
        .iter()
        .map(|u| space.point(Vec4::new(axes[0] * u[0], axes[1] * u[1], axes[2] * u[2], 0.0)))
        .collect::<Result<Vec<_>>>()?;
    ImmersedMesh::new(*space, vertices, faces)
}

/// Torus of revolution about the z axis. The tube is cut into `resolution`
/// segments and the core circle into about `resolution * R / r`.
pub fn gen_torus(space: &SpaceForm, major: f64, minor: f64, resolution: usize) -> Result<ImmersedMesh> {
    require_euclidean(space, "torus")?;
    if !(minor > 0.0) || !(major > minor) || !major.is_finite() {
        return Err(domain(format!(
            "torus needs 0 < r_minor < R_major, got R = {major}, r = {minor}"
        )));
    }
    if resolution < 3 {
        return Err(domain(format!("torus resolution must be >= 3, got {resolution}")));
    }
    let nv = resolution;
    let nu = ((resolution as f64 * major / minor).round() as usize).max(3);
    let mut vertices = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * PI * j as f64 / nv as f64;
            let w = major + minor * v.cos();
            vertices.push(space.point(Vec4::new(w * u.cos(), w * u.sin(), minor * v.sin(), 0.0))?);
        }
    }
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    ImmersedMesh::new(*space, vertices, faces)
}
