use crate::error::{domain, Error, Result};
use crate::mesh::ImmersedMesh;
use crate::spaceform::{s_raw, AmbientPoint, SpaceForm, Vec4};

const MAX_ITER: usize = 200;
const MINIMAX_ITER: usize = 500;

/// Weighted log-map average `Y_q = sum_i a_i s(d_i)/d_i log_q(v_i)`.
pub fn center_field(mesh: &ImmersedMesh, q: &Vec4) -> Result<Vec4> {
    let space = mesh.space();
    let mut y = Vec4::zeros();
    for (i, a) in mesh.vertex_areas().iter().enumerate() {
        let (v, d) = space
            .log_unchecked(q, mesh.vertex(i))
            .ok_or_else(|| domain(format!("vertex {i} is antipodal to the iterate")))?;
        if d > 0.0 {
            y += v * (a * s_raw(space.delta(), d) / d);
        }
    }
    Ok(space.project_tangent(q, &y))
}

/// Area-weighted ambient centroid pushed back onto the model.
pub fn ambient_centroid(mesh: &ImmersedMesh) -> Result<AmbientPoint> {
    let space = mesh.space();
    let mut c = Vec4::zeros();
    for (v, a) in mesh.vertices().iter().zip(mesh.vertex_areas()) {
        c += v.coords() * *a;
    }
    c /= mesh.area();
    if space.delta() < 0.0 {
        let q = -space.inner(&c, &c);
        if !(q > 0.0) || c[3] <= 0.0 {
            return Err(domain("ambient centroid is not timelike"));
        }
        c *= 1.0 / ((-space.delta()) * q).sqrt();
    }
    space.point(c)
}

/// Largest vertex distance from `center` must stay inside the convexity
/// radius of the model.
fn check_convex(mesh: &ImmersedMesh, center: &AmbientPoint) -> Result<()> {
    let space = mesh.space();
    if space.delta() > 0.0 {
        let reach = mesh.max_distance_from(center);
        let limit = std::f64::consts::FRAC_PI_2 / space.delta().sqrt();
        if reach >= limit {
            return Err(domain(format!(
                "convexity hypothesis violated: mesh reaches distance {reach:.6} from its centroid, \
                 convex balls have radius < {limit:.6}"
            )));
        }
    }
    Ok(())
}

/// Zero of the center-of-mass field by damped fixed-point iteration.
pub fn center_of_mass(mesh: &ImmersedMesh) -> Result<AmbientPoint> {
    let space = mesh.space();
    let start = ambient_centroid(mesh)?;
    check_convex(mesh, &start)?;
    let volume = mesh.area();
    let diam = 2.0 * mesh.max_distance_from(&start);
    let tol = 1e-9 * volume * diam;

    let mut q = start;
    let mut y = center_field(mesh, q.coords())?;
    let mut res = space.norm(&y);
    for _ in 0..MAX_ITER {
        if res <= tol {
            check_convex(mesh, &q)?;
            return Ok(q);
        }
        let mut step = 1.0;
        loop {
            let cand = space.point(space.exp_unchecked(q.coords(), &(y * (step / volume))))?;
            let cy = center_field(mesh, cand.coords())?;
            let cres = space.norm(&cy);
            if cres < res {
                q = cand;
                y = cy;
                res = cres;
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                return Err(Error::NonConvergence {
                    solver: "center of mass (step underflow)",
                    iterations: MAX_ITER,
                    residual: res / (volume * diam),
                });
            }
        }
    }
    if res <= tol {
        return Ok(q);
    }
    Err(Error::NonConvergence {
        solver: "center of mass",
        iterations: MAX_ITER,
        residual: res / (volume * diam),
    })
}

/// Exact geodesic diameter of a point set with the indices realizing it.
pub fn diameter(space: &SpaceForm, points: &[AmbientPoint]) -> (f64, usize, usize) {
    // compare a monotone surrogate of the distance, convert once at the end
    let key = |a: &Vec4, b: &Vec4| -> f64 {
        if space.delta() == 0.0 {
            (a - b).norm_squared()
        } else {
            -space.inner(a, b)
        }
    };
    let (mut best, mut bi, mut bj) = (f64::NEG_INFINITY, 0, 0);
    for i in 0..points.len() {
        let a = points[i].coords();
        for (j, q) in points.iter().enumerate().skip(i + 1) {
            let k = key(a, q.coords());
            if k > best {
                best = k;
                bi = i;
                bj = j;
            }
        }
    }
    if points.len() < 2 {
        return (0.0, 0, 0);
    }
    (space.dist(&points[bi], &points[bj]), bi, bj)
}

#[derive(Debug, Clone)]
pub struct ExtrinsicRadius {
    pub radius: f64,
    pub center: AmbientPoint,
    /// Half the geodesic diameter; no enclosing ball is smaller.
    pub lower_bound: f64,
    /// `radius <= 1.005 * lower_bound`.
    pub certified: bool,
}

/// Approximate geodesic 1-center of a point set by the iterative minimax
/// walk `c <- exp_c(log_c(farthest) / (k + 1))`, keeping the best iterate.
pub fn minimax_center(space: &SpaceForm, points: &[AmbientPoint], start: &AmbientPoint) -> Result<ExtrinsicRadius> {
    if points.is_empty() {
        return Err(domain("minimax center of an empty set"));
    }
    let farthest = |c: &AmbientPoint| -> (f64, usize) {
        points
            .iter()
            .enumerate()
            .map(|(i, p)| (space.dist(c, p), i))
            .fold((f64::NEG_INFINITY, 0), |m, x| if x.0 > m.0 { x } else { m })
    };
    let mut c = *start;
    let (mut r, mut far) = farthest(&c);
    let (mut best_r, mut best_c) = (r, c);
    for k in 1..=MINIMAX_ITER {
        let (v, _) = space
            .log_unchecked(c.coords(), points[far].coords())
            .ok_or_else(|| domain("minimax walk reached an antipodal point"))?;
        c = space.point(space.exp_unchecked(c.coords(), &(v / (k as f64 + 1.0))))?;
        (r, far) = farthest(&c);
        if r < best_r {
            best_r = r;
            best_c = c;
        }
    }
    let lower_bound = 0.5 * diameter(space, points).0;
    Ok(ExtrinsicRadius {
        radius: best_r,
        center: best_c,
        lower_bound,
        certified: best_r <= 1.005 * lower_bound,
    })
}

/// Radius of the smallest geodesic ball containing the vertices.
pub fn extrinsic_radius(mesh: &ImmersedMesh) -> Result<ExtrinsicRadius> {
    let start = ambient_centroid(mesh)?;
    check_convex(mesh, &start)?;
    minimax_center(mesh.space(), mesh.vertices(), &start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{gen_ellipsoid, gen_geodesic_sphere, gen_perturbed_sphere};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn models() -> Vec<SpaceForm> {
        [-1.0, 0.0, 1.0].map(|d| SpaceForm::new(d).unwrap()).to_vec()
    }

    fn off_center(s: &SpaceForm) -> AmbientPoint {
        s.point(s.exp_unchecked(s.origin().coords(), &Vec4::new(0.3, -0.2, 0.1, 0.0)))
            .unwrap()
    }

    #[test]
    fn geodesic_sphere_center_is_recovered() {
        for s in models() {
            let p = off_center(&s);
            let m = gen_geodesic_sphere(&s, &p, 0.6, 3).unwrap();
            let c = center_of_mass(&m).unwrap();
            assert!(s.dist(&c, &p) <= 1e-8 * 0.6, "delta {}: {}", s.delta(), s.dist(&c, &p));
        }
    }

    #[test]
    fn centered_ellipsoid_has_center_at_origin() {
        let e = SpaceForm::euclidean();
        let m = gen_ellipsoid(&e, [1.0, 0.8, 1.3], 3).unwrap();
        let c = center_of_mass(&m).unwrap();
        assert!(c.coords().norm() < 1e-8);
    }

    #[test]
    fn center_is_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for s in models() {
            let m = gen_perturbed_sphere(&s, &s.origin(), 0.7, 0.1, (3, 1), 2).unwrap();
            let c = center_of_mass(&m).unwrap();
            let diam = 2.0 * m.max_distance_from(&c);
            for _ in 0..10 {
                let iso = s.random_isometry(&mut rng);
                let moved = center_of_mass(&m.transformed(&iso).unwrap()).unwrap();
                let expect = iso.apply(&s, &c);
                assert!(s.dist(&moved, &expect) <= 1e-7 * diam);
            }
        }
    }

    #[test]
    fn sphere_past_the_convexity_radius_is_rejected() {
        let s = SpaceForm::new(1.0).unwrap();
        let m = gen_geodesic_sphere(&s, &s.origin(), 1.55, 2).unwrap();
        assert!(center_of_mass(&m).is_ok());
        let o = s.origin();
        let pushed = m
            .vertices()
            .iter()
            .map(|v| {
                let (l, d) = s.log_unchecked(o.coords(), v.coords()).unwrap();
                s.point(s.exp_unchecked(o.coords(), &(l * (std::f64::consts::FRAC_PI_2 / d)))).unwrap()
            })
            .collect();
        let m = m.with_vertices(pushed).unwrap();
        assert!(center_of_mass(&m).is_err());
        assert!(extrinsic_radius(&m).is_err());
    }

    #[test]
    fn diameter_matches_brute_force() {
        for s in models() {
            let m = gen_perturbed_sphere(&s, &s.origin(), 0.5, 0.1, (2, 1), 1).unwrap();
            let (d, i, j) = diameter(&s, m.vertices());
            let mut best = 0.0f64;
            for a in m.vertices() {
                for b in m.vertices() {
                    best = best.max(s.dist(a, b));
                }
            }
            assert!((d - best).abs() < 1e-12);
            assert!((s.dist(&m.vertices()[i], &m.vertices()[j]) - d).abs() < 1e-15);
        }
    }

    #[test]
    fn extrinsic_radius_of_geodesic_sphere() {
        for s in models() {
            let p = off_center(&s);
            let m = gen_geodesic_sphere(&s, &p, 0.6, 3).unwrap();
            let er = extrinsic_radius(&m).unwrap();
            assert!((er.radius - 0.6).abs() <= 0.005 * 0.6);
            assert!(s.dist(&er.center, &p) <= 0.005 * 0.6);
            assert!(er.certified);
        }
    }

    #[test]
    fn two_points_give_the_midpoint() {
        for s in models() {
            let a = s.origin();
            let b = off_center(&s);
            let d = s.dist(&a, &b);
            let far = s.point(s.exp_unchecked(b.coords(), &Vec4::new(0.2, 0.2, 0.2, 0.0))).unwrap();
            let er = minimax_center(&s, &[a, b], &far).unwrap();
            assert!((er.radius - 0.5 * d).abs() <= 0.005 * d);
            let mid = s.point(s.exp_unchecked(a.coords(), &(s.log_unchecked(a.coords(), b.coords()).unwrap().0 * 0.5))).unwrap();
            assert!(s.dist(&er.center, &mid) <= 0.01 * d);
        }
    }

    #[test]
    fn elongated_ellipsoid_radius() {
        let e = SpaceForm::euclidean();
        let m = gen_ellipsoid(&e, [1.0, 1.0, 1.3], 3).unwrap();
        let er = extrinsic_radius(&m).unwrap();
        // oracle: farthest vertex from the symmetric center
        let oracle = m.vertices().iter().map(|v| v.coords().norm()).fold(0.0, f64::max);
        assert!((er.radius - oracle).abs() <= 0.005 * oracle);
        assert!((oracle - 1.3).abs() < 1e-12);
    }
}
