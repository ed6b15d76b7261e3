//! Closed-form geometry of the simply connected model spaces of constant
//! curvature `delta`.
//!
//! Points live in an embedding space of dimension four (the fourth coordinate
//! is identically zero in the Euclidean model):
//!
//! * `delta = 0`: Euclidean 3-space, `w = 0`.
//! * `delta > 0`: the round sphere `|x|^2 = 1/delta` in Euclidean `R^4`.
//! * `delta < 0`: the upper sheet of the hyperboloid
//!   `x^2 + y^2 + z^2 - w^2 = 1/delta` in Minkowski space, with `w > 0`.
//!
//! In all three models the base point `origin()` has vanishing spatial
//! coordinates and its tangent space is spanned by `e1, e2, e3`, so tangent
//! data at the origin reads identically across models.

use nalgebra::{Matrix3, Matrix4, Quaternion, Vector3, Vector4};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{degenerate, domain, Result};

pub type Vec4 = Vector4<f64>;

/// Below this value of `|delta| r^2` the trigonometric forms are replaced by
/// their Taylor series so that the functions stay smooth through `delta = 0`.
const SERIES_THRESHOLD: f64 = 1e-8;

/// Relative slack on the spherical injectivity radius in domain checks.
const RANGE_SLACK: f64 = 1e-12;

/// Relative off-model residual below which constructors keep coordinates as
/// given (so decimal round trips are exact).
const KEEP_RESIDUAL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Euclidean,
    Spherical,
    Hyperbolic,
}

/// A model space of constant sectional curvature `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceForm {
    delta: f64,
}

/// A point of the model, in embedding coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientPoint {
    coords: Vec4,
}

/// A tangent vector attached to a point of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVec {
    pub base: AmbientPoint,
    pub vec: Vec4,
}

impl AmbientPoint {
    pub fn coords(&self) -> &Vec4 {
        &self.coords
    }
}

impl Serialize for AmbientPoint {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        [self.coords[0], self.coords[1], self.coords[2], self.coords[3]].serialize(ser)
    }
}

impl TangentVec {
    pub fn zero(base: AmbientPoint) -> Self {
        Self {
            base,
            vec: Vec4::zeros(),
        }
    }
}

/// `s_delta(r)` without domain checks.
#[inline]
pub fn s_raw(delta: f64, r: f64) -> f64 {
    let x = delta * r * r;
    if x.abs() < SERIES_THRESHOLD {
        r * (1.0 - x / 6.0 * (1.0 - x / 20.0 * (1.0 - x / 42.0)))
    } else if delta > 0.0 {
        let k = delta.sqrt();
        (k * r).sin() / k
    } else {
        let k = (-delta).sqrt();
        (k * r).sinh() / k
    }
}

/// `c_delta(r) = s_delta'(r)` without domain checks.
#[inline]
pub fn c_raw(delta: f64, r: f64) -> f64 {
    let x = delta * r * r;
    if x.abs() < SERIES_THRESHOLD {
        1.0 - x / 2.0 * (1.0 - x / 12.0 * (1.0 - x / 30.0))
    } else if delta > 0.0 {
        (delta.sqrt() * r).cos()
    } else {
        ((-delta).sqrt() * r).cosh()
    }
}

/// Principal branch of `s_delta^{-1}` without domain checks.
#[inline]
pub fn s_inverse_raw(delta: f64, y: f64) -> f64 {
    let z = delta * y * y;
    if z.abs() < SERIES_THRESHOLD {
        y * (1.0 + z / 6.0 + 3.0 * z * z / 40.0 + 5.0 * z * z * z / 112.0)
    } else if delta > 0.0 {
        let k = delta.sqrt();
        (k * y).min(1.0).asin() / k
    } else {
        let k = (-delta).sqrt();
        (k * y).asinh() / k
    }
}

fn check_radius(delta: f64, r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(domain(format!("radius must be finite and >= 0, got {r}")));
    }
    if delta > 0.0 {
        let limit = PI / delta.sqrt();
        if r > limit * (1.0 + RANGE_SLACK) {
            return Err(domain(format!(
                "radius {r} exceeds the injectivity radius pi/sqrt(delta) = {limit}"
            )));
        }
    }
    Ok(())
}

/// The generalized sine: `sin(sqrt(d) r)/sqrt(d)`, `r`, or `sinh(sqrt(-d) r)/sqrt(-d)`.
pub fn s_delta(delta: f64, r: f64) -> Result<f64> {
    check_radius(delta, r)?;
    Ok(s_raw(delta, r))
}

/// The generalized cosine `c_delta = s_delta'`, with `c^2 + delta s^2 = 1`.
pub fn c_delta(delta: f64, r: f64) -> Result<f64> {
    check_radius(delta, r)?;
    Ok(c_raw(delta, r))
}

/// Inverse of `s_delta` on `[0, pi/(2 sqrt(delta))]` (all of `[0, inf)` when `delta <= 0`).
pub fn s_delta_inverse(delta: f64, y: f64) -> Result<f64> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(domain(format!("s_delta_inverse needs y >= 0, got {y}")));
    }
    if delta > 0.0 {
        let max = 1.0 / delta.sqrt();
        if y > max * (1.0 + RANGE_SLACK) {
            return Err(domain(format!(
                "s_delta_inverse: y = {y} exceeds 1/sqrt(delta) = {max}"
            )));
        }
    }
    Ok(s_inverse_raw(delta, y))
}

/// `t -> s_t(r)`, the comparison function used to relate two curvature bounds.
///
/// Defined for `t <= pi^2/(9 r^2)` and `r > 0`; strictly decreasing in `t`.
pub fn sigma_of_curvature(t: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(domain(format!("sigma_r needs r > 0, got {r}")));
    }
    let t_max = PI * PI / (9.0 * r * r);
    if !(t <= t_max) {
        return Err(domain(format!(
            "sigma_r: curvature {t} exceeds pi^2/(9 r^2) = {t_max}"
        )));
    }
    Ok(s_raw(t, r))
}

/// Generalized cross product: `m_k = det[a; b; c; e_k]`.
fn quad_cross(a: &Vec4, b: &Vec4, c: &Vec4) -> Vec4 {
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&j| j != skip).collect();
        Matrix3::new(
            a[cols[0]], a[cols[1]], a[cols[2]], b[cols[0]], b[cols[1]], b[cols[2]], c[cols[0]],
            c[cols[1]], c[cols[2]],
        )
        .determinant()
    };
    // cofactor expansion along the last row
    Vec4::new(-minor(0), minor(1), -minor(2), minor(3))
}

impl SpaceForm {
    pub fn new(delta: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(domain(format!("curvature must be finite, got {delta}")));
        }
        Ok(Self { delta })
    }

    pub fn euclidean() -> Self {
        Self { delta: 0.0 }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn model(&self) -> Model {
        if self.delta > 0.0 {
            Model::Spherical
        } else if self.delta < 0.0 {
            Model::Hyperbolic
        } else {
            Model::Euclidean
        }
    }

    /// `pi/sqrt(delta)` on the sphere, `+inf` otherwise.
    pub fn injectivity_radius(&self) -> f64 {
        if self.delta > 0.0 {
            PI / self.delta.sqrt()
        } else {
            f64::INFINITY
        }
    }

    /// `pi/(4 sqrt(delta))` on the sphere, `+inf` otherwise: the ball radius
    /// under which the extrinsic estimates apply.
    pub fn convexity_radius(&self) -> f64 {
        if self.delta > 0.0 {
            PI / (4.0 * self.delta.sqrt())
        } else {
            f64::INFINITY
        }
    }

    /// Number of embedding coordinates used in files: 3 or 4.
    pub fn embedding_dim(&self) -> usize {
        if self.delta == 0.0 {
            3
        } else {
            4
        }
    }

    /// Scale `1/sqrt(|delta|)` of the curved models.
    fn scale(&self) -> f64 {
        1.0 / self.delta.abs().sqrt()
    }

    pub fn s(&self, r: f64) -> Result<f64> {
        s_delta(self.delta, r)
    }

    pub fn c(&self, r: f64) -> Result<f64> {
        c_delta(self.delta, r)
    }

    pub fn s_inverse(&self, y: f64) -> Result<f64> {
        s_delta_inverse(self.delta, y)
    }

    /// The model bilinear form: Euclidean, or Minkowski with `w` timelike.
    #[inline]
    pub fn inner(&self, a: &Vec4, b: &Vec4) -> f64 {
        let spatial = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        if self.delta < 0.0 {
            spatial - a[3] * b[3]
        } else {
            spatial + a[3] * b[3]
        }
    }

    /// Length of a tangent vector in the model metric.
    #[inline]
    pub fn norm(&self, v: &Vec4) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    pub fn origin(&self) -> AmbientPoint {
        let w = if self.delta == 0.0 { 0.0 } else { self.scale() };
        AmbientPoint {
            coords: Vec4::new(0.0, 0.0, 0.0, w),
        }
    }

    /// Relative violation of the on-model constraint.
    pub fn constraint_residual(&self, x: &Vec4) -> f64 {
        if self.delta == 0.0 {
            return x[3].abs();
        }
        (self.delta * self.inner(x, x) - 1.0).abs()
    }

    /// Builds a point, renormalizing onto the model when the coordinates are
    /// off by more than rounding.
    pub fn point(&self, coords: Vec4) -> Result<AmbientPoint> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(domain("non-finite point coordinates"));
        }
        if self.constraint_residual(&coords) <= KEEP_RESIDUAL {
            return Ok(AmbientPoint { coords });
        }
        let coords = if self.delta == 0.0 {
            Vec4::new(coords[0], coords[1], coords[2], 0.0)
        } else if self.delta > 0.0 {
            let n = coords.norm();
            if n == 0.0 {
                return Err(domain("the zero vector is not a point of the sphere"));
            }
            coords * (self.scale() / n)
        } else {
            let spatial = coords[0] * coords[0] + coords[1] * coords[1] + coords[2] * coords[2];
            let r = self.scale();
            Vec4::new(coords[0], coords[1], coords[2], (r * r + spatial).sqrt())
        };
        Ok(AmbientPoint { coords })
    }

    /// Builds a point from 3 (Euclidean) or 4 (curved) file coordinates.
    pub fn point_from_slice(&self, c: &[f64]) -> Result<AmbientPoint> {
        if c.len() != self.embedding_dim() {
            return Err(domain(format!(
                "expected {} coordinates for delta = {}, got {}",
                self.embedding_dim(),
                self.delta,
                c.len()
            )));
        }
        let w = if c.len() == 4 { c[3] } else { 0.0 };
        self.point(Vec4::new(c[0], c[1], c[2], w))
    }

    pub fn point_to_vec(&self, p: &AmbientPoint) -> Vec<f64> {
        p.coords.iter().take(self.embedding_dim()).copied().collect()
    }

    /// Orthogonal projection onto `T_p N` in the model metric.
    #[inline]
    pub fn project_tangent(&self, p: &Vec4, v: &Vec4) -> Vec4 {
        if self.delta == 0.0 {
            Vec4::new(v[0], v[1], v[2], 0.0)
        } else {
            v - p * (self.delta * self.inner(p, v))
        }
    }

    pub fn tangent(&self, base: &AmbientPoint, v: Vec4) -> TangentVec {
        TangentVec {
            base: *base,
            vec: self.project_tangent(&base.coords, &v),
        }
    }

    /// Exponential map on raw coordinates, no range check.
    #[inline]
    pub fn exp_unchecked(&self, p: &Vec4, v: &Vec4) -> Vec4 {
        if self.delta == 0.0 {
            return p + v;
        }
        let t = self.norm(v);
        if t == 0.0 {
            return *p;
        }
        p * c_raw(self.delta, t) + v * (s_raw(self.delta, t) / t)
    }

    pub fn exp(&self, p: &AmbientPoint, v: &TangentVec) -> Result<AmbientPoint> {
        let t = self.norm(&v.vec);
        if self.delta > 0.0 && t >= self.injectivity_radius() {
            return Err(domain(format!(
                "exp: |v| = {t} reaches the injectivity radius {}",
                self.injectivity_radius()
            )));
        }
        self.point(self.exp_unchecked(&p.coords, &v.vec))
    }

    /// `(exp_p^{-1}(q), d(p, q))` on raw coordinates. `None` at the antipode.
    #[inline]
    pub fn log_unchecked(&self, p: &Vec4, q: &Vec4) -> Option<(Vec4, f64)> {
        if self.delta == 0.0 {
            let w = q - p;
            let d = w.norm();
            return Some((w, d));
        }
        let diff = q - p;
        let cd_minus_one = self.delta * self.inner(p, &diff);
        let cd = 1.0 + cd_minus_one;
        let w = diff - p * cd_minus_one;
        let sn = self.norm(&w);
        let d = if self.delta > 0.0 {
            let k = self.delta.sqrt();
            (k * sn).atan2(cd) / k
        } else {
            let k = (-self.delta).sqrt();
            (k * sn).asinh() / k
        };
        if sn == 0.0 {
            if self.delta > 0.0 && cd < 0.0 {
                return None;
            }
            return Some((Vec4::zeros(), 0.0));
        }
        Some((w * (d / sn), d))
    }

    pub fn log(&self, p: &AmbientPoint, q: &AmbientPoint) -> Result<TangentVec> {
        let (v, d) = self
            .log_unchecked(&p.coords, &q.coords)
            .ok_or_else(|| degenerate("log: q is the antipode of p"))?;
        if self.delta > 0.0 && d > self.injectivity_radius() * (1.0 - 1e-9) {
            return Err(degenerate(format!(
                "log: q is within rounding of the antipode of p (d = {d})"
            )));
        }
        Ok(TangentVec { base: *p, vec: v })
    }

    /// Geodesic distance.
    #[inline]
    pub fn dist_unchecked(&self, p: &Vec4, q: &Vec4) -> f64 {
        if self.delta == 0.0 {
            return (q - p).norm();
        }
        let diff = q - p;
        let cd_minus_one = self.delta * self.inner(p, &diff);
        let cd = 1.0 + cd_minus_one;
        let sn = self.norm(&(diff - p * cd_minus_one));
        if self.delta > 0.0 {
            let k = self.delta.sqrt();
            (k * sn).atan2(cd) / k
        } else {
            let k = (-self.delta).sqrt();
            (k * sn).asinh() / k
        }
    }

    pub fn dist(&self, p: &AmbientPoint, q: &AmbientPoint) -> f64 {
        self.dist_unchecked(&p.coords, &q.coords)
    }

    /// Unit gradient of `r = d(pole, .)` at `x`, pointing away from the pole.
    pub fn grad_r(&self, pole: &AmbientPoint, x: &AmbientPoint) -> Result<TangentVec> {
        let (v, d) = self
            .log_unchecked(&x.coords, &pole.coords)
            .ok_or_else(|| degenerate("grad_r: x is the antipode of the pole"))?;
        if d == 0.0 {
            return Err(degenerate("grad_r is undefined at the pole"));
        }
        Ok(TangentVec {
            base: *x,
            vec: -v / self.norm(&v),
        })
    }

    /// Oriented cross product of two tangent vectors at `x`, a tangent vector
    /// at `x` whose length is the area they span. Agrees with `a x b` on
    /// `e1, e2, e3` at the origin.
    #[inline]
    pub fn cross_in_tangent(&self, x: &Vec4, a: &Vec4, b: &Vec4) -> Vec4 {
        if self.delta == 0.0 {
            let c = Vector3::new(a[0], a[1], a[2]).cross(&Vector3::new(b[0], b[1], b[2]));
            return Vec4::new(c[0], c[1], c[2], 0.0);
        }
        let unit = x * self.delta.abs().sqrt();
        let m = quad_cross(a, b, &unit);
        if self.delta > 0.0 {
            -m
        } else {
            Vec4::new(-m[0], -m[1], -m[2], m[3])
        }
    }

    /// The isometry carrying the origin to `p` along the joining geodesic.
    pub fn transvection(&self, p: &AmbientPoint) -> Isometry {
        if self.delta == 0.0 {
            return Isometry {
                linear: Matrix4::identity(),
                translation: Vec4::new(p.coords[0], p.coords[1], p.coords[2], 0.0),
            };
        }
        let o = self.origin();
        let (v, t) = self
            .log_unchecked(&o.coords, &p.coords)
            .expect("the antipode of the origin has no transvection");
        if t == 0.0 {
            return Isometry::identity();
        }
        let u = Vector3::new(v[0], v[1], v[2]).normalize();
        let theta = t / self.scale();
        let uu = Vec4::new(u[0], u[1], u[2], 0.0);
        let e4 = Vec4::new(0.0, 0.0, 0.0, 1.0);
        let sym = uu * uu.transpose() + e4 * e4.transpose();
        let linear = if self.delta > 0.0 {
            Matrix4::identity()
                + sym * (theta.cos() - 1.0)
                + (uu * e4.transpose() - e4 * uu.transpose()) * theta.sin()
        } else {
            Matrix4::identity()
                + sym * (theta.cosh() - 1.0)
                + (uu * e4.transpose() + e4 * uu.transpose()) * theta.sinh()
        };
        Isometry {
            linear,
            translation: Vec4::zeros(),
        }
    }

    /// A positively oriented orthonormal frame of `T_p N`.
    pub fn frame_at(&self, p: &AmbientPoint) -> [Vec4; 3] {
        let iso = self.transvection(p);
        [
            iso.apply_vector(&Vec4::x()),
            iso.apply_vector(&Vec4::y()),
            iso.apply_vector(&Vec4::z()),
        ]
    }

    /// Tangent vector at `p` with coordinates `c` in `frame_at(p)`.
    pub fn from_frame(frame: &[Vec4; 3], c: &Vector3<f64>) -> Vec4 {
        frame[0] * c[0] + frame[1] * c[1] + frame[2] * c[2]
    }

    /// Coordinates of a tangent vector in an orthonormal frame.
    pub fn to_frame(&self, frame: &[Vec4; 3], v: &Vec4) -> Vector3<f64> {
        Vector3::new(
            self.inner(v, &frame[0]),
            self.inner(v, &frame[1]),
            self.inner(v, &frame[2]),
        )
    }

    /// A random orientation-preserving isometry of the model.
    pub fn random_isometry<R: Rng + ?Sized>(&self, rng: &mut R) -> Isometry {
        let rot = rotation3(&random_unit_quaternion(rng));
        let mut spatial = Matrix4::identity();
        spatial.fixed_view_mut::<3, 3>(0, 0).copy_from(&rot);
        if self.delta == 0.0 {
            let t = Vec4::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                0.0,
            );
            return Isometry {
                linear: spatial,
                translation: t,
            };
        }
        if self.delta > 0.0 {
            let ql = random_unit_quaternion(rng);
            let qr = random_unit_quaternion(rng);
            let mut linear = Matrix4::zeros();
            for j in 0..4 {
                let mut e = [0.0; 4];
                e[j] = 1.0;
                let x = Quaternion::new(e[3], e[0], e[1], e[2]);
                let y = ql * x * qr;
                linear[(0, j)] = y.i;
                linear[(1, j)] = y.j;
                linear[(2, j)] = y.k;
                linear[(3, j)] = y.w;
            }
            return Isometry {
                linear,
                translation: Vec4::zeros(),
            };
        }
        let dir = rotation3(&random_unit_quaternion(rng)) * Vector3::x();
        let dist = rng.random_range(0.0..1.0) * self.scale();
        let o = self.origin();
        let target = self.exp_unchecked(&o.coords, &(Vec4::new(dir[0], dir[1], dir[2], 0.0) * dist));
        let boost = self.transvection(&AmbientPoint { coords: target });
        Isometry {
            linear: boost.linear * spatial,
            translation: Vec4::zeros(),
        }
    }
}

fn random_unit_quaternion<R: Rng + ?Sized>(rng: &mut R) -> Quaternion<f64> {
    // Shoemake's uniform sampling on S^3
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let a = (1.0 - u1).sqrt();
    let b = u1.sqrt();
    let (t2, t3) = (2.0 * PI * u2, 2.0 * PI * u3);
    Quaternion::new(b * t3.cos(), a * t2.sin(), a * t2.cos(), b * t3.sin())
}

fn rotation3(q: &Quaternion<f64>) -> Matrix3<f64> {
    nalgebra::UnitQuaternion::from_quaternion(*q)
        .to_rotation_matrix()
        .into_inner()
}

/// An isometry of a model, `x -> A x + t` in embedding coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    pub linear: Matrix4<f64>,
    pub translation: Vec4,
}

impl Isometry {
    pub fn identity() -> Self {
        Self {
            linear: Matrix4::identity(),
            translation: Vec4::zeros(),
        }
    }

    pub fn apply_vector(&self, v: &Vec4) -> Vec4 {
        self.linear * v
    }

    pub fn apply_coords(&self, x: &Vec4) -> Vec4 {
        self.linear * x + self.translation
    }

    pub fn apply(&self, space: &SpaceForm, p: &AmbientPoint) -> AmbientPoint {
        space
            .point(self.apply_coords(&p.coords))
            .expect("isometries keep points finite")
    }
}
