//! Independent oracles: a smooth radial graph over a geodesic sphere,
//! integrated by tensor Gauss-Legendre quadrature, with all geometry derived
//! by finite differences of the explicit immersion.

#![allow(dead_code)]

use std::f64::consts::PI;

pub type P4 = [f64; 4];

pub fn s_d(delta: f64, r: f64) -> f64 {
    if delta > 0.0 {
        (delta.sqrt() * r).sin() / delta.sqrt()
    } else if delta < 0.0 {
        ((-delta).sqrt() * r).sinh() / (-delta).sqrt()
    } else {
        r
    }
}

pub fn c_d(delta: f64, r: f64) -> f64 {
    if delta > 0.0 {
        (delta.sqrt() * r).cos()
    } else if delta < 0.0 {
        ((-delta).sqrt() * r).cosh()
    } else {
        1.0
    }
}

pub fn dot(delta: f64, a: &P4, b: &P4) -> f64 {
    let sp = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    if delta < 0.0 {
        sp - a[3] * b[3]
    } else {
        sp + a[3] * b[3]
    }
}

pub fn add(a: &P4, b: &P4, t: f64) -> P4 {
    [a[0] + t * b[0], a[1] + t * b[1], a[2] + t * b[2], a[3] + t * b[3]]
}

pub fn scale(a: &P4, t: f64) -> P4 {
    a.map(|x| x * t)
}

/// Geodesic distance from the closed-form inner-product relations.
pub fn dist(delta: f64, a: &P4, b: &P4) -> f64 {
    if delta == 0.0 {
        let d = add(a, b, -1.0);
        return dot(0.0, &d, &d).sqrt();
    }
    let k = delta.abs().sqrt();
    let c = delta * dot(delta, a, b);
    if delta > 0.0 {
        c.clamp(-1.0, 1.0).acos() / k
    } else {
        c.max(1.0).acosh() / k
    }
}

pub fn origin(delta: f64) -> P4 {
    if delta == 0.0 {
        [0.0; 4]
    } else {
        [0.0, 0.0, 0.0, 1.0 / delta.abs().sqrt()]
    }
}

/// `exp_o(v)` for a spatial vector `v` at the origin.
pub fn exp_origin(delta: f64, v: [f64; 3]) -> P4 {
    let t = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let o = origin(delta);
    if t == 0.0 {
        return o;
    }
    let f = s_d(delta, t) / t;
    let c = if delta == 0.0 { 0.0 } else { c_d(delta, t) };
    [v[0] * f, v[1] * f, v[2] * f, o[3] * c]
}

/// Real `Y_{3,1}` (cosine type) with the Condon-Shortley phase.
pub fn y31(z: f64, phi: f64) -> f64 {
    let norm = (7.0 / (4.0 * PI) / 12.0).sqrt();
    let p31 = -1.5 * (5.0 * z * z - 1.0) * (1.0 - z * z).sqrt();
    2f64.sqrt() * norm * phi.cos() * p31
}

/// `r(u) = rho + amp * Y_{3,1}(u)` about the origin of the model.
#[derive(Debug, Clone, Copy)]
pub struct RadialGraph {
    pub delta: f64,
    pub rho: f64,
    pub amp: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub x: P4,
    pub nu: P4,
    pub h: f64,
    /// Intrinsic curvature `delta + det B`.
    pub gauss: f64,
    /// Quadrature weight times area element.
    pub weight: f64,
}

/// Cross product in the model: orthogonal (in the model metric) to `x`,
/// `a`, `b`.
fn model_cross(delta: f64, x: &P4, a: &P4, b: &P4) -> P4 {
    if delta == 0.0 {
        return [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
            0.0,
        ];
    }
    let rows = [x, a, b];
    let mut m = [0.0; 4];
    for (k, mk) in m.iter_mut().enumerate() {
        let cols: Vec<usize> = (0..4).filter(|&c| c != k).collect();
        let d = |r: usize, c: usize| rows[r][cols[c]];
        let det3 = d(0, 0) * (d(1, 1) * d(2, 2) - d(1, 2) * d(2, 1))
            - d(0, 1) * (d(1, 0) * d(2, 2) - d(1, 2) * d(2, 0))
            + d(0, 2) * (d(1, 0) * d(2, 1) - d(1, 1) * d(2, 0));
        *mk = if (k + 3) % 2 == 0 { det3 } else { -det3 };
    }
    if delta < 0.0 {
        m[3] = -m[3];
    }
    m
}

impl RadialGraph {
    pub fn radius(&self, z: f64, phi: f64) -> f64 {
        self.rho + self.amp * y31(z, phi)
    }

    pub fn point(&self, theta: f64, phi: f64) -> P4 {
        let u = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        exp_origin(self.delta, u.map(|c| c * self.radius(theta.cos(), phi)))
    }

    /// Position, outward normal, mean curvature, Gauss curvature and area
    /// element in `(theta, phi)`.
    pub fn geometry(&self, theta: f64, phi: f64) -> (P4, P4, f64, f64, f64) {
        let e = 1e-4;
        let f = |dt: f64, dp: f64| self.point(theta + dt, phi + dp);
        let x = f(0.0, 0.0);
        let d1 = |a: &P4, b: &P4| scale(&add(a, b, -1.0), 0.5 / e);
        let ft = d1(&f(e, 0.0), &f(-e, 0.0));
        let fp = d1(&f(0.0, e), &f(0.0, -e));
        let d2 = |a: &P4, b: &P4| scale(&add(&add(a, b, 1.0), &x, -2.0), 1.0 / (e * e));
        let ftt = d2(&f(e, 0.0), &f(-e, 0.0));
        let fpp = d2(&f(0.0, e), &f(0.0, -e));
        let ftp = scale(
            &add(&add(&f(e, e), &f(-e, -e), 1.0), &add(&f(e, -e), &f(-e, e), 1.0), -1.0),
            0.25 / (e * e),
        );
        let dl = self.delta;
        let mut nu = model_cross(dl, &x, &ft, &fp);
        let n = dot(dl, &nu, &nu).sqrt();
        nu = scale(&nu, 1.0 / n);
        if dot(dl, &nu, &outward_step(self, theta, phi)) < 0.0 {
            nu = scale(&nu, -1.0);
        }
        let (ee, ff, gg) = (dot(dl, &ft, &ft), dot(dl, &ft, &fp), dot(dl, &fp, &fp));
        // second fundamental form with respect to the outward normal; a
        // sphere curves away from nu, hence the sign
        let (l, m, nn) = (-dot(dl, &ftt, &nu), -dot(dl, &ftp, &nu), -dot(dl, &fpp, &nu));
        let det = ee * gg - ff * ff;
        let h = (l * gg - 2.0 * m * ff + nn * ee) / (2.0 * det);
        let gauss = dl + (l * nn - m * m) / det;
        (x, nu, h, gauss, det.sqrt())
    }

    /// Gauss-Legendre in `cos theta` times the midpoint rule in `phi`.
    pub fn samples(&self, nz: usize, nphi: usize) -> Vec<Sample> {
        let (nodes, weights) = gauss_legendre(nz);
        let mut out = Vec::with_capacity(nz * nphi);
        for (z, wz) in nodes.iter().zip(&weights) {
            let theta = z.acos();
            for k in 0..nphi {
                let phi = 2.0 * PI * (k as f64 + 0.5) / nphi as f64;
                let (x, nu, h, gauss, da) = self.geometry(theta, phi);
                out.push(Sample {
                    x,
                    nu,
                    h,
                    gauss,
                    weight: wz * (2.0 * PI / nphi as f64) * da / theta.sin(),
                });
            }
        }
        out
    }
}

/// Small outward displacement of the point at `(z, phi)`, used to orient the
/// normal.
fn outward_step(g: &RadialGraph, theta: f64, phi: f64) -> P4 {
    let u = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    let r = g.radius(theta.cos(), phi);
    let a = exp_origin(g.delta, u.map(|c| c * (r + 1e-3)));
    add(&a, &g.point(theta, phi), -1.0)
}

/// Nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `(1/A) int f dA` and `A`.
pub fn average(samples: &[Sample], f: impl Fn(&Sample) -> f64) -> (f64, f64) {
    let area: f64 = samples.iter().map(|s| s.weight).sum();
    let total: f64 = samples.iter().map(|s| s.weight * f(s)).sum();
    (total / area, area)
}

/// `X = s(r) grad r` at `x` for the base point `p`: `delta <x,p> x - p`
/// (`x - p` in the flat case).
pub fn radial_field(delta: f64, x: &P4, p: &P4) -> P4 {
    if delta == 0.0 {
        add(x, p, -1.0)
    } else {
        add(&scale(x, delta * dot(delta, x, p)), p, -1.0)
    }
}
