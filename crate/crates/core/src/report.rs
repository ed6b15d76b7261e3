//! End-to-end analysis of one surface, parameter sweeps, and deterministic
//! report serialization.

use std::collections::BTreeMap;
use std::io;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::compare::{self, compare_to_sphere, SphereComparison};
use crate::discrete::{build_laplacian, curvature, lambda1, lq_norm, mean};
use crate::error::{domain, Result};
use crate::mesh::{gen_ellipsoid, gen_geodesic_sphere, gen_perturbed_sphere, gen_torus, ImmersedMesh};
use crate::pinching::{self, center_of_mass, extrinsic_radius, pinching_gaps, verify_bounds, BoundVerdicts, GapSummary};
use crate::spaceform::{AmbientPoint, Model, SpaceForm};
use crate::stability::{self, cmc_residual, jacobi_index_with, umbilicity_conditions, CmcResidual, StabilityReport, UmbilicityReport};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parameters of a generated test surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSpec {
    Sphere { delta: f64, rho: f64, subdiv: u32 },
    Perturbed { delta: f64, rho: f64, amplitude: f64, harmonic: (u32, i32), subdiv: u32 },
    Ellipsoid { axes: [f64; 3], subdiv: u32 },
    Torus { major: f64, minor: f64, resolution: usize },
}

impl MeshSpec {
    pub fn generate(&self) -> Result<ImmersedMesh> {
        match *self {
            MeshSpec::Sphere { delta, rho, subdiv } => {
                let s = SpaceForm::new(delta)?;
                gen_geodesic_sphere(&s, &s.origin(), rho, subdiv)
            }
            MeshSpec::Perturbed { delta, rho, amplitude, harmonic, subdiv } => {
                let s = SpaceForm::new(delta)?;
                gen_perturbed_sphere(&s, &s.origin(), rho, amplitude, harmonic, subdiv)
            }
            MeshSpec::Ellipsoid { axes, subdiv } => gen_ellipsoid(&SpaceForm::euclidean(), axes, subdiv),
            MeshSpec::Torus { major, minor, resolution } => gen_torus(&SpaceForm::euclidean(), major, minor, resolution),
        }
    }

    /// Copy with the named numeric parameter replaced.
    pub fn with_param(&self, name: &str, value: f64) -> Result<MeshSpec> {
        let mut out = self.clone();
        let as_count = |v: f64| -> Result<u32> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as u32)
            } else {
                Err(domain(format!("{name} must be a non-negative integer, got {v}")))
            }
        };
        let ok = match (&mut out, name) {
            (MeshSpec::Sphere { delta, .. } | MeshSpec::Perturbed { delta, .. }, "delta") => {
                *delta = value;
                true
            }
            (MeshSpec::Sphere { rho, .. } | MeshSpec::Perturbed { rho, .. }, "rho") => {
                *rho = value;
                true
            }
            (MeshSpec::Perturbed { amplitude, .. }, "amplitude") => {
                *amplitude = value;
                true
            }
            (
                MeshSpec::Sphere { subdiv, .. } | MeshSpec::Perturbed { subdiv, .. } | MeshSpec::Ellipsoid { subdiv, .. },
                "subdiv",
            ) => {
                *subdiv = as_count(value)?;
                true
            }
            (MeshSpec::Ellipsoid { axes, .. }, "c") => {
                axes[2] = value;
                true
            }
            (MeshSpec::Torus { major, .. }, "major") => {
                *major = value;
                true
            }
            (MeshSpec::Torus { minor, .. }, "minor") => {
                *minor = value;
                true
            }
            _ => false,
        };
        if !ok {
            return Err(domain(format!("parameter {name:?} does not apply to this family")));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Generated { spec: MeshSpec },
    File { path: String, sha256: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasePoint {
    CenterOfMass,
    Minimax,
    Coords(Vec<f64>),
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisOptions {
    pub q: f64,
    pub r: f64,
    /// `None` stands for `s = inf`.
    pub s: Option<f64>,
    /// Lower curvature bound; `None` uses `delta`.
    pub mu: Option<f64>,
    pub base_point: BasePoint,
    pub samples: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            q: 4.0,
            r: 4.0,
            s: None,
            mu: None,
            base_point: BasePoint::CenterOfMass,
            samples: compare::DEFAULT_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeshSummary {
    pub delta: f64,
    pub model: Model,
    pub vertices: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    pub area: f64,
    pub mean_edge_length: f64,
    pub max_edge_length: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureSummary {
    pub h_mean: f64,
    pub h_sup: f64,
    pub h_q: f64,
    pub b_q: f64,
    pub tau_r: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Hypotheses {
    /// Largest distance from the base point to a vertex.
    pub reach: f64,
    /// `pi / (4 sqrt delta)` for `delta > 0`, `None` (infinite) otherwise.
    pub convexity_radius: Option<f64>,
    pub inside_convexity_ball: bool,
    pub h_squared_positive: bool,
    /// `V^{1/n} |H|_inf`.
    pub area_scaled_h_sup: f64,
    /// `V^{1/n} |B|_q`.
    pub area_scaled_b_q: f64,
    pub ball_hypothesis: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PinchingReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub provenance: Provenance,
    pub options: AnalysisOptions,
    pub mesh: MeshSummary,
    pub base_point: AmbientPoint,
    pub gaps: GapSummary,
    pub curvature: CurvatureSummary,
    pub verdicts: BoundVerdicts,
    pub comparison: SphereComparison,
    pub stability: StabilityReport,
    pub cmc: CmcResidual,
    pub umbilicity: UmbilicityReport,
    /// `lambda_1 / (n k)` with `k = |H|_s^2 + delta`, reported next to
    /// `rho_r`; the constant of the lower bound is not known.
    pub eigen_ratio: f64,
    pub hypotheses: Hypotheses,
    pub tolerances: BTreeMap<String, f64>,
}

impl PinchingReport {
    /// All asserted checks passed.
    pub fn all_pass(&self) -> bool {
        self.verdicts.all_pass() && self.comparison.sandwich.pass
    }
}

pub fn tolerances() -> BTreeMap<String, f64> {
    [
        ("bound", pinching::BOUND_TOL),
        ("psi_chain", pinching::PSI_CHAIN_TOL),
        ("divergence_integral", pinching::DIV_TOL),
        ("global_inequalities", pinching::GLOBAL_TOL),
        ("inertia_from_eigen_gap", pinching::PROP_TOL),
        ("sandwich", compare::SANDWICH_TOL),
        ("stable", stability::STABLE_TOL),
        ("cmc", stability::CMC_TOL),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Runs the full pipeline on one mesh.
pub fn analyze(mesh: &ImmersedMesh, provenance: Provenance, opts: &AnalysisOptions) -> Result<PinchingReport> {
    let space = *mesh.space();
    let delta = space.delta();
    let s_exp = opts.s.unwrap_or(f64::INFINITY);
    let mu = opts.mu.unwrap_or(delta);

    let spectral = build_laplacian(mesh)?;
    let l1 = lambda1(&spectral)?.value;
    let curv = curvature(mesh)?;
    let p = match &opts.base_point {
        BasePoint::CenterOfMass => center_of_mass(mesh)?,
        BasePoint::Minimax => extrinsic_radius(mesh)?.center,
        BasePoint::Coords(c) => space.point_from_slice(c)?,
    };
    let inv = pinching_gaps(mesh, &p, l1, &curv)?;
    let verdicts = verify_bounds(mesh, &inv, &curv)?;
    let comparison = compare_to_sphere(mesh, &p, inv.rho_star, mu, opts.samples)?;
    let stability = jacobi_index_with(mesh, &spectral, &curv, l1)?;
    let cmc = cmc_residual(mesh, &curv)?;
    let umbilicity = umbilicity_conditions(mesh, &curv, opts.r, s_exp)?;

    let b_q = lq_norm(&curv.b_norm, opts.q, mesh)?;
    let curvature = CurvatureSummary {
        h_mean: mean(&curv.h, mesh)?,
        h_sup: inv.h_sup,
        h_q: lq_norm(&curv.h, opts.q, mesh)?,
        b_q,
        tau_r: lq_norm(&curv.tau_norm, opts.r, mesh)?,
    };
    let reach = mesh.max_distance_from(&p);
    let conv = space.convexity_radius();
    let root_area = mesh.area().powf(1.0 / pinching::N);
    let hypotheses = Hypotheses {
        reach,
        convexity_radius: conv.is_finite().then_some(conv),
        inside_convexity_ball: reach < conv,
        h_squared_positive: inv.h * inv.h > 0.0,
        area_scaled_h_sup: root_area * inv.h_sup,
        area_scaled_b_q: root_area * b_q,
        ball_hypothesis: comparison.ball_hypothesis.clone(),
    };
    Ok(PinchingReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        provenance,
        options: opts.clone(),
        mesh: MeshSummary {
            delta,
            model: space.model(),
            vertices: mesh.num_vertices(),
            faces: mesh.faces().len(),
            euler_characteristic: mesh.euler_characteristic(),
            area: mesh.area(),
            mean_edge_length: mesh.mean_edge_length(),
            max_edge_length: mesh.max_edge_length(),
        },
        base_point: p,
        gaps: inv.summary(),
        curvature,
        verdicts,
        comparison,
        stability,
        cmc,
        eigen_ratio: l1 / (pinching::N * umbilicity.k),
        umbilicity,
        hypotheses,
        tolerances: tolerances(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PinchingReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Analyzes `base` with `parameter` set to each of `values`. Rows keep the
/// order of `values`; a failing row records its error and the sweep goes on.
pub fn sweep(base: &MeshSpec, parameter: &str, values: &[f64], opts: &AnalysisOptions) -> Result<Vec<SweepRow>> {
    if values.len() < 3 {
        return Err(domain(format!("need ≥ 3 parameter values, got {}", values.len())));
    }
    let run = |v: f64| -> Result<PinchingReport> {
        let spec = base.with_param(parameter, v)?;
        let mesh = spec.generate()?;
        analyze(&mesh, Provenance::Generated { spec }, opts)
    };
    let slots: Vec<Mutex<Option<SweepRow>>> = values.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(values.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= values.len() {
                    break;
                }
                let (report, error) = match run(values[i]) {
                    Ok(r) => (Some(r), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                *slots[i].lock().expect("unpoisoned") = Some(SweepRow {
                    parameter: parameter.to_string(),
                    value: values[i],
                    report,
                    error,
                });
            });
        }
    });
    Ok(slots
        .into_iter()
        .map(|s| s.into_inner().expect("unpoisoned").expect("every row ran"))
        .collect())
}

/// Pretty JSON with every float written with 17 significant digits.
struct SeventeenDigits(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits(serde_json::ser::PrettyFormatter::new()));
    value.serialize(&mut ser).expect("reports serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// Flattens a JSON tree into dotted keys; arrays use the element index.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(map) => map.iter().for_each(|(k, x)| walk(&key(k), x, out)),
            Value::Array(items) => items.iter().enumerate().for_each(|(i, x)| walk(&key(&i.to_string()), x, out)),
            Value::Null => out.push((prefix.to_string(), String::new())),
            Value::String(s) => out.push((prefix.to_string(), s.clone())),
            Value::Number(n) => out.push((
                prefix.to_string(),
                n.as_f64().filter(|_| n.is_f64()).map_or_else(|| n.to_string(), |x| format!("{x:.16e}")),
            )),
            Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        }
    }
    let mut out = Vec::new();
    walk("", value, &mut out);
    out
}
