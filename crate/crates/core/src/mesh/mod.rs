//! Closed oriented triangle meshes immersed in a space form.

mod generate;
mod io;

pub use generate::{
    gen_ellipsoid, gen_geodesic_sphere, gen_perturbed_sphere, gen_torus, icosphere,
    real_spherical_harmonic, MAX_SUBDIV,
};
pub use io::{load_mesh, parse_mesh_json, parse_off, save_mesh, to_mesh_json};

use std::collections::BTreeMap;
use std::ops::Deref;

use crate::error::{degenerate, Error, Result};
use crate::spaceform::{AmbientPoint, Isometry, SpaceForm, TangentVec, Vec4};

/// Relative length under which an edge counts as collapsed.
const MIN_EDGE_RATIO: f64 = 1e-8;

/// A validated closed, connected, consistently oriented triangle mesh.
///
/// Geodesic edge lengths, face and vertex areas and unit vertex normals are
/// computed once at construction.
#[derive(Debug, Clone)]
pub struct ImmersedMesh {
    space: SpaceForm,
    vertices: Vec<AmbientPoint>,
    faces: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    edge_lengths: Vec<f64>,
    /// Per face, the length of the edge opposite each corner.
    face_lengths: Vec<[f64; 3]>,
    face_areas: Vec<f64>,
    vertex_areas: Vec<f64>,
    normals: Vec<Vec4>,
    neighbors: Vec<Vec<usize>>,
    vertex_faces: Vec<Vec<usize>>,
    area: f64,
}

/// Per-vertex real values.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField(Vec<f64>);

/// Per-vertex tangent vectors, each based at its vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField(Vec<Vec4>);

impl ScalarField {
    pub fn new(mesh: &ImmersedMesh, values: Vec<f64>) -> Result<Self> {
        check_len(mesh, values.len())?;
        Ok(Self(values))
    }

    pub(crate) fn from_vec(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl VectorField {
    pub fn new(mesh: &ImmersedMesh, values: Vec<Vec4>) -> Result<Self> {
        check_len(mesh, values.len())?;
        Ok(Self(values))
    }

    /// Pointwise model norm.
    pub fn norms(&self, space: &SpaceForm) -> ScalarField {
        ScalarField(self.0.iter().map(|v| space.norm(v)).collect())
    }

    pub fn at(&self, mesh: &ImmersedMesh, i: usize) -> TangentVec {
        TangentVec {
            base: mesh.vertices[i],
            vec: self.0[i],
        }
    }
}

impl Deref for ScalarField {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for VectorField {
    type Target = [Vec4];
    fn deref(&self) -> &[Vec4] {
        &self.0
    }
}

fn check_len(mesh: &ImmersedMesh, found: usize) -> Result<()> {
    if found != mesh.num_vertices() {
        return Err(Error::FieldMismatch {
            expected: mesh.num_vertices(),
            found,
        });
    }
    Ok(())
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidMesh(msg.into())
}

/// Area of a triangle with the given side lengths (Kahan's stable Heron).
pub fn heron_area(a: f64, b: f64, c: f64) -> f64 {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if prod <= 0.0 {
        0.0
    } else {
        0.25 * prod.sqrt()
    }
}

impl ImmersedMesh {
    /// Validates the combinatorics and geometry and caches the measures.
    pub fn new(space: SpaceForm, vertices: Vec<AmbientPoint>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        if faces.is_empty() {
            return Err(invalid("mesh has no faces"));
        }
        for (f, face) in faces.iter().enumerate() {
            if let Some(&bad) = face.iter().find(|&&v| v >= n) {
                return Err(invalid(format!(
                    "face {f} references vertex {bad} but there are only {n} vertices"
                )));
            }
            if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                return Err(invalid(format!("face {f} repeats a vertex: {face:?}")));
            }
        }

        // undirected edge -> (face, traversed low-to-high)
        let mut edge_faces: BTreeMap<[usize; 2], Vec<(usize, bool)>> = BTreeMap::new();
        for (f, face) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (face[k], face[(k + 1) % 3]);
                let key = [a.min(b), a.max(b)];
                edge_faces.entry(key).or_default().push((f, a < b));
            }
        }
        for (&[i, j], inc) in &edge_faces {
            match inc.len() {
                2 => {
                    if inc[0].1 == inc[1].1 {
                        return Err(invalid(format!(
                            "inconsistent orientation: faces {} and {} traverse edge ({i},{j}) in the same direction (flipped face)",
                            inc[0].0, inc[1].0
                        )));
                    }
                }
                1 => return Err(invalid(format!("non-closed: edge ({i},{j}) has 1 face"))),
                k => {
                    return Err(invalid(format!("non-manifold: edge ({i},{j}) has {k} faces")))
                }
            }
        }

        let mut vertex_faces = vec![Vec::new(); n];
        for (f, face) in faces.iter().enumerate() {
            for &v in face {
                vertex_faces[v].push(f);
            }
        }
        if let Some(v) = vertex_faces.iter().position(|fs| fs.is_empty()) {
            return Err(invalid(format!("isolated vertex {v} belongs to no face")));
        }
        for (v, fs) in vertex_faces.iter().enumerate() {
            if !single_fan(v, fs, &faces) {
                return Err(invalid(format!(
                    "non-manifold vertex {v}: incident faces do not form a single fan"
                )));
            }
        }
        let components = count_components(n, &faces);
        if components != 1 {
            return Err(invalid(format!("disconnected: mesh has {components} components")));
        }

        let edges: Vec<[usize; 2]> = edge_faces.keys().copied().collect();
        let mut neighbors = vec![Vec::new(); n];
        for &[i, j] in &edges {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
        }

        let edge_lengths: Vec<f64> = edges
            .iter()
            .map(|&[i, j]| space.dist(&vertices[i], &vertices[j]))
            .collect();
        let mean = edge_lengths.iter().sum::<f64>() / edge_lengths.len() as f64;
        if let Some((e, &l)) = edge_lengths
            .iter()
            .enumerate()
            .find(|(_, &l)| !(l > MIN_EDGE_RATIO * mean))
        {
            let [i, j] = edges[e];
            return Err(invalid(format!(
                "degenerate: edge ({i},{j}) has length {l:e} (mean edge {mean:e})"
            )));
        }

        let mut face_lengths = Vec::with_capacity(faces.len());
        let mut face_areas = Vec::with_capacity(faces.len());
        for (f, &[a, b, c]) in faces.iter().enumerate() {
            let la = space.dist(&vertices[b], &vertices[c]);
            let lb = space.dist(&vertices[c], &vertices[a]);
            let lc = space.dist(&vertices[a], &vertices[b]);
            let area = heron_area(la, lb, lc);
            if !(area > 0.0) {
                return Err(invalid(format!("degenerate: face {f} has zero area")));
            }
            face_lengths.push([la, lb, lc]);
            face_areas.push(area);
        }
        let mut vertex_areas = vec![0.0; n];
        for (face, &area) in faces.iter().zip(&face_areas) {
            for &v in face {
                vertex_areas[v] += area / 3.0;
            }
        }
        let area = kahan_sum(face_areas.iter().copied());

        let mut mesh = Self {
            space,
            vertices,
            faces,
            edges,
            edge_lengths,
            face_lengths,
            face_areas,
            vertex_areas,
            normals: Vec::new(),
            neighbors,
            vertex_faces,
            area,
        };
        mesh.normals = mesh.compute_normals()?;
        Ok(mesh)
    }

    fn compute_normals(&self) -> Result<Vec<Vec4>> {
        let space = &self.space;
        let mut out = Vec::with_capacity(self.vertices.len());
        for (i, fs) in self.vertex_faces.iter().enumerate() {
            let x = self.vertices[i].coords();
            let mut sum = Vec4::zeros();
            for &f in fs {
                let face = self.faces[f];
                let k = face.iter().position(|&v| v == i).expect("incident face");
                let (j, l) = (face[(k + 1) % 3], face[(k + 2) % 3]);
                // ambient chords with Max's weights: exact for vertices on a
                // geodesic sphere, which is a round sphere in a hyperplane section
                let a = self.vertices[j].coords() - x;
                let b = self.vertices[l].coords() - x;
                let w = space.inner(&a, &a) * space.inner(&b, &b);
                sum += space.cross_in_tangent(x, &a, &b) / w;
            }
            let sum = space.project_tangent(x, &sum);
            let len = space.norm(&sum);
            if !(len > 0.0) {
                return Err(degenerate(format!("vertex {i} has a vanishing normal")));
            }
            out.push(sum / len);
        }
        Ok(out)
    }

    pub fn space(&self) -> &SpaceForm {
        &self.space
    }

    pub fn vertices(&self) -> &[AmbientPoint] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Vec4 {
        self.vertices[i].coords()
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Undirected edges `[i, j]` with `i < j`, sorted.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    /// Per face, geodesic length of the edge opposite each corner.
    pub fn face_lengths(&self) -> &[[f64; 3]] {
        &self.face_lengths
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    /// Lumped (barycentric) vertex areas.
    pub fn vertex_areas(&self) -> &[f64] {
        &self.vertex_areas
    }

    /// Unit outward vertex normals, tangent to the model at each vertex.
    pub fn normals(&self) -> &[Vec4] {
        &self.normals
    }

    /// Sorted one-ring neighbors.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn vertex_faces(&self, i: usize) -> &[usize] {
        &self.vertex_faces[i]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Total area `V(M)`.
    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn mean_edge_length(&self) -> f64 {
        self.edge_lengths.iter().sum::<f64>() / self.edge_lengths.len() as f64
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edge_lengths.iter().fold(0.0, |m, &l| m.max(l))
    }

    /// Vertices within graph distance two of `i`, excluding `i`, sorted.
    pub fn two_ring(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.neighbors[i]
            .iter()
            .flat_map(|&j| self.neighbors[j].iter().copied())
            .chain(self.neighbors[i].iter().copied())
            .filter(|&j| j != i)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Applies a model isometry to every vertex.
    pub fn transformed(&self, iso: &Isometry) -> Result<Self> {
        let vertices = self.vertices.iter().map(|p| iso.apply(&self.space, p)).collect();
        Self::new(self.space, vertices, self.faces.clone())
    }

    /// Same vertices with every face reversed.
    pub fn reversed(&self) -> Result<Self> {
        let faces = self.faces.iter().map(|&[a, b, c]| [a, c, b]).collect();
        Self::new(self.space, self.vertices.clone(), faces)
    }

    /// Same connectivity on new vertex positions.
    pub fn with_vertices(&self, vertices: Vec<AmbientPoint>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::FieldMismatch {
                expected: self.vertices.len(),
                found: vertices.len(),
            });
        }
        Self::new(self.space, vertices, self.faces.clone())
    }

    /// Largest geodesic distance from `center` to a vertex.
    pub fn max_distance_from(&self, center: &AmbientPoint) -> f64 {
        self.vertices
            .iter()
            .map(|v| self.space.dist(center, v))
            .fold(0.0, f64::max)
    }
}

/// Checks that the faces around `v` close up into one cycle.
fn single_fan(v: usize, fs: &[usize], faces: &[[usize; 3]]) -> bool {
    let mut next: BTreeMap<usize, usize> = BTreeMap::new();
    for &f in fs {
        let face = faces[f];
        let k = face.iter().position(|&x| x == v).expect("incident face");
        if next.insert(face[(k + 1) % 3], face[(k + 2) % 3]).is_some() {
            return false;
        }
    }
    let start = *next.keys().next().expect("non-empty fan");
    let mut cur = start;
    for step in 1..=fs.len() {
        match next.get(&cur) {
            Some(&nx) => cur = nx,
            None => return false,
        }
        if cur == start {
            return step == fs.len();
        }
    }
    false
}

fn count_components(n: usize, faces: &[[usize; 3]]) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for face in faces {
        for k in 1..3 {
            let (a, b) = (find(&mut parent, face[0]), find(&mut parent, face[k]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    (0..n).filter(|&x| find(&mut parent, x) == x).count()
}

/// Compensated summation.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}
