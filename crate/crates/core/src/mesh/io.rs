//! Mesh JSON (all models) and OFF import (Euclidean only).

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::ImmersedMesh;
use crate::error::{Error, Result};
use crate::spaceform::SpaceForm;

/// Largest tolerated off-model residual for loaded vertices.
const LOAD_RESIDUAL: f64 = 1e-8;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceSpec {
    delta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshFile {
    space: SpaceSpec,
    vertices: Vec<Vec<f64>>,
    faces: Vec<[usize; 3]>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses mesh JSON and validates the result.
pub fn parse_mesh_json(text: &str) -> Result<ImmersedMesh> {
    let file: MeshFile =
        serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    let space = SpaceForm::new(file.space.delta)?;
    let mut vertices = Vec::with_capacity(file.vertices.len());
    for (i, c) in file.vertices.iter().enumerate() {
        let p = space.point_from_slice(c).map_err(|e| {
            Error::InvalidMesh(format!("vertex {i}: {e}"))
        })?;
        let residual = space.constraint_residual(&nalgebra::Vector4::new(
            c[0],
            c[1],
            c[2],
            c.get(3).copied().unwrap_or(0.0),
        ));
        if residual > LOAD_RESIDUAL {
            return Err(Error::InvalidMesh(format!(
                "vertex {i} is off the model (residual {residual:.3e})"
            )));
        }
        vertices.push(p);
    }
    ImmersedMesh::new(space, vertices, file.faces)
}

/// Serializes a mesh as JSON, one vertex or face per line. Coordinates use
/// the shortest decimal form that reads back to the same `f64`.
pub fn to_mesh_json(mesh: &ImmersedMesh) -> String {
    let space = mesh.space();
    let mut out = String::new();
    let num = |x: f64| serde_json::to_string(&x).expect("finite coordinates");
    writeln!(out, "{{\"space\": {{\"delta\": {}}},", num(space.delta())).unwrap();
    out.push_str("\"vertices\": [\n");
    let nv = mesh.num_vertices();
    for (i, p) in mesh.vertices().iter().enumerate() {
        let coords: Vec<String> = space.point_to_vec(p).into_iter().map(num).collect();
        let sep = if i + 1 < nv { "," } else { "" };
        writeln!(out, "  [{}]{sep}", coords.join(", ")).unwrap();
    }
    out.push_str("],\n\"faces\": [\n");
    let nf = mesh.faces().len();
    for (f, [a, b, c]) in mesh.faces().iter().enumerate() {
        let sep = if f + 1 < nf { "," } else { "" };
        writeln!(out, "  [{a}, {b}, {c}]{sep}").unwrap();
    }
    out.push_str("]}\n");
    out
}

/// Parses an OFF file into a Euclidean mesh, fan-triangulating polygons.
pub fn parse_off(text: &str) -> Result<ImmersedMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line, header) = lines.next().ok_or_else(|| parse_err(1, "empty OFF file"))?;
    let mut header_tokens = header.split_whitespace();
    if header_tokens.next() != Some("OFF") {
        return Err(parse_err(line, "missing OFF header"));
    }
    let rest: Vec<&str> = header_tokens.collect();
    let (line, counts) = if rest.is_empty() {
        let (l, c) = lines.next().ok_or_else(|| parse_err(line, "missing counts line"))?;
        (l, c.split_whitespace().collect::<Vec<_>>())
    } else {
        (line, rest)
    };
    let parse_usize = |s: &str, line: usize| {
        s.parse::<usize>()
            .map_err(|_| parse_err(line, format!("expected a non-negative integer, got '{s}'")))
    };
    if counts.len() < 2 {
        return Err(parse_err(line, "counts line needs vertex and face counts"));
    }
    let nv = parse_usize(counts[0], line)?;
    let nf = parse_usize(counts[1], line)?;

    let space = SpaceForm::euclidean();
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, l) = lines
            .next()
            .ok_or_else(|| parse_err(text.lines().count(), "unexpected end of file in vertex list"))?;
        let c: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| parse_err(line, format!("bad coordinate '{t}'"))))
            .collect::<Result<_>>()?;
        if c.len() < 3 {
            return Err(parse_err(line, "vertex needs 3 coordinates"));
        }
        vertices.push(space.point_from_slice(&c[..3])?);
    }
    let mut faces = Vec::with_capacity(2 * nf);
    for _ in 0..nf {
        let (line, l) = lines
            .next()
            .ok_or_else(|| parse_err(text.lines().count(), "unexpected end of file in face list"))?;
        let tokens: Vec<&str> = l.split_whitespace().collect();
        let k = parse_usize(tokens.first().copied().unwrap_or(""), line)?;
        if k < 3 || tokens.len() < k + 1 {
            return Err(parse_err(line, format!("face needs at least 3 and exactly {k} indices")));
        }
        let idx: Vec<usize> = tokens[1..=k]
            .iter()
            .map(|t| parse_usize(t, line))
            .collect::<Result<_>>()?;
        for j in 1..k - 1 {
            faces.push([idx[0], idx[j], idx[j + 1]]);
        }
    }
    ImmersedMesh::new(space, vertices, faces)
}

/// Loads a mesh, choosing OFF or JSON by file extension.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<ImmersedMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let is_off = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("off"));
    if is_off {
        parse_off(&text)
    } else {
        parse_mesh_json(&text)
    }
}

pub fn save_mesh(mesh: &ImmersedMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_mesh_json(mesh))?;
    Ok(())
}
