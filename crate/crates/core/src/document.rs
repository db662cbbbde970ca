//! Line-oriented text format for structures, and DOT export.
//!
//! ```text
//! sstructure 1
//! arity 3
//! name two-triples
//! vertices 1 2 3 4
//! edge 1 2 3
//! edge 1 2 4
//! ```
//!
//! `name`, `seed` and `class` are optional. Blank lines and lines starting
//! with `#` are ignored when parsing. Serialization is canonical: sorted
//! vertices, sorted edges, fixed line order.

use std::fmt::Write;

use crate::classes::ClassId;
use crate::error::{Error, Result};
use crate::structure::SStructure;
use crate::vset::{VSet, Vertex, VERTEX_LIMIT};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureDocument {
    pub structure: SStructure,
    pub name: Option<String>,
    pub seed: Option<u64>,
    pub class: Option<ClassId>,
}

impl StructureDocument {
    pub fn new(structure: SStructure) -> Self {
        StructureDocument {
            structure,
            name: None,
            seed: None,
            class: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header = false;
        let mut arity: Option<usize> = None;
        let mut vertices: Option<Vec<Vertex>> = None;
        let mut edges: Vec<(usize, Vec<Vertex>)> = Vec::new();
        let mut doc_name = None;
        let mut seed = None;
        let mut class = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let mut words = t.split_whitespace();
            let key = words.next().expect("nonempty line");
            let rest: Vec<&str> = words.collect();
            let perr = |message: String| Error::Parse { line, message };
            if !header {
                if key != "sstructure" {
                    return Err(perr(format!("expected `sstructure {FORMAT_VERSION}`, found `{key}`")));
                }
                if rest != [FORMAT_VERSION.to_string()] {
                    return Err(perr(format!("unsupported format version `{}`", rest.join(" "))));
                }
                header = true;
                continue;
            }
            let single = |what: &str| -> Result<&str> {
                match rest.as_slice() {
                    [v] => Ok(*v),
                    _ => Err(perr(format!("`{what}` takes exactly one value"))),
                }
            };
            match key {
                "arity" => {
                    if arity.is_some() {
                        return Err(perr("duplicate `arity`".into()));
                    }
                    let v = single("arity")?;
                    arity = Some(v.parse().map_err(|_| perr(format!("bad arity `{v}`")))?);
                }
                "name" => {
                    if rest.is_empty() {
                        return Err(perr("`name` needs a value".into()));
                    }
                    doc_name = Some(rest.join(" "));
                }
                "seed" => {
                    let v = single("seed")?;
                    seed = Some(v.parse().map_err(|_| perr(format!("bad seed `{v}`")))?);
                }
                "class" => {
                    let v = single("class")?;
                    class = Some(v.parse::<ClassId>().map_err(|_| perr(format!("unknown class `{v}`")))?);
                }
                "vertices" => {
                    if vertices.is_some() {
                        return Err(perr("duplicate `vertices`".into()));
                    }
                    vertices = Some(parse_vertices(&rest).map_err(perr)?);
                }
                "edge" => edges.push((line, parse_vertices(&rest).map_err(perr)?)),
                other => return Err(perr(format!("unknown keyword `{other}`"))),
            }
        }
        if !header {
            return Err(Error::Parse {
                line: 1,
                message: format!("missing `sstructure {FORMAT_VERSION}` header"),
            });
        }
        let arity = arity.ok_or_else(|| Error::Parse {
            line: text.lines().count().max(1),
            message: "missing `arity`".into(),
        })?;
        if arity < 2 {
            return Err(Error::Validation(format!("arity must be at least 2, got {arity}")));
        }
        let universe: VSet = match &vertices {
            Some(vs) => {
                let u: VSet = vs.iter().collect();
                if u.len() != vs.len() {
                    return Err(Error::Validation("a vertex is listed twice".into()));
                }
                u
            }
            None => edges.iter().flat_map(|(_, e)| e.iter()).collect(),
        };
        let mut sets = Vec::with_capacity(edges.len());
        for (line, e) in &edges {
            let s: VSet = e.iter().collect();
            if s.len() != e.len() {
                return Err(Error::Validation(format!("line {line}: edge repeats a vertex")));
            }
            if e.len() != arity {
                return Err(Error::Validation(format!(
                    "line {line}: edge has {} vertices but the arity is {arity}",
                    e.len()
                )));
            }
            if !s.is_subset(universe) {
                return Err(Error::Validation(format!(
                    "line {line}: edge uses vertices {} outside the vertex list",
                    s.difference(universe)
                )));
            }
            sets.push(s);
        }
        let structure = SStructure::new(arity, universe, sets).map_err(|e| Error::Validation(e.to_string()))?;
        Ok(StructureDocument {
            structure,
            name: doc_name,
            seed,
            class,
        })
    }

    pub fn to_text(&self) -> String {
        let a = &self.structure;
        let mut out = format!("sstructure {FORMAT_VERSION}\narity {}\n", a.arity());
        if let Some(n) = &self.name {
            writeln!(out, "name {n}").unwrap();
        }
        if let Some(s) = self.seed {
            writeln!(out, "seed {s}").unwrap();
        }
        if let Some(c) = self.class {
            writeln!(out, "class {c}").unwrap();
        }
        out.push_str("vertices");
        for v in a.universe() {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
        for e in a.edges() {
            out.push_str("edge");
            for v in *e {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn parse_vertices(words: &[&str]) -> std::result::Result<Vec<Vertex>, String> {
    words
        .iter()
        .map(|w| match w.parse::<u32>() {
            Ok(v) if v < VERTEX_LIMIT as u32 => Ok(v as Vertex),
            Ok(v) => Err(format!("vertex {v} is out of range (must be below {VERTEX_LIMIT})")),
            Err(_) => Err(format!("bad vertex `{w}`")),
        })
        .collect()
}

pub fn parse_structure(text: &str) -> Result<SStructure> {
    Ok(StructureDocument::parse(text)?.structure)
}

pub fn serialize_structure(a: &SStructure) -> String {
    StructureDocument::new(a.clone()).to_text()
}

/// The clique hypergraph as a bipartite incidence graph: one node per vertex,
/// one node per maximal clique, and an edge for each membership.
pub fn to_dot(a: &SStructure, name: &str) -> String {
    let mut out = format!("graph \"{}\" {{\n", name.replace('"', "'"));
    for v in a.universe() {
        writeln!(out, "  v{v} [shape=circle, label=\"{v}\"];").unwrap();
    }
    for (i, k) in a.maximal_cliques().iter().enumerate() {
        writeln!(out, "  k{i} [shape=box, label=\"{k}\"];").unwrap();
        for v in *k {
            writeln!(out, "  k{i} -- v{v};").unwrap();
        }
    }
    out.push_str("}\n");
    out
}
