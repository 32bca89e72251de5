//! JSON graph and law files, CSV output.

use std::collections::HashMap;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CapGraph, EdgeCap, GraphError, Side};
use crate::limits::{Atom, LawError, PoissonSpec, VertexLaw};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("law file must contain exactly one of \"atoms\" and \"poisson\"")]
    LawShape,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Law(#[from] LawError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: String,
    pub b: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    #[serde(serialize_with = "ser_cap", deserialize_with = "de_cap")]
    pub c: EdgeCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
}

fn ser_cap<S: Serializer>(c: &EdgeCap, s: S) -> Result<S::Ok, S::Error> {
    match c {
        EdgeCap::Finite(c) => s.serialize_u64(*c as u64),
        EdgeCap::Inf => s.serialize_str("inf"),
    }
}

fn de_cap<'de, D: Deserializer<'de>>(d: D) -> Result<EdgeCap, D::Error> {
    struct CapVisitor;
    impl Visitor<'_> for CapVisitor {
        type Value = EdgeCap;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a non-negative integer or \"inf\"")
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> Result<EdgeCap, E> {
            Ok(EdgeCap::Finite(v as usize))
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> Result<EdgeCap, E> {
            usize::try_from(v)
                .map(EdgeCap::Finite)
                .map_err(|_| E::invalid_value(de::Unexpected::Signed(v), &self))
        }
        fn visit_str<E: de::Error>(self, v: &str) -> Result<EdgeCap, E> {
            if v == "inf" {
                Ok(EdgeCap::Inf)
            } else {
                Err(E::invalid_value(de::Unexpected::Str(v), &self))
            }
        }
    }
    d.deserialize_any(CapVisitor)
}

impl GraphFile {
    pub fn build(&self) -> Result<CapGraph, GraphError> {
        let mut index = HashMap::with_capacity(self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            if index.insert(v.id.as_str(), i).is_some() {
                return Err(GraphError::DuplicateId(v.id.clone()));
            }
        }
        let look = |id: &str| index.get(id).copied().ok_or_else(|| GraphError::UnknownId(id.to_string()));
        let edges = self
            .edges
            .iter()
            .map(|e| Ok((look(&e.u)?, look(&e.v)?, e.c)))
            .collect::<Result<Vec<_>, GraphError>>()?;
        CapGraph::from_parts(
            self.vertices.iter().map(|v| v.id.clone()).collect(),
            self.vertices.iter().map(|v| v.b).collect(),
            self.vertices.iter().map(|v| v.side).collect(),
            edges,
        )
    }

    pub fn from_graph(g: &CapGraph) -> Self {
        let vertices = (0..g.num_vertices())
            .map(|v| VertexRecord { id: g.id(v).to_string(), b: g.b(v), side: g.side(v) })
            .collect();
        let edges = (0..g.num_edges())
            .map(|e| {
                let (u, v) = g.ends(e);
                EdgeRecord { u: g.id(u).to_string(), v: g.id(v).to_string(), c: EdgeCap::Finite(g.c(e)) }
            })
            .collect();
        GraphFile { vertices, edges }
    }
}

pub fn parse_graph(text: &str) -> Result<CapGraph, IoError> {
    let file: GraphFile = serde_json::from_str(text)?;
    Ok(file.build()?)
}

pub fn graph_to_json(g: &CapGraph) -> String {
    serde_json::to_string_pretty(&GraphFile::from_graph(g)).expect("graph serializes")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<Atom>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poisson: Option<PoissonSpec>,
}

impl LawFile {
    pub fn build(&self) -> Result<VertexLaw, IoError> {
        match (&self.atoms, &self.poisson) {
            (Some(atoms), None) => Ok(VertexLaw::new(atoms.clone())?),
            (None, Some(p)) => Ok(VertexLaw::poisson(p.rate, p.w, p.cap, p.trunc)?),
            _ => Err(IoError::LawShape),
        }
    }

    pub fn from_law(law: &VertexLaw) -> Self {
        match law.poisson_spec() {
            Some(p) => LawFile { atoms: None, poisson: Some(p) },
            None => LawFile { atoms: Some(law.atoms().to_vec()), poisson: None },
        }
    }
}

pub fn parse_law(text: &str) -> Result<VertexLaw, IoError> {
    let file: LawFile = serde_json::from_str(text)?;
    file.build()
}

pub fn law_to_json(law: &VertexLaw) -> String {
    serde_json::to_string_pretty(&LawFile::from_law(law)).expect("law serializes")
}

/// `x` with 12 significant digits, in the shortest of fixed or exponent form.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let s = format!("{:.*}", (11 - exp).max(0) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{:.11e}", x);
        let (m, e) = s.split_once('e').unwrap();
        let m = if m.contains('.') { m.trim_end_matches('0').trim_end_matches('.') } else { m };
        format!("{m}e{e}")
    }
}

/// CSV table; the header is always written, even with no rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }
}

impl fmt::Display for CsvTable {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        writeln!(f, "{}", self.header.join(","))?;
        for r in &self.rows {
            writeln!(f, "{}", r.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip() {
        let text = r#"{"vertices":[{"id":"x","b":2},{"id":"y","b":3,"side":"B"}],
                       "edges":[{"u":"x","v":"y","c":"inf"}]}"#;
        let g = parse_graph(text).unwrap();
        assert_eq!(g.c(0), 2);
        assert_eq!(g.side(1), Some(Side::B));
        let back = parse_graph(&graph_to_json(&g)).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn graph_rejections() {
        let unknown_key = r#"{"vertices":[{"id":"x","b":2,"w":1}],"edges":[]}"#;
        assert!(matches!(parse_graph(unknown_key), Err(IoError::Parse(_))));
        let bad_cap = r#"{"vertices":[{"id":"x","b":1},{"id":"y","b":1}],"edges":[{"u":"x","v":"y","c":"big"}]}"#;
        assert!(matches!(parse_graph(bad_cap), Err(IoError::Parse(_))));
        let neg = r#"{"vertices":[{"id":"x","b":1},{"id":"y","b":1}],"edges":[{"u":"x","v":"y","c":-1}]}"#;
        assert!(matches!(parse_graph(neg), Err(IoError::Parse(_))));
        let missing = r#"{"vertices":[{"id":"x","b":1}],"edges":[{"u":"x","v":"z","c":1}]}"#;
        assert!(matches!(parse_graph(missing), Err(IoError::Graph(GraphError::UnknownId(_)))));
        let dup = r#"{"vertices":[{"id":"x","b":1},{"id":"x","b":1}],"edges":[]}"#;
        assert!(matches!(parse_graph(dup), Err(IoError::Graph(GraphError::DuplicateId(_)))));
    }

    #[test]
    fn law_files() {
        let law = parse_law(r#"{"atoms":[{"p":1,"d":2,"w":1,"caps":[1,1]}]}"#).unwrap();
        assert_eq!(law, VertexLaw::point(1, vec![1, 1]));
        let poi = parse_law(r#"{"poisson":{"rate":1.5,"w":1,"cap":1,"trunc":1e-12}}"#).unwrap();
        assert_eq!(parse_law(&law_to_json(&poi)).unwrap(), poi);
        assert!(matches!(parse_law("{}"), Err(IoError::LawShape)));
        let both = r#"{"atoms":[],"poisson":{"rate":1,"w":1,"cap":1,"trunc":1e-12}}"#;
        assert!(matches!(parse_law(both), Err(IoError::LawShape)));
    }

    #[test]
    fn real_formatting() {
        assert_eq!(fmt_real(0.5), "0.5");
        assert_eq!(fmt_real(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_real(2.0), "2");
        assert_eq!(fmt_real(123456.789), "123456.789");
        assert_eq!(fmt_real(1.0e-9), "1e-9");
        assert_eq!(fmt_real(-2.5e20), "-2.5e20");
        assert_eq!(fmt_real(0.0), "0");
    }

    #[test]
    fn csv_header_always_present() {
        let t = CsvTable::new(["a", "b"]);
        assert_eq!(t.to_string(), "a,b\n");
    }
}
