use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AppError;
use crate::limits::{check_consistency, limit_report, Atom, VertexLaw, RDE_MAX_SWEEPS, RDE_TOL};

const MAX_EXPANDED_ATOMS: usize = 1_000_000;

/// Server type: storage degree `d` (number of stored contents) and upload
/// capacity `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerClass {
    pub p: f64,
    pub d: usize,
    pub w: usize,
}

/// Content type: replica degree `d`, request count `requests` and, for
/// coded storage, the number of segments needed to recover it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContentClass {
    pub p: f64,
    pub d: usize,
    pub requests: usize,
    #[serde(default = "one")]
    pub segments: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdnScenario {
    pub servers: Vec<ServerClass>,
    pub contents: Vec<ContentClass>,
    #[serde(default)]
    pub coded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdnReport {
    /// Requests (fragments when coded) absorbed per server.
    pub value: f64,
    pub low: f64,
    pub high: f64,
    pub gap: f64,
    pub sweeps: usize,
    pub converged: bool,
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

// every way of splitting d edges over the classes, with multinomial weight
fn compositions(d: usize, classes: &[(usize, f64)], cur: &mut Vec<usize>, lw: f64, out: &mut Vec<(Vec<usize>, f64)>) {
    let used: usize = cur.iter().sum();
    let (_, q) = classes[cur.len()];
    let last = cur.len() + 1 == classes.len();
    let range = if last { d - used..=d - used } else { 0..=d - used };
    for k in range {
        cur.push(k);
        let w = lw + k as f64 * q.ln() - ln_factorial(k);
        if last {
            let caps = cur.iter().zip(classes).flat_map(|(&k, &(c, _))| std::iter::repeat_n(c, k)).collect();
            out.push((caps, (w + ln_factorial(d)).exp()));
        } else {
            compositions(d, classes, cur, w, out);
        }
        cur.pop();
    }
}

/// Server and content vertex laws of the allocation problem.
///
/// Uncoded: a content absorbs at most `requests`, and edges carry a common
/// capacity that never binds. Coded: a content absorbs `requests·segments`
/// fragments and each server holding it serves at most `requests`; the
/// capacities of a server's edges are i.i.d. from the law of the content
/// end of a uniform edge.
pub fn cdn_laws(s: &CdnScenario) -> Result<(VertexLaw, VertexLaw), AppError> {
    if s.contents.iter().any(|c| c.segments == 0) {
        return Err(AppError::InvalidParams("segment counts must be positive".into()));
    }
    let (servers, contents) = if !s.coded {
        let big = s
            .servers
            .iter()
            .map(|a| a.w)
            .chain(s.contents.iter().map(|c| c.requests))
            .max()
            .unwrap_or(0)
            .max(1);
        let servers: Vec<Atom> =
            s.servers.iter().map(|a| Atom { p: a.p, d: a.d, w: a.w, caps: vec![big; a.d] }).collect();
        let contents: Vec<Atom> =
            s.contents.iter().map(|c| Atom { p: c.p, d: c.d, w: c.requests, caps: vec![big; c.d] }).collect();
        (servers, contents)
    } else {
        let contents: Vec<Atom> = s
            .contents
            .iter()
            .map(|c| Atom { p: c.p, d: c.d, w: c.requests * c.segments, caps: vec![c.requests; c.d] })
            .collect();
        let mut mass: BTreeMap<usize, f64> = BTreeMap::new();
        for c in &s.contents {
            *mass.entry(c.requests).or_insert(0.0) += c.p * c.d as f64;
        }
        let total: f64 = mass.values().sum();
        let classes: Vec<(usize, f64)> = if total > 0.0 {
            mass.into_iter().filter(|&(_, m)| m > 0.0).map(|(c, m)| (c, m / total)).collect()
        } else {
            vec![(1, 1.0)]
        };
        let mut servers = Vec::new();
        for a in &s.servers {
            let mut comps = Vec::new();
            compositions(a.d, &classes, &mut Vec::new(), 0.0, &mut comps);
            for (caps, q) in comps {
                servers.push(Atom { p: a.p * q, d: a.d, w: a.w, caps });
            }
            if servers.len() > MAX_EXPANDED_ATOMS {
                return Err(AppError::InvalidParams("too many server types after expansion".into()));
            }
        }
        (servers, contents)
    };
    let a = VertexLaw::new(servers)?;
    let b = VertexLaw::new(contents)?;
    if !check_consistency(&a, &b) {
        return Err(AppError::InconsistentLaws(format!(
            "mean server degree {} and mean content degree {} must be both zero or both positive",
            a.mean_degree(),
            b.mean_degree()
        )));
    }
    Ok((a, b))
}

/// Asymptotic load absorbed per server.
pub fn cdn_capacity(s: &CdnScenario) -> Result<CdnReport, AppError> {
    let (a, b) = cdn_laws(s)?;
    let r = limit_report(&a, &b, RDE_TOL, RDE_MAX_SWEEPS)?;
    Ok(CdnReport { value: r.value, low: r.low, high: r.high, gap: r.gap, sweeps: r.sweeps, converged: r.converged })
}
