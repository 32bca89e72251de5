use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use capalloc::apps::{
    cdn_capacity, cdn_laws, cuckoo_limit, cuckoo_lln_trial, cuckoo_threshold, law_lln_trial, orientable_fraction,
    CdnScenario, CuckooParams,
};
use capalloc::bp::{bp_finite_lambda, bp_zero_temperature, default_max_sweeps, f_v, occupancies};
use capalloc::gen::{sample_bipartite_config, sample_hypergraph, sample_hypergraph_binomial, Seed};
use capalloc::graph::{max_allocation_enum, max_allocation_flow, validate, CapGraph};
use capalloc::io::{fmt_real, graph_to_json, parse_graph, parse_law, CsvTable};
use capalloc::limits::{limit_report, VertexLaw, RDE_MAX_SWEEPS, RDE_TOL};

use crate::{CdnArgs, Command, GenModel, LlnArgs, Method, SolveArgs, ThresholdArgs};

pub struct Outcome {
    pub text: String,
    /// False when an agreement check failed.
    pub ok: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, ok: true }
    }
}

pub fn run(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Solve(a) => solve(a),
        Command::Threshold(a) => threshold(a),
        Command::Cdn(a) => cdn(a),
        Command::Lln(a) => lln(a),
        Command::Gen(a) => gen(&a.model),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_graph(path: &Path) -> Result<CapGraph> {
    parse_graph(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_law(path: &Path) -> Result<VertexLaw> {
    parse_law(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_scenario(path: &Path) -> Result<CdnScenario> {
    serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn solve(a: &SolveArgs) -> Result<Outcome> {
    let g = load_graph(&a.graph)?;
    let mut out = String::new();
    let mut ok = true;
    writeln!(out, "method={}", serde_json::to_value(a.method)?.as_str().unwrap())?;
    // twice the size, for methods that return an integer
    let mut per_vertex: Option<(&str, Vec<f64>)> = None;
    let exact = match a.method {
        Method::Flow => {
            let (m, alloc) = max_allocation_flow(&g);
            debug_assert!(validate(&g, &alloc)?);
            writeln!(out, "M={m}\nwitness=true")?;
            Some(2 * m)
        }
        Method::Enum => {
            let m = max_allocation_enum(&g)?;
            writeln!(out, "M={m}\nwitness=false")?;
            Some(2 * m)
        }
        Method::Bp0 => {
            let z = bp_zero_temperature(&g);
            writeln!(out, "M={}\nwitness=false\nsweeps={}", fmt_real(z.size_estimate()), z.sweeps)?;
            per_vertex = Some(("F", (0..g.num_vertices()).map(|v| f_v(&g, v, &z.alpha) as f64).collect()));
            Some(z.estimate)
        }
        Method::Bp => {
            let cap = a.max_sweeps.unwrap_or_else(|| default_max_sweeps(&g));
            let (msgs, sweeps) = bp_finite_lambda(&g, a.lambda, a.tol, cap)?;
            let d = occupancies(&g, &msgs);
            let mean = 0.5 * d.iter().sum::<f64>();
            writeln!(out, "M={}\nwitness=false\nsweeps={sweeps}", fmt_real(mean))?;
            per_vertex = Some(("D", d));
            None
        }
    };
    if a.check {
        let (flow, _) = max_allocation_flow(&g);
        let agree = exact.is_some_and(|twice| twice == 2 * flow);
        writeln!(out, "flow={flow}\nagree={agree}")?;
        if exact.is_none() {
            writeln!(out, "note=bp at finite lambda estimates the Gibbs mean, not M")?;
        } else {
            ok = agree;
        }
    }
    if let Some((name, vals)) = per_vertex {
        let mut t = CsvTable::new(["vertex", name]);
        for (v, x) in vals.iter().enumerate() {
            t.push(vec![g.id(v).to_string(), fmt_real(*x)]);
        }
        write!(out, "{t}")?;
    }
    Ok(Outcome { text: out, ok })
}

fn threshold(a: &ThresholdArgs) -> Result<Outcome> {
    let p = CuckooParams::new(a.h, a.k, a.l, a.r)?;
    let start = Instant::now();
    let rep = cuckoo_threshold(&p, a.tol)?;
    let mut header = vec!["h", "k", "l", "r", "tau_star", "tol", "lo", "hi", "probes", "converged", "strict"];
    let mut row = vec![
        p.h.to_string(),
        p.k.to_string(),
        p.l.to_string(),
        p.r.to_string(),
        fmt_real(rep.tau),
        fmt_real(a.tol),
        fmt_real(rep.lo),
        fmt_real(rep.hi),
        rep.probes.to_string(),
        rep.converged.to_string(),
        p.strict().to_string(),
    ];
    if let Some(sim) = &a.simulate {
        let (n, trials) = (sim[0], sim[1]);
        let (tl, th) = (0.95 * rep.tau, 1.05 * rep.tau);
        let fl = orientable_fraction(&p, n, tl, trials, a.seed)?;
        let fh = orientable_fraction(&p, n, th, trials, a.seed.wrapping_add(1))?;
        header.extend(["n", "trials", "tau_low", "fraction_low", "tau_high", "fraction_high"]);
        row.extend([n.to_string(), trials.to_string(), fmt_real(tl), fmt_real(fl), fmt_real(th), fmt_real(fh)]);
    }
    header.push("runtime_s");
    row.push(fmt_real(start.elapsed().as_secs_f64()));
    let mut t = CsvTable::new(header);
    t.push(row);
    Ok(Outcome::ok(t.to_string()))
}

fn cdn(a: &CdnArgs) -> Result<Outcome> {
    let s = load_scenario(&a.scenario)?;
    let start = Instant::now();
    let rep = cdn_capacity(&s)?;
    let mut t = CsvTable::new(["coded", "capacity", "low", "high", "gap", "sweeps", "converged", "runtime_s"]);
    t.push(vec![
        s.coded.to_string(),
        fmt_real(rep.value),
        fmt_real(rep.low),
        fmt_real(rep.high),
        fmt_real(rep.gap),
        rep.sweeps.to_string(),
        rep.converged.to_string(),
        fmt_real(start.elapsed().as_secs_f64()),
    ]);
    Ok(Outcome::ok(t.to_string()))
}

fn rel_error(x: f64, pred: f64) -> f64 {
    if pred == 0.0 {
        x.abs()
    } else {
        (x - pred).abs() / pred.abs()
    }
}

fn lln(a: &LlnArgs) -> Result<Outcome> {
    let streams: Vec<u64> = (0..a.trials as u64).collect();
    let (prediction, values): (f64, Vec<f64>) = if let (Some(c), Some(tau)) = (&a.cuckoo, a.tau) {
        let &[h, k, l, r] = c.as_slice() else {
            bail!("--cuckoo takes h,k,l,r");
        };
        let p = CuckooParams::new(h, k, l, r)?;
        let pred = cuckoo_limit(&p, tau)?.value;
        let vals = streams
            .par_iter()
            .map(|&s| cuckoo_lln_trial(&p, tau, a.n_a, Seed::new(a.seed, s)))
            .collect::<Result<_, _>>()?;
        (pred, vals)
    } else {
        let (phi_a, phi_b) = match (&a.phi_a, &a.phi_b, &a.cdn) {
            (Some(pa), Some(pb), None) => (load_law(pa)?, load_law(pb)?),
            (None, None, Some(s)) => cdn_laws(&load_scenario(s)?)?,
            _ => bail!("give --phi-a and --phi-b, --cuckoo with --tau, or --cdn"),
        };
        let pred = limit_report(&phi_a, &phi_b, RDE_TOL, RDE_MAX_SWEEPS)?.value;
        let vals = streams
            .par_iter()
            .map(|&s| law_lln_trial(&phi_a, &phi_b, a.n_a, Seed::new(a.seed, s)))
            .collect::<Result<_, _>>()?;
        (pred, vals)
    };
    let mut t = CsvTable::new(["row", "trial", "value", "prediction", "rel_error"]);
    for (i, v) in values.iter().enumerate() {
        t.push(vec!["trial".into(), i.to_string(), fmt_real(*v), fmt_real(prediction), fmt_real(rel_error(*v, prediction))]);
    }
    let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
    t.push(vec!["mean".into(), String::new(), fmt_real(mean), fmt_real(prediction), fmt_real(rel_error(mean, prediction))]);
    Ok(Outcome::ok(t.to_string()))
}

fn gen(model: &GenModel) -> Result<Outcome> {
    let mut t;
    match model {
        GenModel::Hypergraph { n, m, p, h, seed, stream, out } => {
            let seed = Seed::new(*seed, *stream);
            let hg = match (m, p) {
                (Some(m), _) => sample_hypergraph(*n, *m, *h, seed)?,
                (None, Some(p)) => sample_hypergraph_binomial(*n, *p, *h, seed)?,
                (None, None) => bail!("give --m or --p"),
            };
            fs::write(out, serde_json::to_string(&hg)?).with_context(|| format!("writing {}", out.display()))?;
            t = CsvTable::new(["vertices", "hyperedges", "path"]);
            t.push(vec![hg.n.to_string(), hg.num_edges().to_string(), out.display().to_string()]);
        }
        GenModel::Config { phi_a, phi_b, n_a, seed, stream, out } => {
            let g = sample_bipartite_config(&load_law(phi_a)?, &load_law(phi_b)?, *n_a, Seed::new(*seed, *stream))?;
            fs::write(out, graph_to_json(&g)).with_context(|| format!("writing {}", out.display()))?;
            t = CsvTable::new(["vertices", "edges", "path"]);
            t.push(vec![g.num_vertices().to_string(), g.num_edges().to_string(), out.display().to_string()]);
        }
    }
    Ok(Outcome::ok(t.to_string()))
}
