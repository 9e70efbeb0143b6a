use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;
use subkoba::chart::{ChartDistribution, C64};
use subkoba::curvature::certify_negative_bound;
use subkoba::distances::{
    cc_distance_upper, infinitesimal_metric_upper, kobayashi_upper, schwarz_from_certificate, DistributionMetric,
    RhoKind,
};
use subkoba::exact::format_q;
use subkoba::fixtures::{load_alg, load_chart, load_datum};
use subkoba::flows::chow_connect;
use subkoba::grading::{
    check_bracket_generating, check_parity, grade, grading_element, superhorizontal, superhorizontal_uniqueness,
};
use subkoba::hyperbolicity::{
    check_forstneric_assumption, check_no_complex_line, classify_homogeneous, compute_cn, validate_j_axioms, Confidence,
    Verdict,
};
use subkoba::lie::{build_for_type, CartanType};

use crate::config::Tunables;
use crate::report::{Failure, Outcome};

pub type CommandResult = Result<Outcome, Failure>;

#[derive(Serialize)]
struct RootRow {
    index: usize,
    label: String,
    coords: Vec<i64>,
    eps: Vec<i64>,
    height: i64,
    positive: bool,
}

pub fn root_system(ty: &str) -> CommandResult {
    let ct: CartanType = ty.parse()?;
    let bd = build_for_type(ct);
    let rd = &bd.roots;
    let roots: Vec<RootRow> = (0..rd.len())
        .map(|i| RootRow {
            index: i,
            label: rd.label(i),
            coords: rd.roots[i].clone(),
            eps: rd.to_eps(&rd.roots[i]),
            height: rd.height(i),
            positive: rd.positive[i],
        })
        .collect();
    let normalization = bd.normalization_report();
    let jacobi = bd.jacobi_violations();
    let invariance = bd.killing_invariance_violations();
    let result = json!({
        "cartan_type": ct.to_string(),
        "rank": bd.rank(),
        "dim": bd.dim(),
        "n_positive": rd.n_positive(),
        "cartan_matrix": rd.pairing.iter().map(|r| r.iter().map(format_q).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "basis": bd.algebra.names,
        "roots": roots,
        "normalization": normalization,
        "jacobi_violations": jacobi,
        "killing_invariance_violations": invariance,
    });
    if normalization.all_hold() && jacobi == 0 && invariance == 0 {
        Ok(Outcome::ok(result))
    } else {
        Ok(Outcome::failed(result, "normalization", "structure constants fail an exact identity"))
    }
}

/// `torus` or 1-based simple root indices lying in `v`, e.g. `1,3`.
fn parse_v(spec: &str, rank: usize) -> Result<Vec<usize>, Failure> {
    if spec.trim() == "torus" || spec.trim().is_empty() {
        return Ok(Vec::new());
    }
    spec.split(',')
        .map(|s| {
            let i: usize = s.trim().parse().map_err(|_| Failure::input(format!("bad simple root index {s:?}")))?;
            if i == 0 || i > rank {
                return Err(Failure::input(format!("simple root index {i} out of range 1..={rank}")));
            }
            Ok(i - 1)
        })
        .collect()
}

pub fn grade_cmd(ty: Option<&str>, v: Option<&str>, fixture: Option<&Path>) -> CommandResult {
    match (fixture, ty) {
        (Some(path), None) => {
            if v.is_some() {
                return Err(Failure::input("--v comes from the fixture; drop it or use --type"));
            }
            let f = load_alg(path)?;
            let gen = check_bracket_generating(&superhorizontal(&f.grading), &f.grading)?;
            let parity = check_parity(&f.grading, &f.real_form);
            let uniqueness = superhorizontal_uniqueness(&f.grading, &f.real_form)?;
            Ok(Outcome::ok(json!({
                "cartan_type": f.basis.cartan_type().to_string(),
                "grading": f.grading.report(),
                "superhorizontal_generation": gen,
                "graded_brackets_hold": subkoba::grading::validate_graded_brackets(&f.grading).holds(),
                "parity_violations": parity,
                "uniqueness": uniqueness,
            })))
        }
        (None, Some(ty)) => {
            let ct: CartanType = ty.parse()?;
            let bd = Arc::new(build_for_type(ct));
            let vs = parse_v(v.unwrap_or("torus"), bd.rank())?;
            let t = grading_element(&bd.roots, &vs)?;
            let gd = grade(&bd, &t)?;
            let gen = check_bracket_generating(&superhorizontal(&gd), &gd)?;
            Ok(Outcome::ok(json!({
                "cartan_type": ct.to_string(),
                "grading": gd.report(),
                "superhorizontal_generation": gen,
                "graded_brackets_hold": subkoba::grading::validate_graded_brackets(&gd).holds(),
            })))
        }
        _ => Err(Failure::input("give exactly one of --type or --fixture")),
    }
}

pub fn curvature_bound(fixture: &Path, t: &Tunables) -> CommandResult {
    let f = load_alg(fixture)?;
    let cert = certify_negative_bound(&f.real_form, &f.grading, &t.optimizer)?;
    Ok(Outcome::ok(json!({ "fixture": f.spec, "certificate": cert })))
}

/// A point as a JSON array of numbers or `[re, im]` pairs.
pub fn parse_point(text: &str, n: usize, what: &str) -> Result<Vec<C64>, Failure> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Failure::input(format!("{what}: not JSON: {e}")))?;
    let items = v.as_array().ok_or_else(|| Failure::input(format!("{what}: expected an array")))?;
    if items.len() != n {
        return Err(Failure::input(format!("{what}: expected {n} coordinates, got {}", items.len())));
    }
    items
        .iter()
        .enumerate()
        .map(|(i, x)| match x {
            serde_json::Value::Number(r) => Ok(C64::new(r.as_f64().unwrap_or(f64::NAN), 0.0)),
            serde_json::Value::Array(p) if p.len() == 2 && p.iter().all(|c| c.is_number()) => {
                Ok(C64::new(p[0].as_f64().unwrap_or(f64::NAN), p[1].as_f64().unwrap_or(f64::NAN)))
            }
            _ => Err(Failure::input(format!("{what}[{i}]: expected a number or [re, im]"))),
        })
        .collect()
}

fn endpoints(cd: &ChartDistribution, from: Option<&str>, to: &str) -> Result<(Vec<C64>, Vec<C64>), Failure> {
    let x = match from {
        Some(s) => parse_point(s, cd.n, "--from")?,
        None => vec![C64::new(0.0, 0.0); cd.n],
    };
    Ok((x, parse_point(to, cd.n, "--to")?))
}

pub fn chow_connect_cmd(chart: &Path, from: Option<&str>, to: &str, t: &Tunables) -> CommandResult {
    let cd = load_chart(chart)?;
    let (x, y) = endpoints(&cd, from, to)?;
    let word = chow_connect(&cd, &x, &y, &t.connect)?;
    Ok(Outcome::ok(json!({ "chart": cd.name, "word": word })))
}

pub fn cc_distance(chart: &Path, from: Option<&str>, to: &str, curvature: Option<f64>, t: &Tunables) -> CommandResult {
    let cd = load_chart(chart)?;
    let (x, y) = endpoints(&cd, from, to)?;
    let metric = match curvature {
        Some(k) if k < 0.0 => DistributionMetric::PoincareDisc { curvature: k },
        Some(k) => return Err(Failure::input(format!("--curvature must be negative, got {k}"))),
        None => DistributionMetric::FrameOrthonormal,
    };
    let est = cc_distance_upper(&cd, &metric, &x, &y, &t.cc)?;
    Ok(Outcome::ok(json!({ "chart": cd.name, "metric": metric, "estimate": est })))
}

pub struct KobayashiArgs<'a> {
    pub chart: &'a Path,
    pub from: Option<&'a str>,
    pub to: Option<&'a str>,
    pub vector: Option<&'a str>,
    pub schwarz: Option<&'a Path>,
    pub rho: Option<f64>,
    pub rho_kind: RhoKind,
}

pub fn kobayashi_estimate(a: &KobayashiArgs, t: &Tunables) -> CommandResult {
    let cd = load_chart(a.chart)?;
    let schwarz = match (a.schwarz, a.rho) {
        (Some(path), Some(rho)) => {
            let f = load_alg(path)?;
            let cert = certify_negative_bound(&f.real_form, &f.grading, &t.optimizer)?;
            Some(schwarz_from_certificate(&cert, rho, a.rho_kind)?)
        }
        (None, None) => None,
        _ => return Err(Failure::input("--schwarz and --rho go together")),
    };
    match (a.to, a.vector) {
        (Some(to), None) => {
            let (x, y) = endpoints(&cd, a.from, to)?;
            let est = kobayashi_upper(&cd, &x, &y, &t.kobayashi)?;
            let reachable = est.is_reachable();
            let result = json!({ "chart": cd.name, "estimate": est, "schwarz": schwarz });
            if reachable {
                Ok(Outcome::ok(result))
            } else {
                Ok(Outcome::failed(result, "unreachable", "no horizontal chain found between the points"))
            }
        }
        (None, Some(v)) => {
            let x = match a.from {
                Some(s) => parse_point(s, cd.n, "--from")?,
                None => vec![C64::new(0.0, 0.0); cd.n],
            };
            let v = parse_point(v, cd.n, "--vector")?;
            let est = infinitesimal_metric_upper(&cd, &x, &v, &t.kobayashi)?;
            Ok(Outcome::ok(json!({ "chart": cd.name, "metric": est, "schwarz": schwarz })))
        }
        _ => Err(Failure::input("give exactly one of --to or --vector")),
    }
}

pub fn classify(fixture: &Path, t: &Tunables) -> CommandResult {
    let hd = load_datum(fixture)?.datum()?;
    let axioms = validate_j_axioms(&hd);
    let line = check_no_complex_line(&hd, &t.optimizer, t.classify.complex_line_tol);
    let rep = classify_homogeneous(&hd);
    let rejected = match &rep.verdict {
        Verdict::Rejected { reason, witness } => Some(format!("{reason:?}: {}", witness.detail)),
        Verdict::CanonicalSuperhorizontal => None,
    };
    let result = json!({ "classification": rep, "j_axioms": axioms, "no_complex_line": line });
    Ok(match rejected {
        None => Outcome::ok(result),
        Some(msg) => Outcome::failed(result, "rejected", msg),
    })
}

pub fn forstneric(chart: &Path, t: &Tunables) -> CommandResult {
    let cd = load_chart(chart)?;
    let rep = check_forstneric_assumption(&cd, t.forstneric.per_axis);
    let cn = compute_cn(&cd, t.forstneric.level)?;
    let failed = rep.confidence == Confidence::Failed;
    let result = json!({ "chart": cd.name, "assumption": rep, "constant": cn });
    Ok(if failed {
        Outcome::failed(result, "assumption_failed", "frame head block degenerates on the sample grid")
    } else {
        Outcome::ok(result)
    })
}

pub fn display(p: &Path) -> String {
    PathBuf::from(p).display().to_string()
}
