use std::path::PathBuf;

use maxsym::symbol_calculus::{
    coefficient_symbols, eigenvalues, factorization_residual, jordan_data, principal_b, principal_b_contour,
    principal_b_jordan, principal_c, quadratic_residual, CMat3, Route,
};
use maxsym::tensor_core::c;
use maxsym::{SymbolSet, C64};
use serde_json::{json, Value};

use crate::jsonfmt::{cmatrix, complex};
use crate::problem::ProblemFile;
use crate::report::{Report, Row};

#[derive(clap::Args, Debug)]
pub struct Args {
    pub file: PathBuf,
    /// Number of equispaced ξ̃ directions
    #[arg(long, default_value_t = 8)]
    pub directions: usize,
}

pub const QUADRATIC_TOL: f64 = 1e-10;
pub const ROUTE_TOL: f64 = 1e-8;
pub const SPECTRUM_TOL: f64 = 1e-9;

fn symbol_set_json(s: &SymbolSet) -> Value {
    json!({
        "T": cmatrix(&s.t),
        "A": s.a.iter().map(cmatrix).collect::<Vec<_>>(),
        "Q": s.q.iter().map(cmatrix).collect::<Vec<_>>(),
        "G": cmatrix(&s.g),
        "F": s.f.iter().map(cmatrix).collect::<Vec<_>>(),
        "R": cmatrix(&s.r),
        "rho": s.rho,
    })
}

fn eigen3(m: &CMat3) -> Vec<C64> {
    nalgebra::linalg::Schur::new(*m).eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
}

/// Distance of a spectrum to {simple, double, double}, the double eigenvalue
/// compared through the mean of its cluster.
pub fn spectrum_error(ev: &[C64], simple: C64, double: C64) -> f64 {
    if ev.len() != 3 {
        return f64::INFINITY;
    }
    let k = (0..3).min_by(|&a, &b| (ev[a] - simple).norm().total_cmp(&(ev[b] - simple).norm())).unwrap_or(0);
    let rest: Vec<C64> = (0..3).filter(|&i| i != k).map(|i| ev[i]).collect();
    let mean = (rest[0] + rest[1]) / 2.0;
    (ev[k] - simple).norm().max((mean - double).norm())
}

/// Fixed complex sample points for the factorization check.
pub fn xi3_samples() -> Vec<C64> {
    (0..20).map(|k| {
        let t = std::f64::consts::TAU * k as f64 / 20.0;
        c(1.7 * t.cos(), 1.3 * t.sin() + 0.1 * k as f64 - 1.0)
    }).collect()
}

pub fn run(a: &Args, command: Vec<String>) -> anyhow::Result<Report> {
    let p = ProblemFile::load(&a.file)?;
    let grid = super::grid(a.directions)?;
    let (je, jm) = (&p.eps_hat_jet, &p.mu_hat_jet);
    let (e, m) = (je.value, jm.value);
    let sh = coefficient_symbols(je, jm, p.omega)?;
    let se = coefficient_symbols(jm, je, p.omega)?;
    let mut report = Report::new(command);
    let (mut qb, mut qc, mut fact, mut spec, mut route) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, None::<f64>);
    let mut failures = Vec::new();
    let mut dirs = Vec::new();
    for xi in &grid {
        let (xe, xm) = eigenvalues(&e, &m, xi)?;
        let jordan = match jordan_data(&e, &m, xi) {
            Ok(jd) => json!({ "status": "ok", "condition": jd.condition, "X": cmatrix(&jd.x), "J": cmatrix(&jd.j) }),
            Err(err) => json!({ "status": "unavailable", "reason": err.to_string() }),
        };
        let b = principal_b(&sh, &e, &m, xi);
        let cc = principal_c(&se, &e, &m, xi);
        let (Ok((b, rb)), Ok((cm, rc))) = (&b, &cc) else {
            let reason = [b.err(), cc.err()].into_iter().flatten().map(|e| e.to_string()).collect::<Vec<_>>().join("; ");
            failures.push(format!("ξ̃ = ({:.3}, {:.3}): {reason}", xi[0], xi[1]));
            continue;
        };
        qb = qb.max(quadratic_residual(&sh, b, xi));
        qc = qc.max(quadratic_residual(&se, cm, xi));
        let f = factorization_residual(&sh, b, xi, &xi3_samples());
        fact = fact.max(f.full).max(f.constant_term);
        spec = spec.max(spectrum_error(&eigen3(b), xe, xm)).max(spectrum_error(&eigen3(cm), xm, xe));
        if let Ok(bj) = jordan_data(&e, &m, xi).and_then(|jd| principal_b_jordan(&jd)) {
            if let Ok((bc, _)) = principal_b_contour(&sh, xi) {
                let d = (bj - bc).norm() / bj.norm();
                route = Some(route.map_or(d, |r: f64| r.max(d)));
            }
        }
        let name = |r: &Route| if *r == Route::Jordan { "jordan" } else { "contour" };
        dirs.push(json!({
            "xi": [xi[0], xi[1]],
            "xi_eps3": complex(xe),
            "xi_mu3": complex(xm),
            "jordan": jordan,
            "route_b": name(rb),
            "route_c": name(rc),
            "B": cmatrix(b),
            "C": cmatrix(cm),
        }));
    }
    report.push(Row::check("quadratic residual B", qb, QUADRATIC_TOL));
    report.push(Row::check("quadratic residual C", qc, QUADRATIC_TOL));
    report.push(Row::check("factorization residual", fact, QUADRATIC_TOL));
    report.push(Row::check("spectrum of B and C", spec, SPECTRUM_TOL));
    match route {
        Some(r) => report.push(Row::check("Jordan vs contour", r, ROUTE_TOL)),
        None => report.push(
            Row::check("Jordan vs contour", 0.0, ROUTE_TOL).with_note("Jordan route unavailable, contour used throughout"),
        ),
    }
    if !failures.is_empty() {
        report.push(Row::check("directions without B or C", failures.len() as f64, 0.0).with_note(failures.join(" | ")));
    }
    report.results = json!({ "omega": p.omega, "symbols_h": symbol_set_json(&sh), "symbols_e": symbol_set_json(&se), "directions": dirs });
    Ok(report)
}
