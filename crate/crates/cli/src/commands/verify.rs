use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::Context;
use maxsym::boundary_maps::{admittance_matrix, impedance_matrix, impedance_principal, BoundarySymbolInput};
use maxsym::metrics_geometry::{build_hat_pair, hat_relation_residual, GaugeMap, GaugeProfile};
use maxsym::random::{self, problem_jets, ProblemKind, SeededRng};
use maxsym::recovery::{
    jet_residual_e, jet_residual_h, recover_normal_mu, recover_tangential, recover_tangential_mu,
    sylvester_uniqueness_check, JetAssembly, MapKind, NormalRow,
};
use maxsym::symbol_calculus::{
    coefficient_symbols, eigenvalues, factorization_residual, jordan_data, principal_b, principal_b_contour,
    principal_b_jordan, principal_c, quadratic_residual, CMat3,
};
use maxsym::tensor_core::{alt_det_inverse_residual, cofactor_identity_residual, covector};
use maxsym::{Metric3, NormalVerdict, ParameterTriple, SymbolSampler};
use nalgebra::Matrix3;
use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::symbols::{spectrum_error, xi3_samples};
use crate::report::{Report, Row};

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    Core,
    Recovery,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// flip the sign of B before checking it
    BSign,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, default_value_t = 100)]
    pub samples: u64,
    #[arg(long, env = "MAXSYM_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on it
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

/// (name, threshold, suite)
const CHECKS: &[(&str, f64, Suite)] = &[
    ("cofactor identity", 1e-12, Suite::Core),
    ("alternating determinant", 1e-12, Suite::Core),
    ("hat relation", 1e-13, Suite::Core),
    ("quadratic residual B", 1e-10, Suite::Core),
    ("quadratic residual C", 1e-10, Suite::Core),
    ("Jordan vs contour", 1e-8, Suite::Core),
    ("spectrum", 1e-9, Suite::Core),
    ("factorization", 1e-10, Suite::Core),
    ("impedance range ∥ ξ̃", 1e-12, Suite::Core),
    ("λ_μ∘λ_ε", 1e-12, Suite::Core),
    ("tangential recovery", 1e-10, Suite::Recovery),
    ("normal row misclassified", 0.0, Suite::Recovery),
    ("jet H condition", 1e6, Suite::Recovery),
    ("jet E condition", 1e6, Suite::Recovery),
    ("1 / stage-2 coefficient", 1e6, Suite::Recovery),
    ("1 / Sylvester σ_min", 1e10, Suite::Recovery),
    ("gauge symbol difference", 1e-12, Suite::Recovery),
];

const MAX_LISTED_SEEDS: usize = 10;

type Values = Vec<(&'static str, f64)>;

fn spd_local(r: &mut SeededRng) -> Matrix3<f64> {
    let m = Matrix3::from_fn(|_, _| r.gen_range(-0.5..0.5));
    m.transpose() * m + Matrix3::identity() * 0.5
}

fn core_sample(seed: u64, fault: Option<Fault>, out: &mut Values) -> anyhow::Result<()> {
    let mut r = random::rng(seed);
    let g = random::spd3(&mut r);
    let gi = g.inverse();
    let scale_c = g.det() * gi.matrix().amax().powi(2) + g.matrix().amax();
    out.push(("cofactor identity", cofactor_identity_residual(&g) / scale_c));
    out.push(("alternating determinant", alt_det_inverse_residual(&g) / gi.matrix().amax().powi(3)));
    let gl = Metric3::new(spd_local(&mut r))?;
    let p = ParameterTriple::new(gl.inverse().matrix() * spd_local(&mut r), gl.inverse().matrix() * spd_local(&mut r), gl, 1.0)?;
    out.push(("hat relation", hat_relation_residual(&p, &build_hat_pair(&p)?)?));

    let (je, jm) = problem_jets(seed, ProblemKind::Generic, 2);
    let (e, m) = (je.value, jm.value);
    let omega = r.gen_range(0.5..2.0);
    let sh = coefficient_symbols(&je, &jm, omega)?;
    let se = coefficient_symbols(&jm, &je, omega)?;
    let flip = |b: CMat3| if fault == Some(Fault::BSign) { -b } else { b };
    let (mut qb, mut qc, mut route, mut spec, mut fact, mut range, mut comp) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..4 {
        let xi = random::direction(&mut r) * r.gen_range(0.5..2.0);
        let b = flip(principal_b(&sh, &e, &m, &xi)?.0);
        let cm = flip(principal_c(&se, &e, &m, &xi)?.0);
        qb = qb.max(quadratic_residual(&sh, &b, &xi));
        qc = qc.max(quadratic_residual(&se, &cm, &xi));
        let (bj, (bc, _)) = (principal_b_jordan(&jordan_data(&e, &m, &xi)?)?, principal_b_contour(&sh, &xi)?);
        route = route.max((bj - bc).norm() / bj.norm());
        let (xe, xm) = eigenvalues(&e, &m, &xi)?;
        let ev = |x: &CMat3| nalgebra::linalg::Schur::new(*x).eigenvalues().map(|v| v.iter().copied().collect::<Vec<_>>());
        let ev = (ev(&b).context("B eigenvalues")?, ev(&cm).context("C eigenvalues")?);
        spec = spec.max(spectrum_error(&ev.0, xe, xm)).max(spectrum_error(&ev.1, xm, xe));
        let f = factorization_residual(&sh, &b, &xi, &xi3_samples());
        fact = fact.max(f.full).max(f.constant_term);
        let data = covector([r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), 0.0]);
        let inp = BoundarySymbolInput::new(e, m, omega, xi, data)?;
        let z = impedance_principal(&inp)?;
        if z.norm() > 0.0 {
            range = range.max(((z[0] * (-xi[1]) + z[1] * xi[0]).norm() + z[2].norm()) / (z.norm() * xi.norm()));
        }
        let (zm, ym) = (impedance_matrix(&inp)?, admittance_matrix(&inp)?);
        comp = comp.max((ym * zm).norm() / (ym.norm() * zm.norm()));
    }
    out.extend([
        ("quadratic residual B", qb),
        ("quadratic residual C", qc),
        ("Jordan vs contour", route),
        ("spectrum", spec),
        ("factorization", fact),
        ("impedance range ∥ ξ̃", range),
        ("λ_μ∘λ_ε", comp),
    ]);
    Ok(())
}

fn perturbed_row(row: NormalRow, r: &mut SeededRng) -> NormalRow {
    let size = (row.tangential[0].powi(2) + row.tangential[1].powi(2) + row.normal.powi(2)).sqrt();
    let d = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0f64)];
    let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let k = 2e-3 * size / n;
    NormalRow { tangential: [row.tangential[0] + k * d[0], row.tangential[1] + k * d[1]], normal: (row.normal + k * d[2]).abs() }
}

fn recovery_sample(seed: u64, gauge: &Arc<GaugeMap>, out: &mut Values) -> anyhow::Result<()> {
    let mut r = random::rng(seed ^ 0x5eed_0000);
    let (je, jm) = problem_jets(seed, ProblemKind::Generic, 1);
    let (e, m) = (je.value, jm.value);
    let omega = r.gen_range(0.5..3.0);
    let z = SymbolSampler::forward(MapKind::Impedance, e, m, omega)?;
    let y = SymbolSampler::forward(MapKind::Admittance, e, m, omega)?;
    let (et, mt) = (e.tangential_block(), m.boundary_cometric());
    let (re, rm) = (recover_tangential(&z)?.metric, recover_tangential_mu(&y)?.metric);
    let err = ((re.matrix() - et.matrix()).norm() / et.norm()).max((rm.matrix() - mt.matrix()).norm() / mt.norm());
    out.push(("tangential recovery", err));

    let grid = random::direction_grid(16);
    let row = NormalRow::of(&m);
    let mut wrong = 0.0;
    if recover_normal_mu(&et, &mt, row, row, &grid)?.verdict != NormalVerdict::Equal {
        wrong += 1.0;
    }
    if recover_normal_mu(&et, &mt, row, perturbed_row(row, &mut r), &grid)?.verdict != NormalVerdict::Inconsistent {
        wrong += 1.0;
    }
    out.push(("normal row misclassified", wrong));

    let kappa = 1 + (seed % 3) as usize;
    let grid = random::direction_grid(8);
    let h = jet_residual_h(&e, &m, kappa, &grid, JetAssembly::LeadingTerm)?;
    let ee = jet_residual_e(&e, &m, kappa, &grid, JetAssembly::LeadingTerm)?;
    out.push(("jet H condition", 1.0 / h.relative_sigma_min()));
    out.push(("jet E condition", 1.0 / ee.combined.relative_sigma_min()));
    out.push(("1 / stage-2 coefficient", 1.0 / ee.coefficients.iter().copied().fold(f64::INFINITY, f64::min)));

    let s = coefficient_symbols(&je, &jm, omega)?;
    let mut syl = f64::INFINITY;
    for xi in &grid {
        let (b, _) = principal_b(&s, &e, &m, xi)?;
        let scale = (s.t_inverse() * s.a_at(xi) + b).norm() + b.norm();
        syl = syl.min(sylvester_uniqueness_check(&s, &b, xi) / scale);
    }
    out.push(("1 / Sylvester σ_min", 1.0 / syl));
    out.push(("gauge symbol difference", super::gauge::symbol_difference(gauge.clone(), seed, &[[0.1, -0.2, 0.0]])?));
    Ok(())
}

struct Sample {
    seed: u64,
    values: Values,
    error: Option<String>,
}

fn sample(a: &Args, seed: u64, gauge: &Arc<GaugeMap>) -> Sample {
    let mut values = Vec::new();
    let mut res = Ok(());
    if a.suite != Suite::Recovery {
        res = core_sample(seed, a.inject_fault, &mut values);
    }
    if res.is_ok() && a.suite != Suite::Core {
        res = recovery_sample(seed, gauge, &mut values);
    }
    Sample { seed, values, error: res.err().map(|e| format!("{e:#}")) }
}

pub fn run(a: &Args, command: Vec<String>) -> anyhow::Result<Report> {
    if a.samples == 0 {
        anyhow::bail!("need at least one sample");
    }
    let gauge = super::gauge::gauge_map(GaugeProfile::Bump { amplitude: 0.6, center: [0.0; 3], radius: 0.5 })?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.jobs.max(1)).build()?;
    let samples: Vec<Sample> =
        pool.install(|| (0..a.samples).into_par_iter().map(|i| sample(a, a.seed.wrapping_add(i), &gauge)).collect());

    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    let mut failing: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    let threshold = |name: &str| CHECKS.iter().find(|c| c.0 == name).map_or(0.0, |c| c.1);
    for s in &samples {
        for &(name, v) in &s.values {
            let w = worst.entry(name).or_insert(0.0);
            *w = if v.is_nan() { f64::NAN } else { w.max(v) };
            if !(v <= threshold(name)) {
                failing.entry(name).or_default().push(s.seed);
            }
        }
    }
    let mut report = Report::new(command);
    for &(name, thr, suite) in CHECKS {
        if a.suite != Suite::All && a.suite != suite {
            continue;
        }
        let mut row = Row::check(name, worst.get(name).copied().unwrap_or(f64::NAN), thr);
        if let Some(seeds) = failing.get(name) {
            row.pass = false;
            let list: Vec<String> = seeds.iter().take(MAX_LISTED_SEEDS).map(|s| s.to_string()).collect();
            row = row.with_note(format!("failing seeds {}", list.join(",")));
        }
        report.push(row);
    }
    let errors: Vec<&Sample> = samples.iter().filter(|s| s.error.is_some()).collect();
    if !errors.is_empty() {
        let seeds: Vec<String> = errors.iter().take(MAX_LISTED_SEEDS).map(|s| s.seed.to_string()).collect();
        report.push(Row::check("samples with errors", errors.len() as f64, 0.0).with_note(format!("seeds {}", seeds.join(","))));
    }
    report.results = json!({
        "suite": format!("{:?}", a.suite).to_lowercase(),
        "samples": a.samples,
        "first_seed": a.seed,
        "errors": errors.iter().map(|s| json!({ "seed": s.seed, "error": s.error })).collect::<Vec<_>>(),
    });
    Ok(report)
}
