//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::sync::Arc;
use std::time::{Duration, Instant};

use maxsym::boundary_maps::{
    admittance_matrix, impedance_matrix, impedance_principal, admittance_principal, BoundarySymbolInput,
};
use maxsym::metrics_geometry::{
    build_gauge_map, build_hat_pair, determinant_ratio, hat_relation_residual, pullback_parameters,
    to_boundary_normal, GaugeBox, GaugeProfile, HatPairField, MetricField, ParameterTriple,
};
use maxsym::random::{self, ProblemKind, SeededRng};
use maxsym::recovery::{
    compensating_mu33, jet_residual_e, jet_residual_h, recover_normal_mu, recover_tangential, recover_tangential_mu,
    sylvester_uniqueness_check, JetAssembly, MapKind, NormalRow, NormalVerdict, SymbolSampler,
};
use maxsym::symbol_calculus::{
    coefficient_symbols, eigenvalues, factorization_residual, jordan_data, polynomial_roots, principal_b,
    principal_b_contour, principal_b_jordan, principal_c, quadratic_residual, CMat3, MetricJet, SymbolSet,
};
use maxsym::tensor_core::{alt_det_inverse_residual, c, cofactor_identity_residual, covector, Metric3, C64};
use nalgebra::Matrix3;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn pair(seed: u64) -> (Metric3, Metric3) {
    let mut r = random::rng(seed);
    (random::spd3(&mut r), random::spd3(&mut r))
}

fn bnc_pair(seed: u64) -> (Metric3, Metric3) {
    let mut r = random::rng(seed);
    (random::bnc_metric(&mut r), random::spd3(&mut r))
}

fn symbols(e: &Metric3, m: &Metric3) -> SymbolSet {
    coefficient_symbols(&MetricJet::constant(*e), &MetricJet::constant(*m), 1.0).unwrap()
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

const PAIRS: u64 = 1000;
const DIRECTIONS: usize = 32;

fn quadratic_identity() -> Outcome {
    let start = Instant::now();
    let grid = random::direction_grid(DIRECTIONS);
    let (mut worst_b, mut worst_c, mut failures) = (0.0_f64, 0.0_f64, 0usize);
    for seed in 0..PAIRS {
        let (e, m) = pair(seed);
        let (sh, se) = (symbols(&e, &m), symbols(&m, &e));
        for xi in &grid {
            match (principal_b(&sh, &e, &m, xi), principal_c(&se, &e, &m, xi)) {
                (Ok((b, _)), Ok((cc, _))) => {
                    worst_b = worst_b.max(quadratic_residual(&sh, &b, xi));
                    worst_c = worst_c.max(quadratic_residual(&se, &cc, xi));
                }
                _ => failures += 1,
            }
        }
    }
    let t = start.elapsed();
    let pass = worst_b <= 1e-10 && worst_c <= 1e-10 && failures == 0 && t <= Duration::from_secs(120);
    outcome(pass, format!("max B {worst_b:.2e}, max C {worst_c:.2e}, failures {failures}, {}", secs(t)))
}

fn route_agreement() -> Outcome {
    let grid = random::direction_grid(8);
    let (mut worst, mut compared) = (0.0_f64, 0usize);
    for seed in 0..200 {
        let (e, m) = pair(seed);
        let s = symbols(&e, &m);
        for xi in &grid {
            let Ok(bj) = jordan_data(&e, &m, xi).and_then(|jd| principal_b_jordan(&jd)) else { continue };
            let (bc, _) = principal_b_contour(&s, xi).unwrap();
            worst = worst.max((bj - bc).norm() / bj.norm());
            compared += 1;
        }
    }
    let mut near = 0.0_f64;
    let mut near_failures = 0;
    for seed in 0..100 {
        let (je, jm) = random::problem_jets(5000 + seed, ProblemKind::NearDegenerate, 0);
        let s = coefficient_symbols(&je, &jm, 1.0).unwrap();
        let xi = random::direction(&mut random::rng(seed));
        match principal_b_contour(&s, &xi) {
            Ok((b, _)) => near = near.max(quadratic_residual(&s, &b, &xi)),
            Err(_) => near_failures += 1,
        }
    }
    let pass = worst <= 1e-8 && compared > 0 && near <= 1e-10 && near_failures == 0;
    outcome(
        pass,
        format!("Jordan vs contour {worst:.2e} over {compared}; near-degenerate residual {near:.2e}, failures {near_failures}"),
    )
}

fn eigen3(m: &CMat3) -> Vec<C64> {
    nalgebra::linalg::Schur::new(*m).eigenvalues().unwrap().iter().copied().collect()
}

/// Distance of the spectrum to {simple, double, double}: the simple eigenvalue
/// individually, the double one through the mean of its cluster (the cluster
/// of a defective eigenvalue splits by ~√u, its mean does not).
fn spectrum_error(ev: &[C64], simple: C64, double: C64) -> f64 {
    let k = (0..3).min_by(|&a, &b| (ev[a] - simple).norm().total_cmp(&(ev[b] - simple).norm())).unwrap();
    let rest: Vec<C64> = (0..3).filter(|&i| i != k).map(|i| ev[i]).collect();
    let mean = (rest[0] + rest[1]) / 2.0;
    (ev[k] - simple).norm().max((mean - double).norm())
}

fn spectral_contract() -> Outcome {
    let grid = random::direction_grid(8);
    let (mut worst, mut min_im, mut conj) = (0.0_f64, f64::INFINITY, 0.0_f64);
    for seed in 0..200 {
        let (e, m) = pair(seed);
        let (sh, se) = (symbols(&e, &m), symbols(&m, &e));
        for xi in &grid {
            let (xe, xm) = eigenvalues(&e, &m, xi).unwrap();
            let (b, _) = principal_b(&sh, &e, &m, xi).unwrap();
            let (cc, _) = principal_c(&se, &e, &m, xi).unwrap();
            let (eb, ec) = (eigen3(&b), eigen3(&cc));
            worst = worst.max(spectrum_error(&eb, xe, xm)).max(spectrum_error(&ec, xm, xe));
            min_im = eb.iter().chain(&ec).map(|z| z.im).fold(min_im, f64::min);
            let roots = polynomial_roots(&sh, xi);
            for r in &roots {
                let d = roots.iter().map(|s| (s - r.conj()).norm()).fold(f64::INFINITY, f64::min);
                conj = conj.max(d);
            }
        }
    }
    let pass = worst <= 1e-9 && min_im > 0.0 && conj <= 1e-6;
    outcome(pass, format!("spectrum {worst:.2e}, min Im {min_im:.3}, conjugate pairing {conj:.2e}"))
}

fn full_factorization() -> Outcome {
    let grid = random::direction_grid(4);
    let (mut full, mut constant) = (0.0_f64, 0.0_f64);
    for seed in 0..200 {
        let (e, m) = pair(seed);
        let s = symbols(&e, &m);
        let mut r = random::rng(9000 + seed);
        for xi in &grid {
            let samples: Vec<C64> = (0..20).map(|_| c(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0))).collect();
            let (b, _) = principal_b(&s, &e, &m, xi).unwrap();
            let f = factorization_residual(&s, &b, xi, &samples);
            full = full.max(f.full);
            constant = constant.max(f.constant_term);
        }
    }
    outcome(full <= 1e-10 && constant <= 1e-10, format!("sampled {full:.2e}, constant term {constant:.2e}"))
}

fn boundary_structure() -> Outcome {
    let (mut parallel, mut composite) = (0.0_f64, 0.0_f64);
    for seed in 0..1000 {
        let (e, m) = bnc_pair(seed);
        let mut r = random::rng(20_000 + seed);
        let xi = random::direction(&mut r) * r.gen_range(0.5..2.0);
        let f = covector([r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), 0.0]);
        let inp = BoundarySymbolInput::new(e, m, r.gen_range(0.5..2.0), xi, f).unwrap();
        let z = impedance_principal(&inp).unwrap();
        let perp = (z[0] * (-xi[1]) + z[1] * xi[0]).norm() + z[2].norm();
        parallel = parallel.max(perp / (z.norm() * xi.norm()).max(f64::MIN_POSITIVE));
        let y = admittance_principal(&inp.with_data(z)).unwrap();
        let scale = admittance_matrix(&inp).unwrap().norm() * impedance_matrix(&inp).unwrap().norm() * f.norm();
        composite = composite.max(y.norm() / scale);
    }
    outcome(parallel <= 1e-12 && composite <= 1e-12, format!("orthogonal part {parallel:.2e}, λ_μ∘λ_ε {composite:.2e}"))
}

fn tangential_round_trip() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut failures = 0;
    for seed in 0..200 {
        let (e, m) = bnc_pair(30_000 + seed);
        let omega = random::rng(seed).gen_range(0.5..3.0);
        let z = SymbolSampler::forward(MapKind::Impedance, e, m, omega).unwrap();
        let y = SymbolSampler::forward(MapKind::Admittance, e, m, omega).unwrap();
        match (recover_tangential(&z), recover_tangential_mu(&y)) {
            (Ok(a), Ok(b)) => {
                let (et, mt) = (e.tangential_block(), m.boundary_cometric());
                worst = worst
                    .max((a.metric.matrix() - et.matrix()).norm() / et.norm())
                    .max((b.metric.matrix() - mt.matrix()).norm() / mt.norm());
            }
            _ => failures += 1,
        }
    }
    let t = start.elapsed();
    let pass = worst <= 1e-10 && failures == 0 && t <= Duration::from_secs(30);
    outcome(pass, format!("max relative error {worst:.2e}, failures {failures}, {}", secs(t)))
}

fn perturb_row(row: NormalRow, r: &mut SeededRng) -> NormalRow {
    let size = (row.tangential[0].powi(2) + row.tangential[1].powi(2) + row.normal.powi(2)).sqrt();
    let mut d: [f64; 3] = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
    let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    d.iter_mut().for_each(|x| *x *= 2e-3 * size / n);
    NormalRow { tangential: [row.tangential[0] + d[0], row.tangential[1] + d[1]], normal: (row.normal + d[2]).abs() }
}

fn normal_dichotomy() -> Outcome {
    let grid = random::direction_grid(16);
    let (mut wrong, mut factor_err, mut missed) = (0usize, 0.0_f64, 0usize);
    for seed in 0..200u64 {
        let mut r = random::rng(40_000 + seed);
        let et = random::spd2(&mut r);
        if seed % 2 == 0 {
            let mu = random::spd3(&mut r);
            let (mt, row) = (mu.boundary_cometric(), NormalRow::of(&mu));
            let rep = recover_normal_mu(&et, &mt, row, row, &grid).unwrap();
            if rep.verdict != NormalVerdict::Equal {
                wrong += 1;
            }
            let bad = recover_normal_mu(&et, &mt, row, perturb_row(row, &mut r), &grid).unwrap();
            if bad.verdict != NormalVerdict::Inconsistent {
                missed += 1;
            }
        } else {
            let a = r.gen_range(0.5..2.0);
            let mt = et.scaled(a).unwrap();
            let row = NormalRow {
                tangential: [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)],
                normal: r.gen_range(0.5..2.0),
            };
            let cf = r.gen_range(0.5..2.0);
            let cand = NormalRow {
                tangential: [row.tangential[0] * cf, row.tangential[1] * cf],
                normal: compensating_mu33(a, row.normal, cf),
            };
            match recover_normal_mu(&et, &mt, row, cand, &grid).unwrap().verdict {
                NormalVerdict::ProportionalWithFactor { c, .. } => factor_err = factor_err.max((c - cf).abs()),
                _ => wrong += 1,
            }
            let bad = recover_normal_mu(&et, &mt, row, perturb_row(cand, &mut r), &grid).unwrap();
            if bad.verdict != NormalVerdict::Inconsistent {
                missed += 1;
            }
        }
    }
    let pass = wrong == 0 && missed == 0 && factor_err <= 1e-9;
    outcome(pass, format!("misclassified {wrong}, fitted c error {factor_err:.2e}, perturbed accepted {missed}"))
}

struct AffineField {
    value: Metric3,
    slopes: [Matrix3<f64>; 3],
}

impl MetricField for AffineField {
    fn value(&self, x: [f64; 3]) -> Metric3 {
        let mut m = *self.value.matrix();
        for (a, s) in self.slopes.iter().enumerate() {
            m += s * x[a];
        }
        Metric3::new(m).unwrap()
    }
}

fn gauge_non_uniqueness() -> Outcome {
    let amplitude = 0.6;
    let h = GaugeProfile::Bump { amplitude, center: [0.0, 0.0, 0.0], radius: 0.5 };
    let g = Arc::new(build_gauge_map(Arc::new(h), GaugeBox::cube(1.0), 1.0).unwrap());
    let t = g.threshold();
    let (mut fixed, mut det_err) = (true, 0.0_f64);
    for i in 0..5 {
        for j in 0..5 {
            let (x1, x2) = (-0.4 + 0.2 * i as f64, -0.4 + 0.2 * j as f64);
            fixed &= g.phi([x1, x2, 0.0]) == [x1, x2, 0.0];
            for k in 0..=4 {
                let x = [x1, x2, t * k as f64 / 4.0];
                det_err = det_err.max((g.jacobian(x).determinant() - g.h(x)).abs());
            }
        }
    }
    let mut symbol_err = 0.0_f64;
    for seed in 0..5 {
        let mut r = random::rng(50_000 + seed);
        let mut slopes = || [random::symmetric(&mut r, 0.05), random::symmetric(&mut r, 0.05), random::symmetric(&mut r, 0.05)];
        let (s1, s2) = (slopes(), slopes());
        let (e, m) = pair(50_000 + seed);
        let base = HatPairField {
            eps_hat: Arc::new(AffineField { value: e, slopes: s1 }),
            mu_hat: Arc::new(AffineField { value: m, slopes: s2 }),
        };
        let pulled = pullback_parameters(&base, g.clone());
        for x in [[0.0, 0.0, 0.0], [0.1, -0.2, 0.0], [0.25, 0.15, 0.0]] {
            let reduce = |p: maxsym::metrics_geometry::HatPair| {
                let ch = to_boundary_normal(&p.eps_hat, &p.mu_hat).unwrap();
                (ch.reduced, ch.mu_in_eps_bnc)
            };
            let ((e1, m1), (e2, m2)) = (reduce(base.at(x)), reduce(pulled.at(x)));
            for xi in random::direction_grid(8) {
                let a = impedance_matrix(&BoundarySymbolInput::new(e1, m1, 1.0, xi, covector([0.0; 3])).unwrap()).unwrap();
                let b = impedance_matrix(&BoundarySymbolInput::new(e2, m2, 1.0, xi, covector([0.0; 3])).unwrap()).unwrap();
                symbol_err = symbol_err.max((a - b).norm() / a.norm());
            }
        }
    }
    // |g_ε′|/|g_ε| = det DΦ = h below the threshold
    let metric = Metric3::from_upper([1.2, 0.1, 0.2, 0.9, 0.05, 1.4]).unwrap();
    let mut deviation = 0.0_f64;
    for k in 0..=8 {
        let dphi = g.jacobian([0.0, 0.0, t * k as f64 / 8.0]);
        let r = determinant_ratio(&metric, 0.8, &dphi).unwrap();
        deviation = deviation.max((1.0 / r.ratio - 1.0).abs());
    }
    let pass = fixed && det_err <= 1e-10 && symbol_err <= 1e-12 && (deviation - amplitude).abs() <= 1e-6;
    outcome(
        pass,
        format!(
            "boundary fixed {fixed}, det DΦ − h {det_err:.2e}, symbols {symbol_err:.2e}, density deviation {deviation:.6} (bump {amplitude})"
        ),
    )
}

fn jet_injectivity() -> Outcome {
    let grid = random::direction_grid(8);
    let (mut h_min, mut e_min, mut coeff_min, mut syl_min) = (f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let (mut lin_e_min, mut lin_h_kernel, mut conformal) = (f64::INFINITY, 0usize, 0.0_f64);
    let mut skipped = 0;
    for kappa in 1..=3 {
        for seed in 0..100 {
            let (e, m) = bnc_pair(60_000 + 1000 * kappa as u64 + seed);
            let maps = (
                jet_residual_h(&e, &m, kappa, &grid, JetAssembly::LeadingTerm),
                jet_residual_e(&e, &m, kappa, &grid, JetAssembly::LeadingTerm),
                jet_residual_h(&e, &m, kappa, &grid, JetAssembly::Linearized),
                jet_residual_e(&e, &m, kappa, &grid, JetAssembly::Linearized),
            );
            let (Ok(hm), Ok(em), Ok(lh), Ok(le)) = maps else {
                skipped += 1;
                continue;
            };
            h_min = h_min.min(hm.relative_sigma_min());
            e_min = e_min.min(em.combined.relative_sigma_min());
            coeff_min = em.coefficients.iter().copied().fold(coeff_min, f64::min);
            lin_e_min = lin_e_min.min(le.combined.relative_sigma_min());
            lin_h_kernel = lin_h_kernel.max(lh.kernel_dimension(1e-10));
            // the kernel of the linearized H map is the conformal direction ε̃⁻¹
            let ti = e.tangential_block().inverse();
            let x = [ti.matrix()[(0, 0)], ti.matrix()[(0, 1)], ti.matrix()[(1, 1)]];
            conformal = conformal.max(lh.apply(&x).norm() / (lh.matrix.norm() * ti.norm()));
            if kappa == 1 {
                let s = symbols(&e, &m);
                for xi in &grid {
                    let (b, _) = principal_b(&s, &e, &m, xi).unwrap();
                    let scale = (s.t_inverse() * s.a_at(xi) + b).norm() + b.norm();
                    syl_min = syl_min.min(sylvester_uniqueness_check(&s, &b, xi) / scale);
                }
            }
        }
    }
    let pass = h_min >= 1e-6 && e_min >= 1e-6 && coeff_min > 0.0 && syl_min > 1e-10 && skipped == 0;
    outcome(
        pass,
        format!(
            "H σ_min/σ_max {h_min:.2e}, E {e_min:.2e}, stage-2 coefficient {coeff_min:.2e}, Sylvester {syl_min:.2e}; \
             density-inclusive maps: E {lin_e_min:.2e}, H kernel dimension {lin_h_kernel} along ε̃⁻¹ ({conformal:.1e})"
        ),
    )
}

fn spd_local(r: &mut SeededRng) -> Matrix3<f64> {
    let m = Matrix3::from_fn(|_, _| r.gen_range(-0.5..0.5));
    m.transpose() * m + Matrix3::identity() * 0.5
}

fn algebraic_identities() -> Outcome {
    let (mut cof, mut alt) = (0.0_f64, 0.0_f64);
    for seed in 0..500 {
        let g = random::spd3(&mut random::rng(70_000 + seed));
        let gi = g.inverse();
        let scale_c = g.det() * gi.matrix().amax().powi(2) + g.matrix().amax();
        let scale_a = gi.matrix().amax().powi(3);
        cof = cof.max(cofactor_identity_residual(&g) / scale_c);
        alt = alt.max(alt_det_inverse_residual(&g) / scale_a);
    }
    let mut hat = 0.0_f64;
    for seed in 0..1000 {
        let mut r = random::rng(80_000 + seed);
        let g = Metric3::new(spd_local(&mut r)).unwrap();
        let eps = g.inverse().matrix() * spd_local(&mut r);
        let mu = g.inverse().matrix() * spd_local(&mut r);
        let p = ParameterTriple::new(eps, mu, g, 1.0).unwrap();
        hat = hat.max(hat_relation_residual(&p, &build_hat_pair(&p).unwrap()).unwrap());
    }
    let pass = cof <= 1e-12 && alt <= 1e-12 && hat <= 1e-13;
    outcome(pass, format!("cofactor {cof:.2e}, alternating {alt:.2e}, hat relation {hat:.2e}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("quadratic factorization identity", quadratic_identity),
        ("Jordan and contour routes agree", route_agreement),
        ("spectral contract", spectral_contract),
        ("full factorization", full_factorization),
        ("boundary-map structure", boundary_structure),
        ("tangential recovery round trip", tangential_round_trip),
        ("normal-row dichotomy", normal_dichotomy),
        ("gauge non-uniqueness", gauge_non_uniqueness),
        ("jet injectivity", jet_injectivity),
        ("algebraic identities", algebraic_identities),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
