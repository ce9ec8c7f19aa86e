use std::sync::Arc;

use anyhow::bail;
use maxsym::boundary_maps::{admittance_matrix, impedance_matrix, BoundarySymbolInput};
use maxsym::metrics_geometry::{
    build_gauge_map, determinant_ratio, pullback_parameters, to_boundary_normal, GaugeBox, GaugeMap, GaugeProfile,
    HatPairField, MetricField,
};
use maxsym::random;
use maxsym::tensor_core::covector;
use maxsym::{HatPair, Metric3};
use nalgebra::Matrix3;
use serde_json::json;

use crate::report::{Report, Row};

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// h ≡ 1, the identity gauge
    Constant,
    /// compactly supported bump 1 + A·exp(1 − 1/(1 − r²))
    #[value(alias = "gaussian-bump")]
    Bump,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, env = "MAXSYM_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Profile::Bump)]
    pub profile: Profile,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub amplitude: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.0, 0.0], allow_hyphen_values = true)]
    pub center: Vec<f64>,
    /// Bump radius
    #[arg(long, default_value_t = 0.5)]
    pub width: f64,
}

pub const DET_TOL: f64 = 1e-10;
pub const SYMBOL_TOL: f64 = 1e-12;
pub const RATIO_TOL: f64 = 1e-9;

/// m₀ + Σ xₐ Sₐ
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
        Metric3::new(m).expect("small slopes keep the field positive definite")
    }
}

fn seeded_pair(seed: u64) -> HatPairField {
    let mut r = random::rng(seed);
    let (e, m) = (random::spd3(&mut r), random::spd3(&mut r));
    let mut slopes = || [random::symmetric(&mut r, 0.05), random::symmetric(&mut r, 0.05), random::symmetric(&mut r, 0.05)];
    let (s1, s2) = (slopes(), slopes());
    HatPairField { eps_hat: Arc::new(AffineField { value: e, slopes: s1 }), mu_hat: Arc::new(AffineField { value: m, slopes: s2 }) }
}

pub struct GaugeOutcome {
    pub boundary_displacement: f64,
    pub det_error: f64,
    pub symbol_error: f64,
    pub ratio_error: f64,
    pub max_density_deviation: f64,
    pub threshold: f64,
    pub table: Vec<[f64; 4]>,
}

fn reduce(p: HatPair) -> anyhow::Result<(Metric3, Metric3)> {
    let ch = to_boundary_normal(&p.eps_hat, &p.mu_hat)?;
    Ok((ch.reduced, ch.mu_in_eps_bnc))
}

/// Largest relative difference of the boundary symbol matrices of the seeded
/// pair and its pullback, at boundary points `xs`.
pub fn symbol_difference(g: Arc<GaugeMap>, seed: u64, xs: &[[f64; 3]]) -> anyhow::Result<f64> {
    let base = seeded_pair(seed);
    let pulled = pullback_parameters(&base, g);
    let mut worst = 0.0_f64;
    for &x in xs {
        let ((e1, m1), (e2, m2)) = (reduce(base.at(x))?, reduce(pulled.at(x))?);
        for xi in random::direction_grid(8) {
            let a = BoundarySymbolInput::new(e1, m1, 1.0, xi, covector([0.0; 3]))?;
            let b = BoundarySymbolInput::new(e2, m2, 1.0, xi, covector([0.0; 3]))?;
            let (za, zb) = (impedance_matrix(&a)?, impedance_matrix(&b)?);
            let (ya, yb) = (admittance_matrix(&a)?, admittance_matrix(&b)?);
            worst = worst.max((za - zb).norm() / za.norm()).max((ya - yb).norm() / ya.norm());
        }
    }
    Ok(worst)
}

/// Boundary fixing, det DΦ = h, agreement of boundary symbols and the volume
/// density ratio, for the pair drawn from `seed`.
pub fn evaluate(g: Arc<GaugeMap>, seed: u64) -> anyhow::Result<GaugeOutcome> {
    let t = g.threshold();
    let (mut displacement, mut det_error) = (0.0_f64, 0.0_f64);
    for i in 0..5 {
        for j in 0..5 {
            let (x1, x2) = (-0.4 + 0.2 * i as f64, -0.4 + 0.2 * j as f64);
            let p = g.phi([x1, x2, 0.0]);
            displacement = displacement.max((p[0] - x1).abs()).max((p[1] - x2).abs()).max(p[2].abs());
            for k in 0..=4 {
                let x = [x1, x2, t * k as f64 / 4.0];
                det_error = det_error.max((g.jacobian(x).determinant() - g.h(x)).abs());
            }
        }
    }
    let symbol_error = symbol_difference(g.clone(), seed, &[[0.0, 0.0, 0.0], [0.1, -0.2, 0.0], [0.25, 0.15, 0.0]])?;
    let metric = Metric3::from_upper([1.2, 0.1, 0.2, 0.9, 0.05, 1.4])?;
    let (mut ratio_error, mut deviation) = (0.0_f64, 0.0_f64);
    let mut table = Vec::new();
    for k in 0..=8 {
        let x = [0.0, 0.0, t * k as f64 / 8.0];
        let dphi = g.jacobian(x);
        let r = determinant_ratio(&metric, 0.8, &dphi)?;
        ratio_error = ratio_error.max((r.ratio * r.jacobian_det - 1.0).abs());
        deviation = deviation.max((1.0 / r.ratio - 1.0).abs());
        table.push([x[2], g.h(x), r.jacobian_det, r.ratio]);
    }
    Ok(GaugeOutcome {
        boundary_displacement: displacement,
        det_error,
        symbol_error,
        ratio_error,
        max_density_deviation: deviation,
        threshold: t,
        table,
    })
}

pub fn gauge_map(profile: GaugeProfile) -> anyhow::Result<Arc<GaugeMap>> {
    Ok(Arc::new(build_gauge_map(Arc::new(profile), GaugeBox::cube(1.0), 1.0)?))
}

pub fn run(a: &Args, command: Vec<String>) -> anyhow::Result<Report> {
    let profile = match a.profile {
        Profile::Constant => GaugeProfile::Constant,
        Profile::Bump => {
            if a.center.len() != 3 {
                bail!("--center takes three values, got {}", a.center.len());
            }
            if !(a.width > 0.0) {
                bail!("width must be positive");
            }
            GaugeProfile::Bump { amplitude: a.amplitude, center: [a.center[0], a.center[1], a.center[2]], radius: a.width }
        }
    };
    let g = gauge_map(profile)?;
    let o = evaluate(g.clone(), a.seed)?;
    let mut report = Report::new(command);
    report.push(Row::check("boundary displacement", o.boundary_displacement, 0.0));
    report.push(Row::check("det DΦ − h", o.det_error, DET_TOL));
    report.push(Row::check("boundary symbol difference", o.symbol_error, SYMBOL_TOL));
    report.push(Row::check("density ratio · det DΦ − 1", o.ratio_error, RATIO_TOL));
    report.results = json!({
        "profile": profile,
        "constants": g.constants,
        "threshold": o.threshold,
        "columns": ["x3", "h", "det_dphi", "density_ratio"],
        "table": o.table,
        "max_density_deviation": o.max_density_deviation,
    });
    Ok(report)
}
