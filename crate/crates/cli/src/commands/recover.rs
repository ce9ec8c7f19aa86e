use std::path::PathBuf;

use anyhow::{bail, Context};
use maxsym::recovery::{
    jet_residual_e, jet_residual_h, recover_normal_mu, recover_tangential, recover_tangential_mu, JetAssembly, JetMap,
    MapKind, NormalRow, DEFAULT_GRID,
};
use maxsym::{Metric2, NormalVerdict, SymbolSampler};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::problem::ProblemFile;
use crate::report::{Report, Row};

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// ε̃ and μ̃ from λ_ε̂ and λ_μ̂
    Tangential,
    /// compare a candidate normal row of μ̂ with the boundary data
    Normal,
    /// conditioning of the order-κ perturbation-to-residual maps
    Jets,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(value_enum)]
    pub mode: Mode,
    /// Problem file providing the forward maps
    #[arg(long, conflicts_with = "samples")]
    pub problem: Option<PathBuf>,
    /// Tabulated samples {"impedance": ..., "admittance": ...}
    #[arg(long)]
    pub samples: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub directions: usize,
    /// Relative complex noise added to forward samples; with --samples, the
    /// noise level the tolerances assume
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub noise_seed: u64,
    /// Write the samples used to this file
    #[arg(long)]
    pub write_samples: Option<PathBuf>,
    /// Candidate normal row μ̂^{31},μ̂^{32},μ̂^{33} (normal mode)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub candidate: Option<Vec<f64>>,
    /// Jet order κ (jets mode)
    #[arg(long, default_value_t = 1)]
    pub kappa: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleFile {
    pub impedance: SymbolSampler,
    pub admittance: SymbolSampler,
}

pub const EXACT_TOL: f64 = 1e-10;
pub const COND_LIMIT: f64 = 1e6;
const KERNEL_TOL: f64 = 1e-10;

pub fn error_threshold(noise: f64) -> f64 {
    EXACT_TOL.max(100.0 * noise)
}

fn problem(a: &Args) -> anyhow::Result<ProblemFile> {
    match &a.problem {
        Some(p) => ProblemFile::load(p),
        None => bail!("this mode needs --problem"),
    }
}

fn samples(a: &Args) -> anyhow::Result<(SampleFile, Option<ProblemFile>)> {
    let (file, p) = match (&a.problem, &a.samples) {
        (Some(_), _) => {
            let p = problem(a)?;
            let (e, m) = p.boundary_values()?;
            let z = SymbolSampler::forward(MapKind::Impedance, e, m, p.omega)?;
            let y = SymbolSampler::forward(MapKind::Admittance, e, m, p.omega)?;
            (SampleFile { impedance: z, admittance: y }, Some(p))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let s: SampleFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            if s.impedance.kind() != MapKind::Impedance || s.admittance.kind() != MapKind::Admittance {
                bail!("sample file has the impedance and admittance entries swapped");
            }
            (s, None)
        }
        (None, None) => bail!("need --problem or --samples"),
    };
    if !(a.noise >= 0.0 && a.noise.is_finite()) {
        bail!("noise must be a non-negative number");
    }
    let file = if p.is_some() && (a.noise > 0.0 || a.write_samples.is_some()) {
        let grid = super::grid(a.directions)?;
        SampleFile {
            impedance: file.impedance.tabulate(&grid, a.noise, a.noise_seed)?,
            admittance: file.admittance.tabulate(&grid, a.noise, a.noise_seed.wrapping_add(1))?,
        }
    } else {
        file
    };
    if let Some(path) = &a.write_samples {
        std::fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
    }
    Ok((file, p))
}

fn rel2(a: &Metric2, b: &Metric2) -> f64 {
    (a.matrix() - b.matrix()).norm() / b.norm()
}

fn tangential(a: &Args, report: &mut Report) -> anyhow::Result<(Metric2, Metric2, Option<ProblemFile>)> {
    let (s, p) = samples(a)?;
    let re = recover_tangential(&s.impedance)?;
    let rm = recover_tangential_mu(&s.admittance)?;
    let tol = error_threshold(a.noise);
    report.push(Row::check("fit residual ε̃", re.fit_residual, tol));
    report.push(Row::check("fit residual μ̃", rm.fit_residual, tol));
    let mut results = json!({
        "eps_tilde": re.metric.to_upper(),
        "mu_tilde": rm.metric.to_upper(),
        "directions": re.directions,
        "noise": a.noise,
    });
    if let Some(p) = &p {
        let (e, m) = p.boundary_values()?;
        let (et, mt) = (e.tangential_block(), m.boundary_cometric());
        report.push(Row::check("relative error ε̃", rel2(&re.metric, &et), tol));
        report.push(Row::check("relative error μ̃", rel2(&rm.metric, &mt), tol));
        results["true_eps_tilde"] = json!(et.to_upper());
        results["true_mu_tilde"] = json!(mt.to_upper());
    }
    report.results = results;
    Ok((re.metric, rm.metric, p))
}

fn normal(a: &Args, report: &mut Report) -> anyhow::Result<()> {
    if a.problem.is_none() {
        bail!("normal mode needs --problem (the base row of μ̂)");
    }
    let (et, mt, p) = tangential(a, report)?;
    let p = p.expect("problem present");
    let (_, m) = p.boundary_values()?;
    let base = NormalRow::of(&m);
    let candidate = match &a.candidate {
        Some(v) if v.len() != 3 => bail!("--candidate takes three values, got {}", v.len()),
        Some(v) => NormalRow { tangential: [v[0], v[1]], normal: v[2] },
        None => base,
    };
    let rep = recover_normal_mu(&et, &mt, base, candidate, &super::grid(a.directions.max(8))?)?;
    let consistent = rep.verdict != NormalVerdict::Inconsistent;
    report.push(Row::check("χ identity residual", rep.max_residual, maxsym::recovery::NORMAL_TOL.max(100.0 * a.noise)));
    report.push(
        Row::check("candidate consistent", if consistent { 0.0 } else { 1.0 }, 0.0)
            .with_note(format!("{:?}", rep.verdict)),
    );
    let tangential = std::mem::take(&mut report.results);
    report.results = json!({
        "tangential": tangential,
        "base_row": base,
        "candidate_row": candidate,
        "report": rep,
    });
    Ok(())
}

fn map_json(m: &JetMap) -> serde_json::Value {
    json!({
        "unknowns": m.unknowns,
        "singular_values": m.singular_values,
        "relative_sigma_min": m.relative_sigma_min(),
        "kernel_dimension": m.kernel_dimension(KERNEL_TOL),
    })
}

fn condition(m: &JetMap) -> f64 {
    let r = m.relative_sigma_min();
    if r > 0.0 {
        1.0 / r
    } else {
        f64::INFINITY
    }
}

fn jets(a: &Args, report: &mut Report) -> anyhow::Result<()> {
    let p = problem(a)?;
    let (e, m) = p.boundary_values()?;
    let grid = super::grid(a.directions)?;
    let h = jet_residual_h(&e, &m, a.kappa, &grid, JetAssembly::LeadingTerm)?;
    let ee = jet_residual_e(&e, &m, a.kappa, &grid, JetAssembly::LeadingTerm)?;
    let lh = jet_residual_h(&e, &m, a.kappa, &grid, JetAssembly::Linearized)?;
    let le = jet_residual_e(&e, &m, a.kappa, &grid, JetAssembly::Linearized)?;
    report.push(Row::check("H map condition", condition(&h), COND_LIMIT));
    report.push(Row::check("E map condition", condition(&ee.combined), COND_LIMIT));
    let cmin = ee.coefficients.iter().copied().fold(f64::INFINITY, f64::min);
    report.push(Row::check("1 / min stage-2 coefficient", 1.0 / cmin, COND_LIMIT));
    report.results = json!({
        "kappa": a.kappa,
        "kernel_dimension": h.kernel_dimension(KERNEL_TOL) + ee.combined.kernel_dimension(KERNEL_TOL),
        "h": map_json(&h),
        "e": { "stage1": map_json(&ee.stage1), "stage2": map_json(&ee.stage2), "combined": map_json(&ee.combined) },
        "stage2_coefficients": ee.coefficients,
        "density_inclusive": { "h": map_json(&lh), "e": map_json(&le.combined) },
    });
    Ok(())
}

pub fn run(a: &Args, command: Vec<String>) -> anyhow::Result<Report> {
    let mut report = Report::new(command);
    match a.mode {
        Mode::Tangential => {
            tangential(a, &mut report)?;
        }
        Mode::Normal => normal(a, &mut report)?,
        Mode::Jets => jets(a, &mut report)?,
    }
    Ok(report)
}
