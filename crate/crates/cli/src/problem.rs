//! Problem files: seeded (ε̂, μ̂) jets at one boundary point.

use std::path::Path;

use anyhow::{bail, Context};
use maxsym::metrics_geometry::to_boundary_normal;
use maxsym::random::{problem_jets, ProblemKind};
use maxsym::{Metric3, MetricJet};
use serde::{Deserialize, Serialize};

pub const VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    /// ε̂ is in boundary normal form at the base point
    Bnc,
    General,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub version: String,
    pub omega: f64,
    pub chart: Chart,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ProblemKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub eps_hat_jet: MetricJet,
    pub mu_hat_jet: MetricJet,
}

impl ProblemFile {
    pub fn generate(seed: u64, kind: ProblemKind, order: usize, omega: f64) -> Self {
        let (eps_hat_jet, mu_hat_jet) = problem_jets(seed, kind, order);
        Self {
            version: VERSION.into(),
            omega,
            chart: Chart::Bnc,
            kind: Some(kind),
            seed: Some(seed),
            eps_hat_jet,
            mu_hat_jet,
        }
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let p: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.version != VERSION {
            bail!("unsupported problem version '{}'", self.version);
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            bail!("omega must be positive, got {}", self.omega);
        }
        if self.chart == Chart::Bnc && !self.eps_hat_jet.value.is_boundary_normal(1e-12) {
            bail!("chart is declared bnc but ε̂ is not in boundary normal form");
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    /// Base-point values (ε̂, μ̂) in the boundary normal chart of ε̂.
    pub fn boundary_values(&self) -> anyhow::Result<(Metric3, Metric3)> {
        let (e, m) = (self.eps_hat_jet.value, self.mu_hat_jet.value);
        match self.chart {
            Chart::Bnc => Ok((e, m)),
            Chart::General => {
                let c = to_boundary_normal(&e, &m)?;
                Ok((c.reduced, c.mu_in_eps_bnc))
            }
        }
    }
}
