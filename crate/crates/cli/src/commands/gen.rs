use maxsym::random::ProblemKind;

use crate::problem::ProblemFile;

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, env = "MAXSYM_SEED", default_value_t = 0)]
    pub seed: u64,
    /// isotropic, diagonal, generic or near-degenerate
    #[arg(long, default_value = "generic")]
    pub kind: ProblemKind,
    /// Number of normal derivatives in the jets
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
}

pub fn run(a: &Args) -> anyhow::Result<String> {
    let p = ProblemFile::generate(a.seed, a.kind, a.order, a.omega);
    p.validate()?;
    Ok(p.to_json())
}
