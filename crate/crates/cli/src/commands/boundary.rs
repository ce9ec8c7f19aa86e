use std::path::PathBuf;

use maxsym::boundary_maps::{
    admittance_matrix, admittance_principal, field_symbol_e, field_symbol_h, impedance_matrix, impedance_principal,
    BoundarySymbolInput,
};
use maxsym::tensor_core::covector;
use serde_json::json;

use crate::jsonfmt::{cmatrix, complex, cvector};
use crate::problem::ProblemFile;
use crate::report::{Report, Row};

#[derive(clap::Args, Debug)]
pub struct Args {
    pub file: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub directions: usize,
    /// Tangential data F = (F₁, F₂)
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0], allow_hyphen_values = true)]
    pub data: Vec<f64>,
}

pub const STRUCTURE_TOL: f64 = 1e-12;

pub fn run(a: &Args, command: Vec<String>) -> anyhow::Result<Report> {
    if a.data.len() != 2 {
        anyhow::bail!("--data takes two values, got {}", a.data.len());
    }
    let p = ProblemFile::load(&a.file)?;
    let (e, m) = p.boundary_values()?;
    let f = covector([a.data[0], a.data[1], 0.0]);
    let mut report = Report::new(command);
    let (mut parallel, mut composite) = (0.0_f64, 0.0_f64);
    let mut dirs = Vec::new();
    for xi in super::grid(a.directions)? {
        let inp = BoundarySymbolInput::new(e, m, p.omega, xi, f)?;
        let (z, y) = (impedance_principal(&inp)?, admittance_principal(&inp)?);
        let (zm, ym) = (impedance_matrix(&inp)?, admittance_matrix(&inp)?);
        let perp = (z[0] * (-xi[1]) + z[1] * xi[0]).norm() + z[2].norm();
        if z.norm() > 0.0 {
            parallel = parallel.max(perp / (z.norm() * xi.norm()));
        }
        composite = composite.max((ym * zm).norm() / (ym.norm() * zm.norm()));
        let h = field_symbol_h(&inp).map(|s| json!({ "a": complex(s.a_coeff), "b": complex(s.b_coeff), "value": cvector(&s.value) }));
        let ef = field_symbol_e(&inp)
            .map(|s| json!({ "a": complex(s.a_coeff), "b": complex(s.b_coeff), "value": cvector(&s.value), "normal": complex(s.value[2]) }));
        let unavailable = |e: maxsym::Error| json!({ "status": "unavailable", "reason": e.to_string() });
        dirs.push(json!({
            "xi": [xi[0], xi[1]],
            "impedance": cvector(&z),
            "admittance": cvector(&y),
            "impedance_matrix": cmatrix(&zm),
            "admittance_matrix": cmatrix(&ym),
            "h0": h.unwrap_or_else(unavailable),
            "e0": ef.unwrap_or_else(unavailable),
        }));
    }
    report.push(Row::check("impedance range ∥ ξ̃", parallel, STRUCTURE_TOL));
    report.push(Row::check("λ_μ∘λ_ε", composite, STRUCTURE_TOL));
    report.results = json!({ "omega": p.omega, "data": [a.data[0], a.data[1]], "directions": dirs });
    Ok(report)
}
