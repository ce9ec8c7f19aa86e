//! Principal symbols of the impedance and admittance maps and of the boundary
//! fields.
//!
//! Everything is evaluated at a boundary point in boundary normal coordinates
//! for ε̂, so ε̂ = blockdiag(ε̃, 1) and the conormal is ν = dx³. Tangential
//! objects are the first two components of the full covectors.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics_geometry::to_boundary_normal;
use crate::symbol_calculus::{chi, upper_root, DEGENERACY_TOL};
use crate::tensor_core::{
    bilinear_form, boundary_hodge_1form, boundary_hodge_area, c, extend, nu, restrict, wedge2, Covector3, Metric2,
    Metric3, TangentialCovector, C64,
};

const BNC_TOL: f64 = 1e-12;

/// Data of one boundary symbol evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySymbolInput {
    /// ε̂ in its own boundary normal form blockdiag(ε̃, 1).
    pub eps_hat: Metric3,
    /// μ̂ in the same chart.
    pub mu_hat: Metric3,
    pub omega: f64,
    pub xi_t: Vector2<f64>,
    /// F (impedance, H side) or G (admittance, E side); only ι* of it is used.
    pub data: Covector3,
}

impl BoundarySymbolInput {
    pub fn new(eps_hat: Metric3, mu_hat: Metric3, omega: f64, xi_t: Vector2<f64>, data: Covector3) -> Result<Self> {
        let inp = Self { eps_hat, mu_hat, omega, xi_t, data };
        inp.validate()?;
        Ok(inp)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.xi_t.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidInput("tangential covector must be nonzero".into()));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidInput("frequency must be positive".into()));
        }
        if !self.eps_hat.is_boundary_normal(BNC_TOL * self.eps_hat.norm()) {
            return Err(Error::InvalidInput("ε̂ is not in boundary normal form".into()));
        }
        if self.data.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidInput("non-finite boundary data".into()));
        }
        Ok(())
    }

    pub fn with_data(&self, data: Covector3) -> Self {
        Self { data, ..*self }
    }

    pub fn with_xi(&self, xi_t: Vector2<f64>) -> Self {
        Self { xi_t, ..*self }
    }

    /// ε̃ = ι*ε̂.
    pub fn eps_tilde(&self) -> Metric2 {
        self.eps_hat.tangential_block()
    }

    /// μ̃: the boundary cometric of μ̂, i.e. its tangential block in its own
    /// boundary normal chart.
    pub fn mu_tilde(&self) -> Metric2 {
        self.mu_hat.boundary_cometric()
    }

    fn xi_c(&self) -> TangentialCovector {
        Vector2::new(c(self.xi_t[0], 0.0), c(self.xi_t[1], 0.0))
    }

    fn data_t(&self) -> TangentialCovector {
        restrict(&self.data)
    }
}

/// a·χ + b·ξ decomposition of a boundary field symbol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSymbol {
    pub a_coeff: C64,
    pub b_coeff: C64,
    pub value: Covector3,
}

fn check_gap(xe: C64, xm: C64, xi: &Vector2<f64>) -> Result<()> {
    let gap = (xe - xm).norm();
    if gap < DEGENERACY_TOL * xi.norm() {
        return Err(Error::Degenerate(gap));
    }
    Ok(())
}

/// ξ_ε̂ = (ξ̃, ξ_ε3) in the ε̂ chart.
pub fn xi_eps(inp: &BoundarySymbolInput) -> Result<Covector3> {
    Ok(extend(&inp.xi_t, upper_root(&inp.eps_hat, &inp.xi_t)?))
}

/// ξ_μ̂ = (ξ̃, ξ_μ3) in the ε̂ chart.
pub fn xi_mu(inp: &BoundarySymbolInput) -> Result<Covector3> {
    Ok(extend(&inp.xi_t, upper_root(&inp.mu_hat, &inp.xi_t)?))
}

/// χ_ε̂ = ∗_ε̂(ξ_ε̂ ∧ ε̂⁻¹μ̂ξ_ε̂).
pub fn chi_eps(inp: &BoundarySymbolInput) -> Result<Covector3> {
    Ok(chi(&inp.eps_hat, &inp.mu_hat, &xi_eps(inp)?))
}

/// χ_μ̂ = ∗_μ̂(ξ_μ̂ ∧ μ̂⁻¹ε̂ξ_μ̂).
pub fn chi_mu(inp: &BoundarySymbolInput) -> Result<Covector3> {
    Ok(chi(&inp.mu_hat, &inp.eps_hat, &xi_mu(inp)?))
}

/// ⟨ν_ε̂, ξ_ε̂⟩_ε̂ = i|ξ̃|_ε̃.
fn nu_pairing_eps(inp: &BoundarySymbolInput, xe: &Covector3) -> C64 {
    bilinear_form(&nu(), xe, &inp.eps_hat)
}

/// ⟨ν_μ̂, ξ_μ̂⟩_μ̂ evaluated in the boundary normal chart of μ̂.
fn nu_pairing_mu(inp: &BoundarySymbolInput) -> Result<C64> {
    let chart = to_boundary_normal(&inp.mu_hat, &inp.eps_hat)?;
    let xm = extend(&inp.xi_t, upper_root(&chart.reduced, &inp.xi_t)?);
    Ok(bilinear_form(&nu(), &xm, &chart.reduced))
}

/// λ_ε̂(F) = −ξ̃ ∗_ε̃(ξ̃∧F) / (ω⟨ν_ε̂, ξ_ε̂⟩_ε̂), extended by 0 in the normal slot.
pub fn impedance_principal(inp: &BoundarySymbolInput) -> Result<Covector3> {
    inp.validate()?;
    let xe = xi_eps(inp)?;
    let star = boundary_hodge_area(wedge2(&inp.xi_c(), &inp.data_t()), &inp.eps_tilde());
    let k = -star / (nu_pairing_eps(inp, &xe) * inp.omega);
    Ok(extend(&inp.xi_t, c(0.0, 0.0)) * k)
}

/// λ_μ̂(G) = ξ̃ ∗_μ̃(ξ̃∧G) / (ω⟨ν_μ̂, ξ_μ̂⟩_μ̂).
pub fn admittance_principal(inp: &BoundarySymbolInput) -> Result<Covector3> {
    inp.validate()?;
    let star = boundary_hodge_area(wedge2(&inp.xi_c(), &inp.data_t()), &inp.mu_tilde());
    let k = star / (nu_pairing_mu(inp)? * inp.omega);
    Ok(extend(&inp.xi_t, c(0.0, 0.0)) * k)
}

/// The 2×2 matrix of F ↦ ι*λ_ε̂(F).
pub fn impedance_matrix(inp: &BoundarySymbolInput) -> Result<Matrix2<C64>> {
    symbol_matrix(inp, impedance_principal)
}

/// The 2×2 matrix of G ↦ ι*λ_μ̂(G).
pub fn admittance_matrix(inp: &BoundarySymbolInput) -> Result<Matrix2<C64>> {
    symbol_matrix(inp, admittance_principal)
}

fn symbol_matrix(
    inp: &BoundarySymbolInput,
    f: fn(&BoundarySymbolInput) -> Result<Covector3>,
) -> Result<Matrix2<C64>> {
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let c0 = restrict(&f(&inp.with_data(Covector3::new(one, zero, zero)))?);
    let c1 = restrict(&f(&inp.with_data(Covector3::new(zero, one, zero)))?);
    Ok(Matrix2::from_columns(&[c0, c1]))
}

/// H⁽⁰⁾ = a_ε̂ χ_ε̂ + b_ε̂ ξ_μ̂ with
/// a_ε̂ = ∗_ε̃(ξ̃∧F)/(⟨ν,ξ_ε̂⟩|ξ_ε̂|²_μ̂), b_ε̂ = ∗_ε̃(F∧χ̃_ε̂)/(same).
pub fn field_symbol_h(inp: &BoundarySymbolInput) -> Result<FieldSymbol> {
    inp.validate()?;
    let xe = xi_eps(inp)?;
    let xm = xi_mu(inp)?;
    check_gap(xe[2], xm[2], &inp.xi_t)?;
    let ch = chi(&inp.eps_hat, &inp.mu_hat, &xe);
    let den = nu_pairing_eps(inp, &xe) * bilinear_form(&xe, &xe, &inp.mu_hat);
    let et = inp.eps_tilde();
    let f = inp.data_t();
    let a = boundary_hodge_area(wedge2(&inp.xi_c(), &f), &et) / den;
    let b = boundary_hodge_area(wedge2(&f, &restrict(&ch)), &et) / den;
    Ok(FieldSymbol { a_coeff: a, b_coeff: b, value: ch * a + xm * b })
}

/// E⁽⁰⁾ = a_μ̂ χ_μ̂ + b_μ̂ ξ_ε̂ in the ε̂ chart, with a_μ̂, b_μ̂ the formulas of
/// [`field_symbol_h`] under ε̂ ↔ μ̂.
pub fn field_symbol_e(inp: &BoundarySymbolInput) -> Result<FieldSymbol> {
    inp.validate()?;
    let xe = xi_eps(inp)?;
    let xm = xi_mu(inp)?;
    check_gap(xe[2], xm[2], &inp.xi_t)?;
    let ch = chi(&inp.mu_hat, &inp.eps_hat, &xm);
    let den = nu_pairing_mu(inp)? * bilinear_form(&xm, &xm, &inp.eps_hat);
    let mt = inp.mu_tilde();
    let g = inp.data_t();
    let a = boundary_hodge_area(wedge2(&inp.xi_c(), &g), &mt) / den;
    let b = boundary_hodge_area(wedge2(&g, &restrict(&ch)), &mt) / den;
    Ok(FieldSymbol { a_coeff: a, b_coeff: b, value: ch * a + xe * b })
}

/// E₃⁽⁰⁾(G) in the ε̂ chart.
pub fn normal_e_symbol(inp: &BoundarySymbolInput) -> Result<C64> {
    Ok(field_symbol_e(inp)?.value[2])
}

/// Two-term closed form of E₃⁽⁰⁾(G):
/// χ_μ3 ∗_μ̃(ξ̃∧G) / (|ξ̃|_μ̃|ξ̃|_ε̃(ξ_μ3 + ξ_ε3)) − i√|ε̃| ∗_μ̃(ξ̃_⊥∧G) / (√|μ̃||ξ̃|_ε̃),
/// where ξ̃_⊥ = ∗_ε̃ξ̃.
pub fn normal_e_closed_form(inp: &BoundarySymbolInput) -> Result<C64> {
    inp.validate()?;
    let xe = xi_eps(inp)?;
    let xm = xi_mu(inp)?;
    check_gap(xe[2], xm[2], &inp.xi_t)?;
    let (et, mt) = (inp.eps_tilde(), inp.mu_tilde());
    let (le, lm) = (et.length(&inp.xi_t), mt.length(&inp.xi_t));
    let g = inp.data_t();
    let ch3 = chi(&inp.mu_hat, &inp.eps_hat, &xm)[2];
    let perp = boundary_hodge_1form(&inp.xi_c(), &et);
    let t1 = ch3 * boundary_hodge_area(wedge2(&inp.xi_c(), &g), &mt) / ((xm[2] + xe[2]) * (lm * le));
    let t2 = c(0.0, (et.det() / mt.det()).sqrt() / le) * boundary_hodge_area(wedge2(&perp, &g), &mt);
    Ok(t1 - t2)
}

/// Normal components of ξ_μ̂, ξ_ε̂, χ_μ̂, χ_ε̂ in the two boundary normal charts,
/// in the closed forms written through ε̃, μ̃ and the normal row of μ̂.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalComponents {
    /// ξ_μ̂ in the ε̂ chart
    pub xi_mu_eps: C64,
    /// ξ_ε̂ in the μ̂ chart
    pub xi_eps_mu: C64,
    /// χ_μ̂ in the ε̂ chart
    pub chi_mu_eps: C64,
    /// χ_ε̂ in the μ̂ chart
    pub chi_eps_mu: C64,
}

/// Closed forms; `mu_hat` is given in the ε̂ chart.
pub fn normal_components(eps_t: &Metric2, mu_hat: &Metric3, xi: &Vector2<f64>) -> NormalComponents {
    let et = eps_t.matrix();
    let mt = mu_hat.boundary_cometric();
    let m = mt.matrix();
    let m33 = mu_hat.entry(2, 2);
    let n = Vector2::new(mu_hat.entry(2, 0), mu_hat.entry(2, 1));
    let (le, lm) = (eps_t.length(xi), mt.length(xi));
    let nx = n.dot(xi);
    let (ex, mx) = (et * xi, m * xi);
    // σ_{3ji} u_j v_i = u₁v₂ − u₂v₁
    let s3 = |u: &Vector2<f64>, v: &Vector2<f64>| u[0] * v[1] - u[1] * v[0];
    let (sde, sdm) = (eps_t.det().sqrt(), mt.det().sqrt());
    NormalComponents {
        xi_mu_eps: c(-nx / m33, lm / m33.sqrt()),
        xi_eps_mu: c(nx / m33.sqrt(), le * m33.sqrt()),
        chi_mu_eps: c(s3(&mx, &ex) / (sdm * m33.sqrt()), lm * s3(&n, &ex) / (sdm * m33)),
        chi_eps_mu: c(s3(&ex, &mx) * m33.sqrt() / sde, -le * s3(&n, &mx) / (sde * m33.sqrt())),
    }
}

/// μ̂ in the ε̂ chart from its boundary data (μ̃, μ̂^{3j̃}, μ̂³³).
pub fn assemble_mu(mu_t: &Metric2, normal: [f64; 2], m33: f64) -> Result<Metric3> {
    if !(m33 > 0.0) {
        return Err(Error::InvalidMetric("μ̂³³ must be positive".into()));
    }
    let n = Vector2::new(normal[0], normal[1]);
    let t = mu_t.matrix() + n * n.transpose() / m33;
    Metric3::new(nalgebra::Matrix3::new(
        t[(0, 0)],
        t[(0, 1)],
        n[0],
        t[(1, 0)],
        t[(1, 1)],
        n[1],
        n[0],
        n[1],
        m33,
    ))
}

/// (ξ′_μ3 + ξ_ε3)χ_μ3 − (ξ_μ3 + ξ_ε3)χ′_μ3 in the ε̂ chart, for two μ̂ sharing
/// the same boundary data with ε̂ = blockdiag(ε̃, 1). Returns the residual and
/// the magnitude of its two terms.
pub fn chi_identity_residual(
    eps_t: &Metric2,
    mu_hat: &Metric3,
    mu_hat_prime: &Metric3,
    xi: &Vector2<f64>,
) -> Result<(C64, f64)> {
    let eps = Metric3::block_diag(eps_t, 1.0)?;
    let xe = upper_root(&eps, xi)?;
    let xm = extend(xi, upper_root(mu_hat, xi)?);
    let xmp = extend(xi, upper_root(mu_hat_prime, xi)?);
    let ch = chi(mu_hat, &eps, &xm)[2];
    let chp = chi(mu_hat_prime, &eps, &xmp)[2];
    let lhs = (xmp[2] + xe) * ch;
    let rhs = (xm[2] + xe) * chp;
    Ok((lhs - rhs, lhs.norm() + rhs.norm()))
}
