//! Boundary determination: tangential metrics from boundary symbols, the
//! normal row of μ̂, and injectivity of the normal-derivative induction.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector2, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::boundary_maps::{
    admittance_matrix, assemble_mu, chi_eps, chi_identity_residual, chi_mu, impedance_matrix, xi_eps, xi_mu,
    BoundarySymbolInput,
};
use crate::error::{Error, Result};
use crate::random;
use crate::symbol_calculus::{sylvester_sigma_min, CMat3, SymbolSet};
use crate::tensor_core::{
    bilinear_form, c, covector, hodge_star_2form, levi_civita, nu, wedge, Covector3, Metric2,
    Metric3, C64,
};

/// Directions used when a sampler is not tabulated.
pub const DEFAULT_GRID: usize = 16;
/// Fewest directions accepted by the normal-row test.
pub const MIN_NORMAL_GRID: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    Impedance,
    Admittance,
}

/// Source of ξ̃ ↦ λ⁽¹⁾(ξ̃) as a 2×2 matrix acting on tangential data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum SymbolSampler {
    Forward {
        kind: MapKind,
        eps_hat: Metric3,
        mu_hat: Metric3,
        omega: f64,
    },
    Tabulated {
        kind: MapKind,
        omega: f64,
        directions: Vec<Vector2<f64>>,
        values: Vec<Matrix2<C64>>,
    },
}

impl SymbolSampler {
    pub fn forward(kind: MapKind, eps_hat: Metric3, mu_hat: Metric3, omega: f64) -> Result<Self> {
        BoundarySymbolInput::new(eps_hat, mu_hat, omega, Vector2::new(1.0, 0.0), Covector3::zeros())?;
        Ok(Self::Forward { kind, eps_hat, mu_hat, omega })
    }

    pub fn kind(&self) -> MapKind {
        match self {
            Self::Forward { kind, .. } | Self::Tabulated { kind, .. } => *kind,
        }
    }

    pub fn omega(&self) -> f64 {
        match self {
            Self::Forward { omega, .. } | Self::Tabulated { omega, .. } => *omega,
        }
    }

    /// The directions a recovery should use.
    pub fn grid(&self) -> Vec<Vector2<f64>> {
        match self {
            Self::Forward { .. } => random::direction_grid(DEFAULT_GRID),
            Self::Tabulated { directions, .. } => directions.clone(),
        }
    }

    pub fn symbol(&self, xi: &Vector2<f64>) -> Result<Matrix2<C64>> {
        match self {
            Self::Forward { kind, eps_hat, mu_hat, omega } => {
                let inp = BoundarySymbolInput::new(*eps_hat, *mu_hat, *omega, *xi, Covector3::zeros())?;
                match kind {
                    MapKind::Impedance => impedance_matrix(&inp),
                    MapKind::Admittance => admittance_matrix(&inp),
                }
            }
            Self::Tabulated { directions, values, .. } => {
                if directions.len() != values.len() {
                    return Err(Error::InvalidInput("directions and samples differ in length".into()));
                }
                // positive homogeneity of degree 1 extends a sample along its ray
                for (d, v) in directions.iter().zip(values) {
                    let s = d.dot(xi) / d.norm_squared();
                    if s > 0.0 && (xi - d * s).norm() <= 1e-12 * xi.norm() {
                        return Ok(v * c(s, 0.0));
                    }
                }
                Err(Error::InvalidInput(format!("no sample on the ray of ({}, {})", xi[0], xi[1])))
            }
        }
    }

    /// Samples on `directions`, each entry perturbed by a relative complex
    /// noise of size `noise`.
    pub fn tabulate(&self, directions: &[Vector2<f64>], noise: f64, seed: u64) -> Result<Self> {
        let mut r = random::rng(seed);
        let mut values = Vec::with_capacity(directions.len());
        for d in directions {
            let mut m = self.symbol(d)?;
            if noise > 0.0 {
                let scale = m.norm();
                for z in m.iter_mut() {
                    *z += c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)) * (noise * scale);
                }
            }
            values.push(m);
        }
        Ok(Self::Tabulated { kind: self.kind(), omega: self.omega(), directions: directions.to_vec(), values })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentialRecovery {
    pub metric: Metric2,
    /// Relative least-squares residual of r(ξ̃)² = ξ̃ᵀQξ̃ over the grid.
    pub fit_residual: f64,
    pub directions: usize,
}

/// Q = |m⁻¹|·m from r(ξ̃)² = ξ̃ᵀQξ̃, where r = |ξ̃|⁴ / (ω |ξ̃·λ(ξ̃_⊥)|) and
/// ξ̃_⊥ = (−ξ₂, ξ₁); then m = Q / det Q.
fn recover_boundary_metric(sampler: &SymbolSampler) -> Result<TangentialRecovery> {
    let grid = sampler.grid();
    let omega = sampler.omega();
    let mut rows = Vec::with_capacity(grid.len());
    let mut rhs = Vec::with_capacity(grid.len());
    for xi in &grid {
        let m = sampler.symbol(xi)?;
        let f = Vector2::new(c(-xi[1], 0.0), c(xi[0], 0.0));
        let out = m * f;
        let proj = out[0] * xi[0] + out[1] * xi[1];
        let n2 = xi.norm_squared();
        let kappa = proj.norm() / (n2 * n2);
        if !(kappa > 0.0) {
            return Err(Error::InconsistentData("vanishing symbol".into()));
        }
        let r = 1.0 / (omega * kappa);
        rows.push([xi[0] * xi[0], 2.0 * xi[0] * xi[1], xi[1] * xi[1]]);
        rhs.push(r * r);
    }
    let a = DMatrix::from_fn(rows.len(), 3, |i, j| rows[i][j]);
    if a.rank(1e-10 * a.norm()) < 3 {
        return Err(Error::InvalidInput("need at least three non-collinear directions".into()));
    }
    let b = DVector::from_vec(rhs);
    let q = a.clone().svd(true, true).solve(&b, 1e-14).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let fit_residual = (&a * &q - &b).norm() / b.norm();
    let qm = Matrix2::new(q[0], q[1], q[1], q[2]);
    let qm = Metric2::new(qm).map_err(|_| Error::InconsistentData("recovered quadratic form is not SPD".into()))?;
    let metric = Metric2::new(qm.matrix() / qm.det())?;
    Ok(TangentialRecovery { metric, fit_residual, directions: grid.len() })
}

/// ε̃ from samples of λ_ε̂.
pub fn recover_tangential(sampler: &SymbolSampler) -> Result<TangentialRecovery> {
    if sampler.kind() != MapKind::Impedance {
        return Err(Error::InvalidInput("expected impedance samples".into()));
    }
    recover_boundary_metric(sampler)
}

/// μ̃ from samples of λ_μ̂.
pub fn recover_tangential_mu(sampler: &SymbolSampler) -> Result<TangentialRecovery> {
    if sampler.kind() != MapKind::Admittance {
        return Err(Error::InvalidInput("expected admittance samples".into()));
    }
    recover_boundary_metric(sampler)
}

/// Whether μ̃ = a·ε̃ within `tol`, with a = tr(ε̃⁻¹μ̃)/2.
pub fn multiples_test(eps_t: &Metric2, mu_t: &Metric2, tol: f64) -> (bool, f64) {
    let a = (eps_t.inverse().matrix() * mu_t.matrix()).trace() / 2.0;
    let defect = (mu_t.matrix() - eps_t.matrix() * a).norm();
    (defect <= tol * mu_t.norm(), a)
}

/// (μ̂^{3j̃}, μ̂³³) in boundary normal coordinates for ε̂.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalRow {
    pub tangential: [f64; 2],
    pub normal: f64,
}

impl NormalRow {
    pub fn of(mu_hat: &Metric3) -> Self {
        Self { tangential: [mu_hat.entry(2, 0), mu_hat.entry(2, 1)], normal: mu_hat.entry(2, 2) }
    }

    fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.tangential[0], self.tangential[1], self.normal)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum NormalVerdict {
    Equal,
    ProportionalWithFactor { c: f64, mu33_prime: f64 },
    Inconsistent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalMuReport {
    pub verdict: NormalVerdict,
    /// max over the grid of |residual| / (|lhs| + |rhs|)
    pub max_residual: f64,
    pub multiples: bool,
    pub multiple_factor: f64,
}

pub const NORMAL_TOL: f64 = 1e-9;

/// Compare two candidate normal rows of μ̂ sharing ε̃ and μ̃, using the identity
/// (ξ′_μ3 + ξ_ε3)χ_μ3 = (ξ_μ3 + ξ_ε3)χ′_μ3 over the grid.
pub fn recover_normal_mu(
    eps_t: &Metric2,
    mu_t: &Metric2,
    base: NormalRow,
    candidate: NormalRow,
    grid: &[Vector2<f64>],
) -> Result<NormalMuReport> {
    if grid.len() < MIN_NORMAL_GRID {
        return Err(Error::InvalidInput(format!("need at least {MIN_NORMAL_GRID} directions, got {}", grid.len())));
    }
    let mu = assemble_mu(mu_t, base.tangential, base.normal)?;
    let mu_p = assemble_mu(mu_t, candidate.tangential, candidate.normal)?;
    let mut max_residual = 0.0_f64;
    for xi in grid {
        let (r, scale) = chi_identity_residual(eps_t, &mu, &mu_p, xi)?;
        if scale > 0.0 {
            max_residual = max_residual.max(r.norm() / scale);
        }
    }
    let (multiples, multiple_factor) = multiples_test(eps_t, mu_t, NORMAL_TOL);
    let (v, vp) = (base.vector(), candidate.vector());
    let verdict = if max_residual > NORMAL_TOL {
        NormalVerdict::Inconsistent
    } else if (v - vp).norm() <= NORMAL_TOL * v.norm() {
        NormalVerdict::Equal
    } else if multiples {
        let n = Vector2::from(base.tangential);
        let np = Vector2::from(candidate.tangential);
        if n.norm() == 0.0 {
            NormalVerdict::Inconsistent
        } else {
            let cf = n.dot(&np) / n.norm_squared();
            if (np - n * cf).norm() <= NORMAL_TOL * np.norm().max(n.norm()) {
                NormalVerdict::ProportionalWithFactor { c: cf, mu33_prime: candidate.normal }
            } else {
                NormalVerdict::Inconsistent
            }
        }
    } else {
        NormalVerdict::Inconsistent
    };
    Ok(NormalMuReport { verdict, max_residual, multiples, multiple_factor })
}

/// μ̂′³³ making the row (c·μ̂^{3j̃}, μ̂′³³) consistent with the boundary data when
/// μ̃ = a·ε̃: √μ̂′³³ solves s² + √a s = c(√(aμ̂³³) + μ̂³³).
pub fn compensating_mu33(a: f64, mu33: f64, c_factor: f64) -> f64 {
    let k = c_factor * ((a * mu33).sqrt() + mu33);
    let s = (-a.sqrt() + (a + 4.0 * k).sqrt()) / 2.0;
    s * s
}

/// Order-κ normal perturbation ε̂ = ε̂′ + x₃^κ e_ε, μ̂ = μ̂′ + x₃^κ e_μ, with the
/// matching first-order coefficients of √|ε̂⁻¹| and √|μ̂⁻¹|.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetPerturbation {
    pub kappa: usize,
    pub e_eps: Matrix3<f64>,
    pub e_mu: Matrix3<f64>,
    pub r_eps: f64,
    pub r_mu: f64,
}

/// d√det(X⁻¹) along e: −½√det(X⁻¹)·tr(X⁻¹e).
pub fn density_coefficient(base: &Metric3, e: &Matrix3<f64>) -> f64 {
    -0.5 * base.sqrt_det_inv() * (base.inverse().matrix() * e).trace()
}

impl JetPerturbation {
    pub fn new(kappa: usize, e_eps: Matrix3<f64>, e_mu: Matrix3<f64>, eps: &Metric3, mu: &Metric3) -> Result<Self> {
        let p = Self {
            kappa,
            e_eps,
            e_mu,
            r_eps: density_coefficient(eps, &e_eps),
            r_mu: density_coefficient(mu, &e_mu),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.kappa) {
            return Err(Error::InvalidInput(format!("κ = {} outside 1..=3", self.kappa)));
        }
        let sym = |m: &Matrix3<f64>| (m - m.transpose()).norm() <= 1e-14 * (1.0 + m.norm());
        if !sym(&self.e_eps) || !sym(&self.e_mu) {
            return Err(Error::InvalidInput("perturbations must be symmetric".into()));
        }
        Ok(())
    }

    /// Largest gap between the stored r coefficients and the derived ones.
    pub fn consistency_defect(&self, eps: &Metric3, mu: &Metric3) -> f64 {
        let de = (self.r_eps - density_coefficient(eps, &self.e_eps)).abs();
        let dm = (self.r_mu - density_coefficient(mu, &self.e_mu)).abs();
        de.max(dm)
    }

    /// ẽ with X⁻¹ = X′⁻¹ + x₃^κ ẽ to first order: ẽ = −X⁻¹ e X⁻¹.
    pub fn inverse_eps(&self, eps: &Metric3) -> Matrix3<f64> {
        let i = eps.inverse();
        -i.matrix() * self.e_eps * i.matrix()
    }

    pub fn inverse_mu(&self, mu: &Metric3) -> Matrix3<f64> {
        let i = mu.inverse();
        -i.matrix() * self.e_mu * i.matrix()
    }
}

/// Which perturbation-to-residual map to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JetAssembly {
    /// only the ẽ term of ∂₃(X⁻¹/√|X⁻¹|)
    LeadingTerm,
    /// ∂₃(X⁻¹/√|X⁻¹|) linearized in full, including the density variation
    Linearized,
}

/// A real-linear map from perturbation components to complex residuals,
/// stacked over a direction grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetMap {
    pub kappa: usize,
    /// names of the unknowns, in column order
    pub unknowns: Vec<String>,
    pub matrix: DMatrix<C64>,
    /// singular values of the real stacking [Re; Im], descending
    pub singular_values: Vec<f64>,
}

impl JetMap {
    fn new(kappa: usize, unknowns: &[&str], matrix: DMatrix<C64>) -> Self {
        let real = real_stack(&matrix);
        let mut singular_values: Vec<f64> = real.svd(false, false).singular_values.iter().copied().collect();
        singular_values.sort_by(|a, b| b.total_cmp(a));
        Self { kappa, unknowns: unknowns.iter().map(|s| s.to_string()).collect(), matrix, singular_values }
    }

    pub fn apply(&self, x: &[f64]) -> DVector<C64> {
        let v = DVector::from_iterator(x.len(), x.iter().map(|&t| c(t, 0.0)));
        &self.matrix * v
    }

    /// σ_min / σ_max
    pub fn relative_sigma_min(&self) -> f64 {
        let max = self.singular_values.first().copied().unwrap_or(0.0);
        let min = if self.singular_values.len() < self.unknowns.len() {
            0.0
        } else {
            self.singular_values.last().copied().unwrap_or(0.0)
        };
        if max == 0.0 {
            0.0
        } else {
            min / max
        }
    }

    /// Singular values below `rel_tol·σ_max`, plus rank lost to missing rows.
    pub fn kernel_dimension(&self, rel_tol: f64) -> usize {
        let max = self.singular_values.first().copied().unwrap_or(0.0);
        let small = self.singular_values.iter().filter(|&&s| s <= rel_tol * max).count();
        small + self.unknowns.len().saturating_sub(self.singular_values.len())
    }
}

fn real_stack(m: &DMatrix<C64>) -> DMatrix<f64> {
    let r = m.nrows();
    DMatrix::from_fn(2 * r, m.ncols(), |i, j| if i < r { m[(i, j)].re } else { m[(i - r, j)].im })
}

const TANGENTIAL_UNKNOWNS: [&str; 3] = ["e11", "e12", "e22"];
const FULL_UNKNOWNS: [&str; 6] = ["e11", "e12", "e13", "e22", "e23", "e33"];

fn sym_basis(i: usize, j: usize) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    m[(i, j)] = 1.0;
    m[(j, i)] = 1.0;
    m
}

fn tangential_basis() -> [Matrix3<f64>; 3] {
    [sym_basis(0, 0), sym_basis(0, 1), sym_basis(1, 1)]
}

fn full_basis() -> [Matrix3<f64>; 6] {
    [sym_basis(0, 0), sym_basis(0, 1), sym_basis(0, 2), sym_basis(1, 1), sym_basis(1, 2), sym_basis(2, 2)]
}

/// i (X⁻¹)_{lq} σ^{3jq} W_{bj} σ^{dkb} ξ_d χ_k for a normal-derivative matrix W.
fn curl_term(xinv: &Matrix3<f64>, w: &Matrix3<f64>, xi: &Covector3, ch: &Covector3) -> Covector3 {
    // σ^{dkb} ξ_d χ_k = (ξ × χ)_b
    let cr = xi.cross(ch);
    let mut inner = Covector3::zeros();
    for q in 0..3 {
        for j in 0..3 {
            let s = levi_civita(2, j, q);
            if s == 0.0 {
                continue;
            }
            for b in 0..3 {
                inner[q] += cr[b] * (s * w[(b, j)]);
            }
        }
    }
    xinv.map(|x| c(x, 0.0)) * inner * c(0.0, 1.0)
}

/// W₃ = κ ∂₃(X⁻¹/√|X⁻¹|)/√|X⁻¹| per unit ẽ, `x` the cometric.
fn normal_weight(x: &Metric3, e_inv: &Matrix3<f64>, kappa: usize, assembly: JetAssembly) -> Matrix3<f64> {
    let s2 = x.inverse().det();
    let w = match assembly {
        JetAssembly::LeadingTerm => *e_inv,
        JetAssembly::Linearized => {
            let tr = (x.matrix() * e_inv).trace();
            e_inv - x.inverse().matrix() * (0.5 * tr)
        }
    };
    w * (kappa as f64 / s2)
}

fn check_kappa(kappa: usize) -> Result<()> {
    if !(1..=3).contains(&kappa) {
        return Err(Error::InvalidInput(format!("κ = {kappa} outside 1..=3")));
    }
    Ok(())
}

fn grid_input(eps: &Metric3, mu: &Metric3, xi: &Vector2<f64>) -> Result<BoundarySymbolInput> {
    BoundarySymbolInput::new(*eps, *mu, 1.0, *xi, covector([0.0; 3]))
}

fn degenerate_guard(inp: &BoundarySymbolInput) -> Result<()> {
    // the χ, ξ basis needs distinct eigenvalues
    crate::boundary_maps::field_symbol_h(inp).map(|_| ())
}

/// Map ẽ_ε (tangential block of the order-κ coefficient of ε̂⁻¹) ↦ the order-κ
/// residual ((G − G′)B + F − F′)χ_ε̂ over the grid. ε̂ must be in boundary
/// normal form.
pub fn jet_residual_h(
    eps: &Metric3,
    mu: &Metric3,
    kappa: usize,
    grid: &[Vector2<f64>],
    assembly: JetAssembly,
) -> Result<JetMap> {
    check_kappa(kappa)?;
    let ei = eps.inverse();
    let basis = tangential_basis();
    let mut m = DMatrix::<C64>::zeros(3 * grid.len(), basis.len());
    for (g, xi) in grid.iter().enumerate() {
        let inp = grid_input(eps, mu, xi)?;
        degenerate_guard(&inp)?;
        let (xe, ch) = (xi_eps(&inp)?, chi_eps(&inp)?);
        for (p, e) in basis.iter().enumerate() {
            let w = normal_weight(eps, e, kappa, assembly);
            let col = curl_term(ei.matrix(), &w, &xe, &ch);
            for l in 0..3 {
                m[(3 * g + l, p)] = col[l];
            }
        }
    }
    Ok(JetMap::new(kappa, &TANGENTIAL_UNKNOWNS, m))
}

/// The two stages of the E-side induction step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetMapE {
    /// ((G_E − G_E′)C + F_E − F_E′)χ_μ̂ in the components of ẽ_μ
    pub stage1: JetMap,
    /// (M_E − M_E′)(ξ_μ̂)χ_μ̂ in the components of ẽ_μ
    pub stage2: JetMap,
    /// both stages stacked
    pub combined: JetMap,
    /// |∗_μ̂(ν∧∗_μ̂(χ_μ̂∧ξ_μ̂))⟨ν,ξ_μ̂⟩_μ̂| per direction, relative to |χ||ξ|³‖μ̂‖²
    pub coefficients: Vec<f64>,
}

/// E-side maps, ẽ_μ being the order-κ coefficient of μ̂⁻¹ (all six components).
pub fn jet_residual_e(
    eps: &Metric3,
    mu: &Metric3,
    kappa: usize,
    grid: &[Vector2<f64>],
    assembly: JetAssembly,
) -> Result<JetMapE> {
    check_kappa(kappa)?;
    let ui = mu.inverse();
    let u = mu.complex();
    let basis = full_basis();
    let n = grid.len();
    let mut m1 = DMatrix::<C64>::zeros(3 * n, basis.len());
    let mut m2 = DMatrix::<C64>::zeros(3 * n, basis.len());
    let mut coefficients = Vec::with_capacity(n);
    for (g, xi) in grid.iter().enumerate() {
        let inp = grid_input(eps, mu, xi)?;
        degenerate_guard(&inp)?;
        let (xm, ch) = (xi_mu(&inp)?, chi_mu(&inp)?);
        for (p, e) in basis.iter().enumerate() {
            let w = normal_weight(mu, e, kappa, assembly);
            let col = curl_term(ui.matrix(), &w, &xm, &ch);
            // δμ̂ = −μ̂ ẽ μ̂
            let du = -(u * e.map(|x| c(x, 0.0)) * u);
            let s_xx = (xm.transpose() * du * xm)[(0, 0)];
            let s_xc = (xm.transpose() * du * ch)[(0, 0)];
            let col2 = ch * s_xx - xm * s_xc;
            for l in 0..3 {
                m1[(3 * g + l, p)] = col[l];
                m2[(3 * g + l, p)] = col2[l];
            }
        }
        let coeff = stage2_coefficient(mu, &xm, &ch);
        let scale = ch.norm() * xm.norm().powi(3) * mu.norm().powi(2);
        coefficients.push(coeff.norm() / scale);
    }
    let mut both = DMatrix::<C64>::zeros(6 * n, basis.len());
    both.view_mut((0, 0), (3 * n, basis.len())).copy_from(&m1);
    both.view_mut((3 * n, 0), (3 * n, basis.len())).copy_from(&m2);
    Ok(JetMapE {
        stage1: JetMap::new(kappa, &FULL_UNKNOWNS, m1),
        stage2: JetMap::new(kappa, &FULL_UNKNOWNS, m2),
        combined: JetMap::new(kappa, &FULL_UNKNOWNS, both),
        coefficients,
    })
}

/// ∗_μ̂(ν∧∗_μ̂(χ∧ξ))⟨ν,ξ⟩_μ̂, the factor multiplying (ẽ_μ)₃₃ in the second stage.
pub fn stage2_coefficient(mu: &Metric3, xi: &Covector3, ch: &Covector3) -> Covector3 {
    let inner = hodge_star_2form(&wedge(ch, xi), mu);
    let outer = hodge_star_2form(&wedge(&nu(), &inner), mu);
    outer * bilinear_form(&nu(), xi, mu)
}

/// Smallest singular value of Z ↦ (T⁻¹A + B)Z + ZB.
pub fn sylvester_uniqueness_check(s: &SymbolSet, b: &CMat3, xi: &Vector2<f64>) -> f64 {
    sylvester_sigma_min(s, b, xi)
}
