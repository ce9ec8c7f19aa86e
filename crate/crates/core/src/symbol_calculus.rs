//! Coefficient symbols of the decoupled second-order operator, the matrix
//! polynomial M(ξ₃) = T ξ₃² + A(ξ̃) ξ₃ + Q(ξ̃), its Jordan structure, and the
//! principal factorization symbol B computed by a Jordan-pair route and by a
//! contour-integral route.
//!
//! Roles: the H-system takes (ε̂, μ̂); the E-system is the same code with the
//! two metrics exchanged.

use nalgebra::{DMatrix, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor_core::{
    bilinear_form, c, complexify3, extend, hodge_star_2form, levi_civita, nu, wedge, Covector3, Metric3, C64,
};

pub type Mat3 = Matrix3<f64>;
pub type CMat3 = Matrix3<C64>;

const SYM_TOL: f64 = 1e-12;

/// Value and derivatives of a metric field at one boundary point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JetRecord", into = "JetRecord")]
pub struct MetricJet {
    pub value: Metric3,
    /// ∂₁, ∂₂
    pub d_tangential: [Mat3; 2],
    /// ∂₃ᵏ for k = 1..K
    pub d_normal: Vec<Mat3>,
    /// ∂₁∂₁, ∂₁∂₂, ∂₂∂₂
    pub d_tangential2: [Mat3; 3],
    /// ∂₁∂₃, ∂₂∂₃
    pub d_mixed: [Mat3; 2],
}

fn is_symmetric(m: &Mat3) -> bool {
    let scale = m.amax().max(1.0);
    (m - m.transpose()).amax() <= SYM_TOL * scale
}

impl MetricJet {
    pub fn constant(value: Metric3) -> Self {
        Self {
            value,
            d_tangential: [Mat3::zeros(); 2],
            d_normal: Vec::new(),
            d_tangential2: [Mat3::zeros(); 3],
            d_mixed: [Mat3::zeros(); 2],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.d_tangential.iter().chain(&self.d_normal).chain(&self.d_tangential2).chain(&self.d_mixed);
        for (i, m) in all.enumerate() {
            if !is_symmetric(m) || m.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("jet derivative #{i} is not a finite symmetric matrix")));
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.d_normal.len()
    }

    /// ∂_a of the components, a ∈ {0,1,2}.
    pub fn first(&self, a: usize) -> Mat3 {
        match a {
            0 | 1 => self.d_tangential[a],
            _ => self.d_normal.first().copied().unwrap_or_else(Mat3::zeros),
        }
    }

    /// ∂_a∂_b of the components.
    pub fn second(&self, a: usize, b: usize) -> Mat3 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        match (a, b) {
            (0, 0) => self.d_tangential2[0],
            (0, 1) => self.d_tangential2[1],
            (1, 1) => self.d_tangential2[2],
            (0, 2) => self.d_mixed[0],
            (1, 2) => self.d_mixed[1],
            _ => self.d_normal.get(1).copied().unwrap_or_else(Mat3::zeros),
        }
    }

    /// ∂₃ᵏ, zero beyond the stored order.
    pub fn normal(&self, k: usize) -> Mat3 {
        if k == 0 {
            return *self.value.matrix();
        }
        self.d_normal.get(k - 1).copied().unwrap_or_else(Mat3::zeros)
    }
}

fn sym6(m: &Mat3) -> [f64; 6] {
    [m[(0, 0)], m[(0, 1)], m[(0, 2)], m[(1, 1)], m[(1, 2)], m[(2, 2)]]
}

fn from_sym6(u: &[f64; 6]) -> Mat3 {
    Mat3::new(u[0], u[1], u[2], u[1], u[3], u[4], u[2], u[4], u[5])
}

/// Serialized jet: symmetric matrices as (11,12,13,22,23,33).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JetRecord {
    pub value: [f64; 6],
    #[serde(default)]
    pub d_tangential: [[f64; 6]; 2],
    #[serde(default)]
    pub d_normal: Vec<[f64; 6]>,
    #[serde(default)]
    pub d_tangential2: [[f64; 6]; 3],
    #[serde(default)]
    pub d_mixed: [[f64; 6]; 2],
}

impl TryFrom<JetRecord> for MetricJet {
    type Error = Error;

    fn try_from(r: JetRecord) -> Result<Self> {
        let jet = MetricJet {
            value: Metric3::from_upper(r.value)?,
            d_tangential: r.d_tangential.map(|u| from_sym6(&u)),
            d_normal: r.d_normal.iter().map(from_sym6).collect(),
            d_tangential2: r.d_tangential2.map(|u| from_sym6(&u)),
            d_mixed: r.d_mixed.map(|u| from_sym6(&u)),
        };
        jet.validate()?;
        Ok(jet)
    }
}

impl From<MetricJet> for JetRecord {
    fn from(j: MetricJet) -> Self {
        JetRecord {
            value: j.value.to_upper(),
            d_tangential: j.d_tangential.map(|m| sym6(&m)),
            d_normal: j.d_normal.iter().map(sym6).collect(),
            d_tangential2: j.d_tangential2.map(|m| sym6(&m)),
            d_mixed: j.d_mixed.map(|m| sym6(&m)),
        }
    }
}

/// The polynomial field V + Σ x_a ∂_a + ½ Σ x_a x_b ∂_a∂_b + Σ_{k≥3} x₃ᵏ/k! ∂₃ᵏ
/// determined by a jet, so jets can be re-evaluated off the base point.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorField {
    value: Mat3,
    first: [Mat3; 3],
    second: [[Mat3; 3]; 3],
    /// ∂₃ᵏ for k ≥ 3
    higher: Vec<Mat3>,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl TaylorField {
    pub fn from_jet(j: &MetricJet) -> Self {
        let mut second = [[Mat3::zeros(); 3]; 3];
        for (a, row) in second.iter_mut().enumerate() {
            for (b, s) in row.iter_mut().enumerate() {
                *s = j.second(a, b);
            }
        }
        Self {
            value: *j.value.matrix(),
            first: [j.first(0), j.first(1), j.first(2)],
            second,
            higher: j.d_normal.iter().skip(2).copied().collect(),
        }
    }

    fn higher_sum(&self, x3: f64, shift: usize) -> Mat3 {
        let mut s = Mat3::zeros();
        for (i, n) in self.higher.iter().enumerate() {
            let k = i + 3;
            if k >= shift {
                s += n * (x3.powi((k - shift) as i32) / factorial(k - shift));
            }
        }
        s
    }

    pub fn raw(&self, x: [f64; 3]) -> Mat3 {
        let mut m = self.value;
        for a in 0..3 {
            m += self.first[a] * x[a];
            for b in 0..3 {
                m += self.second[a][b] * (0.5 * x[a] * x[b]);
            }
        }
        m + self.higher_sum(x[2], 0)
    }

    pub fn at(&self, x: [f64; 3]) -> Result<Metric3> {
        Metric3::new(self.raw(x))
    }

    /// The jet at `x`, keeping `order` normal derivatives.
    pub fn jet_at(&self, x: [f64; 3], order: usize) -> Result<MetricJet> {
        let first = |a: usize| {
            let mut d = self.first[a];
            for b in 0..3 {
                d += self.second[a][b] * x[b];
            }
            if a == 2 {
                d += self.higher_sum(x[2], 1);
            }
            d
        };
        let second = |a: usize, b: usize| {
            let mut d = self.second[a][b];
            if a == 2 && b == 2 {
                d += self.higher_sum(x[2], 2);
            }
            d
        };
        let d_normal = (1..=order)
            .map(|k| match k {
                1 => first(2),
                2 => second(2, 2),
                _ => self.higher_sum(x[2], k),
            })
            .collect();
        Ok(MetricJet {
            value: self.at(x)?,
            d_tangential: [first(0), first(1)],
            d_normal,
            d_tangential2: [second(0, 0), second(0, 1), second(1, 1)],
            d_mixed: [second(0, 2), second(1, 2)],
        })
    }
}

/// Quantities derived from one jet: inverse, density s = √det(m⁻¹) and the
/// first derivatives of m and ln s.
struct JetGeometry {
    m: Mat3,
    inv: Mat3,
    s: f64,
    dm: [Mat3; 3],
    dlns: [f64; 3],
}

impl JetGeometry {
    fn new(j: &MetricJet) -> Self {
        let m = *j.value.matrix();
        let inv = *j.value.inverse().matrix();
        let dm = [j.first(0), j.first(1), j.first(2)];
        let dlns = dm.map(|d| -0.5 * (inv * d).trace());
        Self { m, inv, s: j.value.sqrt_det_inv(), dm, dlns }
    }
}

/// v^k = ∂_a(s m^{ka})/s and its first derivatives ∂_b v^k.
fn divergence_vector(j: &MetricJet, g: &JetGeometry) -> (Vector3<f64>, [Vector3<f64>; 3]) {
    let mut v = Vector3::zeros();
    for a in 0..3 {
        v += g.dm[a].column(a) + g.m.column(a) * g.dlns[a];
    }
    let mut d2lns = [[0.0; 3]; 3];
    for (a, row) in d2lns.iter_mut().enumerate() {
        for (b, x) in row.iter_mut().enumerate() {
            let cross = (g.inv * g.dm[b] * g.inv * g.dm[a]).trace();
            *x = -0.5 * (-cross + (g.inv * j.second(a, b)).trace());
        }
    }
    let mut dv = [Vector3::zeros(); 3];
    for (b, out) in dv.iter_mut().enumerate() {
        for a in 0..3 {
            *out += j.second(a, b).column(a) + g.dm[b].column(a) * g.dlns[a] + g.m.column(a) * d2lns[b][a];
        }
    }
    (v, dv)
}

/// Coefficients of L = T D₃² + A(D̃) D₃ + G D₃ + Q(D̃) + F(D̃) + R at a point.
/// Linear symbols store their ξ₁, ξ₂ coefficients; Q stores the ξ₁², ξ₁ξ₂,
/// ξ₂² coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolSet {
    pub t: CMat3,
    pub a: [CMat3; 2],
    pub g: CMat3,
    pub q: [CMat3; 3],
    pub f: [CMat3; 2],
    pub r: CMat3,
    /// √|μ̂⁻¹| / √|ε̂⁻¹|
    pub rho: f64,
}

/// P(α, β) = ρ ε̂⁻¹μ̂α (μ̂β)ᵀ + ⟨α,β⟩_ε̂ I − α (ε̂β)ᵀ, so M(ξ) = P(ξ, ξ).
fn principal_bilinear(rho: f64, e: &Mat3, ei: &Mat3, u: &Mat3, alpha: usize, beta: usize) -> Mat3 {
    let ua = u.column(alpha);
    let ub = u.column(beta);
    (ei * ua) * ub.transpose() * rho + Mat3::identity() * e[(alpha, beta)] - {
        let mut m = Mat3::zeros();
        m.set_row(alpha, &e.column(beta).transpose());
        m
    }
}

pub fn coefficient_symbols(eps: &MetricJet, mu: &MetricJet, omega: f64) -> Result<SymbolSet> {
    eps.validate()?;
    mu.validate()?;
    let ge = JetGeometry::new(eps);
    let gm = JetGeometry::new(mu);
    let (e, ei, u) = (&ge.m, &ge.inv, &gm.m);
    let rho = gm.s / ge.s;
    let p = |a, b| principal_bilinear(rho, e, ei, u, a, b);

    let t = p(2, 2);
    if t.determinant().abs() < 1e-14 * t.norm().powi(3) {
        return Err(Error::Singular("T"));
    }
    let a = [p(2, 0) + p(0, 2), p(2, 1) + p(1, 2)];
    let q = [p(0, 0), p(0, 1) + p(1, 0), p(1, 1)];

    let (v, dv) = divergence_vector(mu, &gm);
    // ∂_a(ε̂⁻¹/√|ε̂⁻¹|)
    let w: [Mat3; 3] = std::array::from_fn(|a| {
        let d_inv = -ei * ge.dm[a] * ei;
        (d_inv - ei * ge.dlns[a]) / ge.s
    });

    let i = c(0.0, 1.0);
    let first_order = |d: usize| -> CMat3 {
        // ∂_a μ̂^{kd} arranged as [a][k]
        let mut dud = Mat3::zeros();
        for a in 0..3 {
            dud.set_row(a, &gm.dm[a].column(d).transpose());
        }
        let term1 = ei * (u * dud + u.column(d) * v.transpose()) * rho;
        let mut inner = Mat3::zeros();
        for qq in 0..3 {
            for k in 0..3 {
                let mut acc = 0.0;
                for aa in 0..3 {
                    for j in 0..3 {
                        let eps_ajq = levi_civita(aa, j, qq);
                        if eps_ajq == 0.0 {
                            continue;
                        }
                        for b in 0..3 {
                            acc += eps_ajq * w[aa][(b, j)] * levi_civita(d, k, b);
                        }
                    }
                }
                inner[(qq, k)] = acc / ge.s;
            }
        }
        let term2 = ei * inner;
        complexify3(&term1) * (-i) + complexify3(&term2) * i
    };
    let g = first_order(2);
    let f = [first_order(0), first_order(1)];

    let mut udv = Mat3::zeros();
    for b in 0..3 {
        udv.set_row(b, &dv[b].transpose());
    }
    let r = -(ei * u) * (omega * omega * rho) - ei * u * udv * rho;

    Ok(SymbolSet {
        t: complexify3(&t),
        a: a.map(|m| complexify3(&m)),
        g,
        q: q.map(|m| complexify3(&m)),
        f,
        r: complexify3(&r),
        rho,
    })
}

fn cx(x: f64) -> C64 {
    c(x, 0.0)
}

impl SymbolSet {
    pub fn a_at(&self, xi: &Vector2<f64>) -> CMat3 {
        self.a[0] * cx(xi[0]) + self.a[1] * cx(xi[1])
    }

    pub fn q_at(&self, xi: &Vector2<f64>) -> CMat3 {
        self.q[0] * cx(xi[0] * xi[0]) + self.q[1] * cx(xi[0] * xi[1]) + self.q[2] * cx(xi[1] * xi[1])
    }

    pub fn f_at(&self, xi: &Vector2<f64>) -> CMat3 {
        self.f[0] * cx(xi[0]) + self.f[1] * cx(xi[1])
    }

    /// T ξ₃² + A(ξ̃) ξ₃ + Q(ξ̃)
    pub fn matrix_polynomial(&self, xi: &Vector2<f64>, xi3: C64) -> CMat3 {
        self.t * (xi3 * xi3) + self.a_at(xi) * xi3 + self.q_at(xi)
    }

    /// ∂M/∂ξ₃
    pub fn derivative(&self, xi: &Vector2<f64>, xi3: C64) -> CMat3 {
        self.t * (xi3 * 2.0) + self.a_at(xi)
    }

    /// Full symbol of L at ξ = (ξ̃, ξ₃): M(ξ₃) + G ξ₃ + F(ξ̃) + R.
    pub fn full_symbol(&self, xi: &Vector2<f64>, xi3: C64) -> CMat3 {
        self.matrix_polynomial(xi, xi3) + self.g * xi3 + self.f_at(xi) + self.r
    }

    pub fn t_inverse(&self) -> CMat3 {
        self.t.try_inverse().expect("T is checked invertible at construction")
    }
}

pub fn matrix_polynomial(s: &SymbolSet, xi: &Vector2<f64>, xi3: C64) -> CMat3 {
    s.matrix_polynomial(xi, xi3)
}

fn check_xi(xi: &Vector2<f64>) -> Result<f64> {
    let n = xi.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidInput("tangential covector must be nonzero".into()));
    }
    Ok(n)
}

/// Root of ⟨ξ,ξ⟩_m = 0 in ξ₃ with positive imaginary part.
pub fn upper_root(m: &Metric3, xi: &Vector2<f64>) -> Result<C64> {
    check_xi(xi)?;
    let mm = m.matrix();
    let p = mm[(2, 0)] * xi[0] + mm[(2, 1)] * xi[1];
    let qf = mm[(0, 0)] * xi[0] * xi[0] + 2.0 * mm[(0, 1)] * xi[0] * xi[1] + mm[(1, 1)] * xi[1] * xi[1];
    let m33 = mm[(2, 2)];
    let disc = (m33 * qf - p * p).max(0.0);
    Ok(c(-p / m33, disc.sqrt() / m33))
}

/// (ξ_ε3, ξ_μ3).
pub fn eigenvalues(eps: &Metric3, mu: &Metric3, xi: &Vector2<f64>) -> Result<(C64, C64)> {
    Ok((upper_root(eps, xi)?, upper_root(mu, xi)?))
}

/// Eigenvector, Jordan chain and the normalized similarity pair (X, J).
#[derive(Clone, Debug, PartialEq)]
pub struct JordanData {
    pub xi_eps3: C64,
    pub xi_mu3: C64,
    pub chi: Covector3,
    pub xi_mu_vec: Covector3,
    pub zeta_mu: Covector3,
    pub gamma: Covector3,
    pub m_coeff: C64,
    pub x: CMat3,
    pub j: CMat3,
    pub condition: f64,
}

pub const DEGENERACY_TOL: f64 = 1e-8;
pub const CONDITION_LIMIT: f64 = 1e8;

fn cnorm(v: &Covector3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn condition_number(m: &CMat3) -> f64 {
    let sv = m.svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// ζ = ε̂⁻¹μ̂ξ.
pub fn zeta(eps: &Metric3, mu: &Metric3, xi: &Covector3) -> Covector3 {
    eps.inverse().complex() * mu.complex() * xi
}

/// χ = ∗_ε̂(ξ ∧ ζ).
pub fn chi(eps: &Metric3, mu: &Metric3, xi: &Covector3) -> Covector3 {
    hodge_star_2form(&wedge(xi, &zeta(eps, mu, xi)), eps)
}

pub fn jordan_data(eps: &Metric3, mu: &Metric3, xi: &Vector2<f64>) -> Result<JordanData> {
    let n = check_xi(xi)?;
    let (xe, xm) = eigenvalues(eps, mu, xi)?;
    let gap = (xe - xm).norm();
    if gap < DEGENERACY_TOL * n {
        return Err(Error::Degenerate(gap));
    }
    let rho = (eps.det() / mu.det()).sqrt();
    let xi_e = extend(xi, xe);
    let xi_m = extend(xi, xm);
    let chi_e = chi(eps, mu, &xi_e);
    let zeta_m = zeta(eps, mu, &xi_m);

    let ueiu = Metric3::new(mu.matrix() * eps.inverse().matrix() * mu.matrix())?;
    let num = -bilinear_form(&nu(), &xi_m, mu) * (2.0 * rho);
    let den = bilinear_form(&xi_m, &xi_m, &ueiu) * rho + bilinear_form(&xi_m, &xi_m, eps);
    let m_coeff = num / den;
    let gamma = nu() + zeta_m * m_coeff;

    let (n1, n2, n3) = (cnorm(&chi_e), cnorm(&xi_m), cnorm(&gamma));
    let x = CMat3::from_columns(&[chi_e / cx(n1), xi_m / cx(n2), gamma / cx(n3)]);
    let mut j = CMat3::zeros();
    j[(0, 0)] = xe;
    j[(1, 1)] = xm;
    j[(2, 2)] = xm;
    j[(1, 2)] = cx(n2 / n3);
    let condition = condition_number(&x);
    Ok(JordanData {
        xi_eps3: xe,
        xi_mu3: xm,
        chi: chi_e,
        xi_mu_vec: xi_m,
        zeta_mu: zeta_m,
        gamma,
        m_coeff,
        x,
        j,
        condition,
    })
}

/// Residuals of M(ξ_ε3)χ = 0, M(ξ_μ3)ξ_μ = 0 and M(ξ_μ3)γ + M′(ξ_μ3)ξ_μ = 0,
/// each relative to ‖M‖·‖vector‖.
pub fn chain_residuals(s: &SymbolSet, jd: &JordanData, xi: &Vector2<f64>) -> [f64; 3] {
    let me = s.matrix_polynomial(xi, jd.xi_eps3);
    let mm = s.matrix_polynomial(xi, jd.xi_mu3);
    let dm = s.derivative(xi, jd.xi_mu3);
    let r1 = cnorm(&(me * jd.chi)) / (me.norm() * cnorm(&jd.chi));
    let r2 = cnorm(&(mm * jd.xi_mu_vec)) / (mm.norm() * cnorm(&jd.xi_mu_vec));
    let scale = mm.norm() * cnorm(&jd.gamma) + dm.norm() * cnorm(&jd.xi_mu_vec);
    let r3 = cnorm(&(mm * jd.gamma + dm * jd.xi_mu_vec)) / scale;
    [r1, r2, r3]
}

pub fn principal_b_jordan(jd: &JordanData) -> Result<CMat3> {
    if jd.condition > CONDITION_LIMIT {
        return Err(Error::NearDegenerate(jd.condition));
    }
    let xi = jd.x.try_inverse().ok_or(Error::NearDegenerate(f64::INFINITY))?;
    Ok(jd.x * jd.j * xi)
}

/// The six roots of det M(ξ₃) as eigenvalues of the companion linearization.
pub fn polynomial_roots(s: &SymbolSet, xi: &Vector2<f64>) -> Vec<C64> {
    let ti = s.t_inverse();
    let a = ti * s.a_at(xi);
    let q = ti * s.q_at(xi);
    let mut comp = DMatrix::<C64>::zeros(6, 6);
    for k in 0..3 {
        comp[(k, k + 3)] = cx(1.0);
    }
    for r in 0..3 {
        for k in 0..3 {
            comp[(r + 3, k)] = -q[(r, k)];
            comp[(r + 3, k + 3)] = -a[(r, k)];
        }
    }
    let ev = nalgebra::linalg::Schur::new(comp).eigenvalues().expect("complex Schur form has eigenvalues");
    ev.iter().copied().collect()
}

/// Circle enclosing the upper roots and excluding the lower ones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contour {
    pub center: C64,
    pub radius: f64,
    pub nodes: usize,
    /// distance to the nearest excluded root over the effective enclosed radius
    pub separation: f64,
}

const MIN_NODES: usize = 256;
const MAX_NODES: usize = 16384;

fn choose_contour(upper: &[C64], lower: &[C64]) -> Option<Contour> {
    let k = upper.len() as f64;
    let mean = upper.iter().sum::<C64>() / k;
    let spread = upper.iter().map(|z| (z - mean).norm()).fold(0.0, f64::max);
    let height = mean.im;
    let mut best: Option<(f64, C64, f64, f64)> = None;
    for dx in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        for fy in [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0] {
            let center = c(mean.re + dx * spread, height * fy);
            let inner = upper.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
            let outer = lower.iter().map(|z| (z - center).norm()).fold(f64::INFINITY, f64::min);
            let inner = inner.max(0.05 * outer);
            let ratio = outer / inner;
            if best.is_none_or(|b| ratio > b.0) {
                best = Some((ratio, center, inner, outer));
            }
        }
    }
    let (ratio, center, inner, outer) = best?;
    if ratio < 1.02 {
        return None;
    }
    // trapezoid error decays like ratio^{-N/2}
    let mut nodes = MIN_NODES;
    while ratio.sqrt().powi(nodes as i32) < 1e16 && nodes < MAX_NODES {
        nodes *= 2;
    }
    Some(Contour { center, radius: (inner * outer).sqrt(), nodes, separation: ratio })
}

/// Contour-integral evaluation of B = (∮ ξ₃ M⁻¹)(∮ M⁻¹)⁻¹ over Γ₊.
pub fn principal_b_contour(s: &SymbolSet, xi: &Vector2<f64>) -> Result<(CMat3, Contour)> {
    check_xi(xi)?;
    let roots = polynomial_roots(s, xi);
    let (upper, lower): (Vec<C64>, Vec<C64>) = roots.iter().partition(|z| z.im > 0.0);
    if upper.len() != 3 {
        return Err(Error::ContourFailure(format!("{} roots in the upper half-plane", upper.len())));
    }
    let contour = choose_contour(&upper, &lower)
        .ok_or_else(|| Error::ContourFailure("roots cannot be separated by a circle".into()))?;
    let mut s0 = CMat3::zeros();
    let mut s1 = CMat3::zeros();
    let n = contour.nodes;
    for k in 0..n {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let e = C64::from_polar(1.0, theta);
        let z = contour.center + e * contour.radius;
        let minv = s
            .matrix_polynomial(xi, z)
            .try_inverse()
            .ok_or_else(|| Error::ContourFailure("M singular on the contour".into()))?;
        let w = e * c(0.0, contour.radius);
        s0 += minv * w;
        s1 += minv * (w * z);
    }
    if condition_number(&s0) > 1e12 {
        return Err(Error::ContourFailure("zeroth moment is singular".into()));
    }
    let s0i = s0.try_inverse().ok_or_else(|| Error::ContourFailure("zeroth moment is singular".into()))?;
    Ok((s1 * s0i, contour))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Jordan,
    Contour,
}

/// Above this condition of X the automatic router prefers the contour route:
/// the Jordan similarity loses about log₁₀(cond) digits.
pub const ROUTING_CONDITION: f64 = 1e5;

/// Jordan route when the basis is well conditioned, contour route otherwise.
pub fn principal_b(s: &SymbolSet, eps: &Metric3, mu: &Metric3, xi: &Vector2<f64>) -> Result<(CMat3, Route)> {
    let jordan = jordan_data(eps, mu, xi).and_then(|jd| {
        if jd.condition > ROUTING_CONDITION {
            return Err(Error::NearDegenerate(jd.condition));
        }
        principal_b_jordan(&jd)
    });
    match jordan {
        Ok(b) => Ok((b, Route::Jordan)),
        Err(Error::Degenerate(_)) | Err(Error::NearDegenerate(_)) => {
            principal_b_contour(s, xi).map(|(b, _)| (b, Route::Contour))
        }
        Err(e) => Err(e),
    }
}

/// C, the E-system counterpart: B with ε̂ and μ̂ exchanged.
pub fn principal_c(s_e: &SymbolSet, eps: &Metric3, mu: &Metric3, xi: &Vector2<f64>) -> Result<(CMat3, Route)> {
    principal_b(s_e, mu, eps, xi)
}

/// ‖T B² + A B + Q‖ / ‖Q‖.
pub fn quadratic_residual(s: &SymbolSet, b: &CMat3, xi: &Vector2<f64>) -> f64 {
    let q = s.q_at(xi);
    (s.t * b * b + s.a_at(xi) * b + q).norm() / q.norm()
}

/// B* fixed by the ξ₃¹ coefficient of M = (ξ₃ − B*) T (ξ₃ − B).
pub fn b_star(s: &SymbolSet, b: &CMat3, xi: &Vector2<f64>) -> CMat3 {
    -(s.a_at(xi) + s.t * b) * s.t_inverse()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationResidual {
    /// max over samples of ‖M − (ξ₃ − B*)T(ξ₃ − B)‖ / (‖T‖|ξ₃|² + ‖A‖|ξ₃| + ‖Q‖)
    pub full: f64,
    /// ‖Q − B*TB‖ / ‖Q‖
    pub constant_term: f64,
}

pub fn factorization_residual(s: &SymbolSet, b: &CMat3, xi: &Vector2<f64>, samples: &[C64]) -> FactorizationResidual {
    let bs = b_star(s, b, xi);
    let id = CMat3::identity();
    let (a, q) = (s.a_at(xi), s.q_at(xi));
    let mut full = 0.0_f64;
    for &z in samples {
        let m = s.matrix_polynomial(xi, z);
        let f = (id * z - bs) * s.t * (id * z - b);
        let scale = s.t.norm() * z.norm_sqr() + a.norm() * z.norm() + q.norm();
        full = full.max((m - f).norm() / scale);
    }
    let constant_term = (q - bs * s.t * b).norm() / q.norm();
    FactorizationResidual { full, constant_term }
}

/// Smallest singular value of Z ↦ (T⁻¹A + B)Z + ZB on 3×3 matrices.
pub fn sylvester_sigma_min(s: &SymbolSet, b: &CMat3, xi: &Vector2<f64>) -> f64 {
    let m1 = s.t_inverse() * s.a_at(xi) + b;
    sylvester_operator_sigma_min(&m1, b)
}

/// Smallest singular value of Z ↦ M Z + Z N.
pub fn sylvester_operator_sigma_min(m: &CMat3, n: &CMat3) -> f64 {
    let id = CMat3::identity();
    let op = id.kronecker(m) + n.transpose().kronecker(&id);
    op.svd(false, false).singular_values.min()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiccatiResidual {
    pub x3: Vec<f64>,
    /// ‖T B² + A B + Q‖/‖Q‖ at each grid point
    pub order2: Vec<f64>,
    /// ‖T D₃B + G B + F + R‖, not expected to vanish
    pub remainder: Vec<f64>,
    /// ‖D₃B‖
    pub d3b: Vec<f64>,
}

impl RiccatiResidual {
    pub fn max_order2(&self) -> f64 {
        self.order2.iter().copied().fold(0.0, f64::max)
    }
}

/// Principal part of the Riccati equation for B along the normal through the
/// base point; D₃B by central differences with step `h`.
pub fn riccati_full_residual(
    eps: &TaylorField,
    mu: &TaylorField,
    omega: f64,
    xi: &Vector2<f64>,
    grid: &[f64],
    h: f64,
) -> Result<RiccatiResidual> {
    let b_at = |x3: f64| -> Result<(SymbolSet, CMat3)> {
        let x = [0.0, 0.0, x3];
        let (je, jm) = (eps.jet_at(x, 2)?, mu.jet_at(x, 2)?);
        let s = coefficient_symbols(&je, &jm, omega)?;
        let (b, _) = principal_b(&s, &je.value, &jm.value, xi)?;
        Ok((s, b))
    };
    let mut out = RiccatiResidual { x3: grid.to_vec(), order2: vec![], remainder: vec![], d3b: vec![] };
    for &x3 in grid {
        let (s, b) = b_at(x3)?;
        let (_, bp) = b_at(x3 + h)?;
        let (_, bm) = b_at(x3 - h)?;
        let d3b = (bp - bm) * c(0.0, -1.0 / (2.0 * h));
        out.order2.push(quadratic_residual(&s, &b, xi));
        out.remainder.push((s.t * d3b + s.g * b + s.f_at(xi) + s.r).norm());
        out.d3b.push(d3b.norm());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spd(e: [f64; 9]) -> Mat3 {
        let m = Mat3::from_row_slice(&e);
        m.transpose() * m + Mat3::identity() * 0.3
    }

    fn sym(e: [f64; 6]) -> Mat3 {
        from_sym6(&e)
    }

    fn xi10() -> Vector2<f64> {
        Vector2::new(1.0, 0.0)
    }

    fn consts(eps: Metric3, mu: Metric3) -> SymbolSet {
        coefficient_symbols(&MetricJet::constant(eps), &MetricJet::constant(mu), 1.0).unwrap()
    }

    /// Index-loop evaluation of the principal coefficients straight from the
    /// coordinate formulas.
    fn loops(e: &Mat3, u: &Mat3, xi: &Vector2<f64>) -> (Mat3, Mat3, Mat3) {
        let ei = e.try_inverse().unwrap();
        let rho = (e.determinant() / u.determinant()).sqrt();
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let (mut t, mut a, mut q) = (Mat3::zeros(), Mat3::zeros(), Mat3::zeros());
        let tang = [0usize, 1];
        for l in 0..3 {
            for k in 0..3 {
                let mut tv = d(l, k) * e[(2, 2)] - d(l, 2) * e[(2, k)];
                let mut av = 0.0;
                let mut qv = 0.0;
                for qq in 0..3 {
                    tv += rho * ei[(l, qq)] * u[(qq, 2)] * u[(k, 2)];
                    for &ta in &tang {
                        av += rho * ei[(l, qq)] * (u[(qq, 2)] * u[(k, ta)] + u[(qq, ta)] * u[(k, 2)]) * xi[ta];
                        for &tb in &tang {
                            qv += rho * ei[(l, qq)] * u[(qq, ta)] * xi[ta] * u[(k, tb)] * xi[tb];
                        }
                    }
                }
                for &ta in &tang {
                    av += 2.0 * d(l, k) * e[(2, ta)] * xi[ta] - d(l, 2) * xi[ta] * e[(ta, k)];
                    if tang.contains(&l) && l == ta {
                        av -= xi[ta] * e[(2, k)];
                    }
                    for &tb in &tang {
                        qv += d(l, k) * xi[ta] * e[(ta, tb)] * xi[tb];
                        if tang.contains(&l) {
                            qv -= if l == ta { xi[ta] * xi[tb] * e[(tb, k)] } else { 0.0 };
                        }
                    }
                }
                t[(l, k)] = tv;
                a[(l, k)] = av;
                q[(l, k)] = qv;
            }
        }
        (t, a, q)
    }

    fn re(m: &CMat3) -> Mat3 {
        m.map(|z| z.re)
    }

    #[test]
    fn identity_metrics() {
        let s = consts(Metric3::identity(), Metric3::identity());
        assert_eq!(re(&s.t), Mat3::from_diagonal(&Vector3::new(1.0, 1.0, 1.0)));
        let m = s.matrix_polynomial(&xi10(), c(0.0, 1.0));
        assert!(m.determinant().norm() < 1e-14);
        assert_eq!(s.g, CMat3::zeros());
        assert_eq!(s.f_at(&Vector2::new(0.3, -0.7)), CMat3::zeros());
        assert!((re(&s.r) + Mat3::identity()).norm() < 1e-15);
    }

    #[test]
    fn matches_index_loops() {
        let e = sym([1.3, 0.2, -0.1, 0.9, 0.15, 1.1]);
        let u = sym([0.8, -0.1, 0.3, 1.4, 0.05, 0.7]);
        let s = consts(Metric3::new(e).unwrap(), Metric3::new(u).unwrap());
        let xi = Vector2::new(0.6, -1.3);
        let (t, a, q) = loops(&e, &u, &xi);
        assert!((re(&s.t) - t).norm() < 1e-14);
        assert!((re(&s.a_at(&xi)) - a).norm() < 1e-14);
        assert!((re(&s.q_at(&xi)) - q).norm() < 1e-14);
        assert!(s.matrix_polynomial(&xi, c(0.0, 0.0)) == s.q_at(&xi));
    }

    #[test]
    fn constant_metrics_r_term() {
        let e = Metric3::new(sym([1.3, 0.2, -0.1, 0.9, 0.15, 1.1])).unwrap();
        let u = Metric3::new(sym([0.8, -0.1, 0.3, 1.4, 0.05, 0.7])).unwrap();
        let s = coefficient_symbols(&MetricJet::constant(e), &MetricJet::constant(u), 2.0).unwrap();
        let rho = e.sqrt_det_inv().recip() * u.sqrt_det_inv();
        let want = -(e.inverse().matrix() * u.matrix()) * (4.0 * rho);
        assert!((re(&s.r) - want).norm() < 1e-14);
        assert!((s.rho - rho).abs() < 1e-15);
    }

    #[test]
    fn triangular_form_in_chi_basis() {
        let e = Metric3::new(sym([1.3, 0.2, -0.1, 0.9, 0.15, 1.1])).unwrap();
        let u = Metric3::new(sym([0.8, -0.1, 0.3, 1.4, 0.05, 0.7])).unwrap();
        let s = consts(e, u);
        let xt = Vector2::new(0.4, 0.9);
        let z3 = c(0.3, -0.8);
        let xi = extend(&xt, z3);
        let (ch, ze) = (chi(&e, &u, &xi), zeta(&e, &u, &xi));
        let basis = CMat3::from_columns(&[ch, xi, ze]);
        let ueiu = Metric3::new(u.matrix() * e.inverse().matrix() * u.matrix()).unwrap();
        let (ne, nm, nx) = (bilinear_form(&xi, &xi, &e), bilinear_form(&xi, &xi, &u), bilinear_form(&xi, &xi, &ueiu));
        let rho = cx(s.rho);
        let mut k = CMat3::zeros();
        k[(0, 0)] = ne;
        k[(1, 2)] = rho * nm;
        k[(2, 1)] = -nm;
        k[(2, 2)] = rho * nx + ne;
        let lhs = s.matrix_polynomial(&xt, z3) * basis;
        let rhs = basis * k.transpose();
        assert!((lhs - rhs).norm() < 1e-13 * lhs.norm());
    }

    #[test]
    fn eigenvalue_examples() {
        let et = crate::tensor_core::Metric2::diagonal(2.0, 3.0).unwrap();
        let e = Metric3::block_diag(&et, 1.0).unwrap();
        let (xe, _) = eigenvalues(&e, &Metric3::identity(), &xi10()).unwrap();
        assert!((xe - c(0.0, 2f64.sqrt())).norm() < 1e-15);
        let mu = Metric3::from_upper([2.0, 0.0, 2.0, 1.0, 0.0, 4.0]).unwrap();
        let (_, xm) = eigenvalues(&e, &mu, &xi10()).unwrap();
        assert!((xm - c(-0.5, 0.5)).norm() < 1e-15);
        for (m, z) in [(&e, xe), (&mu, xm)] {
            let xi = extend(&xi10(), z);
            assert!(bilinear_form(&xi, &xi, m).norm() < 1e-14);
        }
        assert!(eigenvalues(&e, &mu, &Vector2::zeros()).is_err());
    }

    #[test]
    fn chain_example() {
        let e = Metric3::identity();
        let mu = Metric3::diagonal(1.0, 1.0, 4.0).unwrap();
        let s = consts(e, mu);
        let jd = jordan_data(&e, &mu, &xi10()).unwrap();
        let r = chain_residuals(&s, &jd, &xi10());
        assert!(r[0] < 1e-11 && r[1] < 1e-11 && r[2] < 1e-10, "{r:?}");
        assert!(bilinear_form(&jd.chi, &extend(&xi10(), jd.xi_eps3), &e).norm() < 1e-14);
    }

    #[test]
    fn degenerate_point() {
        let e = Metric3::identity();
        let s = consts(e, e);
        assert!(matches!(jordan_data(&e, &e, &xi10()), Err(Error::Degenerate(_))));
        let (b, route) = principal_b(&s, &e, &e, &xi10()).unwrap();
        assert_eq!(route, Route::Contour);
        assert!(quadratic_residual(&s, &b, &xi10()) < 1e-9);
        // isotropic: B = i|ξ̃| I
        assert!((b - CMat3::identity() * c(0.0, 1.0)).norm() < 1e-10);
    }

    #[test]
    fn perturbed_b_breaks_factorization() {
        let e = Metric3::new(sym([1.3, 0.2, -0.1, 0.9, 0.15, 1.1])).unwrap();
        let u = Metric3::new(sym([0.8, -0.1, 0.3, 1.4, 0.05, 0.7])).unwrap();
        let s = consts(e, u);
        let xi = Vector2::new(0.4, 0.9);
        let (b, _) = principal_b(&s, &e, &u, &xi).unwrap();
        let samples: Vec<C64> = (0..20).map(|k| C64::from_polar(1.0 + 0.1 * k as f64, 0.3 * k as f64)).collect();
        let good = factorization_residual(&s, &b, &xi, &samples);
        assert!(good.full < 1e-10 && good.constant_term < 1e-10, "{good:?}");
        let mut bad = b;
        bad[(0, 1)] += c(1e-3 * b.norm(), 0.0);
        let r = factorization_residual(&s, &bad, &xi, &samples);
        assert!(r.full > 1e-4 && r.constant_term > 1e-4, "{r:?}");
    }

    #[test]
    fn sylvester_detects_shared_eigenvalue() {
        let e = Metric3::new(sym([1.3, 0.2, -0.1, 0.9, 0.15, 1.1])).unwrap();
        let u = Metric3::new(sym([0.8, -0.1, 0.3, 1.4, 0.05, 0.7])).unwrap();
        let s = consts(e, u);
        let xi = Vector2::new(0.4, 0.9);
        let (b, _) = principal_b(&s, &e, &u, &xi).unwrap();
        assert!(sylvester_sigma_min(&s, &b, &xi) > 1e-3);
        let m1 = s.t_inverse() * s.a_at(&xi) + b;
        // N = −M₁ gives spec(M₁) ∩ spec(−N) = spec(M₁)
        assert!(sylvester_operator_sigma_min(&m1, &(-m1)) < 1e-12);
    }

    #[test]
    fn riccati_constant_fields() {
        let e = Metric3::new(sym([1.3, 0.2, -0.1, 0.9, 0.15, 1.1])).unwrap();
        let u = Metric3::new(sym([0.8, -0.1, 0.3, 1.4, 0.05, 0.7])).unwrap();
        let (fe, fu) = (TaylorField::from_jet(&MetricJet::constant(e)), TaylorField::from_jet(&MetricJet::constant(u)));
        let grid: Vec<f64> = (0..10).map(|k| 0.01 * k as f64).collect();
        let r = riccati_full_residual(&fe, &fu, 1.0, &Vector2::new(0.4, 0.9), &grid, 1e-4).unwrap();
        assert!(r.max_order2() < 1e-10);
        assert!(r.d3b.iter().all(|&d| d < 1e-9));
    }

    #[test]
    fn taylor_field_round_trip() {
        let mut j = MetricJet::constant(Metric3::new(sym([1.3, 0.2, -0.1, 0.9, 0.15, 1.1])).unwrap());
        j.d_tangential = [sym([0.1, 0.0, 0.02, -0.1, 0.0, 0.05]), sym([0.0, 0.03, 0.0, 0.1, 0.01, -0.02])];
        j.d_normal = vec![sym([0.05, 0.01, 0.0, 0.02, 0.0, 0.1]), sym([0.1; 6]), sym([0.2, 0.0, 0.0, 0.3, 0.0, 0.1])];
        j.d_tangential2 = [sym([0.01; 6]), sym([0.02, 0.0, 0.0, 0.0, 0.0, 0.0]), sym([0.0, 0.0, 0.0, 0.0, 0.0, 0.03])];
        j.d_mixed = [sym([0.0, 0.04, 0.0, 0.0, 0.0, 0.0]), sym([0.05, 0.0, 0.0, 0.0, 0.0, 0.0])];
        let f = TaylorField::from_jet(&j);
        assert_eq!(f.jet_at([0.0; 3], 3).unwrap(), j);
        // finite-difference check of the re-centred jet
        let x = [0.1, -0.05, 0.2];
        let jx = f.jet_at(x, 3).unwrap();
        let h = 1e-5;
        for a in 0..3 {
            let (mut xp, mut xm) = (x, x);
            xp[a] += h;
            xm[a] -= h;
            let fd = (f.raw(xp) - f.raw(xm)) / (2.0 * h);
            assert!((fd - jx.first(a)).norm() < 1e-8);
        }
        let json = serde_json::to_string(&j).unwrap();
        let back: MetricJet = serde_json::from_str(&json).unwrap();
        assert!((back.first(2) - j.first(2)).norm() < 1e-15);
    }

    fn random_pair(e: [f64; 9], m: [f64; 9]) -> (Metric3, Metric3) {
        (Metric3::new(spd(e)).unwrap(), Metric3::new(spd(m)).unwrap())
    }

    #[test]
    fn ill_conditioned_jordan_basis_routes_to_contour() {
        // μ̂ within 1e-6 of conformal to ε̂: separated roots, nearly parallel chain
        let e = Metric3::block_diag(&crate::tensor_core::Metric2::from_upper([1.3, 0.2, 0.8]).unwrap(), 1.0).unwrap();
        let m = Metric3::new(e.matrix() * 1.7 + sym([1e-6, 0.0, 0.0, -1e-6, 0.0, 5e-7])).unwrap();
        let s = consts(e, m);
        let xi = Vector2::new(0.6, -0.8);
        let jd = jordan_data(&e, &m, &xi).unwrap();
        assert!(jd.condition > ROUTING_CONDITION && jd.condition < CONDITION_LIMIT);
        let (b, route) = principal_b(&s, &e, &m, &xi).unwrap();
        assert_eq!(route, Route::Contour);
        assert!(quadratic_residual(&s, &b, &xi) < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn homogeneity(e in prop::array::uniform9(-1.0..1.0f64), m in prop::array::uniform9(-1.0..1.0f64),
                       th in 0.0..6.3f64) {
            let (e, m) = random_pair(e, m);
            let s = consts(e, m);
            let xi = Vector2::new(th.cos(), th.sin());
            let x2 = xi * 2.0;
            prop_assert!((s.a_at(&x2) - s.a_at(&xi) * cx(2.0)).norm() < 1e-13 * s.a_at(&x2).norm().max(1.0));
            prop_assert!((s.q_at(&x2) - s.q_at(&xi) * cx(4.0)).norm() < 1e-13 * s.q_at(&x2).norm());
            let (b1, _) = principal_b(&s, &e, &m, &xi).unwrap();
            let (b2, _) = principal_b(&s, &e, &m, &x2).unwrap();
            prop_assert!((b2 - b1 * cx(2.0)).norm() < 1e-9 * b2.norm());
        }

        #[test]
        fn chains_and_routes(e in prop::array::uniform9(-1.0..1.0f64), m in prop::array::uniform9(-1.0..1.0f64),
                             th in 0.0..6.3f64) {
            let (e, m) = random_pair(e, m);
            let s = consts(e, m);
            let xi = Vector2::new(th.cos(), th.sin());
            let jd = jordan_data(&e, &m, &xi);
            prop_assume!(jd.is_ok());
            let jd = jd.unwrap();
            let r = chain_residuals(&s, &jd, &xi);
            prop_assert!(r.iter().all(|&x| x < 1e-9), "{:?}", r);
            if let Ok(bj) = principal_b_jordan(&jd) {
                let (bc, _) = principal_b_contour(&s, &xi).unwrap();
                prop_assert!((bj - bc).norm() < 1e-8 * bj.norm(), "{}", (bj - bc).norm() / bj.norm());
                prop_assert!(quadratic_residual(&s, &bj, &xi) < 1e-10);
            }
        }

        #[test]
        fn roots_conjugate(e in prop::array::uniform9(-1.0..1.0f64), m in prop::array::uniform9(-1.0..1.0f64),
                           th in 0.0..6.3f64) {
            let (e, m) = random_pair(e, m);
            let s = consts(e, m);
            let xi = Vector2::new(th.cos(), th.sin());
            let roots = polynomial_roots(&s, &xi);
            let (xe, xm) = eigenvalues(&e, &m, &xi).unwrap();
            for z in [xe, xm, xe.conj(), xm.conj()] {
                let d = roots.iter().map(|r| (r - z).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(d < 1e-6 * (1.0 + z.norm()), "{} {:?}", z, roots);
            }
        }
    }
}
