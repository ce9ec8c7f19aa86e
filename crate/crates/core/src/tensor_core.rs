//! Small-dimension tensor algebra in a fixed chart.
//!
//! Metrics are stored by their component matrix. Unless stated otherwise a
//! `Metric3` holds the components m^{ij} of a form acting on covectors, and
//! the Riemannian volume it induces is √det(m⁻¹) dx¹∧dx²∧dx³.
//! Two-forms are stored by their coefficients on (dx²∧dx³, dx³∧dx¹, dx¹∧dx²).

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Covector3 = Vector3<C64>;
pub type TangentialCovector = Vector2<C64>;
pub type SymbolMatrix = Matrix3<C64>;

const SPD_TOL: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Real 3-vector promoted to a complex covector.
pub fn covector(v: [f64; 3]) -> Covector3 {
    Vector3::new(c(v[0], 0.0), c(v[1], 0.0), c(v[2], 0.0))
}

/// The conormal dx³ of the boundary x³ = 0.
pub fn nu() -> Covector3 {
    covector([0.0, 0.0, 1.0])
}

/// (ξ̃, ξ₃) as a full covector.
pub fn extend(xi_t: &Vector2<f64>, xi3: C64) -> Covector3 {
    Vector3::new(c(xi_t[0], 0.0), c(xi_t[1], 0.0), xi3)
}

/// Tangential part ι*a (drops the normal component).
pub fn restrict(a: &Covector3) -> TangentialCovector {
    Vector2::new(a[0], a[1])
}

pub fn complexify3(m: &Matrix3<f64>) -> Matrix3<C64> {
    m.map(|x| c(x, 0.0))
}

pub fn complexify2(m: &Matrix2<f64>) -> Matrix2<C64> {
    m.map(|x| c(x, 0.0))
}

fn max_abs<const R: usize>(m: &nalgebra::SMatrix<f64, R, R>) -> f64 {
    m.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

fn check_spd<const R: usize>(m: &nalgebra::SMatrix<f64, R, R>) -> Result<nalgebra::SMatrix<f64, R, R>> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidMetric("non-finite entry".into()));
    }
    let scale = max_abs(m);
    if scale == 0.0 {
        return Err(Error::InvalidMetric("zero matrix".into()));
    }
    let asym = max_abs(&(m - m.transpose()));
    if asym > SPD_TOL * scale {
        return Err(Error::InvalidMetric(format!("not symmetric (defect {asym:.3e})")));
    }
    let s = (m + m.transpose()) * 0.5;
    for k in 1..=R {
        let minor = s.view((0, 0), (k, k)).determinant();
        if minor <= SPD_TOL * scale.powi(k as i32) {
            return Err(Error::InvalidMetric(format!("leading minor {k} is {minor:.3e}")));
        }
    }
    Ok(s)
}

/// Symmetric positive-definite 3×3 form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 6]", into = "[f64; 6]")]
pub struct Metric3 {
    m: Matrix3<f64>,
}

impl Metric3 {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        Ok(Self { m: check_spd(&m)? })
    }

    pub fn identity() -> Self {
        Self { m: Matrix3::identity() }
    }

    pub fn diagonal(a: f64, b: f64, c3: f64) -> Result<Self> {
        Self::new(Matrix3::from_diagonal(&Vector3::new(a, b, c3)))
    }

    /// Entries in the order (11, 12, 13, 22, 23, 33).
    pub fn from_upper(u: [f64; 6]) -> Result<Self> {
        Self::new(Matrix3::new(u[0], u[1], u[2], u[1], u[3], u[4], u[2], u[4], u[5]))
    }

    pub fn to_upper(&self) -> [f64; 6] {
        let m = &self.m;
        [m[(0, 0)], m[(0, 1)], m[(0, 2)], m[(1, 1)], m[(1, 2)], m[(2, 2)]]
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn complex(&self) -> Matrix3<C64> {
        complexify3(&self.m)
    }

    pub fn det(&self) -> f64 {
        self.m.determinant()
    }

    pub fn inverse(&self) -> Metric3 {
        let inv = self.m.try_inverse().expect("SPD matrix is invertible");
        Self { m: (inv + inv.transpose()) * 0.5 }
    }

    /// √det(m⁻¹), the density of the induced volume form.
    pub fn sqrt_det_inv(&self) -> f64 {
        1.0 / self.det().sqrt()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    /// Upper-left 2×2 block.
    pub fn tangential_block(&self) -> Metric2 {
        Metric2 { m: self.m.fixed_view::<2, 2>(0, 0).into_owned() }
    }

    /// Form induced on boundary covectors: the Schur complement of the (3,3) entry.
    pub fn boundary_cometric(&self) -> Metric2 {
        let u = Vector2::new(self.m[(0, 2)], self.m[(1, 2)]);
        let t = self.m.fixed_view::<2, 2>(0, 0).into_owned() - u * u.transpose() / self.m[(2, 2)];
        Metric2 { m: (t + t.transpose()) * 0.5 }
    }

    /// Whether the matrix has the boundary-normal shape blockdiag(·, 1).
    pub fn is_boundary_normal(&self, tol: f64) -> bool {
        self.m[(0, 2)].abs() <= tol && self.m[(1, 2)].abs() <= tol && (self.m[(2, 2)] - 1.0).abs() <= tol
    }

    pub fn block_diag(t: &Metric2, m33: f64) -> Result<Self> {
        let mut m = Matrix3::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(t.matrix());
        m[(2, 2)] = m33;
        Self::new(m)
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.m * s)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.m.norm()
    }
}

impl TryFrom<[f64; 6]> for Metric3 {
    type Error = Error;
    fn try_from(u: [f64; 6]) -> Result<Self> {
        Self::from_upper(u)
    }
}

impl From<Metric3> for [f64; 6] {
    fn from(m: Metric3) -> Self {
        m.to_upper()
    }
}

/// Symmetric positive-definite 2×2 form on boundary covectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Metric2 {
    m: Matrix2<f64>,
}

impl Metric2 {
    pub fn new(m: Matrix2<f64>) -> Result<Self> {
        Ok(Self { m: check_spd(&m)? })
    }

    pub fn identity() -> Self {
        Self { m: Matrix2::identity() }
    }

    pub fn diagonal(a: f64, b: f64) -> Result<Self> {
        Self::new(Matrix2::new(a, 0.0, 0.0, b))
    }

    /// Entries in the order (11, 12, 22).
    pub fn from_upper(u: [f64; 3]) -> Result<Self> {
        Self::new(Matrix2::new(u[0], u[1], u[1], u[2]))
    }

    pub fn to_upper(&self) -> [f64; 3] {
        [self.m[(0, 0)], self.m[(0, 1)], self.m[(1, 1)]]
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.m
    }

    pub fn det(&self) -> f64 {
        self.m.determinant()
    }

    pub fn inverse(&self) -> Metric2 {
        let inv = self.m.try_inverse().expect("SPD matrix is invertible");
        Self { m: (inv + inv.transpose()) * 0.5 }
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.m * s)
    }

    pub fn norm(&self) -> f64 {
        self.m.norm()
    }

    /// |ξ̃| for a real covector.
    pub fn length(&self, xi: &Vector2<f64>) -> f64 {
        (xi.transpose() * self.m * xi)[(0, 0)].sqrt()
    }
}

impl TryFrom<[f64; 3]> for Metric2 {
    type Error = Error;
    fn try_from(u: [f64; 3]) -> Result<Self> {
        Self::from_upper(u)
    }
}

impl From<Metric2> for [f64; 3] {
    fn from(m: Metric2) -> Self {
        m.to_upper()
    }
}

/// Coefficients of dx²∧dx³, dx³∧dx¹, dx¹∧dx².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoForm3(pub Vector3<C64>);

/// Alternating symbol σ_{ijk} on zero-based indices.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// σ_{ij} on zero-based indices.
pub fn levi_civita2(i: usize, j: usize) -> f64 {
    match (i, j) {
        (0, 1) => 1.0,
        (1, 0) => -1.0,
        _ => 0.0,
    }
}

/// ⟨a, b⟩_m = m^{ij} a_i b_j, with no conjugation.
pub fn bilinear_form(a: &Covector3, b: &Covector3, m: &Metric3) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            s += a[i] * b[j] * m.m[(i, j)];
        }
    }
    s
}

pub fn bilinear_form2(a: &TangentialCovector, b: &TangentialCovector, m: &Metric2) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            s += a[i] * b[j] * m.m[(i, j)];
        }
    }
    s
}

pub fn wedge(a: &Covector3, b: &Covector3) -> TwoForm3 {
    TwoForm3(a.cross(b))
}

/// Coefficient of a∧w on dx¹∧dx²∧dx³.
pub fn wedge_top(a: &Covector3, w: &TwoForm3) -> C64 {
    a[0] * w.0[0] + a[1] * w.0[1] + a[2] * w.0[2]
}

/// ∗_m on 1-forms, fixed by a∧∗a = ⟨a,a⟩_m dV_m.
pub fn hodge_star_1form(a: &Covector3, m: &Metric3) -> TwoForm3 {
    TwoForm3(m.complex() * a * c(m.sqrt_det_inv(), 0.0))
}

/// ∗_m on 2-forms, the inverse of [`hodge_star_1form`].
pub fn hodge_star_2form(w: &TwoForm3, m: &Metric3) -> Covector3 {
    m.inverse().complex() * w.0 * c(1.0 / m.sqrt_det_inv(), 0.0)
}

/// Coefficient of a∧b on dx¹∧dx².
pub fn wedge2(a: &TangentialCovector, b: &TangentialCovector) -> C64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Argument and result of the boundary Hodge star.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryForm {
    /// Coefficient s of s·dx¹∧dx².
    Area(C64),
    Covector(TangentialCovector),
}

pub fn boundary_hodge(w: BoundaryForm, m2: &Metric2) -> BoundaryForm {
    match w {
        BoundaryForm::Area(s) => BoundaryForm::Area(boundary_hodge_area(s, m2)),
        BoundaryForm::Covector(xi) => BoundaryForm::Covector(boundary_hodge_1form(&xi, m2)),
    }
}

/// ∗(s dx¹∧dx²) = s·√det(m2).
pub fn boundary_hodge_area(s: C64, m2: &Metric2) -> C64 {
    s * m2.det().sqrt()
}

/// ξ̃_⊥ with ⟨ξ̃,ξ̃_⊥⟩ = 0 and ξ̃∧ξ̃_⊥ = |ξ̃|² dv.
pub fn boundary_hodge_1form(xi: &TangentialCovector, m2: &Metric2) -> TangentialCovector {
    let v = complexify2(&m2.m) * xi;
    Vector2::new(-v[1], v[0]) * c(1.0 / m2.det().sqrt(), 0.0)
}

/// Principal square root of ⟨a,a⟩_m.
pub fn complex_length(a: &Covector3, m: &Metric3) -> C64 {
    bilinear_form(a, a, m).sqrt()
}

/// Max over free indices of |σ^{aqj}σ^{dkb} g_{bj} − |g|(g^{ad}g^{qk} − g^{ak}g^{qd})|,
/// where `g` holds the components g_{ij}.
pub fn cofactor_identity_residual(g: &Metric3) -> f64 {
    let gl = g.matrix();
    let gu = g.inverse();
    let gu = gu.matrix();
    let det = g.det();
    let mut worst = 0.0_f64;
    for a in 0..3 {
        for q in 0..3 {
            for d in 0..3 {
                for k in 0..3 {
                    let mut lhs = 0.0;
                    for j in 0..3 {
                        for b in 0..3 {
                            lhs += levi_civita(a, q, j) * levi_civita(d, k, b) * gl[(b, j)];
                        }
                    }
                    let rhs = det * (gu[(a, d)] * gu[(q, k)] - gu[(a, k)] * gu[(q, d)]);
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
    }
    worst
}

/// Max over (p,q,r) of ||g⁻¹|σ^{pqr} − σ_{ijk} g^{pi} g^{qj} g^{rk}|, `g` holding g_{ij}.
pub fn alt_det_inverse_residual(g: &Metric3) -> f64 {
    let gi = g.inverse();
    let gu = gi.matrix();
    let det_inv = gi.det();
    let mut worst = 0.0_f64;
    for p in 0..3 {
        for q in 0..3 {
            for r in 0..3 {
                let mut rhs = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        for k in 0..3 {
                            rhs += levi_civita(i, j, k) * gu[(p, i)] * gu[(q, j)] * gu[(r, k)];
                        }
                    }
                }
                worst = worst.max((det_inv * levi_civita(p, q, r) - rhs).abs());
            }
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexMode {
    Raise,
    Lower,
}

/// Raise (m·t) or lower (m⁻¹·t) the first index of `t`, with `m` holding g^{ij}.
pub fn raise_lower(t: &Matrix3<f64>, m: &Metric3, mode: IndexMode) -> Matrix3<f64> {
    match mode {
        IndexMode::Raise => m.matrix() * t,
        IndexMode::Lower => m.inverse().matrix() * t,
    }
}
