//! Hat metrics, boundary-normal reduction, chart changes and the
//! boundary-fixing gauge diffeomorphism.

use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::tensor_core::{Metric2, Metric3};

/// Physical parameters (ε, μ, g, ω). `epsilon` and `mu` hold the components
/// ε_k^j of (1,1)-tensors (row k, column j); `g` holds g_{ij}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterTriple {
    pub epsilon: Matrix3<f64>,
    pub mu: Matrix3<f64>,
    pub g: Metric3,
    pub omega: f64,
}

impl ParameterTriple {
    pub fn new(epsilon: Matrix3<f64>, mu: Matrix3<f64>, g: Metric3, omega: f64) -> Result<Self> {
        let p = Self { epsilon, mu, g, omega };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidInput(format!("omega must be positive, got {}", self.omega)));
        }
        Metric3::new(self.g.matrix() * self.epsilon)
            .map_err(|e| Error::InvalidMetric(format!("g·ε: {e}")))?;
        Metric3::new(self.g.matrix() * self.mu).map_err(|e| Error::InvalidMetric(format!("g·μ: {e}")))?;
        Ok(())
    }

    /// (t⁻¹)_♭ / √|g| for t = ε or μ.
    fn flat_inverse_density(&self, t: &Matrix3<f64>) -> Result<Matrix3<f64>> {
        let inv = t.try_inverse().ok_or(Error::Singular("parameter tensor"))?;
        Ok(self.g.matrix() * inv / self.g.det().sqrt())
    }
}

/// The conformally normalized metrics (ε̂, μ̂), stored as forms on covectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HatPair {
    pub eps_hat: Metric3,
    pub mu_hat: Metric3,
}

impl HatPair {
    pub fn swapped(&self) -> HatPair {
        HatPair { eps_hat: self.mu_hat, mu_hat: self.eps_hat }
    }
}

/// Y with Y⁻¹/√det Y⁻¹ = A, i.e. Y = det(A)·A⁻¹.
fn solve_hat(a: &Matrix3<f64>) -> Result<Metric3> {
    let ai = a.try_inverse().ok_or(Error::Singular("parameter tensor"))?;
    Metric3::new(ai * a.determinant())
}

pub fn build_hat_pair(p: &ParameterTriple) -> Result<HatPair> {
    p.validate()?;
    let eps_hat = solve_hat(&p.flat_inverse_density(&p.epsilon)?)?;
    let mu_hat = solve_hat(&p.flat_inverse_density(&p.mu)?)?;
    Ok(HatPair { eps_hat, mu_hat })
}

/// Defect of ε̂⁻¹/√|ε̂⁻¹| = (ε⁻¹)_♭/√|g| and the μ counterpart, measured as
/// ‖ε̂·A/√|ε̂| − I‖ with A the right-hand side.
pub fn hat_relation_residual(p: &ParameterTriple, pair: &HatPair) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (t, hat) in [(&p.epsilon, &pair.eps_hat), (&p.mu, &pair.mu_hat)] {
        let a = p.flat_inverse_density(t)?;
        let r = hat.matrix() * a / hat.det().sqrt() - Matrix3::identity();
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// DΨ taking `m` to blockdiag(·, 1).
pub fn bnc_jacobian(m: &Metric3) -> Matrix3<f64> {
    let m33 = m.entry(2, 2);
    Matrix3::new(
        1.0,
        0.0,
        -m.entry(0, 2) / m33,
        0.0,
        1.0,
        -m.entry(1, 2) / m33,
        0.0,
        0.0,
        1.0 / m33.sqrt(),
    )
}

/// DΨ⁻¹ in closed form.
pub fn bnc_jacobian_inverse(m: &Metric3) -> Matrix3<f64> {
    let m33 = m.entry(2, 2);
    let s = m33.sqrt();
    Matrix3::new(1.0, 0.0, m.entry(0, 2) / s, 0.0, 1.0, m.entry(1, 2) / s, 0.0, 0.0, s)
}

/// Boundary-normal chart for one metric, carrying a companion metric along.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryChart {
    pub jacobian: Matrix3<f64>,
    pub eps_tilde: Metric2,
    pub reduced: Metric3,
    pub mu_in_eps_bnc: Metric3,
}

pub fn to_boundary_normal(eps_hat: &Metric3, companion: &Metric3) -> Result<BoundaryChart> {
    let jacobian = bnc_jacobian(eps_hat);
    let reduced = pushforward_metric(eps_hat, &jacobian)?;
    let eps_tilde = reduced.tangential_block();
    // the reduced form is blockdiag(ε̃, 1) up to rounding; store it exactly
    let reduced = Metric3::block_diag(&eps_tilde, 1.0)?;
    let mu_in_eps_bnc = pushforward_metric(companion, &jacobian)?;
    Ok(BoundaryChart { jacobian, eps_tilde, reduced, mu_in_eps_bnc })
}

/// J·m·Jᵀ for a form on covectors.
pub fn pushforward_metric(m: &Metric3, j: &Matrix3<f64>) -> Result<Metric3> {
    if j.determinant().abs() < 1e-300 || !j.iter().all(|x| x.is_finite()) {
        return Err(Error::Singular("chart jacobian"));
    }
    Metric3::new(j * m.matrix() * j.transpose())
}

/// J⁻ᵀ·m·J⁻¹ for a form on vectors (components m_{ij}).
pub fn pushforward_covariant(m: &Metric3, j: &Matrix3<f64>) -> Result<Metric3> {
    let ji = j.try_inverse().ok_or(Error::Singular("chart jacobian"))?;
    Metric3::new(ji.transpose() * m.matrix() * ji)
}

/// A metric-valued field on a chart.
pub trait MetricField: Send + Sync {
    fn value(&self, x: [f64; 3]) -> Metric3;
}

#[derive(Clone, Copy, Debug)]
pub struct ConstantField(pub Metric3);

impl MetricField for ConstantField {
    fn value(&self, _x: [f64; 3]) -> Metric3 {
        self.0
    }
}

/// A positive scalar field with analytic gradient.
pub trait ScalarField: Send + Sync {
    fn value(&self, x: [f64; 3]) -> f64;
    fn gradient(&self, x: [f64; 3]) -> [f64; 3];
    fn sup(&self) -> f64;
    fn inf(&self) -> f64;
    /// Axis-aligned box containing supp(h − 1); `None` when h ≡ 1.
    fn support(&self) -> Option<([f64; 3], [f64; 3])>;
}

/// Built-in families for the target Jacobian determinant h.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GaugeProfile {
    Constant,
    /// h = 1 + amplitude·exp(1 − 1/(1 − r²)), r = |x − center|/radius.
    Bump { amplitude: f64, center: [f64; 3], radius: f64 },
}

impl GaugeProfile {
    fn bump_core(x: [f64; 3], center: [f64; 3], radius: f64) -> Option<(f64, f64, [f64; 3])> {
        let d = [x[0] - center[0], x[1] - center[1], x[2] - center[2]];
        let s = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (radius * radius);
        if s >= 1.0 {
            return None;
        }
        let psi = (1.0 - 1.0 / (1.0 - s)).exp();
        let dpsi_ds = -psi / ((1.0 - s) * (1.0 - s));
        Some((psi, dpsi_ds, d))
    }
}

impl ScalarField for GaugeProfile {
    fn value(&self, x: [f64; 3]) -> f64 {
        match *self {
            GaugeProfile::Constant => 1.0,
            GaugeProfile::Bump { amplitude, center, radius } => {
                1.0 + Self::bump_core(x, center, radius).map_or(0.0, |(p, _, _)| amplitude * p)
            }
        }
    }

    fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        match *self {
            GaugeProfile::Constant => [0.0; 3],
            GaugeProfile::Bump { amplitude, center, radius } => match Self::bump_core(x, center, radius) {
                None => [0.0; 3],
                Some((_, dpsi, d)) => {
                    let k = amplitude * dpsi * 2.0 / (radius * radius);
                    [k * d[0], k * d[1], k * d[2]]
                }
            },
        }
    }

    fn sup(&self) -> f64 {
        match *self {
            GaugeProfile::Constant => 1.0,
            GaugeProfile::Bump { amplitude, .. } => 1.0 + amplitude.max(0.0),
        }
    }

    fn inf(&self) -> f64 {
        match *self {
            GaugeProfile::Constant => 1.0,
            GaugeProfile::Bump { amplitude, .. } => 1.0 + amplitude.min(0.0),
        }
    }

    fn support(&self) -> Option<([f64; 3], [f64; 3])> {
        match *self {
            GaugeProfile::Constant => None,
            GaugeProfile::Bump { amplitude: 0.0, .. } => None,
            GaugeProfile::Bump { center, radius, .. } => Some((
                [center[0] - radius, center[1] - radius, center[2] - radius],
                [center[0] + radius, center[1] + radius, center[2] + radius],
            )),
        }
    }
}

/// Smooth step 0 → 1 on [0, 1] with ∫₀¹ = 1/2.
fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

const PLATEAU: f64 = 0.3;
const EDGE: f64 = 0.7;

/// Even bump φ: 0 ≤ φ ≤ 1, φ = 1 on [−0.3, 0.3], supp φ = [−0.7, 0.7], ∫φ = 1.
pub fn bump_phi(s: f64) -> f64 {
    smoothstep((EDGE - s.abs()) / (EDGE - PLATEAU))
}

const QUAD_TOL: f64 = 1e-12;

/// Region [x1] × [x2] × [0, depth] that must contain supp(h − 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeBox {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    pub depth: f64,
}

impl GaugeBox {
    /// [−ε, ε]² × [0, ε].
    pub fn cube(eps: f64) -> Self {
        Self { lower: [-eps, -eps], upper: [eps, eps], depth: eps }
    }
}

/// Constants of the construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub epsilon: f64,
}

/// Φ(x) = (x¹, x², f(x)) fixing x³ = 0 with |DΦ| = h near the boundary.
#[derive(Clone)]
pub struct GaugeMap {
    h: Arc<dyn ScalarField>,
    pub bounds: GaugeBox,
    pub constants: GaugeConstants,
}

impl std::fmt::Debug for GaugeMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GaugeMap").field("bounds", &self.bounds).field("constants", &self.constants).finish()
    }
}

pub fn build_gauge_map(h: Arc<dyn ScalarField>, bounds: GaugeBox, epsilon_supp: f64) -> Result<GaugeMap> {
    if !(epsilon_supp > 0.0) {
        return Err(Error::InvalidInput("support thickness must be positive".into()));
    }
    if !(h.inf() > 0.0) {
        return Err(Error::InvalidInput(format!("h must be positive (inf h = {})", h.inf())));
    }
    if bounds.depth > epsilon_supp {
        return Err(Error::InvalidInput("box depth exceeds the support thickness".into()));
    }
    if let Some((lo, hi)) = h.support() {
        let inside = lo[0] >= bounds.lower[0]
            && lo[1] >= bounds.lower[1]
            && hi[0] <= bounds.upper[0]
            && hi[1] <= bounds.upper[1]
            && hi[2] <= bounds.depth;
        if !inside {
            return Err(Error::InvalidInput("supp(h − 1) escapes the box".into()));
        }
    }
    let sup = h.sup() + 1.0;
    let a = 4.0 * sup + 3.0;
    let b = 2.0 * epsilon_supp / a * (sup + 1.0);
    let c = 2.0 * epsilon_supp / a * sup;
    Ok(GaugeMap { h, bounds, constants: GaugeConstants { a, b, c, epsilon: epsilon_supp } })
}

impl GaugeMap {
    pub fn identity(bounds: GaugeBox) -> Self {
        build_gauge_map(Arc::new(GaugeProfile::Constant), bounds, bounds.depth.max(1e-3)).expect("h ≡ 1 is valid")
    }

    pub fn h(&self, x: [f64; 3]) -> f64 {
        self.h.value(x)
    }

    fn inner_weight(&self, s: f64) -> f64 {
        let k = &self.constants;
        bump_phi(k.a * s / k.epsilon)
    }

    fn outer_weight(&self, s: f64) -> f64 {
        let k = &self.constants;
        bump_phi((s - k.b) / k.c)
    }

    /// Upper end of the support of φ(a s/ε).
    fn inner_end(&self) -> f64 {
        EDGE * self.constants.epsilon / self.constants.a
    }

    /// Below this depth det DΦ = h exactly.
    pub fn threshold(&self) -> f64 {
        let k = &self.constants;
        (PLATEAU * k.epsilon / k.a).min(k.b - EDGE * k.c)
    }

    pub fn d(&self, x1: f64, x2: f64) -> f64 {
        let end = self.inner_end();
        let (v, _) = quadrature::integrate(
            |s| (self.h.value([x1, x2, s]) - 1.0) * self.inner_weight(s),
            0.0,
            end,
            QUAD_TOL,
        );
        v / self.constants.c
    }

    fn grad_d(&self, x1: f64, x2: f64) -> [f64; 2] {
        let end = self.inner_end();
        let mut out = [0.0; 2];
        for (i, o) in out.iter_mut().enumerate() {
            let (v, _) = quadrature::integrate(
                |s| self.h.gradient([x1, x2, s])[i] * self.inner_weight(s),
                0.0,
                end,
                QUAD_TOL,
            );
            *o = v / self.constants.c;
        }
        out
    }

    /// ∂f/∂x³, the integrand of f at s = x³.
    pub fn df3(&self, x: [f64; 3]) -> f64 {
        self.df3_with(x, self.d(x[0], x[1]))
    }

    fn df3_with(&self, x: [f64; 3], d: f64) -> f64 {
        (self.h.value(x) - 1.0) * self.inner_weight(x[2]) - d * self.outer_weight(x[2]) + 1.0
    }

    pub fn f(&self, x: [f64; 3]) -> f64 {
        let d = self.d(x[0], x[1]);
        let (v, _) = quadrature::integrate(|s| self.df3_with([x[0], x[1], s], d) - 1.0, 0.0, x[2], QUAD_TOL);
        x[2] + v
    }

    pub fn phi(&self, x: [f64; 3]) -> [f64; 3] {
        [x[0], x[1], self.f(x)]
    }

    /// DΦ with rows (1,0,0), (0,1,0), ∇f.
    pub fn jacobian(&self, x: [f64; 3]) -> Matrix3<f64> {
        let d = self.d(x[0], x[1]);
        let gd = self.grad_d(x[0], x[1]);
        let mut row = [0.0; 3];
        for i in 0..2 {
            let (v, _) = quadrature::integrate(
                |s| {
                    self.h.gradient([x[0], x[1], s])[i] * self.inner_weight(s) - gd[i] * self.outer_weight(s)
                },
                0.0,
                x[2],
                QUAD_TOL,
            );
            row[i] = v;
        }
        row[2] = self.df3_with(x, d);
        Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, row[0], row[1], row[2])
    }
}

/// Pullback Φ*m′ of a field of forms on covectors: DΦ⁻¹ · m′(Φ(x)) · DΦ⁻ᵀ.
pub struct PulledBackField {
    pub base: Arc<dyn MetricField>,
    pub gauge: Arc<GaugeMap>,
}

impl MetricField for PulledBackField {
    fn value(&self, x: [f64; 3]) -> Metric3 {
        let j = self.gauge.jacobian(x);
        let ji = j.try_inverse().expect("gauge jacobian is invertible");
        let base = self.base.value(self.gauge.phi(x));
        Metric3::new(ji * base.matrix() * ji.transpose()).expect("congruence preserves SPD")
    }
}

/// Pulled-back (ε̂, μ̂) fields.
pub struct HatPairField {
    pub eps_hat: Arc<dyn MetricField>,
    pub mu_hat: Arc<dyn MetricField>,
}

impl HatPairField {
    pub fn at(&self, x: [f64; 3]) -> HatPair {
        HatPair { eps_hat: self.eps_hat.value(x), mu_hat: self.mu_hat.value(x) }
    }
}

pub fn pullback_parameters(pair: &HatPairField, gauge: Arc<GaugeMap>) -> HatPairField {
    HatPairField {
        eps_hat: Arc::new(PulledBackField { base: pair.eps_hat.clone(), gauge: gauge.clone() }),
        mu_hat: Arc::new(PulledBackField { base: pair.mu_hat.clone(), gauge }),
    }
}

/// Volume densities of g in the normal charts of the gauge pair at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeterminantRatio {
    pub g_hat: f64,
    pub g_hat_prime: f64,
    pub g_eps: f64,
    pub g_eps_prime: f64,
    /// |g_ε| / |g_ε′|
    pub ratio: f64,
    pub jacobian_det: f64,
}

/// `g` holds g_{ij} in the normal chart of ε̂′ (so Ψ′ = id and Ψ = Φ);
/// `eps_inv_det` is |ε̂⁻¹|, common to both normal charts.
pub fn determinant_ratio(g: &Metric3, eps_inv_det: f64, dphi: &Matrix3<f64>) -> Result<DeterminantRatio> {
    let g_hat_prime = g.det();
    let g_hat = pushforward_covariant(g, dphi)?.det();
    let density = |gh: f64| {
        let third = (gh / eps_inv_det).powf(-0.25);
        let dpsi_t_inv = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, third));
        dpsi_t_inv.determinant().powi(2) * gh
    };
    let g_eps = density(g_hat);
    let g_eps_prime = density(g_hat_prime);
    Ok(DeterminantRatio {
        g_hat,
        g_hat_prime,
        g_eps,
        g_eps_prime,
        ratio: g_eps / g_eps_prime,
        jacobian_det: dphi.determinant(),
    })
}
