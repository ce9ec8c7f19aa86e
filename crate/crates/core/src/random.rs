//! Seeded generators for metrics, jets and directions.

use nalgebra::{Matrix2, Matrix3, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::symbol_calculus::MetricJet;
use crate::tensor_core::{Metric2, Metric3};

pub type SeededRng = ChaCha8Rng;

/// Jets shrink by this factor per derivative order.
pub const JET_DECAY: f64 = 0.3;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(r: &mut SeededRng) -> f64 {
    r.gen_range(-1.0..=1.0)
}

/// MᵀM + 0.1·I with M uniform in [−1, 1].
pub fn spd3(r: &mut SeededRng) -> Metric3 {
    let m = Matrix3::from_fn(|_, _| uniform(r));
    Metric3::new(m.transpose() * m + Matrix3::identity() * 0.1).expect("shifted Gram matrix is SPD")
}

pub fn spd2(r: &mut SeededRng) -> Metric2 {
    let m = Matrix2::from_fn(|_, _| uniform(r));
    Metric2::new(m.transpose() * m + Matrix2::identity() * 0.1).expect("shifted Gram matrix is SPD")
}

pub fn symmetric(r: &mut SeededRng, scale: f64) -> Matrix3<f64> {
    let m = Matrix3::from_fn(|_, _| uniform(r));
    (m + m.transpose()) * (0.5 * scale)
}

/// ε̂ already in boundary normal form: blockdiag(ε̃, 1).
pub fn bnc_metric(r: &mut SeededRng) -> Metric3 {
    Metric3::block_diag(&spd2(r), 1.0).expect("block form of SPD blocks is SPD")
}

/// Uniform direction on the unit circle.
pub fn direction(r: &mut SeededRng) -> Vector2<f64> {
    let th = r.gen_range(0.0..std::f64::consts::TAU);
    Vector2::new(th.cos(), th.sin())
}

/// `n` equispaced unit directions.
pub fn direction_grid(n: usize) -> Vec<Vector2<f64>> {
    (0..n)
        .map(|k| {
            let th = std::f64::consts::TAU * k as f64 / n as f64;
            Vector2::new(th.cos(), th.sin())
        })
        .collect()
}

/// Random jet around `value` with `order` normal derivatives; a derivative of
/// total order k is scaled by 0.3ᵏ.
pub fn jet(r: &mut SeededRng, value: Metric3, order: usize) -> MetricJet {
    let s1 = JET_DECAY;
    let s2 = JET_DECAY * JET_DECAY;
    let mut j = MetricJet::constant(value);
    j.d_tangential = [symmetric(r, s1), symmetric(r, s1)];
    j.d_normal = (1..=order).map(|k| symmetric(r, JET_DECAY.powi(k as i32))).collect();
    j.d_tangential2 = [symmetric(r, s2), symmetric(r, s2), symmetric(r, s2)];
    j.d_mixed = [symmetric(r, s2), symmetric(r, s2)];
    j
}

/// Jet of a metric in its own boundary normal coordinates: the third row and
/// column stay (0, 0, 1) in the whole collar, so their derivatives vanish.
pub fn bnc_jet(r: &mut SeededRng, value: Metric3, order: usize) -> MetricJet {
    let mut j = jet(r, value, order);
    let clear = |m: &mut Matrix3<f64>| {
        m.set_row(2, &nalgebra::RowVector3::zeros());
        m.set_column(2, &nalgebra::Vector3::zeros());
    };
    j.d_tangential.iter_mut().for_each(clear);
    j.d_normal.iter_mut().for_each(clear);
    j.d_tangential2.iter_mut().for_each(clear);
    j.d_mixed.iter_mut().for_each(clear);
    j
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Isotropic,
    Diagonal,
    Generic,
    NearDegenerate,
}

impl std::str::FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "isotropic" => Ok(Self::Isotropic),
            "diagonal" => Ok(Self::Diagonal),
            "generic" => Ok(Self::Generic),
            "near-degenerate" => Ok(Self::NearDegenerate),
            other => Err(format!("unknown problem kind '{other}'")),
        }
    }
}

/// (ε̂, μ̂) jets at a boundary point, ε̂ in boundary normal form.
pub fn problem_jets(seed: u64, kind: ProblemKind, order: usize) -> (MetricJet, MetricJet) {
    let mut r = rng(seed);
    match kind {
        ProblemKind::Isotropic => {
            let mut e = MetricJet::constant(Metric3::identity());
            e.d_normal = vec![Matrix3::zeros(); order];
            (e.clone(), e)
        }
        ProblemKind::Diagonal => {
            let mut d = || r.gen_range(0.5..2.0);
            let e = Metric3::diagonal(d(), d(), 1.0).expect("positive diagonal");
            let m = Metric3::diagonal(d(), d(), d()).expect("positive diagonal");
            let mut je = MetricJet::constant(e);
            let mut jm = MetricJet::constant(m);
            je.d_normal = vec![Matrix3::zeros(); order];
            jm.d_normal = vec![Matrix3::zeros(); order];
            (je, jm)
        }
        ProblemKind::Generic => {
            let e = bnc_metric(&mut r);
            let m = spd3(&mut r);
            (bnc_jet(&mut r, e, order), jet(&mut r, m, order))
        }
        ProblemKind::NearDegenerate => {
            let e = bnc_metric(&mut r);
            let scale = r.gen_range(0.5..2.0);
            let noise = symmetric(&mut r, 1e-6);
            let m = Metric3::new(e.matrix() * scale + noise).expect("small perturbation keeps SPD");
            let je = bnc_jet(&mut r, e, order);
            let mut jm = je.clone();
            jm.value = m;
            (je, jm)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = problem_jets(7, ProblemKind::Generic, 3);
        let b = problem_jets(7, ProblemKind::Generic, 3);
        assert_eq!(a, b);
        assert!(a.0.value.is_boundary_normal(1e-15));
        assert!(a.0.validate().is_ok() && a.1.validate().is_ok());
    }

    #[test]
    fn isotropic_is_identity() {
        let (e, m) = problem_jets(1, ProblemKind::Isotropic, 2);
        assert_eq!(e.value, Metric3::identity());
        assert_eq!(m.value, Metric3::identity());
        assert!(e.d_normal.iter().all(|d| d.norm() == 0.0));
    }

    #[test]
    fn near_degenerate_is_close_to_conformal() {
        let (e, m) = problem_jets(3, ProblemKind::NearDegenerate, 1);
        let ratio = m.value.entry(2, 2) / e.value.entry(2, 2);
        assert!((m.value.matrix() - e.value.matrix() * ratio).amax() < 1e-5);
    }
}
