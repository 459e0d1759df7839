//! Squeezed input states, squeezing bounds and the squeezing gain.

use serde::{Deserialize, Serialize};

use crate::error::{DfiError, Result};
use crate::linalg::{
    block2, hermitian_eigen, hermiticity_defect, identity, low_rank_inverse_form, max_abs, real, vstack, CMat, CVec,
};

/// Which input quadratures carry the anti-squeezing.
#[derive(Debug, Clone, PartialEq)]
pub enum SqueezeStrategy {
    /// Squeeze all phase quadratures.
    Phase,
    /// Rotate the squeezing so radiation pressure does not spoil a phase
    /// readout.
    OptimalForPhaseReadout,
    /// Best strategy when the optimal (QFI-attaining) readout is used; this is
    /// plain phase squeezing because the optimal readout removes RPN.
    OptimalForOptimalReadout,
    /// Anti-squeezed subspace given as a rank-k orthogonal projector.
    Explicit(CMat),
}

impl SqueezeStrategy {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "phase" => Ok(Self::Phase),
            "optimal-for-phase-readout" | "optimal_for_phase_readout" => Ok(Self::OptimalForPhaseReadout),
            "optimal-for-optimal-readout" | "optimal_for_optimal_readout" => Ok(Self::OptimalForOptimalReadout),
            other => Err(DfiError::Parameter(format!("unknown squeezing strategy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeConfig {
    pub r: f64,
    pub strategy: SqueezeStrategy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyName {
    Phase,
    OptimalForPhaseReadout,
    OptimalForOptimalReadout,
}

impl From<StrategyName> for SqueezeStrategy {
    fn from(s: StrategyName) -> Self {
        match s {
            StrategyName::Phase => Self::Phase,
            StrategyName::OptimalForPhaseReadout => Self::OptimalForPhaseReadout,
            StrategyName::OptimalForOptimalReadout => Self::OptimalForOptimalReadout,
        }
    }
}

/// Covariance of the input quadratures (a₁; a₂), vacuum = 𝟙/2.
#[derive(Debug, Clone)]
pub struct InputState {
    pub sigma: CMat,
    pub sqrt: CMat,
    /// `Some((a, b))` when sigma = ½·diag(a·𝟙, b·𝟙).
    pub blocks: Option<(f64, f64)>,
}

impl InputState {
    pub fn vacuum(k: usize) -> Self {
        Self::diagonal(k, 1.0, 1.0)
    }

    pub fn diagonal(k: usize, a: f64, b: f64) -> Self {
        let d = |x: f64| identity(k) * real(x);
        let z = CMat::zeros(k, k);
        Self {
            sigma: block2(&d(a / 2.0), &z, &z, &d(b / 2.0)),
            sqrt: block2(&d((a / 2.0).sqrt()), &z, &z, &d((b / 2.0).sqrt())),
            blocks: Some((a, b)),
        }
    }

    /// ½e^{2r}Π₁ + ½e^{−2r}(𝟙 − Π₁).
    pub fn from_projector(pi1: &CMat, r: f64) -> Self {
        let n = pi1.nrows();
        let rest = identity(n) - pi1;
        let up = (2.0 * r).exp() / 2.0;
        let down = (-2.0 * r).exp() / 2.0;
        Self {
            sigma: pi1 * real(up) + &rest * real(down),
            sqrt: pi1 * real(up.sqrt()) + &rest * real(down.sqrt()),
            blocks: None,
        }
    }
}

fn check_hermitian_product(m_int: &CMat, m21: &CMat) -> Result<CMat> {
    let h = m_int.adjoint() * m21;
    let scale = max_abs(&h).max(1.0);
    if hermiticity_defect(&h) > 1e-9 * scale {
        return Err(DfiError::Parameter(format!(
            "M_int†M21 is not Hermitian (defect {:.3e})",
            hermiticity_defect(&h)
        )));
    }
    Ok(crate::linalg::hermitian_part(&h))
}

/// Projector onto the anti-squeezed input span and the matrix whose columns
/// are the squeezed quadratures, for a phase readout under RPN.
pub fn optimal_squeeze_projector(m_int: &CMat, m21: &CMat) -> Result<(CMat, CMat)> {
    let h = check_hermitian_product(m_int, m21)?;
    let (vals, vecs) = hermitian_eigen(&h);
    let k = vals.len();
    let func = |f: &dyn Fn(f64) -> f64| {
        let d = CMat::from_diagonal(&CVec::from_iterator(k, vals.iter().map(|&l| real(f((-l).atan())))));
        &vecs * d * vecs.adjoint()
    };
    let cos = func(&|a: f64| a.cos());
    let sin = func(&|a: f64| a.sin());
    let anti = vstack(&cos, &sin);
    let squeezed = vstack(&(-sin.clone()), &cos);
    Ok((&anti * anti.adjoint(), squeezed))
}

/// Input covariance for a squeezing configuration.
pub fn input_state(config: Option<&SqueezeConfig>, m_int: &CMat, m21: &CMat) -> Result<InputState> {
    let k = m_int.nrows();
    let Some(cfg) = config else {
        return Ok(InputState::vacuum(k));
    };
    if !(cfg.r >= 0.0) || !cfg.r.is_finite() {
        return Err(DfiError::Parameter(format!("squeezing parameter must be finite and >= 0, got {}", cfg.r)));
    }
    let r = cfg.r;
    match &cfg.strategy {
        SqueezeStrategy::Phase | SqueezeStrategy::OptimalForOptimalReadout => {
            Ok(InputState::diagonal(k, (2.0 * r).exp(), (-2.0 * r).exp()))
        }
        SqueezeStrategy::OptimalForPhaseReadout => {
            let (pi1, _) = optimal_squeeze_projector(m_int, m21)?;
            Ok(InputState::from_projector(&pi1, r))
        }
        SqueezeStrategy::Explicit(pi1) => {
            validate_projector(pi1, k)?;
            Ok(InputState::from_projector(pi1, r))
        }
    }
}

/// Checks that `pi1` is a rank-k orthogonal projector on 2k quadratures whose
/// range is a commuting set.
pub fn validate_projector(pi1: &CMat, k: usize) -> Result<()> {
    if pi1.nrows() != 2 * k || pi1.ncols() != 2 * k {
        return Err(DfiError::Parameter(format!("projector must be {0}x{0}", 2 * k)));
    }
    if hermiticity_defect(pi1) > 1e-10 || max_abs(&(pi1 * pi1 - pi1)) > 1e-10 {
        return Err(DfiError::Parameter("squeezing projector is not an orthogonal projector".into()));
    }
    let trace: f64 = (0..2 * k).map(|i| pi1[(i, i)].re).sum();
    if (trace - k as f64).abs() > 1e-8 {
        return Err(DfiError::Parameter(format!("squeezing projector has rank {trace:.3}, expected {k}")));
    }
    let j = crate::linalg::commutation_form(k);
    if max_abs(&(pi1 * j * pi1)) > 1e-10 {
        return Err(DfiError::Parameter("anti-squeezed quadratures do not commute".into()));
    }
    Ok(())
}

/// 4e^{2r}·v†(𝟙 + e^{2r}δ²AA†)⁻¹v.
pub fn qfi_squeezed(v_ph: &CVec, a_ph: &CMat, delta2: f64, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(DfiError::Parameter(format!("squeezing parameter must be >= 0, got {r}")));
    }
    let z = a_ph * real((delta2.max(0.0)).sqrt() * r.exp());
    Ok(4.0 * (2.0 * r).exp() * low_rank_inverse_form(v_ph, &z))
}

/// 4e^{2r}·v†(𝟙 + M21M21† + e^{2r}δ²AA†)⁻¹v.
pub fn fi_phase_squeezed(v_ph: &CVec, a_ph: &CMat, m21: &CMat, delta2: f64, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(DfiError::Parameter(format!("squeezing parameter must be >= 0, got {r}")));
    }
    let scaled = a_ph * real((delta2.max(0.0)).sqrt() * r.exp());
    let z = crate::linalg::columns_hstack(&[m21, &scaled], v_ph.len());
    Ok(4.0 * (2.0 * r).exp() * low_rank_inverse_form(v_ph, &z))
}

/// (F_sq/F − 1)/(e^{2r} − 1).
pub fn eta_gain(f_sq: f64, f: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(DfiError::Parameter("squeezing gain is undefined at r = 0".into()));
    }
    if !(f > 0.0) {
        return Err(DfiError::Parameter(format!("reference information must be positive, got {f}")));
    }
    Ok((f_sq / f - 1.0) / ((2.0 * r).exp() - 1.0))
}
