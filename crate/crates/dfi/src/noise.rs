//! Displacement, radiation-pressure and rotation noise, and the resulting
//! covariance of the output quadratures.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DfiError, Result};
use crate::linalg::{
    columns_hstack, hermitian_eigen, hermitian_fn, identity, max_abs, phase_embed_mat, real, CMat, CVec,
};
use crate::optics::TransferSet;
use crate::squeeze::{input_state, InputState, SqueezeConfig};

pub const THERMAL_COEFF: f64 = 2.7e-30;
pub const THERMAL_EXPONENT: f64 = 5.0;

/// Matrix-valued displacement spectrum tabulated in frequency, interpolated
/// linearly in log f and held constant beyond the table.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatedSpectrum {
    pub n: usize,
    pub frequencies: Vec<f64>,
    pub matrices: Vec<CMat>,
}

impl CorrelatedSpectrum {
    pub fn new(n: usize, frequencies: Vec<f64>, matrices: Vec<CMat>) -> Result<Self> {
        if frequencies.is_empty() || frequencies.len() != matrices.len() {
            return Err(DfiError::Noise("correlated spectrum needs one matrix per frequency".into()));
        }
        if frequencies.windows(2).any(|w| !(w[1] > w[0])) || !(frequencies[0] > 0.0) {
            return Err(DfiError::Noise("correlated spectrum frequencies must be positive and increasing".into()));
        }
        for (f, m) in frequencies.iter().zip(&matrices) {
            if m.nrows() != n || m.ncols() != n {
                return Err(DfiError::Noise(format!("matrix at f = {f} is not {n}x{n}")));
            }
            check_psd(m).map_err(|e| DfiError::Noise(format!("at f = {f}: {e}")))?;
        }
        Ok(Self {
            n,
            frequencies,
            matrices,
        })
    }

    /// Reads rows of `f, s_00, s_01, ..., s_(n-1)(n-1)` with a header line.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut freqs = Vec::new();
        let mut mats = Vec::new();
        let mut n = 0;
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| DfiError::Noise(format!("csv: {e}")))?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| DfiError::Noise(format!("row {}: {e}", line + 2)))?;
            let entries = vals.len().saturating_sub(1);
            let side = (entries as f64).sqrt().round() as usize;
            if side * side != entries || side == 0 {
                return Err(DfiError::Noise(format!(
                    "row {} has {entries} matrix entries, not a square count",
                    line + 2
                )));
            }
            if n == 0 {
                n = side;
            } else if side != n {
                return Err(DfiError::Noise(format!("row {} changes matrix size", line + 2)));
            }
            freqs.push(vals[0]);
            mats.push(CMat::from_fn(n, n, |i, j| real(vals[1 + i * n + j])));
        }
        Self::new(n, freqs, mats)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| DfiError::Noise(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file)
    }

    pub fn at(&self, f: f64) -> CMat {
        let fs = &self.frequencies;
        if f <= fs[0] {
            return self.matrices[0].clone();
        }
        if f >= fs[fs.len() - 1] {
            return self.matrices[fs.len() - 1].clone();
        }
        let hi = fs.partition_point(|&x| x <= f);
        let lo = hi - 1;
        let w = (f.ln() - fs[lo].ln()) / (fs[hi].ln() - fs[lo].ln());
        &self.matrices[lo] * real(1.0 - w) + &self.matrices[hi] * real(w)
    }
}

fn check_psd(m: &CMat) -> std::result::Result<(), String> {
    let scale = max_abs(m);
    if crate::linalg::hermiticity_defect(m) > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err("matrix is not Hermitian".into());
    }
    let (vals, _) = hermitian_eigen(m);
    if vals.first().is_some_and(|&v| v < -1e-12 * scale) {
        return Err(format!("matrix has negative eigenvalue {:.3e}", vals[0]));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum DisplacementNoise {
    /// Uncorrelated white displacement noise of amplitude δ (m/√Hz).
    White { delta: f64 },
    /// Uncorrelated δ²(f) = coeff·f^(−exponent).
    Thermal { coeff: f64, exponent: f64 },
    Correlated(CorrelatedSpectrum),
}

/// Random rotation of the whole cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SagnacNoise {
    /// Power spectral density of the rotation rate, (rad/s)²/Hz.
    pub variance: f64,
    #[serde(default)]
    pub infinite: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    /// Independent sources; their covariances add.
    pub displacement: Vec<DisplacementNoise>,
    pub sagnac: Option<SagnacNoise>,
    /// Treat displacement noise as unbounded; only its range is used.
    pub delta_infinity: bool,
}

impl NoiseModel {
    pub fn shot_only() -> Self {
        Self {
            displacement: Vec::new(),
            sagnac: None,
            delta_infinity: false,
        }
    }

    pub fn white(delta: f64) -> Self {
        Self {
            displacement: vec![DisplacementNoise::White { delta }],
            ..Self::shot_only()
        }
    }

    pub fn thermal() -> Self {
        Self {
            displacement: vec![DisplacementNoise::Thermal {
                coeff: THERMAL_COEFF,
                exponent: THERMAL_EXPONENT,
            }],
            ..Self::shot_only()
        }
    }

    pub fn infinite_displacement() -> Self {
        Self {
            delta_infinity: true,
            ..Self::shot_only()
        }
    }

    pub fn with_sagnac(mut self, variance: f64, infinite: bool) -> Self {
        self.sagnac = Some(SagnacNoise { variance, infinite });
        self
    }

    /// Displacement covariance Σ_Δx at `f` for `n` mirrors, `None` when absent.
    pub fn displacement_covariance(&self, f: f64, n: usize) -> Result<Option<CMat>> {
        let mut total: Option<CMat> = None;
        for src in &self.displacement {
            let cov = src.covariance(f, n)?;
            total = Some(match total {
                Some(t) => t + cov,
                None => cov,
            });
        }
        Ok(total)
    }
}

impl DisplacementNoise {
    pub fn covariance(&self, f: f64, n: usize) -> Result<CMat> {
        match self {
            Self::White { delta } => {
                if !(delta.is_finite() && *delta >= 0.0) {
                    return Err(DfiError::Noise(format!("white noise amplitude must be >= 0, got {delta}")));
                }
                Ok(identity(n) * real(delta * delta))
            }
            Self::Thermal { coeff, exponent } => Ok(identity(n) * real(thermal_delta2(f, *coeff, *exponent)?)),
            Self::Correlated(spec) => {
                if spec.n != n {
                    return Err(DfiError::Noise(format!(
                        "correlated spectrum is {0}x{0} but the cavity has {n} mirrors",
                        spec.n
                    )));
                }
                Ok(spec.at(f))
            }
        }
    }
}

/// coeff·f^(−exponent) in m²/Hz.
pub fn thermal_delta2(f: f64, coeff: f64, exponent: f64) -> Result<f64> {
    if !(f > 0.0) {
        return Err(DfiError::Noise(format!("thermal noise needs f > 0, got {f}")));
    }
    Ok(coeff * f.powf(-exponent))
}

/// Output covariance in factored form:
/// Σ_q = M Σ_i M† + F F† (+ unbounded noise along `divergent`).
#[derive(Debug, Clone)]
pub struct OutputCovariance {
    pub frequency: f64,
    pub k: usize,
    pub m_int: CMat,
    pub m21: CMat,
    pub input: InputState,
    /// 2k x p factor of the finite classical noise.
    pub noise_factor: CMat,
    /// 2k x q directions carrying unbounded noise.
    pub divergent: CMat,
    pub quantum: CMat,
    pub displacement: CMat,
    pub sagnac: CMat,
}

impl OutputCovariance {
    pub fn sigma_q(&self) -> CMat {
        &self.quantum + &self.displacement + &self.sagnac
    }

    pub fn has_divergent(&self) -> bool {
        self.divergent.ncols() > 0
    }

    /// M21·M_int†, Hermitian by the symplectic structure of M.
    pub fn rpn_kernel(&self) -> CMat {
        crate::linalg::hermitian_part(&(&self.m21 * self.m_int.adjoint()))
    }

    /// Phase-quadrature rows of a 2k x m block.
    pub fn phase_rows(&self, x: &CMat) -> CMat {
        x.rows(self.k, self.k).into_owned()
    }

    pub fn amplitude_is_zero(&self, x: &CMat) -> bool {
        x.rows(0, self.k).iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }
}

/// Builds Σ_q for one transfer set. The Sagnac column of `ts` is taken as the
/// response to a unit rotation rate.
pub fn output_covariance(ts: &TransferSet, model: &NoiseModel, squeeze: Option<&SqueezeConfig>) -> Result<OutputCovariance> {
    let k = ts.k;
    let n = ts.a_ph.ncols();
    let input = input_state(squeeze, &ts.m_int, &ts.m21)?;
    let quantum = &ts.m * &input.sigma * ts.m.adjoint();
    let a_full = phase_embed_mat(&ts.a_ph);
    let s_full = phase_embed_mat(&CMat::from_column_slice(k, 1, ts.sagnac_ph.as_slice()));

    let mut factors: Vec<CMat> = Vec::new();
    let mut divergent: Vec<CMat> = Vec::new();
    let mut displacement = CMat::zeros(2 * k, 2 * k);
    let mut sagnac = CMat::zeros(2 * k, 2 * k);

    if model.delta_infinity {
        divergent.push(a_full.clone());
    } else if let Some(cov) = model.displacement_covariance(ts.frequency, n)? {
        check_psd(&cov).map_err(DfiError::Noise)?;
        let root = hermitian_fn(&cov, |x| x.max(0.0).sqrt());
        let f = &a_full * root * real(std::f64::consts::FRAC_1_SQRT_2);
        displacement = &f * f.adjoint();
        factors.push(f);
    }
    if let Some(sg) = model.sagnac {
        if sg.infinite {
            divergent.push(s_full);
        } else {
            if !(sg.variance >= 0.0) {
                return Err(DfiError::Noise(format!("rotation noise variance must be >= 0, got {}", sg.variance)));
            }
            let f = s_full * real((sg.variance / 2.0).sqrt());
            sagnac = &f * f.adjoint();
            factors.push(f);
        }
    }
    let refs: Vec<&CMat> = factors.iter().collect();
    let drefs: Vec<&CMat> = divergent.iter().collect();
    Ok(OutputCovariance {
        frequency: ts.frequency,
        k,
        m_int: ts.m_int.clone(),
        m21: ts.m21.clone(),
        input,
        noise_factor: columns_hstack(&refs, 2 * k),
        divergent: columns_hstack(&drefs, 2 * k),
        quantum,
        displacement,
        sagnac,
    })
}

/// Convenience for a single vector: column matrix view.
pub fn as_column(v: &CVec) -> CMat {
    CMat::from_column_slice(v.len(), 1, v.as_slice())
}
