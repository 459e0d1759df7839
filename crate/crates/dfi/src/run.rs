//! Frequency sweeps and the higher-level studies built on them.

use serde::Serialize;

use crate::error::{DfiError, Result};
use crate::fisher::{
    decompose_fi_with, fi_decoupled, fi_homodyne, fi_phase, optimal_quadrature, qfi, qfim, sigma_from_info,
    FiDecomposition, HomodyneSelection,
};
use crate::geometry::{
    build_ngon_with_t, radius_for_arm_length, standard_sagnac_preset, triangle_preset, GwSource, TrajectorySelection,
};
use crate::linalg::{phase_embed, CVec};
use crate::noise::{output_covariance, NoiseModel, OutputCovariance};
use crate::optics::{Interferometer, TransferSet};
use crate::scenario::{noise_model_from, HoldFixed, NoiseEntry, Polarization, Readout, Scenario};
use crate::squeeze::{eta_gain, SqueezeConfig};

/// How per-frequency work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutionMode {
    Sequential,
    Parallel,
}

impl Default for ExecutionMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Self::Parallel
        } else {
            Self::Sequential
        }
    }
}

/// Maps `f` over `items`, keeping input order.
pub fn map_ordered<T, R, F>(items: &[T], mode: ExecutionMode, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecutionMode::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Runs `job` on a pool of `threads` workers (global pool when `None`).
pub fn with_threads<R: Send>(threads: Option<usize>, job: impl FnOnce() -> R + Send) -> Result<R> {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| DfiError::Parameter(format!("thread pool: {e}")))?;
        return Ok(pool.install(job));
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(job())
}

/// Short machine-readable tag for a failed row.
pub fn status_of(err: &DfiError) -> &'static str {
    match err {
        DfiError::IllConditioned { .. } => "ill-conditioned",
        DfiError::Conditioning(_) => "singular-covariance",
        DfiError::ZeroFrequencyRpn => "rpn-at-dc",
        DfiError::NonConvergentCavity => "non-convergent",
        DfiError::Selection(_) => "bad-selection",
        DfiError::Noise(_) => "noise-error",
        DfiError::Geometry(_) | DfiError::Parameter(_) | DfiError::Scenario(_) => "invalid-input",
    }
}

pub const STATUS_OK: &str = "ok";

/// Polarization vector in the (h₊, h×) basis, as (re, im) pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct PolarizationVector {
    pub plus: [f64; 2],
    pub cross: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SensitivitySample {
    pub f_hz: f64,
    pub sigma: Option<f64>,
    pub qfi: Option<f64>,
    pub fi: Option<f64>,
    pub f_min: Option<f64>,
    pub f_max: Option<f64>,
    pub f_dfs: Option<f64>,
    pub eta: Option<f64>,
    pub eta_gain: Option<f64>,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominant_polarization: Option<PolarizationVector>,
}

impl SensitivitySample {
    pub fn failed(f_hz: f64, err: &DfiError) -> Self {
        Self {
            f_hz,
            sigma: None,
            qfi: None,
            fi: None,
            f_min: None,
            f_max: None,
            f_dfs: None,
            eta: None,
            eta_gain: None,
            status: status_of(err).to_string(),
            dominant_polarization: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }
}

/// Everything needed to evaluate one configuration at any frequency.
#[derive(Debug, Clone)]
pub struct Evaluator {
    pub interferometer: Interferometer,
    pub source: GwSource,
    pub noise: NoiseModel,
    pub squeeze: Option<SqueezeConfig>,
    pub readout: Readout,
    pub polarization: Polarization,
    pub report_polarization: bool,
}

impl Evaluator {
    pub fn new(interferometer: Interferometer, noise: NoiseModel) -> Self {
        Self {
            interferometer,
            source: GwSource::default(),
            noise,
            squeeze: None,
            readout: Readout::Phase,
            polarization: Polarization::Plus,
            report_polarization: false,
        }
    }

    pub fn from_scenario(sc: &Scenario) -> Result<Self> {
        let ifo = Interferometer::new(sc.build_geometry()?, sc.optical_params())?;
        Ok(Self {
            interferometer: ifo,
            source: sc.source(),
            noise: sc.noise_model()?,
            squeeze: sc.squeeze_config(),
            readout: sc.readout.kind,
            polarization: sc.source.polarization,
            report_polarization: sc.outputs.polarization,
        })
    }

    pub fn with_readout(mut self, readout: Readout) -> Self {
        self.readout = readout;
        self
    }

    pub fn with_squeeze(mut self, squeeze: Option<SqueezeConfig>) -> Self {
        self.squeeze = squeeze;
        self
    }

    pub fn with_polarization(mut self, p: Polarization) -> Self {
        self.polarization = p;
        self
    }

    /// Transfer matrices at `f`, with the rotation column per unit rate.
    pub fn transfer(&self, f: f64) -> Result<TransferSet> {
        self.interferometer.transfer(&self.source, f, 1.0)
    }

    pub fn covariance(&self, ts: &TransferSet, squeeze: Option<&SqueezeConfig>) -> Result<OutputCovariance> {
        output_covariance(ts, &self.noise, squeeze)
    }

    /// Evaluates one frequency; failures become a row with a status tag.
    pub fn evaluate(&self, f: f64) -> SensitivitySample {
        self.try_evaluate(f).unwrap_or_else(|e| SensitivitySample::failed(f, &e))
    }

    pub fn try_evaluate(&self, f: f64) -> Result<SensitivitySample> {
        let ts = self.transfer(f)?;
        let cov = self.covariance(&ts, self.squeeze.as_ref())?;

        let mut dominant = None;
        if self.polarization == Polarization::Best || self.report_polarization {
            let q = qfim(&ts.v_matrix(), &cov)?;
            dominant = Some(q.dominant.clone());
        }
        let v = self.signal(&ts, dominant.as_ref());
        let info_q = qfi(&v, &cov)?;
        let info = readout_fi(self.readout, &v, &cov)?;
        let decomposition = self.decomposition(&v, &cov)?;

        let gain = match &self.squeeze {
            Some(sq) if sq.r > 0.0 => {
                let plain = self.covariance(&ts, None)?;
                let reference = readout_fi(self.readout, &v, &plain)?;
                if reference > 0.0 {
                    Some(eta_gain(info, reference, sq.r)?)
                } else {
                    None
                }
            }
            _ => None,
        };

        Ok(SensitivitySample {
            f_hz: f,
            sigma: Some(sigma_from_info(info)),
            qfi: Some(info_q),
            fi: Some(info),
            f_min: decomposition.map(|d| d.f_min),
            f_max: decomposition.map(|d| d.f_max),
            f_dfs: decomposition.map(|d| d.f_dfs),
            eta: decomposition.map(|d| d.eta),
            eta_gain: gain,
            status: STATUS_OK.to_string(),
            dominant_polarization: if self.report_polarization {
                dominant.map(|d| PolarizationVector {
                    plus: [d[0].re, d[0].im],
                    cross: [d[1].re, d[1].im],
                })
            } else {
                None
            },
        })
    }

    fn signal(&self, ts: &TransferSet, dominant: Option<&CVec>) -> CVec {
        match (self.polarization, dominant) {
            (Polarization::Plus, _) | (Polarization::Best, None) => ts.v_plus(),
            (Polarization::Cross, _) => phase_embed(&ts.v_ph.column(1).into_owned()),
            (Polarization::Best, Some(d)) => ts.v_matrix() * d,
        }
    }

    /// Eigenspace split of the phase-block information. Readouts that cancel
    /// radiation pressure are split without it; a single quadrature has no
    /// meaningful split.
    fn decomposition(&self, v: &CVec, cov: &OutputCovariance) -> Result<Option<FiDecomposition>> {
        let k = cov.k;
        let v_ph = v.rows(k, k).into_owned();
        match self.readout {
            Readout::Phase => decompose_fi_with(&v_ph, cov, true).map(Some),
            Readout::Optimal | Readout::Decoupled => decompose_fi_with(&v_ph, cov, false).map(Some),
            Readout::MaxSignal => Ok(None),
        }
    }

    /// QFI of the configured polarization with shot noise only and radiation
    /// pressure switched off. `Best` reports the largest QFIM eigenvalue.
    pub fn shot_noise_qfi(&self, f: f64) -> Result<f64> {
        let quiet = Evaluator {
            interferometer: self.interferometer.with_rpn(false),
            noise: NoiseModel::shot_only(),
            squeeze: None,
            ..self.clone()
        };
        let ts = quiet.transfer(f)?;
        let cov = quiet.covariance(&ts, None)?;
        match self.polarization {
            Polarization::Best => {
                let q = qfim(&ts.v_matrix(), &cov)?;
                Ok(q.eigenvalues.last().copied().unwrap_or(0.0))
            }
            _ => qfi(&quiet.signal(&ts, None), &cov),
        }
    }
}

/// Fisher information of `v` under the given readout.
pub fn readout_fi(readout: Readout, v: &CVec, cov: &OutputCovariance) -> Result<f64> {
    match readout {
        Readout::Phase => fi_phase(v, cov),
        Readout::Optimal => {
            if v.norm() == 0.0 {
                return Ok(0.0);
            }
            fi_homodyne(&optimal_quadrature(v, cov)?, v, cov)
        }
        Readout::MaxSignal => {
            if v.norm() == 0.0 {
                return Ok(0.0);
            }
            fi_homodyne(&HomodyneSelection::single(v, "max-signal")?, v, cov)
        }
        Readout::Decoupled => fi_decoupled(v, cov),
    }
}

pub fn run_sweep(ev: &Evaluator, frequencies: &[f64], mode: ExecutionMode) -> Vec<SensitivitySample> {
    map_ordered(frequencies, mode, |&f| ev.evaluate(f))
}

pub fn all_failed(samples: &[SensitivitySample]) -> bool {
    !samples.is_empty() && samples.iter().all(|s| !s.is_ok())
}

/// Sensitivity under each noise source alone and under all of them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseBudget {
    /// Column labels, starting with "quantum" and ending with "combined".
    pub labels: Vec<String>,
    pub frequencies: Vec<f64>,
    /// `sigma[i][j]`: frequency i, source j.
    pub sigma: Vec<Vec<Option<f64>>>,
}

pub fn noise_budget(sc: &Scenario, frequencies: &[f64], mode: ExecutionMode) -> Result<NoiseBudget> {
    let base = Evaluator::from_scenario(sc)?;
    let resolve = |p: &std::path::Path| match (&sc.base_dir, p.is_relative()) {
        (Some(d), true) => d.join(p),
        _ => p.to_path_buf(),
    };
    let mut labels = vec!["quantum".to_string()];
    let mut models = vec![NoiseModel::shot_only()];
    for (i, entry) in sc.noise.iter().enumerate() {
        let mut label = entry.label().to_string();
        if sc.noise.iter().filter(|e| e.label() == entry.label()).count() > 1 {
            label = format!("{label}_{i}");
        }
        labels.push(label);
        models.push(noise_model_from(std::slice::from_ref(entry), resolve)?);
    }
    labels.push("combined".into());
    models.push(base.noise.clone());

    let evaluators: Vec<Evaluator> = models
        .into_iter()
        .map(|m| Evaluator {
            noise: m,
            report_polarization: false,
            ..base.clone()
        })
        .collect();
    let sigma = map_ordered(frequencies, mode, |&f| {
        evaluators
            .iter()
            .map(|ev| ev.try_evaluate(f).ok().and_then(|s| s.sigma))
            .collect::<Vec<_>>()
    });
    Ok(NoiseBudget {
        labels,
        frequencies: frequencies.to_vec(),
        sigma,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub transmissivities: Vec<f64>,
    /// Mean of ln σ over the evaluation frequencies; +∞ when any point fails.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub frequencies: Vec<f64>,
    pub surface: Vec<SurfacePoint>,
    pub best: SurfacePoint,
}

fn grid_values(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![hi];
    }
    (0..points)
        .map(|i| if i == points - 1 { hi } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 })
        .collect()
}

/// Mean ln σ of one transmissivity assignment.
pub fn transmissivity_objective(sc: &Scenario, ts: &[f64], frequencies: &[f64]) -> f64 {
    let eval = || -> Result<f64> {
        let geom = sc.build_geometry()?.with_transmissivities(ts)?;
        let ev = Evaluator {
            interferometer: Interferometer::new(geom, sc.optical_params())?,
            ..Evaluator::from_scenario(sc)?
        };
        let mut total = 0.0;
        for &f in frequencies {
            let s = ev.try_evaluate(f)?.sigma.unwrap_or(f64::INFINITY);
            total += s.ln();
        }
        Ok(total / frequencies.len() as f64)
    };
    match eval() {
        Ok(v) if !v.is_nan() => v,
        _ => f64::INFINITY,
    }
}

/// Grid search over per-mirror transmissivities in [t_lo, t_hi] at the
/// scenario's drive (fixed intracavity power by default).
pub fn optimize_transmissivity(sc: &Scenario, mode: ExecutionMode) -> Result<OptimizeResult> {
    let n = sc.build_geometry()?.n_mirrors;
    let opt = &sc.optimize;
    let axis = grid_values(opt.t_lo, opt.t_hi, opt.grid);
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..n {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    let surface: Vec<SurfacePoint> = map_ordered(&points, mode, |ts| SurfacePoint {
        transmissivities: ts.clone(),
        objective: transmissivity_objective(sc, ts, &opt.frequencies),
    });
    let best = surface
        .iter()
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .cloned()
        .ok_or_else(|| DfiError::Parameter("empty transmissivity grid".into()))?;
    Ok(OptimizeResult {
        frequencies: opt.frequencies.clone(),
        surface,
        best,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NgonRun {
    pub n: usize,
    pub radius: f64,
    pub arm_length: f64,
    /// Shot-noise-only QFI at the comparison frequency.
    pub dc_qfi: Option<f64>,
    /// `dc_qfi` relative to the first polygon in the list.
    pub qfi_ratio: Option<f64>,
    pub samples: Vec<SensitivitySample>,
}

/// Sweeps each odd polygon at equal intracavity power.
pub fn compare_ngons(sc: &Scenario, frequencies: &[f64], mode: ExecutionMode) -> Result<Vec<NgonRun>> {
    let base = Evaluator::from_scenario(sc)?;
    let sel = TrajectorySelection::TwoCyclic;
    let length = sc.geometry.arm_length;
    let mut runs = Vec::new();
    for &n in &sc.ngons.n {
        let radius = match (sc.geometry.radius, sc.ngons.hold) {
            (Some(r), HoldFixed::Radius) => r,
            (None, HoldFixed::Radius) => radius_for_arm_length(3, sel, length),
            (_, HoldFixed::ArmLength) => radius_for_arm_length(n, sel, length),
        };
        let geom = build_ngon_with_t(n, radius, sel, sc.geometry.transmissivity)?;
        let arm_length = geom.arm_length();
        let ev = Evaluator {
            interferometer: Interferometer::new(geom, sc.optical_params())?,
            ..base.clone()
        };
        let dc_qfi = ev.shot_noise_qfi(sc.ngons.dc_frequency).ok();
        let samples = run_sweep(&ev, frequencies, mode);
        runs.push(NgonRun {
            n,
            radius,
            arm_length,
            dc_qfi,
            qfi_ratio: None,
            samples,
        });
    }
    let reference = runs.first().and_then(|r| r.dc_qfi);
    for r in &mut runs {
        r.qfi_ratio = match (r.dc_qfi, reference) {
            (Some(q), Some(q0)) if q0 > 0.0 => Some(q / q0),
            _ => None,
        };
    }
    Ok(runs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SagnacComparison {
    pub frequencies: Vec<f64>,
    pub sagnac: Vec<SensitivitySample>,
    pub dfi: Vec<SensitivitySample>,
}

/// Standard Sagnac (one open port) against the symmetric DFI triangle of the
/// same size and intracavity power, both under the scenario's noise and
/// readout.
pub fn compare_sagnac(sc: &Scenario, frequencies: &[f64], mode: ExecutionMode) -> Result<SagnacComparison> {
    let base = Evaluator::from_scenario(sc)?;
    let radius = sc
        .geometry
        .radius
        .unwrap_or_else(|| radius_for_arm_length(3, TrajectorySelection::TrianglePair, sc.geometry.arm_length));
    let build = |geom| -> Result<Evaluator> {
        Ok(Evaluator {
            interferometer: Interferometer::new(geom, sc.optical_params())?,
            ..base.clone()
        })
    };
    let sagnac = build(standard_sagnac_preset(radius, sc.sagnac.open_port_t)?)?;
    let dfi = build(triangle_preset(radius, sc.geometry.transmissivity)?)?;
    Ok(SagnacComparison {
        frequencies: frequencies.to_vec(),
        sagnac: run_sweep(&sagnac, frequencies, mode),
        dfi: run_sweep(&dfi, frequencies, mode),
    })
}

/// Whether the noise list contains only rotation noise.
pub fn only_sagnac_noise(entries: &[NoiseEntry]) -> bool {
    entries.iter().all(|e| matches!(e, NoiseEntry::Sagnac { .. }))
}
