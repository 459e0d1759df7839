//! TOML scenario files.
//!
//! Every section is optional; omitted values take the defaults listed on each
//! field. A minimal file is an empty document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{DfiError, Result};
use crate::geometry::{
    build_ngon_with_t, radius_for_arm_length, standard_sagnac_preset, triangle_preset, GwSource, PolygonGeometry,
    TrajectorySelection,
};
use crate::noise::{CorrelatedSpectrum, DisplacementNoise, NoiseModel, SagnacNoise, THERMAL_COEFF, THERMAL_EXPONENT};
use crate::optics::{Drive, OpticalParams};
use crate::squeeze::{SqueezeConfig, StrategyName};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub geometry: GeometrySection,
    pub optics: OpticsSection,
    pub source: SourceSection,
    pub noise: Vec<NoiseEntry>,
    pub squeeze: Option<SqueezeSection>,
    pub readout: ReadoutSection,
    pub sweep: SweepSection,
    pub optimize: OptimizeSection,
    pub ngons: NgonSection,
    pub sagnac: SagnacSection,
    pub outputs: OutputsSection,
    /// Directory that relative paths inside the scenario resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            geometry: GeometrySection::default(),
            optics: OpticsSection::default(),
            source: SourceSection::default(),
            noise: vec![NoiseEntry::Thermal {
                coeff: THERMAL_COEFF,
                exponent: THERMAL_EXPONENT,
            }],
            squeeze: None,
            readout: ReadoutSection::default(),
            sweep: SweepSection::default(),
            optimize: OptimizeSection::default(),
            ngons: NgonSection::default(),
            sagnac: SagnacSection::default(),
            outputs: OutputsSection::default(),
            base_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    /// "triangle-dfi", "standard-sagnac" or "ngon:<n>".
    pub preset: String,
    /// Arm length in meters; ignored when `radius` is set.
    pub arm_length: f64,
    pub radius: Option<f64>,
    /// Transmissivity shared by all open mirrors.
    pub transmissivity: f64,
    /// Per-mirror override.
    pub transmissivities: Option<Vec<f64>>,
    pub trajectory: Option<TrajectorySelection>,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            preset: "triangle-dfi".into(),
            arm_length: 4000.0,
            radius: None,
            transmissivity: 0.1,
            transmissivities: None,
            trajectory: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpticsSection {
    pub wavelength: f64,
    pub mirror_mass: f64,
    /// Watts; ignored when `input_amplitude` is set.
    pub intracavity_power: f64,
    /// Per-port amplitude in √(photons/s).
    pub input_amplitude: Option<f64>,
    pub rpn: bool,
}

impl Default for OpticsSection {
    fn default() -> Self {
        Self {
            wavelength: 1064e-9,
            mirror_mass: 5.0,
            intracavity_power: 3.5e6,
            input_amplitude: None,
            rpn: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarization {
    Plus,
    Cross,
    /// Dominant eigenvector of the QFI matrix at each frequency.
    Best,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceSection {
    pub theta: f64,
    pub phi: f64,
    pub polarization: Polarization,
}

impl Default for SourceSection {
    fn default() -> Self {
        Self {
            theta: std::f64::consts::FRAC_PI_2,
            phi: 0.0,
            polarization: Polarization::Plus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseEntry {
    White {
        delta: f64,
    },
    Thermal {
        #[serde(default = "default_thermal_coeff")]
        coeff: f64,
        #[serde(default = "default_thermal_exponent")]
        exponent: f64,
    },
    /// Matrix spectrum from a CSV file with columns f, s_00, s_01, ...
    Correlated {
        path: PathBuf,
    },
    /// Displacement noise without bound.
    Infinite,
    Sagnac {
        #[serde(default)]
        variance: f64,
        #[serde(default)]
        infinite: bool,
    },
}

fn default_thermal_coeff() -> f64 {
    THERMAL_COEFF
}

fn default_thermal_exponent() -> f64 {
    THERMAL_EXPONENT
}

impl NoiseEntry {
    pub fn label(&self) -> &'static str {
        match self {
            Self::White { .. } => "white",
            Self::Thermal { .. } => "thermal",
            Self::Correlated { .. } => "correlated",
            Self::Infinite => "infinite",
            Self::Sagnac { .. } => "sagnac",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezeSection {
    pub r: f64,
    #[serde(default = "default_strategy")]
    pub strategy: StrategyName,
}

fn default_strategy() -> StrategyName {
    StrategyName::Phase
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Readout {
    /// Quadrature Σ⁻¹v, attaining the QFI.
    Optimal,
    /// All phase quadratures.
    Phase,
    /// The single quadrature along the signal.
    MaxSignal,
    /// Quadratures free of radiation-pressure noise.
    Decoupled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadoutSection {
    pub kind: Readout,
}

impl Default for ReadoutSection {
    fn default() -> Self {
        Self { kind: Readout::Phase }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub f_min: f64,
    pub f_max: f64,
    pub points: usize,
    pub log: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            f_min: 1e-2,
            f_max: 1e5,
            points: 200,
            log: true,
        }
    }
}

impl SweepSection {
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                if i == 0 {
                    self.f_min
                } else if i == n - 1 {
                    self.f_max
                } else if self.log {
                    10f64.powf(self.f_min.log10() + x * (self.f_max.log10() - self.f_min.log10()))
                } else {
                    self.f_min + x * (self.f_max - self.f_min)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeSection {
    pub t_lo: f64,
    pub t_hi: f64,
    /// Grid points per mirror.
    pub grid: usize,
    /// Frequencies over which mean log σ is taken.
    pub frequencies: Vec<f64>,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        Self {
            t_lo: 0.0,
            t_hi: 0.1,
            grid: 5,
            frequencies: vec![0.01, 0.0215, 0.0464, 0.1, 0.215, 0.464, 1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HoldFixed {
    /// Every polygon keeps the configured arm length.
    ArmLength,
    /// Every polygon sits on the circle of the triangle with that arm length.
    Radius,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NgonSection {
    pub n: Vec<usize>,
    pub hold: HoldFixed,
    /// Frequency at which the low-frequency QFI ratios are reported.
    pub dc_frequency: f64,
}

impl Default for NgonSection {
    fn default() -> Self {
        Self {
            n: vec![3, 5, 9],
            hold: HoldFixed::ArmLength,
            dc_frequency: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SagnacSection {
    pub open_port_t: f64,
}

impl Default for SagnacSection {
    fn default() -> Self {
        Self { open_port_t: 0.1 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputsSection {
    /// Also compute the dominant polarization (JSON output only).
    pub polarization: bool,
}

/// Named geometry presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    TriangleDfi,
    StandardSagnac,
    Ngon(usize),
}

impl Preset {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "triangle-dfi" => Ok(Self::TriangleDfi),
            "standard-sagnac" => Ok(Self::StandardSagnac),
            other => match other.strip_prefix("ngon:") {
                Some(n) => n
                    .trim()
                    .parse::<usize>()
                    .map(Self::Ngon)
                    .map_err(|_| DfiError::Scenario(format!("bad polygon size in preset '{other}'"))),
                None => Err(DfiError::Scenario(format!(
                    "unknown geometry preset '{other}' (expected triangle-dfi, standard-sagnac or ngon:<n>)"
                ))),
            },
        }
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(text).map_err(|e| DfiError::Scenario(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| DfiError::Scenario(format!("{}: {e}", path.display())))?;
        let mut sc = Self::from_toml_str(&text)?;
        sc.base_dir = path.parent().map(Path::to_path_buf);
        Ok(sc)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(DfiError::Scenario(m));
        let sw = &self.sweep;
        if !(sw.f_min > 0.0) || !sw.f_min.is_finite() {
            return bad(format!("sweep.f_min must be > 0, got {}", sw.f_min));
        }
        if !(sw.f_max >= sw.f_min) || !sw.f_max.is_finite() {
            return bad(format!("sweep.f_max must be >= f_min, got {}", sw.f_max));
        }
        if sw.points < 2 {
            return bad(format!("sweep.points must be >= 2, got {}", sw.points));
        }
        if !(self.geometry.arm_length > 0.0) {
            return bad(format!("geometry.arm_length must be > 0, got {}", self.geometry.arm_length));
        }
        if let Some(sq) = &self.squeeze {
            if !(sq.r >= 0.0) || !sq.r.is_finite() {
                return bad(format!("squeeze.r must be >= 0, got {}", sq.r));
            }
        }
        let op = &self.optimize;
        if !(0.0 <= op.t_lo && op.t_lo < op.t_hi && op.t_hi <= 1.0) {
            return bad(format!("optimize bounds need 0 <= t_lo < t_hi <= 1, got [{}, {}]", op.t_lo, op.t_hi));
        }
        if op.grid == 0 {
            return bad("optimize.grid must be >= 1".into());
        }
        if op.frequencies.is_empty() || op.frequencies.iter().any(|&f| !(f > 0.0)) {
            return bad("optimize.frequencies must be a non-empty list of positive values".into());
        }
        if self.ngons.n.iter().any(|&n| n < 3 || n % 2 == 0) {
            return bad(format!("ngons.n entries must be odd and >= 3, got {:?}", self.ngons.n));
        }
        let displacement = self
            .noise
            .iter()
            .filter(|e| !matches!(e, NoiseEntry::Sagnac { .. }))
            .count();
        if self.noise.iter().any(|e| matches!(e, NoiseEntry::Infinite)) && displacement > 1 {
            return bad("an infinite displacement entry cannot be combined with finite ones".into());
        }
        if self.noise.iter().filter(|e| matches!(e, NoiseEntry::Sagnac { .. })).count() > 1 {
            return bad("at most one sagnac noise entry".into());
        }
        Preset::parse(&self.geometry.preset)?;
        self.build_geometry()?;
        self.optical_params().validate().map_err(|e| DfiError::Scenario(e.to_string()))?;
        Ok(())
    }

    pub fn preset(&self) -> Result<Preset> {
        Preset::parse(&self.geometry.preset)
    }

    pub fn build_geometry(&self) -> Result<PolygonGeometry> {
        let g = &self.geometry;
        let to_scenario = |e: DfiError| DfiError::Scenario(e.to_string());
        let preset = self.preset()?;
        let (n, selection) = match preset {
            Preset::TriangleDfi | Preset::StandardSagnac => {
                (3, g.trajectory.unwrap_or(TrajectorySelection::TrianglePair))
            }
            Preset::Ngon(n) => (n, g.trajectory.unwrap_or(TrajectorySelection::TwoCyclic)),
        };
        let radius = g.radius.unwrap_or_else(|| radius_for_arm_length(n, selection, g.arm_length));
        let geom = match preset {
            Preset::TriangleDfi => triangle_preset(radius, g.transmissivity),
            Preset::StandardSagnac => standard_sagnac_preset(radius, self.sagnac.open_port_t),
            Preset::Ngon(_) => build_ngon_with_t(n, radius, selection, g.transmissivity),
        }
        .map_err(to_scenario)?;
        match &g.transmissivities {
            Some(ts) => geom.with_transmissivities(ts).map_err(to_scenario),
            None => Ok(geom),
        }
    }

    pub fn optical_params(&self) -> OpticalParams {
        let o = &self.optics;
        OpticalParams {
            wavelength: o.wavelength,
            mirror_mass: o.mirror_mass,
            drive: match o.input_amplitude {
                Some(e) => Drive::InputAmplitude(e),
                None => Drive::IntracavityPower(o.intracavity_power),
            },
            rpn_enabled: o.rpn,
        }
    }

    pub fn source(&self) -> GwSource {
        GwSource::new(self.source.theta, self.source.phi)
    }

    pub fn squeeze_config(&self) -> Option<SqueezeConfig> {
        self.squeeze.as_ref().map(|s| SqueezeConfig {
            r: s.r,
            strategy: s.strategy.into(),
        })
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match (&self.base_dir, p.is_relative()) {
            (Some(dir), true) => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Combines the noise entries into one model. Displacement entries add.
    pub fn noise_model(&self) -> Result<NoiseModel> {
        noise_model_from(&self.noise, |p| self.resolve(p))
    }
}

pub fn noise_model_from(entries: &[NoiseEntry], resolve: impl Fn(&Path) -> PathBuf) -> Result<NoiseModel> {
    let mut model = NoiseModel::shot_only();
    for e in entries {
        match e {
            NoiseEntry::White { delta } => model.displacement.push(DisplacementNoise::White { delta: *delta }),
            NoiseEntry::Thermal { coeff, exponent } => model.displacement.push(DisplacementNoise::Thermal {
                coeff: *coeff,
                exponent: *exponent,
            }),
            NoiseEntry::Correlated { path } => {
                let spec = CorrelatedSpectrum::from_csv_path(&resolve(path))
                    .map_err(|e| DfiError::Scenario(e.to_string()))?;
                model.displacement.push(DisplacementNoise::Correlated(spec));
            }
            NoiseEntry::Infinite => model.delta_infinity = true,
            NoiseEntry::Sagnac { variance, infinite } => {
                model.sagnac = Some(SagnacNoise {
                    variance: *variance,
                    infinite: *infinite,
                })
            }
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let sc = Scenario::from_toml_str("").unwrap();
        assert_eq!(sc, Scenario::default());
        let g = sc.build_geometry().unwrap();
        assert!((g.arm_length() - 4000.0).abs() < 1e-9);
    }

    #[test]
    fn presets_parse() {
        assert_eq!(Preset::parse("ngon:7").unwrap(), Preset::Ngon(7));
        assert!(Preset::parse("ngon:x").is_err());
        assert!(Preset::parse("square").is_err());
        let sc = Scenario::from_toml_str("[geometry]\npreset = \"standard-sagnac\"\n").unwrap();
        assert_eq!(sc.build_geometry().unwrap().k_fields(), 2);
    }

    #[test]
    fn rejects_bad_sweep_and_even_polygon() {
        assert!(Scenario::from_toml_str("[sweep]\nf_min = 0.0\n").is_err());
        assert!(Scenario::from_toml_str("[sweep]\npoints = 1\n").is_err());
        assert!(Scenario::from_toml_str("[geometry]\npreset = \"ngon:4\"\n").is_err());
        assert!(Scenario::from_toml_str("[bogus]\nx = 1\n").is_err());
    }

    #[test]
    fn noise_entries_combine() {
        let text = r#"
[[noise]]
kind = "white"
delta = 1e-20

[[noise]]
kind = "thermal"

[[noise]]
kind = "sagnac"
variance = 1e-12
"#;
        let sc = Scenario::from_toml_str(text).unwrap();
        let m = sc.noise_model().unwrap();
        assert_eq!(m.displacement.len(), 2);
        assert!(m.sagnac.is_some());
    }

    #[test]
    fn round_trips_through_toml() {
        let sc = Scenario::default();
        let back = Scenario::from_toml_str(&sc.to_toml_string()).unwrap();
        assert_eq!(sc, back);
    }

    #[test]
    fn sweep_grid_endpoints_exact() {
        let f = SweepSection::default().frequencies();
        assert_eq!(f.len(), 200);
        assert_eq!(f[0], 1e-2);
        assert_eq!(f[199], 1e5);
    }
}
