//! Mirror and field layout of polygon cavities, and gravitational-wave
//! polarization projections onto the arms.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{DfiError, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Which closed paths through the mirrors carry light.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectorySelection {
    /// The two longest cyclic paths (step ±(n-1)/2), odd n only.
    TwoCyclic,
    /// Clockwise and counter-clockwise around a triangle.
    TrianglePair,
}

impl FromStr for TrajectorySelection {
    type Err = DfiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-cyclic" | "two_cyclic" => Ok(Self::TwoCyclic),
            "triangle-pair" | "triangle_pair" => Ok(Self::TrianglePair),
            other => Err(DfiError::Geometry(format!(
                "unknown trajectory selection '{other}'"
            ))),
        }
    }
}

impl fmt::Display for TrajectorySelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TwoCyclic => write!(f, "two-cyclic"),
            Self::TrianglePair => write!(f, "triangle-pair"),
        }
    }
}

/// A directed arm segment travelled by one field.
#[derive(Debug, Clone, PartialEq)]
pub struct Arm {
    pub from: usize,
    pub to: usize,
    pub start: Vec3,
    pub end: Vec3,
    pub direction: Vec3,
    pub length: f64,
}

/// Field index convention: field `t * n + p` leaves mirror
/// `trajectories[t][p]` and travels along `arms[t * n + p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonGeometry {
    pub n_mirrors: usize,
    pub radius: f64,
    pub mirror_positions: Vec<Vec3>,
    pub trajectories: Vec<Vec<usize>>,
    pub arms: Vec<Arm>,
    pub port_transmissivities: Vec<f64>,
    /// Cosine of the angle of incidence on every mirror.
    pub incidence_cos: f64,
    pub selection: TrajectorySelection,
}

impl PolygonGeometry {
    /// Total number of fields, open or closed.
    pub fn n_fields(&self) -> usize {
        self.trajectories.len() * self.n_mirrors
    }

    pub fn field_mirror(&self, field: usize) -> usize {
        let n = self.n_mirrors;
        self.trajectories[field / n][field % n]
    }

    /// The field that the light of `field` turns into at the next mirror.
    pub fn next_field(&self, field: usize) -> usize {
        let n = self.n_mirrors;
        (field / n) * n + (field % n + 1) % n
    }

    pub fn field_transmissivity(&self, field: usize) -> f64 {
        self.port_transmissivities[self.field_mirror(field)]
    }

    /// Fields whose mirror has a non-zero transmissivity, in field order.
    pub fn open_fields(&self) -> Vec<usize> {
        (0..self.n_fields())
            .filter(|&i| self.field_transmissivity(i) > 0.0)
            .collect()
    }

    /// Number of input/output fields that reach a detector.
    pub fn k_fields(&self) -> usize {
        self.open_fields().len()
    }

    pub fn arm_vectors(&self) -> Vec<Vec3> {
        self.arms.iter().map(|a| a.direction).collect()
    }

    pub fn arm_length(&self) -> f64 {
        self.arms[0].length
    }

    /// Position of `mirror` along trajectory `t`.
    pub fn position_in_trajectory(&self, t: usize, mirror: usize) -> usize {
        self.trajectories[t]
            .iter()
            .position(|&m| m == mirror)
            .expect("every trajectory visits every mirror")
    }

    pub fn with_transmissivities(mut self, ts: &[f64]) -> Result<Self> {
        if ts.len() != self.n_mirrors {
            return Err(DfiError::Geometry(format!(
                "expected {} transmissivities, got {}",
                self.n_mirrors,
                ts.len()
            )));
        }
        validate_transmissivities(ts)?;
        self.port_transmissivities = ts.to_vec();
        Ok(self)
    }

    /// Same cavity with every position rotated by `rot`.
    pub fn rotated(&self, rot: &Rotation3<f64>) -> Self {
        let mut out = self.clone();
        for p in &mut out.mirror_positions {
            *p = rot * *p;
        }
        out.arms = build_arms(&out.mirror_positions, &out.trajectories);
        out
    }

    /// Sum of (start x end)·ẑ over trajectory `t`; twice the signed area
    /// weighted by winding number.
    pub fn signed_double_area(&self, t: usize) -> f64 {
        let n = self.n_mirrors;
        self.arms[t * n..(t + 1) * n]
            .iter()
            .map(|a| a.start.cross(&a.end).z)
            .sum()
    }

    /// Area of the convex polygon through all mirrors.
    pub fn polygon_area(&self) -> f64 {
        let n = self.n_mirrors as f64;
        0.5 * n * self.radius * self.radius * (2.0 * std::f64::consts::PI / n).sin()
    }
}

fn validate_transmissivities(ts: &[f64]) -> Result<()> {
    for (j, &t) in ts.iter().enumerate() {
        if !(0.0..=1.0).contains(&t) || !t.is_finite() {
            return Err(DfiError::Geometry(format!(
                "transmissivity of mirror {j} is {t}, must lie in [0, 1]"
            )));
        }
    }
    Ok(())
}

fn build_arms(positions: &[Vec3], trajectories: &[Vec<usize>]) -> Vec<Arm> {
    let mut arms = Vec::new();
    for traj in trajectories {
        let n = traj.len();
        for p in 0..n {
            let from = traj[p];
            let to = traj[(p + 1) % n];
            let start = positions[from];
            let end = positions[to];
            let d = end - start;
            let length = d.norm();
            arms.push(Arm {
                from,
                to,
                start,
                end,
                direction: d / length,
                length,
            });
        }
    }
    arms
}

/// Regular polygon cavity with all mirrors at transmissivity `t`.
pub fn build_ngon(n: usize, radius: f64, selection: TrajectorySelection) -> Result<PolygonGeometry> {
    build_ngon_with_t(n, radius, selection, 0.1)
}

pub fn build_ngon_with_t(
    n: usize,
    radius: f64,
    selection: TrajectorySelection,
    t: f64,
) -> Result<PolygonGeometry> {
    if n < 3 {
        return Err(DfiError::Geometry(format!("need at least 3 mirrors, got {n}")));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(DfiError::Geometry(format!("radius must be positive, got {radius}")));
    }
    let step = match selection {
        TrajectorySelection::TrianglePair => {
            if n != 3 {
                return Err(DfiError::Geometry(format!(
                    "triangle-pair selection needs 3 mirrors, got {n}"
                )));
            }
            1
        }
        TrajectorySelection::TwoCyclic => {
            if n % 2 == 0 {
                return Err(DfiError::Geometry(format!(
                    "even n = {n}: the maximal cyclic pair is only defined for odd n"
                )));
            }
            (n - 1) / 2
        }
    };
    validate_transmissivities(&[t])?;

    let mirror_positions: Vec<Vec3> = (0..n)
        .map(|j| {
            let a = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            Vec3::new(radius * a.cos(), radius * a.sin(), 0.0)
        })
        .collect();
    let forward: Vec<usize> = (0..n).map(|i| (i * step) % n).collect();
    let backward: Vec<usize> = (0..n).map(|i| (n - (i * step) % n) % n).collect();
    let trajectories = vec![forward, backward];
    let arms = build_arms(&mirror_positions, &trajectories);

    let interior = std::f64::consts::PI * (n as f64 - 2.0 * step as f64) / n as f64;
    Ok(PolygonGeometry {
        n_mirrors: n,
        radius,
        mirror_positions,
        trajectories,
        arms,
        port_transmissivities: vec![t; n],
        incidence_cos: (interior / 2.0).cos(),
        selection,
    })
}

/// Symmetric triangle with every port open.
pub fn triangle_preset(radius: f64, t: f64) -> Result<PolygonGeometry> {
    build_ngon_with_t(3, radius, TrajectorySelection::TrianglePair, t)
}

/// Triangle in which only mirror 0 transmits; the other two are closed.
pub fn standard_sagnac_preset(radius: f64, open_port_t: f64) -> Result<PolygonGeometry> {
    if !(open_port_t > 0.0 && open_port_t <= 1.0) {
        return Err(DfiError::Geometry(format!(
            "open port transmissivity must lie in (0, 1], got {open_port_t}"
        )));
    }
    triangle_preset(radius, open_port_t)?.with_transmissivities(&[open_port_t, 0.0, 0.0])
}

/// Radius of the circle on which an n-gon with the given arm length sits.
pub fn radius_for_arm_length(n: usize, selection: TrajectorySelection, arm_length: f64) -> f64 {
    let step = match selection {
        TrajectorySelection::TrianglePair => 1,
        TrajectorySelection::TwoCyclic => (n.max(3) - 1) / 2,
    };
    arm_length / (2.0 * (std::f64::consts::PI * step as f64 / n as f64).sin())
}

/// Plane gravitational wave propagating along `k_hat`.
#[derive(Debug, Clone, PartialEq)]
pub struct GwSource {
    pub theta: f64,
    pub phi: f64,
    pub k_hat: Vec3,
    pub u_hat: Vec3,
    pub v_hat: Vec3,
    pub e_plus: Mat3,
    pub e_cross: Mat3,
}

impl GwSource {
    pub fn new(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let k = Vec3::new(st * cp, st * sp, ct);
        let u = Vec3::new(-ct * cp, -ct * sp, st);
        let v = Vec3::new(-sp, cp, 0.0);
        let mut s = Self::from_frame(k, u, v);
        s.theta = theta;
        s.phi = phi;
        s
    }

    /// Source from an explicit orthonormal frame; angles are recovered from k.
    pub fn from_frame(k: Vec3, u: Vec3, v: Vec3) -> Self {
        Self {
            theta: k.z.clamp(-1.0, 1.0).acos(),
            phi: k.y.atan2(k.x),
            k_hat: k,
            u_hat: u,
            v_hat: v,
            e_plus: u * u.transpose() - v * v.transpose(),
            e_cross: u * v.transpose() + v * u.transpose(),
        }
    }

    pub fn rotated(&self, rot: &Rotation3<f64>) -> Self {
        Self::from_frame(rot * self.k_hat, rot * self.u_hat, rot * self.v_hat)
    }
}

impl Default for GwSource {
    fn default() -> Self {
        Self::new(std::f64::consts::FRAC_PI_2, 0.0)
    }
}

/// (⟨n|e₊|n⟩, ⟨n|e×|n⟩) for every directed arm.
pub fn gw_arm_projection(geometry: &PolygonGeometry, source: &GwSource) -> Vec<(f64, f64)> {
    geometry
        .arms
        .iter()
        .map(|a| {
            let n = a.direction;
            (
                n.dot(&(source.e_plus * n)),
                n.dot(&(source.e_cross * n)),
            )
        })
        .collect()
}
