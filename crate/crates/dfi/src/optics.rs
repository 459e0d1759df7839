//! Carrier steady state and the per-frequency sideband system.
//!
//! Amplitudes are in photon-flux units: a field of amplitude `a` carries
//! `ħω₀|a|²` watts. The carrier is resonant, so propagation leaves it unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{DfiError, Result};
use crate::geometry::{gw_arm_projection, GwSource, PolygonGeometry};
use crate::linalg::{c, left_singular, real, CMat, CVec, C64};

pub const C_LIGHT: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;

/// Condition number above which a sideband solve is refused.
pub const MAX_CONDITION: f64 = 1e12;

/// How the carrier amplitude is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Drive {
    /// Equal input amplitude on every open port, photon-flux units.
    InputAmplitude(f64),
    /// Input scaled so the intracavity power equals this value in watts.
    IntracavityPower(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalParams {
    pub wavelength: f64,
    pub mirror_mass: f64,
    pub drive: Drive,
    pub rpn_enabled: bool,
}

impl Default for OpticalParams {
    fn default() -> Self {
        Self {
            wavelength: 1064e-9,
            mirror_mass: 5.0,
            drive: Drive::IntracavityPower(3.5e6),
            rpn_enabled: true,
        }
    }
}

impl OpticalParams {
    pub fn omega0(&self) -> f64 {
        2.0 * std::f64::consts::PI * C_LIGHT / self.wavelength
    }

    pub fn wavenumber(&self) -> f64 {
        self.omega0() / C_LIGHT
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0) {
            return Err(DfiError::Parameter(format!(
                "wavelength must be positive, got {}",
                self.wavelength
            )));
        }
        if self.rpn_enabled && !(self.mirror_mass > 0.0) {
            return Err(DfiError::Parameter(format!(
                "mirror mass must be positive with radiation pressure, got {}",
                self.mirror_mass
            )));
        }
        match self.drive {
            Drive::InputAmplitude(e) if !(e > 0.0) => Err(DfiError::Parameter(format!(
                "input amplitude must be positive, got {e}"
            ))),
            Drive::IntracavityPower(p) if !(p > 0.0) => Err(DfiError::Parameter(format!(
                "intracavity power must be positive, got {p}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Real carrier amplitudes per field (see the field convention in geometry).
#[derive(Debug, Clone, PartialEq)]
pub struct CarrierSolution {
    pub a_in: Vec<f64>,
    pub a_hit: Vec<f64>,
    pub a_ref: Vec<f64>,
    pub a_out: Vec<f64>,
    pub omega0: f64,
}

impl CarrierSolution {
    /// Power in watts travelling along each arm.
    pub fn arm_powers(&self) -> Vec<f64> {
        self.a_ref
            .iter()
            .map(|a| HBAR * self.omega0 * a * a)
            .collect()
    }

    /// Intracavity power: per trajectory the mean power hitting a mirror,
    /// summed over trajectories.
    pub fn intracavity_power(&self, n_mirrors: usize) -> f64 {
        self.a_hit
            .chunks(n_mirrors)
            .map(|traj| traj.iter().map(|a| HBAR * self.omega0 * a * a).sum::<f64>() / n_mirrors as f64)
            .sum()
    }

    pub fn input_power(&self) -> f64 {
        self.a_in.iter().map(|a| HBAR * self.omega0 * a * a).sum()
    }

    /// Input amplitude on the first open port.
    pub fn input_amplitude(&self) -> f64 {
        self.a_in.iter().cloned().fold(0.0, f64::max)
    }
}

fn carrier_for_inputs(geometry: &PolygonGeometry, a_in: &[f64], omega0: f64) -> Result<CarrierSolution> {
    let k = geometry.n_fields();
    let st: Vec<f64> = (0..k).map(|i| geometry.field_transmissivity(i).sqrt()).collect();
    let sr: Vec<f64> = (0..k)
        .map(|i| (1.0 - geometry.field_transmissivity(i)).sqrt())
        .collect();
    let mut m = nalgebra::DMatrix::<f64>::identity(k, k);
    let mut rhs = nalgebra::DVector::<f64>::zeros(k);
    for i in 0..k {
        let nx = geometry.next_field(i);
        m[(nx, i)] -= sr[i];
        rhs[nx] += st[i] * a_in[i];
    }
    let a_hit = m
        .lu()
        .solve(&rhs)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or(DfiError::NonConvergentCavity)?;
    let a_hit: Vec<f64> = a_hit.iter().cloned().collect();
    let a_ref = (0..k).map(|i| st[i] * a_in[i] + sr[i] * a_hit[i]).collect();
    let a_out = (0..k).map(|i| -sr[i] * a_in[i] + st[i] * a_hit[i]).collect();
    Ok(CarrierSolution {
        a_in: a_in.to_vec(),
        a_hit,
        a_ref,
        a_out,
        omega0,
    })
}

/// Steady-state carrier with equal drive on every open port.
pub fn solve_carrier(geometry: &PolygonGeometry, params: &OpticalParams) -> Result<CarrierSolution> {
    params.validate()?;
    let omega0 = params.omega0();
    let k = geometry.n_fields();
    let unit: Vec<f64> = (0..k)
        .map(|i| if geometry.field_transmissivity(i) > 0.0 { 1.0 } else { 0.0 })
        .collect();
    if unit.iter().all(|&e| e == 0.0) {
        return Err(DfiError::NonConvergentCavity);
    }
    let base = carrier_for_inputs(geometry, &unit, omega0)?;
    let scale = match params.drive {
        Drive::InputAmplitude(e) => e,
        Drive::IntracavityPower(p) => {
            let pc = base.intracavity_power(geometry.n_mirrors);
            if !(pc > 0.0) || !pc.is_finite() {
                return Err(DfiError::NonConvergentCavity);
            }
            (p / pc).sqrt()
        }
    };
    let a_in: Vec<f64> = unit.iter().map(|e| e * scale).collect();
    carrier_for_inputs(geometry, &a_in, omega0)
}

/// Ratio of intracavity power to total input power.
pub fn power_gain(geometry: &PolygonGeometry) -> Result<f64> {
    if geometry.port_transmissivities.iter().all(|&t| t == 0.0) {
        return Err(DfiError::Parameter("all ports closed, power gain undefined".into()));
    }
    let params = OpticalParams {
        drive: Drive::InputAmplitude(1.0),
        rpn_enabled: false,
        ..OpticalParams::default()
    };
    let carrier = solve_carrier(geometry, &params)?;
    Ok(carrier.intracavity_power(geometry.n_mirrors) / carrier.input_power())
}

/// Closed-form power gain of the symmetric triangle.
pub fn power_gain_triangle(t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(DfiError::Parameter(format!("transmissivity must lie in (0, 1], got {t}")));
    }
    let sr = (1.0 - t).sqrt();
    Ok(t / (3.0 * (1.0 - sr) * (1.0 - sr)))
}

/// sin(x)/x with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Frequency and direction factor multiplying the strain on each arm.
pub fn gw_zeta(geometry: &PolygonGeometry, params: &OpticalParams, source: &GwSource, f: f64) -> Vec<C64> {
    let kk = params.wavenumber();
    let omega = 2.0 * std::f64::consts::PI * f;
    geometry
        .arms
        .iter()
        .map(|arm| {
            let eps = omega * arm.length / (2.0 * C_LIGHT);
            let along = arm.direction.dot(&source.k_hat);
            let mid = (arm.start + arm.end).dot(&source.k_hat);
            let phase = mid * eps / arm.length - eps;
            c(phase.cos(), phase.sin()) * (kk * arm.length * sinc(eps * (1.0 - along)))
        })
        .collect()
}

/// Rotation-induced phase accumulated on each arm.
pub fn sagnac_arm_phases(geometry: &PolygonGeometry, params: &OpticalParams, omega_r: f64, f: f64) -> Vec<C64> {
    let omega = 2.0 * std::f64::consts::PI * f;
    let scale = omega_r * params.omega0() / (C_LIGHT * C_LIGHT);
    geometry
        .arms
        .iter()
        .map(|arm| {
            let eps = omega * arm.length / (2.0 * C_LIGHT);
            let cross = arm.start.cross(&arm.end).z;
            c(eps.cos(), -eps.sin()) * (-scale * cross * sinc(eps))
        })
        .collect()
}

/// Dense sideband system `l · x = [o | k1 | k2 | k3]` over the unknowns
/// (b₁, b₂, c_ref₁, c_ref₂, c_hit₁, c_hit₂), each one block of all fields.
/// Subscript 1 is the amplitude quadrature, 2 the phase quadrature.
#[derive(Debug, Clone)]
pub struct SidebandSystem {
    pub l: CMat,
    /// Coupling of the input quadratures (a₁, a₂).
    pub o: CMat,
    /// Coupling of mirror displacements.
    pub k1: CMat,
    /// Coupling of (h₊, h×).
    pub k2: CMat,
    /// Coupling of the rotation rate.
    pub k3: CMat,
}

pub fn assemble_sideband_system(
    geometry: &PolygonGeometry,
    params: &OpticalParams,
    carrier: &CarrierSolution,
    source: &GwSource,
    f: f64,
    omega_r: f64,
) -> Result<SidebandSystem> {
    if !(f >= 0.0) || !f.is_finite() {
        return Err(DfiError::Parameter(format!("frequency must be non-negative, got {f}")));
    }
    if f == 0.0 && params.rpn_enabled {
        return Err(DfiError::ZeroFrequencyRpn);
    }
    let n = geometry.n_mirrors;
    let k = geometry.n_fields();
    let dim = 6 * k;
    let (ib1, ib2, icr1, icr2, ich1, ich2) = (0, k, 2 * k, 3 * k, 4 * k, 5 * k);
    let kk = params.wavenumber();
    let omega = 2.0 * std::f64::consts::PI * f;
    let cosa = geometry.incidence_cos;

    let mut l = CMat::zeros(dim, dim);
    let mut o = CMat::zeros(dim, 2 * k);
    let mut k1 = CMat::zeros(dim, n);
    let mut k2 = CMat::zeros(dim, 2);
    let mut k3 = CMat::zeros(dim, 1);

    let kappa = if params.rpn_enabled {
        4.0 * HBAR * params.omega0() * cosa / (params.mirror_mass * C_LIGHT * omega * omega)
    } else {
        0.0
    };
    let zeta = gw_zeta(geometry, params, source, f);
    let proj = gw_arm_projection(geometry, source);
    let sag = sagnac_arm_phases(geometry, params, omega_r, f);

    for i in 0..k {
        let j = geometry.field_mirror(i);
        let t = geometry.field_transmissivity(i);
        let (st, sr) = (t.sqrt(), (1.0 - t).sqrt());

        l[(ib1 + i, ib1 + i)] = real(1.0);
        l[(ib1 + i, ich1 + i)] = real(-st);
        o[(ib1 + i, i)] = real(-sr);

        l[(icr1 + i, icr1 + i)] = real(1.0);
        l[(icr1 + i, ich1 + i)] = real(-sr);
        o[(icr1 + i, i)] = real(st);

        let g_out = cosa * sr * kk * carrier.a_in[i];
        let g_in = cosa * sr * kk * carrier.a_hit[i];
        for (row, g, through, input) in [(ib2 + i, g_out, st, -sr), (icr2 + i, g_in, sr, st)] {
            l[(row, row)] = real(1.0);
            l[(row, ich2 + i)] = real(-through);
            o[(row, k + i)] = real(input);
            k1[(row, j)] = real(-g);
            if kappa != 0.0 {
                // x_j = Δx_j − κ Σ (E a₁ + A_out b₁ − A_hit c_hit₁ − A_ref c_ref₁)
                let gk = g * kappa;
                for i2 in (0..k).filter(|&i2| geometry.field_mirror(i2) == j) {
                    o[(row, i2)] += real(gk * carrier.a_in[i2]);
                    l[(row, ib1 + i2)] -= real(gk * carrier.a_out[i2]);
                    l[(row, ich1 + i2)] += real(gk * carrier.a_hit[i2]);
                    l[(row, icr1 + i2)] += real(gk * carrier.a_ref[i2]);
                }
            }
        }

        let nx = geometry.next_field(i);
        let len = geometry.arms[i].length;
        let ph = c((omega * len / C_LIGHT).cos(), -(omega * len / C_LIGHT).sin());
        l[(ich1 + nx, ich1 + nx)] = real(1.0);
        l[(ich1 + nx, icr1 + i)] = -ph;
        l[(ich2 + nx, ich2 + nx)] = real(1.0);
        l[(ich2 + nx, icr2 + i)] = -ph;
        let src = zeta[i] * carrier.a_ref[i];
        k2[(ich2 + nx, 0)] = src * proj[i].0;
        k2[(ich2 + nx, 1)] = src * proj[i].1;
        k3[(ich2 + nx, 0)] = sag[i] * carrier.a_ref[i];
    }
    Ok(SidebandSystem { l, o, k1, k2, k3 })
}

/// Output response at one sideband frequency, restricted to open ports.
/// Quadrature vectors are ordered (amplitude; phase), k entries each.
#[derive(Debug, Clone)]
pub struct TransferSet {
    pub frequency: f64,
    pub k: usize,
    pub m_int: CMat,
    pub m21: CMat,
    /// Full 2k x 2k quadrature transfer matrix.
    pub m: CMat,
    pub a_ph: CMat,
    /// Columns are the (h₊, h×) responses of the phase quadratures.
    pub v_ph: CMat,
    pub sagnac_ph: CVec,
    /// Per-unit-variance displacement response of the amplitude quadratures;
    /// identically zero for this cavity model but kept for completeness.
    pub a_amp: CMat,
    pub v_amp: CMat,
    pub condition: f64,
}

impl TransferSet {
    pub fn v_plus(&self) -> CVec {
        crate::linalg::phase_embed(&self.v_ph.column(0).into_owned())
    }

    pub fn v_matrix(&self) -> CMat {
        crate::linalg::vstack(&self.v_amp, &self.v_ph)
    }

    pub fn a_full(&self) -> CMat {
        crate::linalg::vstack(&self.a_amp, &self.a_ph)
    }

    pub fn sagnac_full(&self) -> CVec {
        crate::linalg::phase_embed(&self.sagnac_ph)
    }
}

fn condition_number(m: &CMat) -> f64 {
    let (_, s) = left_singular(m);
    let smax = s.first().cloned().unwrap_or(0.0);
    let smin = s.last().cloned().unwrap_or(0.0);
    if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    }
}

/// Solves `l x = rhs` exploiting that amplitude-quadrature unknowns never
/// depend on phase-quadrature ones. The radiation-pressure block only enters
/// as a right-hand side, so each diagonal block keeps the conditioning of the
/// passive cavity. Returns the solution and the larger block condition number.
fn solve_by_quadrature(l: &CMat, rhs: &CMat, nf: usize, f: f64) -> Result<(CMat, f64)> {
    let amp: Vec<usize> = [0, 2, 4].iter().flat_map(|&b| b * nf..(b + 1) * nf).collect();
    let ph: Vec<usize> = [1, 3, 5].iter().flat_map(|&b| b * nf..(b + 1) * nf).collect();
    let sub = |rows: &[usize], cols: &[usize]| CMat::from_fn(rows.len(), cols.len(), |r, c| l[(rows[r], cols[c])]);
    let l_aa = sub(&amp, &amp);
    let l_pp = sub(&ph, &ph);
    let l_pa = sub(&ph, &amp);
    debug_assert!(crate::linalg::max_abs(&sub(&amp, &ph)) == 0.0);
    let condition = condition_number(&l_aa).max(condition_number(&l_pp));
    if !(condition <= MAX_CONDITION) {
        return Err(DfiError::IllConditioned { frequency: f, condition });
    }
    let rhs_rows = |rows: &[usize]| CMat::from_fn(rows.len(), rhs.ncols(), |r, c| rhs[(rows[r], c)]);
    let fail = DfiError::IllConditioned { frequency: f, condition };
    let x_a = l_aa.lu().solve(&rhs_rows(&amp)).ok_or(fail.clone())?;
    let x_p = l_pp.lu().solve(&(rhs_rows(&ph) - &l_pa * &x_a)).ok_or(fail)?;
    let mut x = CMat::zeros(6 * nf, rhs.ncols());
    for (r, &row) in amp.iter().enumerate() {
        x.row_mut(row).copy_from(&x_a.row(r));
    }
    for (r, &row) in ph.iter().enumerate() {
        x.row_mut(row).copy_from(&x_p.row(r));
    }
    Ok((x, condition))
}

/// Solves the sideband system and extracts the open-port response.
pub fn transfer_set(
    geometry: &PolygonGeometry,
    params: &OpticalParams,
    carrier: &CarrierSolution,
    source: &GwSource,
    f: f64,
    omega_r: f64,
) -> Result<TransferSet> {
    let sys = assemble_sideband_system(geometry, params, carrier, source, f, omega_r)?;
    let nf = geometry.n_fields();
    let n = geometry.n_mirrors;
    let rhs = crate::linalg::columns_hstack(&[&sys.o, &sys.k1, &sys.k2, &sys.k3], 6 * nf);
    let (x, condition) = solve_by_quadrature(&sys.l, &rhs, nf, f)?;

    let open = geometry.open_fields();
    let k = open.len();
    let rows: Vec<usize> = open.iter().cloned().chain(open.iter().map(|&i| nf + i)).collect();
    let m = CMat::from_fn(2 * k, 2 * k, |r, col| x[(rows[r], rows[col])]);
    let pick = |offset: usize, width: usize| CMat::from_fn(2 * k, width, |r, col| x[(rows[r], offset + col)]);
    let a = pick(2 * nf, n);
    let v = pick(2 * nf + n, 2);
    let s = pick(2 * nf + n + 2, 1);
    if m.iter().chain(a.iter()).chain(v.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(DfiError::IllConditioned { frequency: f, condition });
    }

    Ok(TransferSet {
        frequency: f,
        k,
        m_int: m.view((0, 0), (k, k)).into_owned(),
        m21: m.view((k, 0), (k, k)).into_owned(),
        a_ph: a.rows(k, k).into_owned(),
        v_ph: v.rows(k, k).into_owned(),
        sagnac_ph: s.view((k, 0), (k, 1)).column(0).into_owned(),
        a_amp: a.rows(0, k).into_owned(),
        v_amp: v.rows(0, k).into_owned(),
        m,
        condition,
    })
}

/// Geometry, optics and carrier bundled for repeated frequency evaluation.
#[derive(Debug, Clone)]
pub struct Interferometer {
    pub geometry: PolygonGeometry,
    pub params: OpticalParams,
    pub carrier: CarrierSolution,
}

impl Interferometer {
    pub fn new(geometry: PolygonGeometry, params: OpticalParams) -> Result<Self> {
        let carrier = solve_carrier(&geometry, &params)?;
        Ok(Self {
            geometry,
            params,
            carrier,
        })
    }

    pub fn transfer(&self, source: &GwSource, f: f64, omega_r: f64) -> Result<TransferSet> {
        transfer_set(&self.geometry, &self.params, &self.carrier, source, f, omega_r)
    }

    pub fn with_rpn(&self, on: bool) -> Self {
        let mut out = self.clone();
        out.params.rpn_enabled = on;
        out
    }
}

fn require_triangle(geometry: &PolygonGeometry) -> Result<(f64, f64)> {
    let t0 = geometry.port_transmissivities[0];
    if geometry.n_mirrors != 3 || geometry.port_transmissivities.iter().any(|&t| t != t0) {
        return Err(DfiError::Geometry(
            "closed-form response needs the symmetric triangle".into(),
        ));
    }
    Ok((t0, (1.0 - t0).sqrt()))
}

/// √R·e^{−iΩL/c}, the round-trip-per-arm amplitude factor.
fn sqrt_r_prime(sr: f64, f: f64, length: f64) -> C64 {
    let phi = 2.0 * std::f64::consts::PI * f * length / C_LIGHT;
    c(phi.cos(), -phi.sin()) * sr
}

/// Closed-form phase-quadrature (h₊, h×) response of the symmetric triangle.
/// Strain on each arm is recomputed here from the source frame rather than
/// taken from the solver.
pub fn analytic_gw_response_triangle(
    geometry: &PolygonGeometry,
    params: &OpticalParams,
    carrier: &CarrierSolution,
    source: &GwSource,
    f: f64,
) -> Result<CMat> {
    let (_, sr) = require_triangle(geometry)?;
    let e = carrier.input_amplitude();
    let kk = params.wavenumber();
    let omega = 2.0 * std::f64::consts::PI * f;
    let rp = sqrt_r_prime(sr, f, geometry.arm_length());
    let denom = C64::new(1.0, 0.0) - rp.powi(3);
    let mut out = CMat::zeros(6, 2);
    for t in 0..2 {
        let mut h = [[C64::new(0.0, 0.0); 2]; 3];
        for (q, hq) in h.iter_mut().enumerate() {
            let a = geometry.trajectories[t][q];
            let b = geometry.trajectories[t][(q + 1) % 3];
            let (x1, x2) = (geometry.mirror_positions[a], geometry.mirror_positions[b]);
            let len = (x2 - x1).norm();
            let dir = (x2 - x1) / len;
            let eps = omega * len / (2.0 * C_LIGHT);
            let arg = (x1 + x2).dot(&source.k_hat) * eps / len - eps;
            let sc = if eps == 0.0 {
                1.0
            } else {
                let y = eps * (1.0 - dir.dot(&source.k_hat));
                if y == 0.0 { 1.0 } else { y.sin() / y }
            };
            let z = c(arg.cos(), arg.sin()) * (e * kk * len * sc);
            hq[0] = z * dir.dot(&(source.e_plus * dir));
            hq[1] = z * dir.dot(&(source.e_cross * dir));
        }
        for p in 0..3 {
            for pol in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for (q, hq) in h.iter().enumerate() {
                    let m = (p + 3 - (q + 1) % 3) % 3;
                    acc += rp.powi(m as i32) * hq[pol];
                }
                out[(t * 3 + p, pol)] = acc * ((1.0 + sr) / denom);
            }
        }
    }
    Ok(out)
}

/// Closed-form phase-quadrature response to mirror displacement for the
/// symmetric triangle.
pub fn analytic_displacement_response_triangle(
    geometry: &PolygonGeometry,
    params: &OpticalParams,
    carrier: &CarrierSolution,
    f: f64,
) -> Result<CMat> {
    let (_, sr) = require_triangle(geometry)?;
    let e = carrier.input_amplitude();
    let pref = -e * params.wavenumber() * (std::f64::consts::PI / 6.0).cos();
    let rp = sqrt_r_prime(sr, f, geometry.arm_length());
    let r3 = rp.powi(3);
    let denom = C64::new(1.0, 0.0) - r3;
    let mut out = CMat::zeros(6, 3);
    for t in 0..2 {
        for p in 0..3 {
            for mirror in 0..3 {
                let q = geometry.position_in_trajectory(t, mirror);
                let steps = (p + 3 - q) % 3;
                let coeff = if steps == 0 {
                    (real(sr) + r3) / denom
                } else {
                    rp.powi(steps as i32) * (1.0 + sr) / denom
                };
                out[(t * 3 + p, mirror)] = coeff * pref;
            }
        }
    }
    Ok(out)
}

/// Closed-form low-frequency shot-noise limited strain sensitivity of the
/// symmetric triangle. Returns +∞ when the source is face-on.
pub fn analytic_dc_shotnoise_sigma(
    geometry: &PolygonGeometry,
    params: &OpticalParams,
    carrier: &CarrierSolution,
    source: &GwSource,
) -> Result<f64> {
    let (t, _) = require_triangle(geometry)?;
    let r = 1.0 - t;
    let sr = r.sqrt();
    let s2 = source.theta.sin().powi(2);
    let g = 13.5 * (1.0 + sr).powi(2) * r / (1.0 - r.powf(1.5)).powi(2);
    let denom = 2.0 * carrier.input_amplitude() * params.wavenumber() * geometry.arm_length() * s2 * g.sqrt();
    if denom <= 0.0 || !denom.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / denom)
}

/// Phase-quadrature response to a unit rotation rate.
pub fn sagnac_response(
    geometry: &PolygonGeometry,
    params: &OpticalParams,
    carrier: &CarrierSolution,
    omega_r: f64,
    f: f64,
) -> Result<CVec> {
    let ts = transfer_set(
        geometry,
        &OpticalParams {
            rpn_enabled: false,
            ..params.clone()
        },
        carrier,
        &GwSource::default(),
        f,
        omega_r,
    )?;
    Ok(ts.sagnac_ph)
}
