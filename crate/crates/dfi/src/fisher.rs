//! Quantum and homodyne Fisher information for Gaussian output states.
//!
//! Covariances are never inverted directly. With radiation pressure the
//! output covariance spans tens of orders of magnitude, so every quantity is
//! evaluated as 2u†(BB† + YY† + ∞·DD†)⁻¹u by whitening with a well-conditioned
//! base factor B, projecting out unbounded directions D, and summing over the
//! singular directions of the whitened noise Y.

use crate::error::{DfiError, Result};
use crate::linalg::{
    columns_hstack, commutation_form, hermitian_eigen, identity, left_singular, max_abs, phase_embed, range_and_kernel,
    real, vstack, CMat, CVec,
};
use crate::noise::{as_column, OutputCovariance};

pub const DEFAULT_RANK_TOL: f64 = 1e-9;
pub const CLUSTER_TOL: f64 = 1e-8;
/// Information below this is reported as zero (σ = +∞).
pub const INFO_FLOOR: f64 = 1e-300;

/// Base covariance BB† used for whitening.
pub enum Base<'a> {
    /// s·𝟙 on the given dimension.
    ScaledIdentity(f64, usize),
    Factor(&'a CMat),
}

/// Whitened coordinates for a covariance BB† + YY† + ∞·DD†.
pub struct Whitened {
    /// Maps an original vector to whitened (and projected) coordinates.
    map: CMat,
    basis: CMat,
    singular: Vec<f64>,
}

impl Whitened {
    pub fn new(base: Base<'_>, y: &CMat, divergent: &CMat, rank_tol: f64) -> Result<Self> {
        let mut map = match base {
            Base::ScaledIdentity(s, dim) => {
                if !(s > 0.0) {
                    return Err(DfiError::Conditioning(format!("base variance {s} is not positive")));
                }
                identity(dim) * real(1.0 / s.sqrt())
            }
            Base::Factor(b) => {
                let (u, s) = left_singular(b);
                let smax = s.first().cloned().unwrap_or(0.0);
                let smin = s.last().cloned().unwrap_or(0.0);
                if !(smin > 0.0) || smin < 1e-15 * smax {
                    return Err(DfiError::Conditioning(format!(
                        "base covariance is singular (singular values {smax:.3e} .. {smin:.3e})"
                    )));
                }
                let inv = CMat::from_diagonal(&CVec::from_iterator(s.len(), s.iter().map(|&x| real(1.0 / x))));
                inv * u.adjoint()
            }
        };
        if divergent.ncols() > 0 && max_abs(divergent) > 0.0 {
            let d = &map * divergent;
            let (_, kernel, _) = range_and_kernel(&d, rank_tol);
            map = kernel.adjoint() * map;
        }
        let yt = &map * y;
        let (basis, singular) = if map.nrows() == 0 {
            (CMat::zeros(0, 0), Vec::new())
        } else {
            left_singular(&yt)
        };
        Ok(Self { map, basis, singular })
    }

    /// 2U†(…)⁻¹U.
    pub fn info_matrix(&self, u: &CMat) -> CMat {
        if self.map.nrows() == 0 {
            return CMat::zeros(u.ncols(), u.ncols());
        }
        let coeff = self.basis.adjoint() * (&self.map * u);
        let w = CMat::from_diagonal(&CVec::from_iterator(
            self.singular.len(),
            self.singular.iter().map(|&s| real(2.0 / (1.0 + s * s))),
        ));
        crate::linalg::hermitian_part(&(coeff.adjoint() * w * coeff))
    }

    pub fn info(&self, u: &CVec) -> f64 {
        if self.map.nrows() == 0 {
            return 0.0;
        }
        let coeff = self.basis.adjoint() * (&self.map * u);
        coeff
            .iter()
            .zip(&self.singular)
            .fold(0.0, |acc, (c, &s)| acc + 2.0 * c.norm_sqr() / (1.0 + s * s))
    }

    /// (…)⁻¹x, a pseudo-inverse on the complement of unbounded directions.
    pub fn solve(&self, x: &CVec) -> CVec {
        if self.map.nrows() == 0 {
            return CVec::zeros(x.len());
        }
        let coeff = self.basis.adjoint() * (&self.map * x);
        let scaled = CVec::from_iterator(
            coeff.len(),
            coeff.iter().zip(&self.singular).map(|(c, &s)| c / (1.0 + s * s)),
        );
        self.map.adjoint() * (&self.basis * scaled)
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular
    }

    pub fn coefficients(&self, u: &CVec) -> CVec {
        self.basis.adjoint() * (&self.map * u)
    }
}

/// G⁻¹x with G = [[𝟙, 0], [K, 𝟙]]; Σ_q = G(DΣ_iD† + noise)G† with
/// D = diag(M_int, M_int), so G⁻¹ leaves phase-only vectors untouched.
fn g_inverse(cov: &OutputCovariance, x: &CMat) -> CMat {
    let k = cov.k;
    let top = x.rows(0, k).into_owned();
    let bottom = x.rows(k, k) - cov.rpn_kernel() * &top;
    vstack(&top, &bottom)
}

fn g_adjoint_inverse(cov: &OutputCovariance, x: &CVec) -> CVec {
    let k = cov.k;
    let bottom = x.rows(k, k).into_owned();
    let top = x.rows(0, k) - cov.rpn_kernel() * &bottom;
    let mut out = CVec::zeros(2 * k);
    out.rows_mut(0, k).copy_from(&top);
    out.rows_mut(k, k).copy_from(&bottom);
    out
}

fn d_input_sqrt(cov: &OutputCovariance) -> CMat {
    let k = cov.k;
    let mut d = CMat::zeros(2 * k, 2 * k);
    d.view_mut((0, 0), (k, k)).copy_from(&cov.m_int);
    d.view_mut((k, k), (k, k)).copy_from(&cov.m_int);
    d * &cov.input.sqrt
}

/// Whitened frame for the full covariance, transformed by G⁻¹. `u` is
/// returned in the same frame.
fn full_frame(cov: &OutputCovariance, u: &CMat) -> Result<(Whitened, CMat)> {
    let phase_only = cov.amplitude_is_zero(u)
        && cov.amplitude_is_zero(&cov.noise_factor)
        && cov.amplitude_is_zero(&cov.divergent);
    if let (true, Some((_, b))) = (phase_only, cov.input.blocks) {
        // DΣ_iD† = ½diag(a, b) is block diagonal; only the phase block matters.
        let w = Whitened::new(
            Base::ScaledIdentity(b / 2.0, cov.k),
            &cov.phase_rows(&cov.noise_factor),
            &cov.phase_rows(&cov.divergent),
            DEFAULT_RANK_TOL,
        )?;
        return Ok((w, cov.phase_rows(u)));
    }
    let base = d_input_sqrt(cov);
    let w = Whitened::new(
        Base::Factor(&base),
        &g_inverse(cov, &cov.noise_factor),
        &g_inverse(cov, &cov.divergent),
        DEFAULT_RANK_TOL,
    )?;
    Ok((w, g_inverse(cov, u)))
}

/// I = 2v†Σ_q⁻¹v for a 2k signal vector.
pub fn qfi(v: &CVec, cov: &OutputCovariance) -> Result<f64> {
    let (w, u) = full_frame(cov, &as_column(v))?;
    Ok(w.info(&u.column(0).into_owned()))
}

#[derive(Debug, Clone)]
pub struct Qfim {
    pub matrix: CMat,
    pub eigenvalues: Vec<f64>,
    /// Eigenvector of the largest eigenvalue, in the (h₊, h×) basis.
    pub dominant: CVec,
}

/// 2𝒱†Σ_q⁻¹𝒱 for a 2k x p matrix of signal columns.
pub fn qfim(v: &CMat, cov: &OutputCovariance) -> Result<Qfim> {
    let (w, u) = full_frame(cov, v)?;
    let matrix = w.info_matrix(&u);
    let (eigenvalues, vecs) = hermitian_eigen(&matrix);
    let mut dominant = vecs.column(vecs.ncols() - 1).into_owned();
    // Fix the global phase so the largest component is real and positive.
    if let Some((idx, _)) = dominant.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())) {
        let ph = dominant[idx] / dominant[idx].norm();
        dominant /= ph;
    }
    Ok(Qfim {
        matrix,
        eigenvalues,
        dominant,
    })
}

/// A set of commuting, orthonormal quadratures measured by homodyne detection.
#[derive(Debug, Clone)]
pub struct HomodyneSelection {
    pub t_h: CMat,
    pub label: String,
}

impl HomodyneSelection {
    pub fn new(t_h: CMat, label: impl Into<String>) -> Result<Self> {
        let rows = t_h.nrows();
        if rows % 2 != 0 || t_h.ncols() == 0 || t_h.ncols() > rows / 2 {
            return Err(DfiError::Selection(format!(
                "{}x{} is not a valid selection of at most k out of 2k quadratures",
                rows,
                t_h.ncols()
            )));
        }
        let gram = t_h.adjoint() * &t_h - identity(t_h.ncols());
        if max_abs(&gram) > 1e-10 {
            return Err(DfiError::Selection(format!(
                "columns are not orthonormal (defect {:.3e})",
                max_abs(&gram)
            )));
        }
        let j = commutation_form(rows / 2);
        let comm = t_h.adjoint() * j * &t_h;
        if max_abs(&comm) > 1e-10 {
            return Err(DfiError::Selection(format!(
                "quadratures do not commute (defect {:.3e})",
                max_abs(&comm)
            )));
        }
        Ok(Self {
            t_h,
            label: label.into(),
        })
    }

    /// All phase quadratures.
    pub fn phase(k: usize) -> Self {
        Self {
            t_h: vstack(&CMat::zeros(k, k), &identity(k)),
            label: "phase".into(),
        }
    }

    /// A single quadrature along `u`, normalized.
    pub fn single(u: &CVec, label: impl Into<String>) -> Result<Self> {
        let norm = u.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(DfiError::Selection("quadrature vector is zero".into()));
        }
        Self::new(as_column(&(u / real(norm))), label)
    }

    pub fn is_phase_only(&self) -> bool {
        let k = self.t_h.nrows() / 2;
        self.t_h.rows(0, k).iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }
}

/// F = 2v†T(T†Σ_qT)⁻¹T†v.
pub fn fi_homodyne(sel: &HomodyneSelection, v: &CVec, cov: &OutputCovariance) -> Result<f64> {
    let t = &sel.t_h;
    if t.nrows() != 2 * cov.k {
        return Err(DfiError::Selection(format!(
            "selection has {} rows, covariance has {}",
            t.nrows(),
            2 * cov.k
        )));
    }
    let k = cov.k;
    let u = t.adjoint() * v;
    let y = t.adjoint() * &cov.noise_factor;
    let d = t.adjoint() * &cov.divergent;
    let w = match (sel.is_phase_only(), cov.input.blocks) {
        (true, Some((a, b))) => {
            // T†GDΣ_iD†G†T = ½(a·T_p†K²T_p + b·𝟙): move the K part into the noise.
            let tp = t.rows(k, k);
            let rpn = tp.adjoint() * cov.rpn_kernel() * real((a / 2.0).sqrt());
            let y = columns_hstack(&[&y, &rpn], t.ncols());
            Whitened::new(Base::ScaledIdentity(b / 2.0, t.ncols()), &y, &d, DEFAULT_RANK_TOL)?
        }
        _ => {
            // G†T = (T_a + K T_p; T_p) since K is Hermitian.
            let top = t.rows(0, k) + cov.rpn_kernel() * t.rows(k, k);
            let gt = vstack(&top, &t.rows(k, k).into_owned());
            let base = gt.adjoint() * d_input_sqrt(cov);
            Whitened::new(Base::Factor(&base), &y, &d, DEFAULT_RANK_TOL)
                .map_err(|e| DfiError::Conditioning(format!("T†ΣT: {e}")))?
        }
    };
    Ok(w.info(&u))
}

/// Phase-quadrature readout FI.
pub fn fi_phase(v: &CVec, cov: &OutputCovariance) -> Result<f64> {
    fi_homodyne(&HomodyneSelection::phase(cov.k), v, cov)
}

/// Single quadrature ∝ Σ_q⁻¹v, which attains the QFI.
pub fn optimal_quadrature(v: &CVec, cov: &OutputCovariance) -> Result<HomodyneSelection> {
    if v.norm() == 0.0 {
        return Err(DfiError::Selection("signal vector is zero".into()));
    }
    let (w, u) = full_frame(cov, &as_column(v))?;
    let x = w.solve(&u.column(0).into_owned());
    let inner = if x.len() == cov.k { phase_embed(&x) } else { x };
    let q = g_adjoint_inverse(cov, &inner);
    HomodyneSelection::single(&q, "optimal")
}

/// (−M_int M21†; 𝟙)(𝟙 + M21M21†)^{−1/2}: k commuting quadratures free of
/// radiation-pressure noise.
///
/// Built column by column from the SVD M21 = UΣW†, as (−M_int w σ; u)/√(1+σ²),
/// so the columns stay orthonormal when ‖M21‖ is large. The span is the same;
/// the basis differs from the closed form by the unitary U.
pub fn decoupled_quadratures(m_int: &CMat, m21: &CMat) -> Result<HomodyneSelection> {
    let k = m21.nrows();
    let dec = crate::linalg::svd(m21);
    let (u, w) = (&dec.u, &dec.v);
    let smax = dec.s.first().cloned().unwrap_or(0.0);
    let mut t = CMat::zeros(2 * k, k);
    for j in 0..k {
        let s = dec.s[j];
        let s = if s <= DEFAULT_RANK_TOL * smax { 0.0 } else { s };
        let (a, b) = if s > 1.0 {
            (1.0 / (1.0 + 1.0 / (s * s)).sqrt(), 1.0 / (s * (1.0 + 1.0 / (s * s)).sqrt()))
        } else {
            (s / (1.0 + s * s).sqrt(), 1.0 / (1.0 + s * s).sqrt())
        };
        let top = -(m_int * w.column(j)) * real(a);
        t.view_mut((0, j), (k, 1)).copy_from(&top);
        t.view_mut((k, j), (k, 1)).copy_from(&(u.column(j) * real(b)));
    }
    HomodyneSelection::new(t, "decoupled")
}

/// FI of the decoupled readout. Those quadratures see M_int·a₂ plus the
/// phase-quadrature signal and noise, after an invertible mixing, so the
/// information equals that of the phase block with radiation pressure removed.
/// Evaluating it in that form avoids cancelling O(‖M21‖) terms.
pub fn fi_decoupled(v: &CVec, cov: &OutputCovariance) -> Result<f64> {
    let k = cov.k;
    let lower = |x: &CMat| g_inverse(cov, x).rows(k, k).into_owned();
    let u = lower(&as_column(v)).column(0).into_owned();
    let y = lower(&cov.noise_factor);
    let d = lower(&cov.divergent);
    let w = match cov.input.blocks {
        Some((_, b)) => Whitened::new(Base::ScaledIdentity(b / 2.0, k), &y, &d, DEFAULT_RANK_TOL)?,
        None => {
            let base = d_input_sqrt(cov).rows(k, k).into_owned();
            Whitened::new(Base::Factor(&base), &y, &d, DEFAULT_RANK_TOL)?
        }
    };
    Ok(w.info(&u))
}

/// Eigenspace split of a displacement-noise operator N = ZZ† on the phase
/// quadratures.
#[derive(Debug, Clone)]
pub struct SubspaceDecomposition {
    pub pi_dfs: CMat,
    pub pi_c: CMat,
    pub pi_min: CMat,
    pub pi_max: CMat,
    pub dim_dfs: usize,
    pub dim_min: usize,
    pub dim_max: usize,
    /// (t_min, t_max); zero when the coupled space is empty.
    pub eigvals: (f64, f64),
}

struct Clusters {
    dfs: Vec<usize>,
    min: Vec<usize>,
    max: Vec<usize>,
    t_min: f64,
    t_max: f64,
}

fn cluster(singular: &[f64], rank_tol: f64) -> Clusters {
    let smax = singular.iter().cloned().fold(0.0, f64::max);
    let mut dfs = Vec::new();
    let mut coupled: Vec<usize> = Vec::new();
    for (i, &s) in singular.iter().enumerate() {
        if smax == 0.0 || s <= rank_tol * smax {
            dfs.push(i);
        } else {
            coupled.push(i);
        }
    }
    coupled.sort_by(|&a, &b| singular[a].total_cmp(&singular[b]));
    let mut min = Vec::new();
    let mut max = Vec::new();
    if let Some(&first) = coupled.first() {
        let t0 = singular[first].powi(2);
        for &i in &coupled {
            let t = singular[i].powi(2);
            if (t - t0).abs() <= CLUSTER_TOL * t.max(t0) {
                min.push(i);
            } else {
                max.push(i);
            }
        }
    }
    let t_min = min.first().map(|&i| singular[i].powi(2)).unwrap_or(0.0);
    let t_max = coupled.last().map(|&i| singular[i].powi(2)).unwrap_or(0.0);
    Clusters {
        dfs,
        min,
        max,
        t_min,
        t_max,
    }
}

fn projector_of(basis: &CMat, idx: &[usize]) -> CMat {
    let b = CMat::from_fn(basis.nrows(), idx.len(), |r, c| basis[(r, idx[c])]);
    &b * b.adjoint()
}

/// Eigenspace decomposition of ZZ†; the kernel is the noise-free subspace.
pub fn subspace_decomposition(z: &CMat, rank_tol: f64) -> SubspaceDecomposition {
    let (basis, s) = left_singular(z);
    let cl = cluster(&s, rank_tol);
    let pi_dfs = projector_of(&basis, &cl.dfs);
    let k = z.nrows();
    SubspaceDecomposition {
        pi_c: identity(k) - &pi_dfs,
        pi_dfs,
        pi_min: projector_of(&basis, &cl.min),
        pi_max: projector_of(&basis, &cl.max),
        dim_dfs: cl.dfs.len(),
        dim_min: cl.min.len(),
        dim_max: cl.max.len(),
        eigvals: (cl.t_min, cl.t_max),
    }
}

/// Projector onto ker(A_ph†), the displacement-free subspace.
pub fn dfs_projector(a_ph: &CMat, rank_tol: f64) -> SubspaceDecomposition {
    subspace_decomposition(a_ph, rank_tol)
}

/// Phase-readout information split over the eigenspaces of the noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiDecomposition {
    pub total: f64,
    pub f_dfs: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub eta: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub dim_dfs: usize,
}

/// Splits the phase-readout FI of `v_ph` into noise-free, smallest-noise and
/// remaining eigenspaces of the whitened phase-block noise.
pub fn decompose_fi(v_ph: &CVec, cov: &OutputCovariance) -> Result<FiDecomposition> {
    decompose_fi_with(v_ph, cov, true)
}

/// As [`decompose_fi`], optionally leaving radiation pressure out of the
/// phase-block covariance (for readouts that cancel it).
pub fn decompose_fi_with(v_ph: &CVec, cov: &OutputCovariance, include_rpn: bool) -> Result<FiDecomposition> {
    let k = cov.k;
    let noise_ph = cov.phase_rows(&cov.noise_factor);
    let div_ph = cov.phase_rows(&cov.divergent);
    let w = match cov.input.blocks {
        Some((a, b)) => {
            let y = if include_rpn {
                let rpn = &cov.m21 * real((a / 2.0).sqrt());
                columns_hstack(&[&rpn, &noise_ph], k)
            } else {
                noise_ph
            };
            Whitened::new(Base::ScaledIdentity(b / 2.0, k), &y, &div_ph, DEFAULT_RANK_TOL)?
        }
        None => {
            let m21 = if include_rpn { cov.m21.clone() } else { CMat::zeros(k, k) };
            let row = columns_hstack(&[&m21, &cov.m_int], k);
            let base = row * &cov.input.sqrt;
            Whitened::new(Base::Factor(&base), &noise_ph, &div_ph, DEFAULT_RANK_TOL)?
        }
    };
    let coeff = w.coefficients(v_ph);
    let s = w.singular_values();
    let cl = cluster(s, DEFAULT_RANK_TOL);
    let part = |idx: &[usize]| -> f64 { idx.iter().fold(0.0, |acc, &i| acc + 2.0 * coeff[i].norm_sqr() / (1.0 + s[i] * s[i])) };
    let f_dfs = part(&cl.dfs);
    let f_min = part(&cl.min);
    let f_max = part(&cl.max);
    let total = f_dfs + f_min + f_max;
    let eta = if total > 0.0 { f_dfs / total } else { 0.0 };
    Ok(FiDecomposition {
        total,
        f_dfs,
        f_min,
        f_max,
        eta,
        t_min: cl.t_min,
        t_max: cl.t_max,
        dim_dfs: cl.dfs.len(),
    })
}

/// σ = 1/√I with +∞ below the information floor.
pub fn sigma_from_info(info: f64) -> f64 {
    if info.is_finite() && info > INFO_FLOOR {
        1.0 / info.sqrt()
    } else {
        f64::INFINITY
    }
}
