//! Small dense complex helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = Complex { re: 0.0, im: 0.0 };
pub const ONE: C64 = Complex { re: 1.0, im: 0.0 };
pub const I: C64 = Complex { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn real(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * real(0.5)
}

/// Deviation from Hermiticity relative to the matrix scale.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Applies a scalar function to a Hermitian matrix through its spectrum.
pub fn hermitian_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let diag = CMat::from_diagonal(&CVec::from_iterator(
        vals.len(),
        vals.iter().map(|&v| real(f(v))),
    ));
    &vecs * diag * vecs.adjoint()
}

/// a = U·diag(s)·V† with square U and V, singular values largest first.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

/// SVD through faer. The nalgebra complex SVD returns wrong factors for a
/// small fraction of rank-deficient inputs, which the kernel projections
/// here produce routinely.
pub fn svd(a: &CMat) -> Svd {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Svd {
            u: CMat::identity(rows, rows),
            s: Vec::new(),
            v: CMat::identity(cols, cols),
        };
    }
    let m = faer::Mat::<C64>::from_fn(rows, cols, |i, j| a[(i, j)]);
    let dec = m.svd().expect("SVD of a finite matrix converges");
    let (u, s, v) = (dec.U(), dec.S(), dec.V());
    let mut order: Vec<usize> = (0..s.dim()).collect();
    order.sort_by(|&x, &y| s[y].re.total_cmp(&s[x].re));
    let permute = |m: faer::MatRef<'_, C64>| {
        CMat::from_fn(m.nrows(), m.ncols(), |i, j| {
            let src = if j < order.len() { order[j] } else { j };
            m[(i, src)]
        })
    };
    Svd {
        u: permute(u),
        s: order.iter().map(|&i| s[i].re).collect(),
        v: permute(v),
    }
}

/// Full left singular basis of `a` (rows x rows) with singular values padded
/// by zeros, largest first.
pub fn left_singular(a: &CMat) -> (CMat, Vec<f64>) {
    let rows = a.nrows();
    let dec = svd(a);
    let mut values = dec.s;
    values.resize(rows, 0.0);
    (dec.u, values)
}

/// Numerical rank with a threshold relative to the largest singular value.
pub fn rank_of(values: &[f64], rel_tol: f64) -> usize {
    let smax = values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    values.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Orthonormal bases for range(a) and its orthogonal complement ker(a†).
pub fn range_and_kernel(a: &CMat, rel_tol: f64) -> (CMat, CMat, Vec<f64>) {
    let (u, s) = left_singular(a);
    let r = rank_of(&s, rel_tol);
    let rows = a.nrows();
    let range = u.columns(0, r).into_owned();
    let kernel = u.columns(r, rows - r).into_owned();
    (range, kernel, s)
}

pub fn projector(basis: &CMat) -> CMat {
    basis * basis.adjoint()
}

/// u† (1 + Z Z†)⁻¹ u computed through the SVD of Z, without forming the
/// sum explicitly. Stable when Z has columns many orders of magnitude apart.
pub fn low_rank_inverse_form(u: &CVec, z: &CMat) -> f64 {
    let (basis, s) = left_singular(z);
    let coeffs = basis.adjoint() * u;
    coeffs
        .iter()
        .zip(s.iter())
        .map(|(x, &sv)| x.norm_sqr() / (1.0 + sv * sv))
        .sum()
}

pub fn columns_hstack(parts: &[&CMat], rows: usize) -> CMat {
    let total: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = CMat::zeros(rows, total);
    let mut at = 0;
    for p in parts {
        if p.ncols() > 0 {
            out.view_mut((0, at), (rows, p.ncols())).copy_from(*p);
        }
        at += p.ncols();
    }
    out
}

pub fn vstack(top: &CMat, bottom: &CMat) -> CMat {
    let mut out = CMat::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.view_mut((0, 0), (top.nrows(), top.ncols())).copy_from(top);
    out.view_mut((top.nrows(), 0), (bottom.nrows(), bottom.ncols()))
        .copy_from(bottom);
    out
}

/// Block matrix [[a, b], [c, d]] from four equally sized square blocks.
pub fn block2(a: &CMat, b: &CMat, cc: &CMat, d: &CMat) -> CMat {
    let k = a.nrows();
    let mut out = CMat::zeros(2 * k, 2 * k);
    out.view_mut((0, 0), (k, k)).copy_from(a);
    out.view_mut((0, k), (k, k)).copy_from(b);
    out.view_mut((k, 0), (k, k)).copy_from(cc);
    out.view_mut((k, k), (k, k)).copy_from(d);
    out
}

/// The commutation form J = i[[0, 1], [-1, 0]] in k-blocks.
pub fn commutation_form(k: usize) -> CMat {
    let z = CMat::zeros(k, k);
    let id = identity(k) * I;
    block2(&z, &id, &(-id.clone()), &z)
}

/// Embeds a phase-quadrature k-vector as (0; v) in the 2k space.
pub fn phase_embed(v: &CVec) -> CVec {
    let k = v.len();
    let mut out = CVec::zeros(2 * k);
    out.rows_mut(k, k).copy_from(v);
    out
}

/// Embeds a phase-quadrature k x m block as (0; a).
pub fn phase_embed_mat(a: &CMat) -> CMat {
    vstack(&CMat::zeros(a.nrows(), a.ncols()), a)
}
