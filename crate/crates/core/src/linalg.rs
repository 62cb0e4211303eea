//! Dense complex linear algebra helpers on top of nalgebra. SVDs use an
//! in-crate one-sided Jacobi sweep; eigen-decompositions use nalgebra.
//!
//! Conventions used throughout:
//! - singular values and eigenvalues are sorted in descending order, ties
//!   keep the decomposition's original index order;
//! - every singular/eigen vector is rotated so that its first non-negligible
//!   component is real and positive;
//! - a singular value counts as zero when it is at most
//!   `max(rows, cols) * eps * sigma_max`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::{real, Real};
use crate::CMat;

pub fn zeros<T: Real>(rows: usize, cols: usize) -> CMat<T> {
    DMatrix::zeros(rows, cols)
}

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    DMatrix::identity(n, n)
}

/// `|z|` without requiring `num_traits::Float` on `T`.
pub fn cabs<T: Real>(z: &Complex<T>) -> T {
    z.re.hypot(z.im)
}

/// `z / x` for real `x`, component-wise so tiny divisors do not underflow.
pub(crate) fn div_real<T: Real>(z: Complex<T>, x: T) -> Complex<T> {
    Complex::new(z.re / x, z.im / x)
}

pub fn frobenius_sq<T: Real>(a: &CMat<T>) -> T {
    a.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

/// `Re tr(a^* b)`.
pub fn real_inner<T: Real>(a: &CMat<T>, b: &CMat<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc + x.re * y.re + x.im * y.im)
}

pub fn frobenius<T: Real>(a: &CMat<T>) -> T {
    frobenius_sq(a).sqrt()
}

/// `max(rows, cols) * eps * sigma_max`.
pub fn rank_tolerance<T: Real>(rows: usize, cols: usize, sigma_max: T) -> T {
    T::lit(rows.max(cols) as f64 * T::EPSILON) * sigma_max
}

/// `||A^* A - I||_max`, the orthonormality defect of the columns of `a`.
pub fn orthonormality_defect<T: Real>(a: &CMat<T>) -> T {
    let g = a.adjoint() * a - identity::<T>(a.ncols());
    g.iter().fold(T::zero(), |m, z| m.max(cabs(z)))
}

fn normalize_columns<T: Real>(m: &mut CMat<T>, companion: Option<&mut CMat<T>>) {
    let mut comp = companion;
    for j in 0..m.ncols() {
        let col: Vec<Complex<T>> = m.column(j).iter().copied().collect();
        let phase = leading_phase(&col);
        let inv = phase.conj();
        m.column_mut(j).iter_mut().for_each(|z| *z *= inv);
        if let Some(other) = comp.as_deref_mut() {
            if j < other.ncols() {
                other.column_mut(j).iter_mut().for_each(|z| *z *= inv);
            }
        }
    }
}

fn leading_phase<T: Real>(col: &[Complex<T>]) -> Complex<T> {
    let peak = col.iter().fold(T::zero(), |m, z| m.max(cabs(z)));
    if peak == T::zero() {
        return real(T::one());
    }
    let cut = peak * T::lit(1e-8);
    for z in col {
        let n = cabs(z);
        if n > cut {
            return div_real(*z, n);
        }
    }
    real(T::one())
}

/// Thin SVD `A = U diag(s) V^*` with sorted singular values and the module
/// sign convention applied to the right singular vectors.
#[derive(Debug, Clone)]
pub struct Svd<T: Real> {
    pub u: CMat<T>,
    pub s: Vec<T>,
    pub v: CMat<T>,
}

impl<T: Real> Svd<T> {
    pub fn sigma_max(&self) -> T {
        self.s.first().copied().unwrap_or_else(T::zero)
    }

    /// Numerical rank under the module-wide tolerance.
    pub fn rank(&self) -> usize {
        let tol = rank_tolerance(self.u.nrows(), self.v.nrows(), self.sigma_max());
        self.s.iter().filter(|&&x| x > tol).count()
    }
}

pub fn svd<T: Real>(a: &CMat<T>) -> Svd<T> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Svd {
            u: zeros(m, 0),
            s: Vec::new(),
            v: zeros(n, 0),
        };
    }
    let (mut u, s, mut v) = if m >= n {
        jacobi_svd(a)
    } else {
        let (u, s, v) = jacobi_svd(&a.adjoint());
        (v, s, u)
    };
    normalize_columns(&mut v, Some(&mut u));
    Svd { u, s, v }
}

/// One-sided (Hestenes) Jacobi SVD of a tall matrix. Returns thin `U` with
/// orthonormal columns (zero singular values get an arbitrary orthonormal
/// completion), descending singular values and square `V`.
fn jacobi_svd<T: Real>(a: &CMat<T>) -> (CMat<T>, Vec<T>, CMat<T>) {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut u = a.clone();
    let mut v = identity::<T>(n);
    let eps = T::lit(T::EPSILON);
    // columns below this norm are zero for every rank decision made later
    let negligible = eps * eps * frobenius(a);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = u.column(p).norm_squared();
                let beta = u.column(q).norm_squared();
                let gamma = u.column(p).dotc(&u.column(q));
                let g = cabs(&gamma);
                let (na, nb) = (alpha.sqrt(), beta.sqrt());
                if g == T::zero() || na <= negligible || nb <= negligible || g <= eps * na * nb {
                    continue;
                }
                rotated = true;
                // rotate column q so that u_p^* u_q is real and positive
                let phase = div_real(gamma, g).conj();
                let phase = div_real(phase, cabs(&phase));
                u.column_mut(q).iter_mut().for_each(|z| *z *= phase);
                v.column_mut(q).iter_mut().for_each(|z| *z *= phase);
                let zeta = (beta - alpha) / (T::lit(2.0) * g);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for mat in [&mut u, &mut v] {
                    for i in 0..mat.nrows() {
                        let xp = mat[(i, p)];
                        let xq = mat[(i, q)];
                        mat[(i, p)] = xp * real(c) - xq * real(s);
                        mat[(i, q)] = xp * real(s) + xq * real(c);
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<T> = (0..n).map(|j| u.column(j).norm_squared().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        norms[j]
            .partial_cmp(&norms[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let smax = norms[order[0]];
    let floor = rank_tolerance(m, n, smax);
    let mut u_out = zeros::<T>(m, n);
    let mut v_out = zeros::<T>(n, n);
    let mut s_out = Vec::with_capacity(n);
    for (filled, &j) in order.iter().enumerate() {
        v_out.set_column(filled, &v.column(j));
        s_out.push(norms[j]);
        if norms[j] > floor && norms[j] > T::zero() {
            let col = u.column(j).map(|z| div_real(z, norms[j]));
            u_out.set_column(filled, &col);
        }
    }
    let rank = s_out
        .iter()
        .filter(|&&x| x > floor && x > T::zero())
        .count();
    // complete U over the numerically zero singular values, each time with
    // the coordinate axis that keeps the largest residual
    for col in rank..n {
        let mut best: Option<(T, CMat<T>)> = None;
        for e in 0..m {
            let mut cand = zeros::<T>(m, 1);
            cand[(e, 0)] = real(T::one());
            for _ in 0..2 {
                for j in 0..col {
                    let uj = u_out.column(j).into_owned();
                    let proj = uj.dotc(&cand.column(0));
                    cand.column_mut(0).axpy(-proj, &uj, real(T::one()));
                }
            }
            let nrm = cand.column(0).norm_squared().sqrt();
            if best.as_ref().is_none_or(|(b, _)| nrm > *b) {
                best = Some((nrm, cand));
            }
        }
        let (nrm, cand) = best.expect("m >= 1");
        u_out.set_column(col, &cand.column(0).map(|z| div_real(z, nrm)));
    }
    (u_out, s_out, v_out)
}

/// Full right singular basis: returns `(s, V)` with `V` square of size `cols`.
/// Singular values beyond `min(rows, cols)` are reported as zero.
pub fn full_right_svd<T: Real>(a: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let (m, n) = a.shape();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    if m >= n {
        let d = svd(a);
        return (d.s, d.v);
    }
    let mut padded = zeros::<T>(n, n);
    padded.view_mut((0, 0), (m, n)).copy_from(a);
    let d = svd(&padded);
    (d.s, d.v)
}

/// Orthonormal basis of the right null space `{x : A x = 0}` (columns).
pub fn null_space<T: Real>(a: &CMat<T>) -> CMat<T> {
    let n = a.ncols();
    let (s, v) = full_right_svd(a);
    let smax = s.first().copied().unwrap_or_else(T::zero);
    let tol = rank_tolerance(a.nrows(), n, smax);
    let r = if smax == T::zero() {
        0
    } else {
        s.iter().filter(|&&x| x > tol).count()
    };
    v.columns(r, n - r).into_owned()
}

/// The `count` right singular vectors with the smallest singular values.
pub fn least_right_singular<T: Real>(a: &CMat<T>, count: usize) -> (CMat<T>, Vec<T>) {
    let n = a.ncols();
    let (s, v) = full_right_svd(a);
    let start = n - count;
    let mut padded = s.clone();
    padded.resize(n, T::zero());
    (
        v.columns(start, count).into_owned(),
        padded[start..].to_vec(),
    )
}

/// Orthonormal basis (columns) of the orthogonal complement of span(x).
pub fn orthogonal_complement<T: Real>(x: &CMat<T>) -> CMat<T> {
    null_space(&x.adjoint())
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: CMat<T>,
}

pub fn hermitian_eigen<T: Real>(a: &CMat<T>) -> HermitianEigen<T> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "hermitian_eigen needs a square matrix");
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: zeros(0, 0),
        };
    }
    let half = real(T::lit(0.5));
    let sym = (a + a.adjoint()) * half;
    let dec = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps the decomposition's index order on ties
    order.sort_by(|&i, &j| {
        dec.eigenvalues[j]
            .partial_cmp(&dec.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| dec.eigenvalues[i]).collect();
    let mut vectors = zeros::<T>(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &dec.eigenvectors.column(src));
    }
    normalize_columns(&mut vectors, None);
    HermitianEigen { values, vectors }
}

/// Columns are the `count` eigenvectors of largest eigenvalue.
pub fn dominant_eigenvectors<T: Real>(a: &CMat<T>, count: usize) -> (CMat<T>, Vec<T>) {
    let e = hermitian_eigen(a);
    (
        e.vectors.columns(0, count).into_owned(),
        e.values[..count].to_vec(),
    )
}

/// Columns are the `count` eigenvectors of smallest eigenvalue.
pub fn least_eigenvectors<T: Real>(a: &CMat<T>, count: usize) -> (CMat<T>, Vec<T>) {
    let e = hermitian_eigen(a);
    let n = a.nrows();
    (
        e.vectors.columns(n - count, count).into_owned(),
        e.values[n - count..].to_vec(),
    )
}

/// Closest matrix with orthonormal columns in Frobenius norm (`U V^*`).
pub fn polar_factor<T: Real>(a: &CMat<T>) -> CMat<T> {
    let d = svd(a);
    &d.u * d.v.adjoint()
}

/// Inverse of a square matrix, `None` when numerically singular.
pub fn checked_inverse<T: Real>(a: &CMat<T>) -> Option<CMat<T>> {
    let n = a.nrows();
    if n != a.ncols() {
        return None;
    }
    if n == 0 {
        return Some(zeros(0, 0));
    }
    let d = svd(a);
    let smax = d.sigma_max();
    let smin = d.s.last().copied().unwrap_or_else(T::zero);
    if smax == T::zero() || smin <= rank_tolerance(n, n, smax) {
        return None;
    }
    a.clone().try_inverse()
}

/// `ln det(A)` for Hermitian positive definite `A`.
pub fn ln_det_hpd<T: Real>(a: &CMat<T>) -> T {
    let half = real(T::lit(0.5));
    let sym = (a + a.adjoint()) * half;
    match sym.clone().cholesky() {
        Some(ch) => {
            let l = ch.l();
            (0..l.nrows()).fold(T::zero(), |acc, i| acc + l[(i, i)].re.ln()) * T::lit(2.0)
        }
        None => cabs(&sym.lu().determinant()).ln(),
    }
}

/// Matrix of i.i.d. `CN(0, 1)` entries, filled column by column.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> CMat<T> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = zeros::<T>(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            m[(i, j)] = Complex::new(T::lit(re * scale), T::lit(im * scale));
        }
    }
    m
}

/// Haar-distributed `rows x cols` matrix with orthonormal columns.
pub fn haar_orthonormal<T: Real, R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> CMat<T> {
    assert!(
        cols <= rows,
        "cannot fit {cols} orthonormal columns in C^{rows}"
    );
    if cols == 0 {
        return zeros(rows, 0);
    }
    let g = complex_gaussian::<T, R>(rows, cols, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let n = cabs(&d);
        if n > T::zero() {
            let phase = div_real(d, n);
            q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
        }
    }
    q
}

pub fn hstack<T: Real>(blocks: &[&CMat<T>], rows: usize) -> CMat<T> {
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros::<T>(rows, cols);
    let mut at = 0;
    for b in blocks {
        debug_assert_eq!(b.nrows(), rows);
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

pub fn vstack<T: Real>(blocks: &[&CMat<T>], cols: usize) -> CMat<T> {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros::<T>(rows, cols);
    let mut at = 0;
    for b in blocks {
        debug_assert_eq!(b.ncols(), cols);
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(*b);
        at += b.nrows();
    }
    out
}

pub fn scale<T: Real>(a: &CMat<T>, s: T) -> CMat<T> {
    a * real(s)
}

pub fn real_trace<T: Real>(a: &CMat<T>) -> T {
    (0..a.nrows().min(a.ncols())).fold(T::zero(), |acc, i| acc + a[(i, i)].re)
}

pub fn diag_real<T: Real>(a: &CMat<T>) -> DVector<T> {
    DVector::from_iterator(a.nrows(), (0..a.nrows()).map(|i| a[(i, i)].re))
}
