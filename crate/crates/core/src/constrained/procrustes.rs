//! Orthogonal Procrustes: `max Re tr(A^* T)` over `A` with orthonormal columns.

use crate::linalg;
use crate::scalar::Real;
use crate::CMat;

/// Returns the maximizer `A = U V^*` (from `T = U S V^*`) and the maximum,
/// which is the sum of the singular values of `T`. Needs `rows >= cols`.
pub fn solve_procrustes<T: Real>(t: &CMat<T>) -> (CMat<T>, T) {
    assert!(
        t.nrows() >= t.ncols(),
        "Procrustes needs a tall or square target"
    );
    let d = linalg::svd(t);
    let value = d.s.iter().fold(T::zero(), |a, &b| a + b);
    (&d.u * d.v.adjoint(), value)
}
