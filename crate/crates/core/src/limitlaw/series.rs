//! Generating-series route to the moments.
//!
//! A planar tree splits at the first child of the root into the subtree of
//! that child and the rest, which gives `A = 1 + alpha z A B` and
//! `B = 1 + z A B` for the series of odd-edge and even-edge weighted tree
//! counts. The first-order correction series satisfy the linear system
//! `A1 = alpha z A^2 B1 + alpha z^2 A^3 B^2`, `B1 = z A1 B^2 + z^2 A^2 B^3`.
//! Everything here is exact in `alpha` and independent of word enumeration.

use crate::poly::{series_product, series_product_coeff, IntPoly, PolySeries};

/// Coefficients `a_k`, `b_k` for `0 <= k <= kmax`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MpSeries {
    pub a: PolySeries,
    pub b: PolySeries,
}

/// Coefficients `a_k^(1)`, `b_k^(1)` for `0 <= k <= kmax`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbSeries {
    pub a1: PolySeries,
    pub b1: PolySeries,
}

/// `a_{k+1} = alpha * sum_{p+q=k} a_p b_q`, `b_{k+1} = sum_{p+q=k} a_p b_q`.
pub fn mp_series(kmax: usize) -> MpSeries {
    let mut a = vec![IntPoly::one()];
    let mut b = vec![IntPoly::one()];
    for k in 0..kmax {
        let conv = series_product_coeff(&a, &b, k);
        a.push(conv.shift(1));
        b.push(conv);
    }
    MpSeries { a, b }
}

/// Solves the correction system order by order, starting from
/// `a_0 = a_1 = b_0 = b_1 = 0`.
pub fn perturb_series(kmax: usize) -> PerturbSeries {
    let MpSeries { a, b } = mp_series(kmax);
    let a2 = series_product(&a, &a, kmax);
    let a3 = series_product(&a2, &a, kmax);
    let b2 = series_product(&b, &b, kmax);
    let b3 = series_product(&b2, &b, kmax);
    let a3b2 = series_product(&a3, &b2, kmax);
    let a2b3 = series_product(&a2, &b3, kmax);

    let mut a1 = vec![IntPoly::zero(); kmax + 1];
    let mut b1 = vec![IntPoly::zero(); kmax + 1];
    for k in 2..=kmax {
        // Both right-hand sides only see orders < k of the unknowns.
        let mut ak = series_product_coeff(&a2, &b1[..k], k - 1);
        ak += &a3b2[k - 2];
        let mut bk = series_product_coeff(&a1[..k], &b2, k - 1);
        bk += &a2b3[k - 2];
        a1[k] = ak.shift(1);
        b1[k] = bk;
    }
    PerturbSeries { a1, b1 }
}
