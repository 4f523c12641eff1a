//! Arithmetic of the Heisenberg group `H^n` in standard (exponential) coordinates.
//!
//! A point is stored as `x = (x_1, .., x_{2n}, x_{2n+1})`; the last entry is the
//! vertical coordinate. The group law is
//!
//! ```text
//! x·y = (x̃ + ỹ, x_{2n+1} + y_{2n+1} + Σ_k (x_k y_{k+n} − x_{k+n} y_k))
//! ```
//!
//! and the standard left invariant frame reads
//! `X_k = ∂_k − x_{k+n} ∂_t`, `X_{k+n} = ∂_{k+n} + x_k ∂_t`, `Z = ∂_t`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of `H^n` in standard coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    n: usize,
    coords: Vec<f64>,
}

impl GroupPoint {
    pub fn new(n: usize, coords: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroupParameter(n));
        }
        if coords.len() != 2 * n + 1 {
            return Err(Error::DimensionMismatch {
                expected: 2 * n + 1,
                got: coords.len(),
            });
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate(i));
        }
        Ok(Self { n, coords })
    }

    /// Builds a point from a coordinate slice of odd length `2n + 1`.
    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        if coords.len() < 3 || coords.len().is_multiple_of(2) {
            return Err(Error::InvalidGroupParameter(coords.len() / 2));
        }
        Self::new(coords.len() / 2, coords.to_vec())
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            coords: vec![0.0; 2 * n + 1],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Horizontal part `x̃ = (x_1, .., x_{2n})`.
    pub fn horizontal(&self) -> &[f64] {
        &self.coords[..2 * self.n]
    }

    pub fn vertical(&self) -> f64 {
        self.coords[2 * self.n]
    }

    /// Euclidean norm of the horizontal part.
    pub fn horizontal_norm(&self) -> f64 {
        self.horizontal().iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl fmt::Display for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

fn check_same(x: &GroupPoint, y: &GroupPoint) -> Result<()> {
    if x.n != y.n {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    Ok(())
}

/// Symplectic cross term `Σ_k (x_k y_{k+n} − x_{k+n} y_k)` on raw coordinates.
#[inline]
pub(crate) fn cross_term(n: usize, x: &[f64], y: &[f64]) -> f64 {
    (0..n).map(|k| x[k] * y[k + n] - x[k + n] * y[k]).sum()
}

/// Group law on raw coordinate slices; `out` must have the same length.
#[inline]
pub(crate) fn mul_into(n: usize, x: &[f64], y: &[f64], out: &mut [f64]) {
    let t = 2 * n;
    for j in 0..t {
        out[j] = x[j] + y[j];
    }
    out[t] = x[t] + y[t] + cross_term(n, x, y);
}

/// `x^{-1}·y` on raw coordinates.
#[inline]
pub(crate) fn left_quotient_into(n: usize, x: &[f64], y: &[f64], out: &mut [f64]) {
    let t = 2 * n;
    for j in 0..t {
        out[j] = y[j] - x[j];
    }
    // (-x)·y: cross term with -x
    out[t] = y[t] - x[t] - cross_term(n, x, y);
}

pub fn group_mul(x: &GroupPoint, y: &GroupPoint) -> Result<GroupPoint> {
    check_same(x, y)?;
    let mut out = vec![0.0; x.dim()];
    mul_into(x.n, &x.coords, &y.coords, &mut out);
    Ok(GroupPoint {
        n: x.n,
        coords: out,
    })
}

/// Inverse element; in exponential coordinates this is plain negation.
pub fn group_inv(x: &GroupPoint) -> GroupPoint {
    GroupPoint {
        n: x.n,
        coords: x.coords.iter().map(|c| -c).collect(),
    }
}

/// Intrinsic dilation `δ_r`.
pub fn dilate(r: f64, x: &GroupPoint) -> Result<GroupPoint> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::NonPositiveDilation(r));
    }
    let t = 2 * x.n;
    let mut coords = x.coords.clone();
    for c in &mut coords[..t] {
        *c *= r;
    }
    coords[t] *= r * r;
    Ok(GroupPoint { n: x.n, coords })
}

/// Coordinate components of `X̃_1(x), .., X̃_{2n}(x), Z̃(x)`; entry `[j][l]` is the
/// `∂_l` component of the `j`-th frame field.
pub fn frame_at(x: &GroupPoint) -> Vec<Vec<f64>> {
    frame_at_coords(x.n, &x.coords)
}

pub(crate) fn frame_at_coords(n: usize, x: &[f64]) -> Vec<Vec<f64>> {
    let dim = 2 * n + 1;
    let t = 2 * n;
    let mut frame = vec![vec![0.0; dim]; dim];
    for k in 0..n {
        frame[k][k] = 1.0;
        frame[k][t] = -x[k + n];
        frame[k + n][k + n] = 1.0;
        frame[k + n][t] = x[k];
    }
    frame[t][t] = 1.0;
    frame
}

/// Frame coefficients `h` of a coordinate vector `v` based at `x`:
/// `v = Σ_{j≤2n} h_j X̃_j(x) + h_{2n+1} Z̃(x)`.
pub fn coords_to_frame(x: &GroupPoint, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: v.len(),
        });
    }
    let mut out = v.to_vec();
    coords_to_frame_in_place(x.n, &x.coords, &mut out);
    Ok(out)
}

#[inline]
pub(crate) fn coords_to_frame_in_place(n: usize, x: &[f64], v: &mut [f64]) {
    let t = 2 * n;
    let corr: f64 = (0..n).map(|k| x[k + n] * v[k] - x[k] * v[k + n]).sum();
    v[t] += corr;
}

/// Frame derivatives `(X̃_1 f, .., X̃_{2n} f, Z̃ f)` from a coordinate gradient.
#[inline]
pub(crate) fn frame_derivatives(n: usize, x: &[f64], grad: &[f64]) -> Vec<f64> {
    let t = 2 * n;
    let mut out = vec![0.0; t + 1];
    for k in 0..n {
        out[k] = grad[k] - x[k + n] * grad[t];
        out[k + n] = grad[k + n] + x[k] * grad[t];
    }
    out[t] = grad[t];
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(c: &[f64]) -> GroupPoint {
        GroupPoint::from_slice(c).unwrap()
    }

    #[test]
    fn mul_h1_basic() {
        let z = group_mul(&pt(&[1.0, 0.0, 0.0]), &pt(&[0.0, 1.0, 0.0])).unwrap();
        assert_eq!(z.coords(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn identity_and_inverse() {
        let x = pt(&[0.3, -1.2, 0.7, 2.0, 5.5]);
        let e = GroupPoint::identity(2);
        assert_eq!(group_mul(&x, &e).unwrap(), x);
        assert_eq!(group_inv(&pt(&[1.0, 2.0, 3.0])).coords(), &[-1.0, -2.0, -3.0]);
        assert_eq!(group_inv(&GroupPoint::identity(1)).coords(), &[0.0, 0.0, 0.0]);
        let prod = group_mul(&x, &group_inv(&x)).unwrap();
        assert!(prod.coords().iter().all(|c| *c == 0.0));
    }

    #[test]
    fn mismatched_dims() {
        let err = group_mul(&GroupPoint::identity(1), &GroupPoint::identity(2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        assert!(GroupPoint::new(1, vec![0.0, 0.0]).is_err());
        assert!(GroupPoint::new(1, vec![0.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn dilation_values() {
        let d = dilate(2.0, &pt(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(d.coords(), &[2.0, 2.0, 4.0]);
        let x = pt(&[0.1, 0.2, 0.3]);
        assert_eq!(dilate(1.0, &x).unwrap(), x);
        assert!(dilate(0.0, &x).is_err());
        assert!(dilate(-1.0, &x).is_err());
    }

    #[test]
    fn frame_examples() {
        let f0 = frame_at(&GroupPoint::identity(2));
        for (j, row) in f0.iter().enumerate() {
            for (l, v) in row.iter().enumerate() {
                assert_eq!(*v, if j == l { 1.0 } else { 0.0 });
            }
        }
        let f = frame_at(&pt(&[1.0, 2.0, 0.0]));
        assert_eq!(f[0], vec![1.0, 0.0, -2.0]);
        assert_eq!(f[1], vec![0.0, 1.0, 1.0]);
        assert_eq!(f[2], vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn coords_to_frame_examples() {
        let x = pt(&[0.4, -0.7, 3.0]);
        let h = coords_to_frame(&GroupPoint::identity(1), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(h, vec![1.0, 2.0, 3.0]);
        // paraboloid partial in u1 at (u1, u2) = (0.4, -0.7)
        let h = coords_to_frame(&x, &[1.0, 0.0, 0.4]).unwrap();
        assert!((h[2] - (0.4 + -0.7)).abs() < 1e-15);
        assert!(coords_to_frame(&x, &[1.0]).is_err());
    }

    fn coords(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-5.0f64..5.0, 2 * n + 1)
    }

    fn points() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        (1usize..=4).prop_flat_map(|n| (coords(n), coords(n), coords(n)))
    }

    proptest! {
        #[test]
        fn associativity((a, b, c) in points()) {
            let (x, y, z) = (pt(&a), pt(&b), pt(&c));
            let l = group_mul(&group_mul(&x, &y).unwrap(), &z).unwrap();
            let r = group_mul(&x, &group_mul(&y, &z).unwrap()).unwrap();
            for (p, q) in l.coords().iter().zip(r.coords()) {
                prop_assert!((p - q).abs() < 1e-12);
            }
        }

        #[test]
        fn inverse_law((a, _b, _c) in points()) {
            let x = pt(&a);
            let e = group_mul(&x, &group_inv(&x)).unwrap();
            prop_assert!(e.coords().iter().all(|c| c.abs() < 1e-12));
            let e = group_mul(&group_inv(&x), &x).unwrap();
            prop_assert!(e.coords().iter().all(|c| c.abs() < 1e-12));
        }

        #[test]
        fn dilation_is_homomorphism((a, b, _c) in points(), r in 0.05f64..4.0, s in 0.05f64..4.0) {
            let (x, y) = (pt(&a), pt(&b));
            let l = dilate(r, &group_mul(&x, &y).unwrap()).unwrap();
            let rr = group_mul(&dilate(r, &x).unwrap(), &dilate(r, &y).unwrap()).unwrap();
            for (p, q) in l.coords().iter().zip(rr.coords()) {
                prop_assert!((p - q).abs() < 1e-12 * (1.0 + p.abs()));
            }
            let c1 = dilate(r, &dilate(s, &x).unwrap()).unwrap();
            let c2 = dilate(r * s, &x).unwrap();
            for (p, q) in c1.coords().iter().zip(c2.coords()) {
                prop_assert!((p - q).abs() < 1e-12 * (1.0 + p.abs()));
            }
        }

        #[test]
        fn frame_round_trip((a, b, _c) in points()) {
            let x = pt(&a);
            let h = coords_to_frame(&x, &b).unwrap();
            let frame = frame_at(&x);
            let mut v = vec![0.0; b.len()];
            for (hj, fj) in h.iter().zip(&frame) {
                for (vl, fl) in v.iter_mut().zip(fj) {
                    *vl += hj * fl;
                }
            }
            for (p, q) in v.iter().zip(&b) {
                prop_assert!((p - q).abs() < 1e-12 * (1.0 + q.abs()));
            }
        }

        #[test]
        fn frame_determinant_is_one((a, _b, _c) in points()) {
            let x = pt(&a);
            let f = frame_at(&x);
            let dim = x.dim();
            let m = nalgebra::DMatrix::from_fn(dim, dim, |i, j| f[i][j]);
            prop_assert!((m.determinant() - 1.0).abs() < 1e-12);
        }
    }
}
