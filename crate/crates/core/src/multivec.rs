//! p-vectors over the orthonormal frame `(X_1, .., X_{2n}, Z)`.
//!
//! Coefficients are stored densely on the lexicographically ordered p-subsets of
//! `{1, .., 2n+1}`; the last index is the `Z` direction. A basis p-vector is
//! vertical exactly when its subset contains `Z`, so the horizontal/vertical
//! splitting is a coefficient mask.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest supported group parameter (`2n + 1 ≤ 9`).
pub const MAX_N: usize = 4;
const MAX_DIM: usize = 2 * MAX_N + 1;

/// Lexicographic p-subsets of `{0, .., dim-1}` as bitmasks, with the reverse map.
#[derive(Debug)]
pub struct SubsetBasis {
    pub dim: usize,
    pub p: usize,
    pub masks: Vec<u16>,
    index: Vec<u32>,
}

impl SubsetBasis {
    fn build(dim: usize, p: usize) -> Self {
        let mut masks = Vec::new();
        let mut stack = Vec::with_capacity(p);
        fn rec(start: usize, dim: usize, p: usize, stack: &mut Vec<usize>, out: &mut Vec<u16>) {
            if stack.len() == p {
                out.push(stack.iter().fold(0u16, |m, i| m | (1 << i)));
                return;
            }
            for i in start..dim {
                stack.push(i);
                rec(i + 1, dim, p, stack, out);
                stack.pop();
            }
        }
        rec(0, dim, p, &mut stack, &mut masks);
        let mut index = vec![u32::MAX; 1 << dim];
        for (k, m) in masks.iter().enumerate() {
            index[*m as usize] = k as u32;
        }
        Self {
            dim,
            p,
            masks,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    #[inline]
    pub fn index_of(&self, mask: u16) -> Option<usize> {
        match self.index.get(mask as usize) {
            Some(&k) if k != u32::MAX => Some(k as usize),
            _ => None,
        }
    }

    /// Subset members (zero-based) of basis element `k`.
    pub fn members(&self, k: usize) -> Vec<usize> {
        let m = self.masks[k];
        (0..self.dim).filter(|i| m & (1 << i) != 0).collect()
    }
}

pub fn subset_basis(dim: usize, p: usize) -> &'static SubsetBasis {
    static TABLES: OnceLock<Vec<Vec<SubsetBasis>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        (0..=MAX_DIM)
            .map(|d| (0..=d).map(|q| SubsetBasis::build(d, q)).collect())
            .collect()
    });
    &tables[dim][p]
}

/// Sign of the permutation sorting the concatenation of two disjoint sorted subsets.
#[inline]
fn merge_sign(a: u16, b: u16) -> f64 {
    let mut swaps = 0u32;
    let mut bb = b;
    while bb != 0 {
        let i = bb.trailing_zeros();
        // members of `a` above position `i`
        swaps += (a >> (i + 1)).count_ones();
        bb &= bb - 1;
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// A p-vector of `Λ_p(T_x H^n)`, expressed in the standard orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PVector {
    n: usize,
    p: usize,
    coeffs: Vec<f64>,
}

impl PVector {
    fn check(n: usize, p: usize) -> Result<usize> {
        if n == 0 || n > MAX_N {
            return Err(Error::InvalidGroupParameter(n));
        }
        let dim = 2 * n + 1;
        if p > dim {
            return Err(Error::InvalidDegree { p, dim });
        }
        Ok(dim)
    }

    pub fn zero(n: usize, p: usize) -> Result<Self> {
        let dim = Self::check(n, p)?;
        Ok(Self {
            n,
            p,
            coeffs: vec![0.0; subset_basis(dim, p).len()],
        })
    }

    pub fn from_coeffs(n: usize, p: usize, coeffs: Vec<f64>) -> Result<Self> {
        let dim = Self::check(n, p)?;
        let len = subset_basis(dim, p).len();
        if coeffs.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: coeffs.len(),
            });
        }
        Ok(Self { n, p, coeffs })
    }

    /// A 1-vector from its frame coefficients `(h_1, .., h_{2n}, h_Z)`.
    pub fn vector(components: &[f64]) -> Result<Self> {
        let n = components.len() / 2;
        if components.len() != 2 * n + 1 {
            return Err(Error::InvalidGroupParameter(n));
        }
        Self::from_coeffs(n, 1, components.to_vec())
    }

    /// Basis blade on the given one-based frame indices (in any order, sign applied).
    pub fn blade(n: usize, indices: &[usize]) -> Result<Self> {
        let dim = Self::check(n, indices.len())?;
        let mut out = Self::scalar(n, 1.0)?;
        for &i in indices {
            if i == 0 || i > dim {
                return Err(Error::InvalidDegree { p: i, dim });
            }
            let mut e = vec![0.0; dim];
            e[i - 1] = 1.0;
            out = wedge(&out, &Self::vector(&e)?)?;
        }
        Ok(out)
    }

    pub fn scalar(n: usize, c: f64) -> Result<Self> {
        Self::check(n, 0)?;
        Ok(Self {
            n,
            p: 0,
            coeffs: vec![c],
        })
    }

    /// Wedge of a list of 1-vectors given as frame coefficient arrays.
    pub fn wedge_all<V: AsRef<[f64]>>(n: usize, vectors: &[V]) -> Result<Self> {
        let mut out = Self::scalar(n, 1.0)?;
        for v in vectors {
            let v = v.as_ref();
            if v.len() != 2 * n + 1 {
                return Err(Error::DimensionMismatch {
                    expected: 2 * n + 1,
                    got: v.len(),
                });
            }
            out = wedge(&out, &Self::vector(v)?)?;
        }
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn basis(&self) -> &'static SubsetBasis {
        subset_basis(self.dim(), self.p)
    }

    /// Coefficient on the basis blade with the given one-based, increasing indices.
    pub fn coeff(&self, indices: &[usize]) -> f64 {
        let mask = indices.iter().fold(0u16, |m, i| m | (1 << (i - 1)));
        self.basis()
            .index_of(mask)
            .map_or(0.0, |k| self.coeffs[k])
    }

    fn z_bit(&self) -> u16 {
        1 << (2 * self.n)
    }

    pub fn is_vertical_basis(&self, k: usize) -> bool {
        self.basis().masks[k] & self.z_bit() != 0
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            ..self.clone()
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        if self.p != other.p {
            return Err(Error::DegreeMismatch(self.p, other.p));
        }
        Ok(())
    }

    /// Horizontal part `ξ_H = ξ − π_V(ξ)`.
    pub fn horizontal_part(&self) -> Self {
        let z = self.z_bit();
        let masks = &self.basis().masks;
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(masks)
                .map(|(c, m)| if m & z == 0 { *c } else { 0.0 })
                .collect(),
            ..self.clone()
        }
    }

    /// `|π_V(ξ)|` without allocating.
    pub fn vertical_norm(&self) -> f64 {
        let z = self.z_bit();
        self.coeffs
            .iter()
            .zip(&self.basis().masks)
            .filter(|(_, m)| *m & z != 0)
            .map(|(c, _)| c * c)
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

pub fn wedge(a: &PVector, b: &PVector) -> Result<PVector> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let dim = a.dim();
    let p = a.p + b.p;
    if p > dim {
        return Err(Error::DegreeOverflow {
            a: a.p,
            b: b.p,
            dim,
        });
    }
    let ba = a.basis();
    let bb = b.basis();
    let bo = subset_basis(dim, p);
    let mut coeffs = vec![0.0; bo.len()];
    for (ia, ca) in a.coeffs.iter().enumerate() {
        if *ca == 0.0 {
            continue;
        }
        let ma = ba.masks[ia];
        for (ib, cb) in b.coeffs.iter().enumerate() {
            if *cb == 0.0 {
                continue;
            }
            let mb = bb.masks[ib];
            if ma & mb != 0 {
                continue;
            }
            let k = bo.index_of(ma | mb).expect("subset of the right size");
            coeffs[k] += merge_sign(ma, mb) * ca * cb;
        }
    }
    Ok(PVector {
        n: a.n,
        p,
        coeffs,
    })
}

/// Inner product induced by the frame metric; the subset basis is orthonormal.
pub fn inner(a: &PVector, b: &PVector) -> Result<f64> {
    a.same_shape(b)?;
    Ok(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y).sum())
}

pub fn norm(a: &PVector) -> f64 {
    a.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Vertical projection `π_V`: keeps the coefficients on subsets containing `Z`.
pub fn vertical_project(a: &PVector) -> PVector {
    let z = a.z_bit();
    let masks = &a.basis().masks;
    PVector {
        coeffs: a
            .coeffs
            .iter()
            .zip(masks)
            .map(|(c, m)| if m & z != 0 { *c } else { 0.0 })
            .collect(),
        ..a.clone()
    }
}
