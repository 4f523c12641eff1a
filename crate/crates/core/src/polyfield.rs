//! Polynomial vector fields on `R^{2n+1}` and their Lie brackets.

use std::collections::BTreeMap;
use std::fmt;

/// Sparse polynomial: exponent vector → coefficient. Zero terms are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    vars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(vars: usize) -> Self {
        Self {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: f64) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars], c);
        p
    }

    /// `c · x_i` (zero-based variable index).
    pub fn monomial(vars: usize, i: usize, c: f64) -> Self {
        let mut e = vec![0; vars];
        e[i] = 1;
        let mut p = Self::zero(vars);
        p.add_term(e, c);
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(exps).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.retain(|_, v| *v != 0.0);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    /// Partial derivative in variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                out.add_term(e2, c * e[i] as f64);
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(x)
                    .map(|(k, xi)| xi.powi(*k as i32))
                    .product::<f64>()
            })
            .sum()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (j, k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{}", j + 1)?,
                    _ => write!(f, "*x{}^{k}", j + 1)?,
                }
            }
        }
        Ok(())
    }
}

/// A vector field `Σ_j c_j(x) ∂_j` with polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyVectorField {
    coeffs: Vec<Polynomial>,
}

impl PolyVectorField {
    pub fn new(coeffs: Vec<Polynomial>) -> Self {
        Self { coeffs }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            coeffs: vec![Polynomial::zero(dim); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Polynomial] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Polynomial::is_zero)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.scale(s)).collect())
    }

    /// Applies the field as a derivation to a polynomial: `V p = Σ_i V_i ∂_i p`.
    pub fn apply(&self, p: &Polynomial) -> Polynomial {
        self.coeffs
            .iter()
            .enumerate()
            .fold(Polynomial::zero(p.vars()), |acc, (i, ci)| {
                acc.add(&ci.mul(&p.derivative(i)))
            })
    }

    /// The standard frame `(X̃_1, .., X̃_{2n}, Z̃)` of `H^n` as polynomial fields.
    pub fn standard_frame(n: usize) -> Vec<Self> {
        let dim = 2 * n + 1;
        let t = 2 * n;
        let mut frame = Vec::with_capacity(dim);
        for k in 0..2 * n {
            let mut c = vec![Polynomial::zero(dim); dim];
            c[k] = Polynomial::constant(dim, 1.0);
            c[t] = if k < n {
                Polynomial::monomial(dim, k + n, -1.0)
            } else {
                Polynomial::monomial(dim, k - n, 1.0)
            };
            frame.push(Self::new(c));
        }
        let mut z = vec![Polynomial::zero(dim); dim];
        z[t] = Polynomial::constant(dim, 1.0);
        frame.push(Self::new(z));
        frame
    }
}

/// `[V, W]_j = V(W_j) − W(V_j)`, computed symbolically.
pub fn lie_bracket(v: &PolyVectorField, w: &PolyVectorField) -> PolyVectorField {
    let coeffs = v
        .coeffs
        .iter()
        .zip(&w.coeffs)
        .map(|(vj, wj)| v.apply(wj).sub(&w.apply(vj)))
        .collect();
    PolyVectorField::new(coeffs)
}

/// Checks the Heisenberg bracket table for `n`: `[X_k, X_{k+n}] = 2Z`, every other
/// pair of frame fields commutes. Returns the list of offending pairs.
pub fn bracket_table_violations(n: usize) -> Vec<(usize, usize)> {
    let frame = PolyVectorField::standard_frame(n);
    let z2 = frame[2 * n].scale(2.0);
    let mut bad = Vec::new();
    for i in 0..frame.len() {
        for j in 0..frame.len() {
            let b = lie_bracket(&frame[i], &frame[j]);
            let expected = if i < n && j == i + n {
                z2.clone()
            } else if j < n && i == j + n {
                z2.scale(-1.0)
            } else {
                PolyVectorField::zero(2 * n + 1)
            };
            if b != expected {
                bad.push((i, j));
            }
        }
    }
    bad
}
