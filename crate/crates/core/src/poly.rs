//! Dense polynomials over ℚ(i), and float root finding.

use num_complex::Complex64;

use crate::complex_fn::{CRat, MeroFn};

/// Coefficients low → high; trailing zeros trimmed, so `[]` is the zero polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CPoly(Vec<CRat>);

impl CPoly {
    pub fn new(mut c: Vec<CRat>) -> Self {
        while c.last().is_some_and(CRat::is_zero) {
            c.pop();
        }
        CPoly(c)
    }

    pub fn zero() -> Self {
        CPoly(Vec::new())
    }

    pub fn one() -> Self {
        CPoly(vec![CRat::one()])
    }

    /// `z^shift · f` as a polynomial; `f` must be log-free and the shift must
    /// clear all negative exponents.
    pub fn from_laurent(f: &MeroFn, shift: i32) -> Self {
        debug_assert!(!f.has_log());
        let top = f.max_exponent().map_or(0, |k| k + shift);
        let mut c = vec![CRat::zero(); (top.max(0) + 1) as usize];
        for (k, v) in f.terms() {
            let e = k + shift;
            assert!(e >= 0, "shift does not clear the principal part");
            c[e as usize] = v.clone();
        }
        CPoly::new(c)
    }

    pub fn coeffs(&self) -> &[CRat] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&CRat> {
        self.0.last()
    }

    /// Multiplicity of the root at 0.
    pub fn zero_order(&self) -> usize {
        self.0.iter().take_while(|c| c.is_zero()).count()
    }

    pub fn derivative(&self) -> CPoly {
        CPoly::new(self.0.iter().enumerate().skip(1).map(|(k, c)| c.scale_int(k as i64)).collect())
    }

    pub fn add(&self, o: &CPoly) -> CPoly {
        let n = self.0.len().max(o.0.len());
        let z = CRat::zero();
        CPoly::new(
            (0..n).map(|k| self.0.get(k).unwrap_or(&z) + o.0.get(k).unwrap_or(&z)).collect(),
        )
    }

    pub fn sub(&self, o: &CPoly) -> CPoly {
        self.add(&o.scale(&CRat::from_int(-1)))
    }

    pub fn scale(&self, c: &CRat) -> CPoly {
        CPoly::new(self.0.iter().map(|v| v * c).collect())
    }

    pub fn mul(&self, o: &CPoly) -> CPoly {
        if self.is_zero() || o.is_zero() {
            return CPoly::zero();
        }
        let mut c = vec![CRat::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        CPoly::new(c)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &CPoly) -> (CPoly, CPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let inv = d.lead().unwrap().inv().unwrap();
        let mut r = self.0.clone();
        if r.len() <= dd {
            return (CPoly::zero(), self.clone());
        }
        let mut q = vec![CRat::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] * &inv;
            if !c.is_zero() {
                for (j, dc) in d.0.iter().enumerate() {
                    r[k + j] = &r[k + j] - &(&c * dc);
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (CPoly::new(q), CPoly::new(r))
    }

    pub fn monic(&self) -> CPoly {
        match self.lead() {
            Some(l) => self.scale(&l.inv().unwrap()),
            None => CPoly::zero(),
        }
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, o: &CPoly) -> CPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    pub fn to_float(&self) -> Vec<Complex64> {
        self.0.iter().map(CRat::to_c64).collect()
    }
}

pub fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// `p(z) / z^k` evaluated without overflow for large `|z|` (requires `deg p ≤ k`
/// when `|z| > 1`, otherwise still correct but not rescaled).
pub fn eval_scaled(c: &[Complex64], z: Complex64, k: usize) -> Complex64 {
    if z.norm() <= 1.0 || c.len() > k + 1 {
        return horner(c, z) / z.powi(k as i32);
    }
    // Σ c_j z^{j−k} = Σ c_j w^{k−j}, w = 1/z
    let w = z.inv();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..=k {
        acc = acc * w + c.get(j).copied().unwrap_or_default();
    }
    acc
}

/// All roots of a float polynomial (coefficients low → high) by Aberth–Ehrlich.
pub fn roots(c: &[Complex64]) -> Vec<Complex64> {
    let mut c = c.to_vec();
    while c.last().is_some_and(|v| v.norm() == 0.0) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let mono: Vec<Complex64> = c.iter().map(|v| v / lead).collect();
    let dc: Vec<Complex64> = mono.iter().enumerate().skip(1).map(|(k, v)| v * k as f64).collect();
    // Cauchy bound for the initial circle
    let bound = 1.0 + mono[..n].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let rad = bound.min(
        mono[..n]
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm() > 0.0)
            .map(|(k, v)| v.norm().powf(1.0 / (n - k) as f64))
            .fold(0.0, f64::max)
            .max(1e-3),
    );
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(rad, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let p = horner(&mono, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / horner(&dc, z[i]);
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}
