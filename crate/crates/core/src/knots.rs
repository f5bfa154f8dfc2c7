//! Braid words, reduced Burau matrices, Alexander polynomials and the
//! Fox–Milnor slice obstruction.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BraidWord {
    pub strands: usize,
    /// `(generator index 1..n−1, ±1)`.
    pub letters: Vec<(usize, i8)>,
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<(usize, i8)>) -> Result<Self> {
        for &(i, s) in &letters {
            if i == 0 || i >= strands.max(1) || (s != 1 && s != -1) {
                return Err(Error::BadBraidToken(format!("s{i}^{s} on {strands} strands")));
            }
        }
        Ok(BraidWord { strands, letters })
    }

    pub fn empty(strands: usize) -> Self {
        BraidWord { strands, letters: vec![] }
    }

    /// Parses whitespace-separated `s<k>` / `s<k>^-1` tokens. The strand
    /// count defaults to one more than the largest index.
    pub fn parse(text: &str, strands: Option<usize>) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            let bad = || Error::BadBraidToken(tok.to_string());
            let body = tok.strip_prefix('s').or_else(|| tok.strip_prefix('σ')).ok_or_else(bad)?;
            let (idx, sign) = match body.split_once('^') {
                Some((i, "-1")) => (i, -1),
                Some((i, "1")) => (i, 1),
                Some(_) => return Err(bad()),
                None => (body, 1),
            };
            let idx: usize = idx.parse().map_err(|_| bad())?;
            if idx == 0 {
                return Err(bad());
            }
            letters.push((idx, sign));
        }
        let need = letters.iter().map(|l| l.0 + 1).max().unwrap_or(1);
        let n = strands.unwrap_or(need);
        if n < need {
            return Err(Error::BadBraidToken(format!("index {} needs {need} strands", need - 1)));
        }
        BraidWord::new(n, letters)
    }

    pub fn exponent_sum(&self) -> i64 {
        self.letters.iter().map(|l| l.1 as i64).sum()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Position permutation: strand at position `k` ends at `perm[k]`.
    pub fn permutation(&self) -> Vec<usize> {
        let mut at: Vec<usize> = (0..self.strands).collect(); // at[pos] = strand
        for &(i, _) in &self.letters {
            at.swap(i - 1, i);
        }
        let mut perm = vec![0; self.strands];
        for (pos, &strand) in at.iter().enumerate() {
            perm[strand] = pos;
        }
        perm
    }

    /// Number of components of the closure.
    pub fn components(&self) -> usize {
        let perm = self.permutation();
        let mut seen = vec![false; self.strands];
        let mut c = 0;
        for s in 0..self.strands {
            if !seen[s] {
                c += 1;
                let mut k = s;
                while !seen[k] {
                    seen[k] = true;
                    k = perm[k];
                }
            }
        }
        c
    }

    pub fn concat(&self, o: &BraidWord) -> BraidWord {
        let mut l = self.letters.clone();
        l.extend_from_slice(&o.letters);
        BraidWord { strands: self.strands.max(o.strands), letters: l }
    }

    pub fn inverse(&self) -> BraidWord {
        BraidWord { strands: self.strands, letters: self.letters.iter().rev().map(|&(i, s)| (i, -s)).collect() }
    }

    /// Markov stabilization `b σ_n` on `n + 1` strands.
    pub fn stabilized(&self, sign: i8) -> BraidWord {
        let mut l = self.letters.clone();
        l.push((self.strands, sign));
        BraidWord { strands: self.strands + 1, letters: l }
    }

    /// Cancels adjacent `σ_i σ_i⁻¹` pairs.
    pub fn free_reduce(&self) -> BraidWord {
        let mut out: Vec<(usize, i8)> = Vec::new();
        for &l in &self.letters {
            if out.last().is_some_and(|&(i, s)| i == l.0 && s == -l.1) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        BraidWord { strands: self.strands, letters: out }
    }

    /// Lexicographically least cyclic rotation (a canonical representative
    /// of the word up to cyclic moves).
    pub fn canonical_rotation(&self) -> BraidWord {
        let n = self.letters.len();
        let key = |l: &(usize, i8)| (l.0, -l.1);
        let best = (0..n.max(1))
            .min_by(|&a, &b| {
                (0..n).map(|k| key(&self.letters[(a + k) % n])).cmp((0..n).map(|k| key(&self.letters[(b + k) % n])))
            })
            .unwrap_or(0);
        let letters = (0..n).map(|k| self.letters[(best + k) % n]).collect();
        BraidWord { strands: self.strands, letters }
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let toks: Vec<String> =
            self.letters.iter().map(|&(i, s)| if s > 0 { format!("s{i}") } else { format!("s{i}^-1") }).collect();
        write!(f, "{}", toks.join(" "))
    }
}

/// Integer Laurent polynomial `Σ c_k t^k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct LaurentIntPoly {
    coeffs: BTreeMap<i32, BigInt>,
}

impl LaurentIntPoly {
    pub fn zero() -> Self {
        LaurentIntPoly::default()
    }

    pub fn one() -> Self {
        LaurentIntPoly::monomial(1, 0)
    }

    pub fn monomial(c: i64, k: i32) -> Self {
        LaurentIntPoly::from_terms([(k, c)])
    }

    pub fn from_terms<I: IntoIterator<Item = (i32, i64)>>(terms: I) -> Self {
        let mut p = LaurentIntPoly::zero();
        for (k, c) in terms {
            p.add_term(k, BigInt::from(c));
        }
        p
    }

    /// Polynomial with coefficients `c[0] + c[1] t + …`.
    pub fn from_coeffs(lo: i32, c: &[i64]) -> Self {
        LaurentIntPoly::from_terms(c.iter().enumerate().map(|(k, &v)| (lo + k as i32, v)))
    }

    fn add_term(&mut self, k: i32, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(k).or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: i32) -> BigInt {
        self.coeffs.get(&k).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &BigInt)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn min_exp(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn span(&self) -> i32 {
        match (self.min_exp(), self.max_exp()) {
            (Some(a), Some(b)) => b - a,
            _ => 0,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (k, c) in o.terms() {
            r.add_term(k, c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        LaurentIntPoly { coeffs: self.coeffs.iter().map(|(k, c)| (*k, -c)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = LaurentIntPoly::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in o.terms() {
                r.add_term(a + b, ca * cb);
            }
        }
        r
    }

    pub fn shift(&self, k: i32) -> Self {
        LaurentIntPoly { coeffs: self.coeffs.iter().map(|(e, c)| (e + k, c.clone())).collect() }
    }

    /// `p(1/t)`.
    pub fn mirror(&self) -> Self {
        LaurentIntPoly { coeffs: self.coeffs.iter().map(|(e, c)| (-e, c.clone())).collect() }
    }

    pub fn eval_one(&self) -> BigInt {
        self.coeffs.values().sum()
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(LaurentIntPoly::zero());
        }
        let (dl, dh) = (d.min_exp()?, d.max_exp()?);
        let lead = d.coeff(dh);
        let mut r = self.clone();
        let mut q = LaurentIntPoly::zero();
        while let Some(rh) = r.max_exp() {
            let rl = r.min_exp()?;
            if rh - rl < dh - dl {
                return None;
            }
            let c = r.coeff(rh);
            let (qc, rem) = c.div_rem(&lead);
            if !rem.is_zero() {
                return None;
            }
            let term = LaurentIntPoly { coeffs: BTreeMap::from([(rh - dh, qc)]) };
            r = r.sub(&term.mul(d));
            q = q.add(&term);
        }
        Some(q)
    }

    pub fn is_symmetric(&self) -> bool {
        self.coeffs.iter().all(|(k, c)| &self.coeff(-k) == c)
    }

    /// Symmetric representative (up to `±t^k`) with positive value at 1.
    pub fn symmetric_normalize(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::NormalizationFailed("zero polynomial".into()));
        }
        let span = self.span();
        if span % 2 != 0 {
            return Err(Error::NormalizationFailed(format!("odd span {span}")));
        }
        let mut p = self.shift(-self.min_exp().unwrap() - span / 2);
        if p.eval_one().is_negative() {
            p = p.neg();
        }
        if !p.is_symmetric() {
            return Err(Error::NormalizationFailed(format!("{p} is not symmetric")));
        }
        Ok(p)
    }
}

impl fmt::Display for LaurentIntPoly {
    /// Lowest exponent first, every exponent written out.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (k, c)) in self.coeffs.iter().enumerate() {
            let (sign, mag) = if c.is_negative() { ("-", -c.clone()) } else { ("+", c.clone()) };
            if n == 0 {
                write!(f, "{}{}*t^{}", if sign == "-" { "-" } else { "" }, mag, k)?;
            } else {
                write!(f, " {sign} {mag}*t^{k}")?;
            }
        }
        Ok(())
    }
}

impl LaurentIntPoly {
    /// Conventional form, highest power first: `t^2 - 2t + 3 - 2t^-1 + t^-2`.
    pub fn pretty(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (n, (k, c)) in self.coeffs.iter().rev().enumerate() {
            let mag = c.magnitude().to_string();
            let mono = match k {
                0 => String::new(),
                1 => "t".into(),
                _ => format!("t^{k}"),
            };
            let coef = if mag == "1" && *k != 0 { String::new() } else { mag };
            match (n, c.is_negative()) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            out.push_str(&coef);
            out.push_str(&mono);
        }
        out
    }
}

pub type LMatrix = Vec<Vec<LaurentIntPoly>>;

fn identity(n: usize) -> LMatrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { LaurentIntPoly::one() } else { LaurentIntPoly::zero() }).collect()).collect()
}

fn mat_mul(a: &LMatrix, b: &LMatrix) -> LMatrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(LaurentIntPoly::zero(), |acc, k| acc.add(&a[i][k].mul(&b[k][j]))))
                .collect()
        })
        .collect()
}

/// Reduced Burau matrix of one generator on `n` strands.
pub fn burau_generator(n: usize, i: usize, sign: i8) -> LMatrix {
    let mut m = identity(n - 1);
    let c = i - 1;
    let (up, diag, down) = if sign > 0 {
        (LaurentIntPoly::monomial(1, 1), LaurentIntPoly::monomial(-1, 1), LaurentIntPoly::one())
    } else {
        (LaurentIntPoly::one(), LaurentIntPoly::monomial(-1, -1), LaurentIntPoly::monomial(1, -1))
    };
    if i >= 2 {
        m[c - 1][c] = up;
    }
    m[c][c] = diag;
    if i + 1 < n {
        m[c + 1][c] = down;
    }
    m
}

/// `(n−1)×(n−1)` reduced Burau matrix.
pub fn burau_reduced(b: &BraidWord) -> LMatrix {
    let n = b.strands.max(1);
    let mut m = identity(n - 1);
    for &(i, s) in &b.letters {
        // right-multiplying column operations is cheap enough at these sizes
        m = mat_mul(&m, &burau_generator(n, i, s));
    }
    m
}

/// Fraction-free (Bareiss) determinant over ℤ[t, t⁻¹].
pub fn determinant(m: &LMatrix) -> LaurentIntPoly {
    let n = m.len();
    if n == 0 {
        return LaurentIntPoly::one();
    }
    let mut a = m.clone();
    let mut sign = false;
    let mut prev = LaurentIntPoly::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = !sign;
                }
                None => return LaurentIntPoly::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j].mul(&a[k][k]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = num.div_exact(&prev).expect("Bareiss division is exact");
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign {
        d.neg()
    } else {
        d
    }
}

/// Alexander polynomial of the closure, `det(ρ̄(b) − I)(1−t)/(1−tⁿ)`,
/// normalized symmetric with `Δ(1) = 1`.
pub fn alexander_poly(b: &BraidWord) -> Result<LaurentIntPoly> {
    let comps = b.components();
    if comps != 1 {
        return Err(Error::ClosureNotAKnot(comps));
    }
    let n = b.strands.max(1);
    let mut m = burau_reduced(b);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = row[i].sub(&LaurentIntPoly::one());
    }
    let det = determinant(&m);
    let num = det.mul(&LaurentIntPoly::from_terms([(0, 1), (1, -1)]));
    let den = LaurentIntPoly::from_terms([(0, 1), (n as i32, -1)]);
    let q = num.div_exact(&den).ok_or_else(|| Error::NormalizationFailed(format!("(1-t^{n}) does not divide")))?;
    let d = q.symmetric_normalize()?;
    if !d.eval_one().is_one() {
        return Err(Error::NormalizationFailed(format!("Δ(1) = {} for {d}", d.eval_one())));
    }
    Ok(d)
}

/// `(t^{Nq}−1)(t−1)/((t^N−1)(t^q−1))`, normalized.
pub fn torus_alexander(n: u32, q: u32) -> Result<LaurentIntPoly> {
    let tm1 = |k: u32| LaurentIntPoly::from_terms([(k as i32, 1), (0, -1)]);
    let num = tm1(n * q).mul(&tm1(1));
    let den = tm1(n).mul(&tm1(q));
    num.div_exact(&den).ok_or_else(|| Error::NormalizationFailed("torus formula".into()))?.symmetric_normalize()
}

/// `(σ₁⋯σ_{N−1})^q`.
pub fn torus_braid(n: usize, q: usize) -> BraidWord {
    let letters = (0..q).flat_map(|_| (1..n).map(|i| (i, 1i8))).collect();
    BraidWord { strands: n, letters }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FoxMilnor {
    PassesPossiblySlice { witness: LaurentIntPoly },
    Obstructed { reason: String },
}

impl FoxMilnor {
    pub fn passes(&self) -> bool {
        matches!(self, FoxMilnor::PassesPossiblySlice { .. })
    }
}

/// Searches for an integer `p` of degree `span/2` with `p(t)p(1/t) = Δ`.
/// From the constant term, `Σ p_i² = Δ₀` bounds every coefficient.
pub fn fox_milnor_test(delta: &LaurentIntPoly) -> FoxMilnor {
    let span = delta.span();
    if span % 2 != 0 {
        return FoxMilnor::Obstructed { reason: format!("odd degree span {span}") };
    }
    let delta = match delta.symmetric_normalize() {
        Ok(d) => d,
        Err(e) => return FoxMilnor::Obstructed { reason: e.to_string() },
    };
    let m = (span / 2) as usize;
    let c0 = delta.coeff(0).to_i64().unwrap_or(i64::MAX);
    if c0 <= 0 {
        return FoxMilnor::Obstructed { reason: format!("constant coefficient {c0} cannot be a sum of squares") };
    }
    let bound = (c0 as f64).sqrt().floor() as i64;
    let target: Vec<i64> = (0..=m as i32).map(|k| delta.coeff(k).to_i64().unwrap_or(i64::MAX)).collect();
    let mut p = vec![0i64; m + 1];
    // p(1) = 1 fixes the overall sign
    fn search(p: &mut Vec<i64>, k: usize, left: i64, bound: i64, target: &[i64]) -> bool {
        let m = p.len() - 1;
        if k > m {
            return p.iter().sum::<i64>() == 1
                && (0..=m).all(|s| (0..=m - s).map(|i| p[i] * p[i + s]).sum::<i64>() == target[s]);
        }
        for v in -bound..=bound {
            if v * v > left || ((k == 0 || k == m) && v == 0 && m > 0) {
                continue;
            }
            p[k] = v;
            if k == m && p[0] * p[m] != target[m] && m > 0 {
                continue;
            }
            if search(p, k + 1, left - v * v, bound, target) {
                return true;
            }
        }
        false
    }
    if search(&mut p, 0, c0, bound, &target) {
        FoxMilnor::PassesPossiblySlice { witness: LaurentIntPoly::from_coeffs(0, &p) }
    } else {
        FoxMilnor::Obstructed {
            reason: format!("no integer p of degree {m} with |p_i| <= {bound} satisfies p(t)p(1/t) = Δ"),
        }
    }
}

/// Fox–Milnor on `Δ₁Δ₂` (the Alexander polynomial of `K₁ # −K₂`; the mirror
/// has the same polynomial).
pub fn concordance_obstruction(d1: &LaurentIntPoly, d2: &LaurentIntPoly) -> FoxMilnor {
    fox_milnor_test(&d1.mul(d2))
}
