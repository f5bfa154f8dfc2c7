//! Exact meromorphic functions on the punctured plane.
//!
//! A [`MeroFn`] is a finite Laurent series `Σ c_k z^k` plus a `λ·log z` term,
//! with Gaussian-rational coefficients. Coefficients entered as floats are
//! converted exactly (every `f64` is a dyadic rational) and the function is
//! flagged `approx`, so arithmetic stays exact while callers know that exact
//! cancellation can no longer be expected.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Gaussian rational `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl CRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        CRat { re, im }
    }

    pub fn zero() -> Self {
        CRat::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        CRat::from_int(1)
    }

    pub fn i() -> Self {
        CRat::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        CRat::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    /// `num/den` as a real Gaussian rational.
    pub fn ratio(num: i64, den: i64) -> Self {
        CRat::new(BigRational::new(num.into(), den.into()), BigRational::zero())
    }

    pub fn from_parts(re: (i64, i64), im: (i64, i64)) -> Self {
        CRat::new(
            BigRational::new(re.0.into(), re.1.into()),
            BigRational::new(im.0.into(), im.1.into()),
        )
    }

    /// Exact conversion of a float pair (dyadic rationals).
    pub fn from_c64(z: Complex64) -> Self {
        CRat::new(rat_from_f64(z.re), rat_from_f64(z.im))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        CRat::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(CRat::new(&self.re / &n, -&self.im / &n))
    }

    pub fn scale_int(&self, k: i64) -> Self {
        let k = BigRational::from_integer(k.into());
        CRat::new(&self.re * &k, &self.im * &k)
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    pub fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }
}

impl Add for &CRat {
    type Output = CRat;
    fn add(self, o: &CRat) -> CRat {
        CRat::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &CRat {
    type Output = CRat;
    fn sub(self, o: &CRat) -> CRat {
        CRat::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &CRat {
    type Output = CRat;
    fn mul(self, o: &CRat) -> CRat {
        CRat::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for &CRat {
    type Output = CRat;
    fn neg(self) -> CRat {
        CRat::new(-self.re.clone(), -self.im.clone())
    }
}

impl Neg for CRat {
    type Output = CRat;
    fn neg(self) -> CRat {
        CRat::new(-self.re, -self.im)
    }
}

impl fmt::Display for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                if self.im.is_negative() {
                    write!(f, "({} - {}i)", self.re, -self.im.clone())
                } else {
                    write!(f, "({} + {}i)", self.re, self.im)
                }
            }
        }
    }
}

pub fn rat_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    if n.is_finite() && d.is_finite() && d != 0.0 {
        return n / d;
    }
    // huge numerator/denominator: shift both down before converting
    let shift = r.numer().bits().max(r.denom().bits()) as i64 - 1000;
    let shift = shift.max(0) as usize;
    let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
    n / d
}

/// Parses `"2/3"`, `"-5"`, or a decimal literal. Decimals are read exactly
/// (`"0.75"` is 3/4) unless `approx` is set, in which case they go through
/// `f64` first.
pub fn parse_rational(s: &str, approx: bool) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::BadCoefficient(s.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Ok(n) = t.parse::<BigInt>() {
        return Ok(BigRational::from_integer(n));
    }
    if approx || t.contains(['e', 'E']) {
        let x: f64 = t.parse().map_err(|_| bad())?;
        if !x.is_finite() {
            return Err(bad());
        }
        return Ok(rat_from_f64(x));
    }
    // exact decimal
    let (neg, body) = match t.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').ok_or_else(bad)?;
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let d = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(n, d);
    Ok(if neg { -r } else { r })
}

/// Parses a Gaussian rational: `"2/3"`, `"-i"`, `"1/2-3/4i"`, `"(1 + 2i)"`, `"5*i"`.
pub fn parse_complex(s: &str, approx: bool) -> Result<CRat> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let t = t.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(&t);
    let bad = || Error::BadCoefficient(s.to_string());
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(CRat::new(parse_rational(t, approx)?, BigRational::zero()));
    };
    let body = body.strip_suffix('*').unwrap_or(body);
    // split at the last sign that is not leading and not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E' | b'/'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let im = match im {
        "" | "+" => BigRational::one(),
        "-" => -BigRational::one(),
        x => parse_rational(x.strip_prefix('+').unwrap_or(x), approx)?,
    };
    let re = if re.is_empty() { BigRational::zero() } else { parse_rational(re, approx)? };
    Ok(CRat::new(re, im))
}

/// `Σ c_k z^k + λ log z` with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeroFn {
    terms: BTreeMap<i32, CRat>,
    log: CRat,
    approx: bool,
}

impl Default for MeroFn {
    fn default() -> Self {
        MeroFn::zero()
    }
}

impl MeroFn {
    pub fn zero() -> Self {
        MeroFn { terms: BTreeMap::new(), log: CRat::zero(), approx: false }
    }

    pub fn monomial(c: CRat, k: i32) -> Self {
        let mut f = MeroFn::zero();
        f.add_term(k, c);
        f
    }

    pub fn constant(c: CRat) -> Self {
        MeroFn::monomial(c, 0)
    }

    pub fn log_term(c: CRat) -> Self {
        MeroFn { terms: BTreeMap::new(), log: c, approx: false }
    }

    /// Builds from `(exponent, coefficient)` pairs; repeated exponents add up.
    pub fn from_terms<I: IntoIterator<Item = (i32, CRat)>>(terms: I) -> Self {
        let mut f = MeroFn::zero();
        for (k, c) in terms {
            f.add_term(k, c);
        }
        f
    }

    pub fn with_log(mut self, c: CRat) -> Self {
        self.log = c;
        self
    }

    pub fn with_approx(mut self, approx: bool) -> Self {
        self.approx = approx;
        self
    }

    fn add_term(&mut self, k: i32, c: CRat) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.get(&k) {
            Some(old) => old + &c,
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&k);
        } else {
            self.terms.insert(k, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &CRat)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn coeff(&self, k: i32) -> CRat {
        self.terms.get(&k).cloned().unwrap_or_else(CRat::zero)
    }

    pub fn log_coeff(&self) -> &CRat {
        &self.log
    }

    pub fn is_approx(&self) -> bool {
        self.approx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.log.is_zero()
    }

    pub fn has_log(&self) -> bool {
        !self.log.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        !self.has_log() && self.terms.keys().all(|&k| k == 0)
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    /// True when the function has a pole or a log singularity at 0.
    pub fn singular_at_zero(&self) -> bool {
        self.has_log() || self.min_exponent().is_some_and(|k| k < 0)
    }

    pub fn add(&self, g: &MeroFn) -> MeroFn {
        let mut out = self.clone();
        for (k, c) in g.terms() {
            out.add_term(k, c.clone());
        }
        out.log = &self.log + &g.log;
        out.approx = self.approx || g.approx;
        out
    }

    pub fn neg(&self) -> MeroFn {
        MeroFn {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
            log: -&self.log,
            approx: self.approx,
        }
    }

    pub fn sub(&self, g: &MeroFn) -> MeroFn {
        self.add(&g.neg())
    }

    pub fn scale(&self, c: &CRat) -> MeroFn {
        if c.is_zero() {
            return MeroFn::zero().with_approx(self.approx);
        }
        MeroFn {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
            log: &self.log * c,
            approx: self.approx,
        }
    }

    /// `z^k · f` for log-free `f`.
    pub fn shift(&self, k: i32) -> MeroFn {
        debug_assert!(!self.has_log());
        MeroFn {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
            log: CRat::zero(),
            approx: self.approx,
        }
    }

    /// Product. A log term may only be multiplied by a constant.
    pub fn mul(&self, g: &MeroFn) -> Result<MeroFn> {
        if self.has_log() && g.has_log() {
            return Err(Error::UnrepresentableProduct);
        }
        if (self.has_log() && !g.is_constant()) || (g.has_log() && !self.is_constant()) {
            return Err(Error::UnrepresentableProduct);
        }
        let mut out = MeroFn::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in g.terms() {
                out.add_term(a + b, ca * cb);
            }
        }
        if self.has_log() {
            out.log = &self.log * &g.coeff(0);
        } else if g.has_log() {
            out.log = &g.log * &self.coeff(0);
        }
        out.approx = self.approx || g.approx;
        Ok(out)
    }

    /// Term-wise `d/dz`; the log term contributes `λ z⁻¹`.
    pub fn derive(&self) -> MeroFn {
        let mut out = MeroFn::zero();
        for (k, c) in self.terms() {
            if k != 0 {
                out.add_term(k - 1, c.scale_int(k as i64));
            }
        }
        out.add_term(-1, self.log.clone());
        out.approx = self.approx;
        out
    }

    /// Coefficient-wise conjugate: represents `z ↦ conj(f(conj z))`.
    pub fn conjugate(&self) -> MeroFn {
        MeroFn {
            terms: self.terms.iter().map(|(k, c)| (*k, c.conj())).collect(),
            log: self.log.conj(),
            approx: self.approx,
        }
    }

    /// Numeric value, principal branch of log.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if z == Complex64::new(0.0, 0.0) && self.singular_at_zero() {
            return Err(Error::PoleAtZero);
        }
        Ok(self.to_float().eval(z))
    }

    pub fn to_float(&self) -> FloatMero {
        FloatMero {
            terms: self.terms.iter().map(|(k, c)| (*k, c.to_c64())).collect(),
            log: self.log.to_c64(),
        }
    }

    /// Largest coefficient modulus (log coefficient included).
    pub fn coeff_scale(&self) -> f64 {
        self.terms
            .values()
            .map(CRat::abs_f64)
            .chain(std::iter::once(self.log.abs_f64()))
            .fold(0.0, f64::max)
    }
}

fn fmt_coeff_term(f: &mut fmt::Formatter<'_>, c: &CRat, var: &str, first: bool) -> fmt::Result {
    let s = c.to_string();
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) if c.im.is_zero() => (true, b.to_string()),
        _ => (false, s),
    };
    if !first {
        write!(f, " {} ", if neg { "-" } else { "+" })?;
    } else if neg {
        write!(f, "-")?;
    }
    if var.is_empty() {
        write!(f, "{body}")
    } else if body == "1" {
        write!(f, "{var}")
    } else {
        write!(f, "{body}·{var}")
    }
}

impl fmt::Display for MeroFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.terms.iter().rev() {
            let var = match *k {
                0 => String::new(),
                1 => "z".to_string(),
                k => format!("z^{k}"),
            };
            fmt_coeff_term(f, c, &var, first)?;
            first = false;
        }
        if self.has_log() {
            fmt_coeff_term(f, &self.log, "log z", first)?;
        }
        Ok(())
    }
}

/// Float view of a [`MeroFn`] for numerics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FloatMero {
    pub terms: Vec<(i32, Complex64)>,
    pub log: Complex64,
}

impl FloatMero {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc: Complex64 = self.terms.iter().map(|&(k, c)| c * z.powi(k)).sum();
        if self.log != Complex64::new(0.0, 0.0) {
            acc += self.log * z.ln();
        }
        acc
    }

    /// `f'(z)`.
    pub fn eval_derivative(&self, z: Complex64) -> Complex64 {
        let mut acc: Complex64 = self
            .terms
            .iter()
            .filter(|&&(k, _)| k != 0)
            .map(|&(k, c)| c * (k as f64) * z.powi(k - 1))
            .sum();
        if self.log != Complex64::new(0.0, 0.0) {
            acc += self.log / z;
        }
        acc
    }

    pub fn scale(&self, c: Complex64) -> FloatMero {
        FloatMero { terms: self.terms.iter().map(|&(k, v)| (k, v * c)).collect(), log: self.log * c }
    }

    pub fn add(&self, g: &FloatMero) -> FloatMero {
        let mut map: BTreeMap<i32, Complex64> = BTreeMap::new();
        for &(k, c) in self.terms.iter().chain(g.terms.iter()) {
            *map.entry(k).or_default() += c;
        }
        FloatMero { terms: map.into_iter().collect(), log: self.log + g.log }
    }

    pub fn coeff(&self, k: i32) -> Complex64 {
        self.terms.iter().filter(|t| t.0 == k).map(|t| t.1).sum()
    }

    /// Drops the `z^k` term.
    pub fn without(&self, k: i32) -> FloatMero {
        FloatMero { terms: self.terms.iter().filter(|t| t.0 != k).copied().collect(), log: self.log }
    }

    pub fn coeff_scale(&self) -> f64 {
        self.terms.iter().map(|t| t.1.norm()).chain(std::iter::once(self.log.norm())).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(k: i32) -> MeroFn {
        MeroFn::monomial(CRat::one(), k)
    }

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn complex_parsing() {
        let p = |s: &str| parse_complex(s, false).unwrap();
        assert_eq!(p("2/3"), CRat::ratio(2, 3));
        assert_eq!(p("i"), CRat::i());
        assert_eq!(p("-i"), CRat::from_parts((0, 1), (-1, 1)));
        assert_eq!(p("1/2-3/4i"), CRat::from_parts((1, 2), (-3, 4)));
        assert_eq!(p("(1 + 2i)"), CRat::from_parts((1, 1), (2, 1)));
        assert_eq!(p("5*i"), CRat::from_parts((0, 1), (5, 1)));
        assert_eq!(p("-0.75"), CRat::ratio(-3, 4));
        let c = CRat::from_parts((-7, 3), (5, 2));
        assert_eq!(p(&c.to_string()), c);
        assert!(parse_complex("1+", false).is_err());
        assert!(parse_complex("x", false).is_err());
        assert!(parse_complex("", false).is_err());
        let f = parse_complex("1.5e-3-2i", true).unwrap();
        assert!((f.to_c64() - Complex64::new(1.5e-3, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn additive_inverse_is_empty() {
        let f = z(2);
        let s = f.add(&f.neg());
        assert!(s.is_zero());
        assert_eq!(s.terms().count(), 0);
    }

    #[test]
    fn distributive_product() {
        let f = z(1).add(&z(-1));
        let p = f.mul(&z(1)).unwrap();
        assert_eq!(p, z(2).add(&z(0)));
    }

    #[test]
    fn hand_expansion_product() {
        // 3z² · 2N z^(N−1) with N = 2
        let f = MeroFn::monomial(CRat::from_int(3), 2);
        let g = MeroFn::monomial(CRat::from_int(4), 1);
        assert_eq!(f.mul(&g).unwrap(), MeroFn::monomial(CRat::from_int(12), 3));
    }

    #[test]
    fn two_logs_do_not_multiply() {
        let l = MeroFn::log_term(CRat::one());
        assert_eq!(l.mul(&l), Err(Error::UnrepresentableProduct));
        assert_eq!(l.mul(&z(1)), Err(Error::UnrepresentableProduct));
        let doubled = l.mul(&MeroFn::constant(CRat::from_int(2))).unwrap();
        assert_eq!(doubled.log_coeff(), &CRat::from_int(2));
    }

    #[test]
    fn derivatives() {
        let cube_third = MeroFn::monomial(CRat::ratio(1, 3), 3);
        assert_eq!(cube_third.derive(), z(2));
        let alpha = CRat::from_parts((2, 1), (1, 3));
        let beta = CRat::ratio(-5, 7);
        let f = MeroFn::monomial(beta.clone(), 1).with_log(alpha.clone());
        let d = f.derive();
        assert!(!d.has_log());
        assert_eq!(d, MeroFn::from_terms([(-1, alpha), (0, beta)]));
        assert_eq!(z(-1).derive(), MeroFn::monomial(CRat::from_int(-1), -2));
    }

    #[test]
    fn evaluation() {
        assert_eq!(z(2).eval(c(2.0, 0.0)).unwrap(), c(4.0, 0.0));
        let v = z(1).add(&z(-1)).eval(c(0.0, 1.0)).unwrap();
        assert!(v.norm() < 1e-15);
        let l = MeroFn::log_term(CRat::one()).eval(c(std::f64::consts::E, 0.0)).unwrap();
        assert!((l - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(z(-1).eval(c(0.0, 0.0)), Err(Error::PoleAtZero));
        assert_eq!(MeroFn::log_term(CRat::one()).eval(c(0.0, 0.0)), Err(Error::PoleAtZero));
        assert!(z(3).eval(c(0.0, 0.0)).is_ok());
    }

    #[test]
    fn conjugation() {
        let iz = MeroFn::monomial(CRat::i(), 1);
        assert_eq!(iz.conjugate(), MeroFn::monomial(-&CRat::i(), 1));
        let f = MeroFn::monomial(CRat::from_parts((2, 1), (1, 1)), 3).with_log(CRat::one());
        assert_eq!(f.conjugate().conjugate(), f);
        // −β̄² z̄ = conj(−β² z); with β = i the generator −β² z is z
        let beta = CRat::i();
        let gen = MeroFn::monomial(-&(&beta * &beta), 1);
        assert_eq!(gen, z(1));
        let conj_beta = beta.conj();
        assert_eq!(gen.conjugate(), MeroFn::monomial(-&(&conj_beta * &conj_beta), 1));
    }

    #[test]
    fn rational_literals() {
        assert_eq!(parse_rational("2/3", false).unwrap(), BigRational::new(2.into(), 3.into()));
        assert_eq!(parse_rational("-0.75", false).unwrap(), BigRational::new((-3).into(), 4.into()));
        assert_eq!(parse_rational("7", false).unwrap(), BigRational::from_integer(7.into()));
        let approx = parse_rational("0.1", true).unwrap();
        assert_eq!(approx, rat_from_f64(0.1));
        assert_ne!(approx, BigRational::new(1.into(), 10.into()));
        assert!(parse_rational("x", false).is_err());
        assert!(parse_rational("1/0", false).is_err());
    }

    #[test]
    fn display() {
        let f = MeroFn::from_terms([(3, CRat::ratio(1, 3)), (1, CRat::from_int(-1))]);
        assert_eq!(f.to_string(), "1/3·z^3 - z");
        assert_eq!(MeroFn::monomial(CRat::from_int(6), 2).to_string(), "6·z^2");
        assert_eq!(MeroFn::zero().to_string(), "0");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn crat() -> impl Strategy<Value = CRat> {
            (-20i64..20, 1i64..6, -20i64..20, 1i64..6).prop_map(|(a, b, c, d)| CRat::from_parts((a, b), (c, d)))
        }

        fn laurent() -> impl Strategy<Value = MeroFn> {
            proptest::collection::vec((-4i32..5, crat()), 0..5).prop_map(MeroFn::from_terms)
        }

        fn mero() -> impl Strategy<Value = MeroFn> {
            (laurent(), crat()).prop_map(|(f, l)| f.with_log(l))
        }

        proptest! {
            #[test]
            fn derivative_is_linear(f in mero(), g in mero(), a in crat(), b in crat()) {
                let lhs = f.scale(&a).add(&g.scale(&b)).derive();
                let rhs = f.derive().scale(&a).add(&g.derive().scale(&b));
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn product_rule(f in laurent(), g in laurent()) {
                let lhs = f.mul(&g).unwrap().derive();
                let rhs = f.derive().mul(&g).unwrap().add(&f.mul(&g.derive()).unwrap());
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn conjugate_commutes_with_eval(f in mero(), r in 0.2f64..3.0, th in -3.0f64..3.0) {
                let z = Complex64::from_polar(r, th);
                let lhs = f.conjugate().eval(z.conj()).unwrap();
                let rhs = f.eval(z).unwrap().conj();
                prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
            }
        }
    }
}
