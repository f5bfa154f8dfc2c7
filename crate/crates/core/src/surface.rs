//! A minimal surface `F(z) = (f₁ + f̄₂, f₃ + f̄₄)` on ℂ or ℂ∖{0}, its Gauss
//! maps, and the asymptotic profile of each end.

use num_complex::Complex64;

use crate::complex_fn::{CRat, FloatMero, MeroFn};
use crate::error::{Error, Result};
use crate::grassmann::{self, ExtComplex, OrientedPlane, Vec4};
use crate::poly::{self, CPoly};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug)]
pub struct SurfaceSpec {
    pub label: String,
    f: [MeroFn; 4],
    df: [MeroFn; 4],
    fl: [FloatMero; 4],
    dfl: [FloatMero; 4],
    punctured: bool,
}

impl SurfaceSpec {
    /// Validates single-valuedness and the puncture list. Only `0` can be a
    /// finite puncture since the functions are Laurent series about 0.
    pub fn new(label: impl Into<String>, f: [MeroFn; 4], punctures: &[Complex64]) -> Result<Self> {
        for (coord, (a, b)) in [(&f[0], &f[1]), (&f[2], &f[3])].into_iter().enumerate() {
            // λ log z + conj(μ log z) is single-valued iff μ = λ̄
            if a.log_coeff() != &b.log_coeff().conj() {
                if !(a.is_approx() || b.is_approx())
                    || (a.log_coeff().to_c64() - b.log_coeff().to_c64().conj()).norm() > 1e-12
                {
                    return Err(Error::MultiValued(coord + 1));
                }
            }
        }
        let df = [0, 1, 2, 3].map(|k| f[k].derive());
        let punctured = f.iter().any(MeroFn::singular_at_zero);
        let declared_zero = punctures.iter().any(|p| p.norm() == 0.0);
        if let Some(p) = punctures.iter().find(|p| p.norm() != 0.0) {
            return Err(Error::PunctureMismatch(format!("{p} is not a pole or log center of any f_i")));
        }
        if declared_zero != punctured {
            return Err(Error::PunctureMismatch(if punctured {
                "0 is a pole or log center but is not listed".into()
            } else {
                "0 is listed but no f_i is singular there".into()
            }));
        }
        let fl = [0, 1, 2, 3].map(|k| f[k].to_float());
        let dfl = [0, 1, 2, 3].map(|k| df[k].to_float());
        Ok(SurfaceSpec { label: label.into(), f, df, fl, dfl, punctured })
    }

    /// Builds with the puncture list derived from the functions.
    pub fn from_functions(label: impl Into<String>, f: [MeroFn; 4]) -> Result<Self> {
        let p: Vec<Complex64> =
            if f.iter().any(MeroFn::singular_at_zero) { vec![Complex64::new(0.0, 0.0)] } else { vec![] };
        SurfaceSpec::new(label, f, &p)
    }

    pub fn functions(&self) -> &[MeroFn; 4] {
        &self.f
    }

    pub fn derivatives(&self) -> &[MeroFn; 4] {
        &self.df
    }

    pub fn is_punctured(&self) -> bool {
        self.punctured
    }

    pub fn punctures(&self) -> Vec<Complex64> {
        if self.punctured {
            vec![Complex64::new(0.0, 0.0)]
        } else {
            vec![]
        }
    }

    pub fn is_approx(&self) -> bool {
        self.f.iter().any(MeroFn::is_approx)
    }

    pub fn coeff_scale(&self) -> f64 {
        self.f.iter().map(MeroFn::coeff_scale).fold(0.0, f64::max)
    }

    /// `F(z)` in real coordinates.
    pub fn eval(&self, z: Complex64) -> Vec4 {
        let w1 = self.fl[0].eval(z) + self.fl[1].eval(z).conj();
        let w2 = self.fl[2].eval(z) + self.fl[3].eval(z).conj();
        [w1.re, w1.im, w2.re, w2.im]
    }

    /// `f_i'(z)` for `i = 1..4`.
    pub fn eval_derivatives(&self, z: Complex64) -> [Complex64; 4] {
        [0, 1, 2, 3].map(|k| self.dfl[k].eval(z))
    }

    /// `(∂F/∂x, ∂F/∂y)`.
    pub fn jacobian(&self, z: Complex64) -> (Vec4, Vec4) {
        let d = self.eval_derivatives(z);
        let (a1, a2) = (d[0] + d[1].conj(), I * (d[0] - d[1].conj()));
        let (b1, b2) = (d[2] + d[3].conj(), I * (d[2] - d[3].conj()));
        ([a1.re, a1.im, b1.re, b1.im], [a2.re, a2.im, b2.re, b2.im])
    }

    /// Conformal factor `λ² = Σ|f_i'|²` of the induced metric `λ²|dz|²`.
    pub fn conformal_factor(&self, z: Complex64) -> f64 {
        self.eval_derivatives(z).iter().map(|v| v.norm_sqr()).sum()
    }

    /// `φ ∝ (f₁'+f₂', −i(f₁'−f₂'), f₃'+f₄', −i(f₃'−f₄'))`.
    pub fn gauss_quadric(&self, z: Complex64) -> [Complex64; 4] {
        let d = self.eval_derivatives(z);
        [d[0] + d[1], -I * (d[0] - d[1]), d[2] + d[3], -I * (d[2] - d[3])]
    }
}

/// `f₁'f₂' + f₃'f₄'` exactly.
pub fn conformality_residual(s: &SurfaceSpec) -> Result<MeroFn> {
    let d = s.derivatives();
    Ok(d[0].mul(&d[1])?.add(&d[2].mul(&d[3])?))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Conformality {
    Exact,
    /// Float-flagged input: maximal relative residual on a sample grid.
    Numeric(f64),
    Fails(MeroFn),
}

impl Conformality {
    pub fn holds(&self) -> bool {
        !matches!(self, Conformality::Fails(_))
    }
}

pub fn check_conformal(s: &SurfaceSpec) -> Result<Conformality> {
    let r = conformality_residual(s)?;
    if r.is_zero() {
        return Ok(Conformality::Exact);
    }
    if !s.is_approx() {
        return Ok(Conformality::Fails(r));
    }
    let d = s.derivatives();
    let scale = d.iter().map(MeroFn::coeff_scale).fold(0.0, f64::max).powi(2).max(f64::MIN_POSITIVE);
    let rf = r.to_float();
    let mut worst = 0.0f64;
    for i in 0..16 {
        for j in 0..8 {
            let z = Complex64::from_polar(0.25 * 1.5f64.powi(i), 0.3 + j as f64 * 0.785);
            // relative to the size of the individual products
            let mag = d.iter().map(|f| f.to_float().eval(z).norm()).fold(0.0, f64::max).powi(2).max(scale * 1e-30);
            worst = worst.max(rf.eval(z).norm() / mag.max(scale));
        }
    }
    if worst < 1e-12 {
        Ok(Conformality::Numeric(worst))
    } else {
        Ok(Conformality::Fails(r))
    }
}

/// A Gauss map `num/den`, both log-free Laurent series.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFn {
    pub num: MeroFn,
    pub den: MeroFn,
}

impl RationalFn {
    /// `Some(value)` when the map is constant as a rational function.
    pub fn constant_value(&self) -> Option<ExtComplex> {
        if self.den.is_zero() {
            return Some(ExtComplex::Infinity);
        }
        if self.num.is_zero() {
            return Some(ExtComplex::Finite(Complex64::new(0.0, 0.0)));
        }
        let (p, q) = self.polys();
        if p.degree() == Some(0) && q.degree() == Some(0) {
            return Some(ExtComplex::Finite(p.coeffs()[0].to_c64() / q.coeffs()[0].to_c64()));
        }
        None
    }

    /// Numerator and denominator as polynomials after a common Laurent shift.
    pub fn raw_polys(&self) -> (CPoly, CPoly) {
        let lo = self.num.min_exponent().into_iter().chain(self.den.min_exponent()).min().unwrap_or(0);
        (CPoly::from_laurent(&self.num, -lo), CPoly::from_laurent(&self.den, -lo))
    }

    /// Reduced numerator and denominator (exact gcd cancelled).
    pub fn polys(&self) -> (CPoly, CPoly) {
        let (p, q) = self.raw_polys();
        if p.is_zero() || q.is_zero() {
            return (p, q);
        }
        let g = p.gcd(&q);
        (p.divrem(&g).0, q.divrem(&g).0)
    }

    pub fn eval(&self, z: Complex64) -> ExtComplex {
        let n = self.num.to_float().eval(z);
        let d = self.den.to_float().eval(z);
        if d.norm() == 0.0 && n.norm() > 0.0 {
            ExtComplex::Infinity
        } else {
            ExtComplex::ratio(n, d)
        }
    }

    /// Exact limit at an end.
    pub fn limit(&self, end: EndLocation) -> ExtComplex {
        if let Some(c) = self.constant_value() {
            return c;
        }
        let lead = |f: &MeroFn| match end {
            EndLocation::Infinity => f.max_exponent().map(|k| (k, f.coeff(k))),
            EndLocation::Zero => f.min_exponent().map(|k| (-k, f.coeff(k))),
        };
        match (lead(&self.num), lead(&self.den)) {
            (Some((a, ca)), Some((b, cb))) => {
                if a > b {
                    ExtComplex::Infinity
                } else if a < b {
                    ExtComplex::Finite(Complex64::new(0.0, 0.0))
                } else {
                    ExtComplex::Finite(ca.to_c64() / cb.to_c64())
                }
            }
            _ => ExtComplex::Infinity,
        }
    }
}

fn pick_form(n1: MeroFn, d1: MeroFn, n2: MeroFn, d2: MeroFn) -> RationalFn {
    if n1.is_zero() && d1.is_zero() {
        RationalFn { num: n2, den: d2 }
    } else {
        RationalFn { num: n1, den: d1 }
    }
}

/// `γ₊ = f₃'/f₂' = −f₁'/f₄'` and `γ₋ = f₁'/f₃' = −f₄'/f₂'`.
pub fn gamma_maps(s: &SurfaceSpec) -> Result<(RationalFn, RationalFn)> {
    let c = check_conformal(s)?;
    if let Conformality::Fails(r) = c {
        return Err(Error::NotConformal(r.to_string()));
    }
    let d = s.derivatives();
    let gp = pick_form(d[2].clone(), d[1].clone(), d[0].neg(), d[3].clone());
    let gm = pick_form(d[0].clone(), d[2].clone(), d[3].neg(), d[1].clone());
    Ok((gp, gm))
}

/// Cross-multiplied agreement of the two fraction forms of each Gauss map.
pub fn gamma_forms_agree(s: &SurfaceSpec) -> Result<bool> {
    let d = s.derivatives();
    // f₃'f₄' = −f₁'f₂' for both
    let plus = d[2].mul(&d[3])?.add(&d[0].mul(&d[1])?);
    let minus = d[0].mul(&d[1])?.add(&d[3].mul(&d[2])?);
    Ok(plus.is_zero() && minus.is_zero())
}

/// Common zeros of all `f_i'` in the domain: total order and locations.
pub fn branch_data(s: &SurfaceSpec) -> (usize, Vec<Complex64>) {
    let d = s.derivatives();
    let lo = d.iter().filter_map(MeroFn::min_exponent).min().unwrap_or(0);
    let mut g = CPoly::zero();
    for f in d {
        g = g.gcd(&CPoly::from_laurent(f, -lo));
    }
    if g.is_zero() {
        return (0, vec![]);
    }
    // the shift by the smallest exponent leaves no common factor z; the
    // common zero order at 0 is that exponent, which only counts when 0 is
    // a domain point
    let keep_zero = if s.is_punctured() { 0 } else { lo.max(0) as usize };
    let mut pts: Vec<Complex64> = poly::roots(&g.to_float());
    pts.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), keep_zero));
    (g.degree().unwrap_or(0) + keep_zero, pts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EndLocation {
    Infinity,
    Zero,
}

impl EndLocation {
    pub fn name(&self) -> &'static str {
        match self {
            EndLocation::Infinity => "infinity",
            EndLocation::Zero => "zero",
        }
    }
}

/// Order of the largest term of the second rotated coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SecondOrder {
    Power(i32),
    Log,
    Vanishing,
}

#[derive(Clone, Debug)]
pub struct EndProfile {
    pub end_id: usize,
    pub location: EndLocation,
    pub n: u32,
    pub plane: OrientedPlane,
    /// Positive orthonormal frame whose first two vectors span the tangent plane at infinity.
    pub frame: [Vec4; 4],
    pub second: SecondOrder,
    /// `w₂' ≈ A z^p + B z̄^p` (with `z^{−p}` at the end at 0).
    pub a: Complex64,
    pub b: Complex64,
    /// Coordinate factor (1 or 2) carrying the leading growth; `None` on a tie.
    pub dominant_factor: Option<usize>,
    /// Leading coefficients of the first rotated coordinate `w₁' ≈ a₁u + b₁ū`.
    pub lead: (Complex64, Complex64),
    /// `w₁' = h₁ + conj(k₁)`, `w₂' = h₂ + conj(k₂)`; the order-N terms of
    /// `h₂, k₂` vanish identically and are dropped.
    pub series: [FloatMero; 4],
}

impl EndProfile {
    /// Chart orientation that traverses the knot as the boundary of the compact part.
    pub fn theta_sign(&self) -> f64 {
        match self.location {
            EndLocation::Infinity => 1.0,
            EndLocation::Zero => -1.0,
        }
    }

    /// Rotated complex coordinates `(w₁', w₂')` of a point of ℝ⁴.
    pub fn rotate(&self, x: &Vec4) -> (Complex64, Complex64) {
        let f = &self.frame;
        let d = grassmann::dot;
        (Complex64::new(d(x, &f[0]), d(x, &f[1])), Complex64::new(d(x, &f[2]), d(x, &f[3])))
    }

    /// `(w₁', w₂')` at a chart point, from the rotated series.
    pub fn eval_rotated(&self, z: Complex64) -> (Complex64, Complex64) {
        let [h1, k1, h2, k2] = &self.series;
        (h1.eval(z) + k1.eval(z).conj(), h2.eval(z) + k2.eval(z).conj())
    }

    /// `(∂w/∂z, ∂w/∂z̄)` for both rotated coordinates.
    pub fn rotated_derivatives(&self, z: Complex64) -> [(Complex64, Complex64); 2] {
        let [h1, k1, h2, k2] = &self.series;
        [
            (h1.eval_derivative(z), k1.eval_derivative(z).conj()),
            (h2.eval_derivative(z), k2.eval_derivative(z).conj()),
        ]
    }

    pub fn second_exponent(&self) -> Option<i32> {
        match self.second {
            SecondOrder::Power(p) => Some(p),
            _ => None,
        }
    }
}

fn growth(f: &MeroFn, end: EndLocation) -> Option<i32> {
    match end {
        EndLocation::Infinity => f.max_exponent(),
        EndLocation::Zero => f.min_exponent().map(|k| -k),
    }
}

/// Harmonic coordinates: `x_k = H_k + conj(H_k)`.
fn harmonic(s: &SurfaceSpec) -> [FloatMero; 4] {
    let f = s.functions().each_ref().map(MeroFn::to_float);
    let half = Complex64::new(0.5, 0.0);
    let mhalf_i = Complex64::new(0.0, -0.5);
    [
        f[0].add(&f[1]).scale(half),
        f[0].add(&f[1].scale(Complex64::new(-1.0, 0.0))).scale(mhalf_i),
        f[2].add(&f[3]).scale(half),
        f[2].add(&f[3].scale(Complex64::new(-1.0, 0.0))).scale(mhalf_i),
    ]
}

/// Ends at ∞ (always) and at 0 (when punctured), in that order.
pub fn end_profiles(s: &SurfaceSpec) -> Result<Vec<EndProfile>> {
    let mut locs = vec![EndLocation::Infinity];
    if s.is_punctured() {
        locs.push(EndLocation::Zero);
    }
    let (gp, gm) = gamma_maps(s)?;
    locs.into_iter().enumerate().map(|(id, loc)| end_profile(s, id, loc, &gp, &gm)).collect()
}

fn end_profile(s: &SurfaceSpec, id: usize, loc: EndLocation, gp: &RationalFn, gm: &RationalFn) -> Result<EndProfile> {
    let f = s.functions();
    let n = f.iter().filter_map(|g| growth(g, loc)).max().unwrap_or(0);
    if n <= 0 {
        return Err(Error::NotComplete(format!("no power growth at the end at {}", loc.name())));
    }
    let k = match loc {
        EndLocation::Infinity => n,
        EndLocation::Zero => -n,
    };
    let c = |i: usize| f[i].coeff(k).to_c64();
    // L(u) = (a₁u + b̄₁ū, a₂u + b̄₂ū)
    let leading = |u: Complex64| {
        let w1 = c(0) * u + c(1).conj() * u.conj();
        let w2 = c(2) * u + c(3).conj() * u.conj();
        [w1.re, w1.im, w2.re, w2.im]
    };
    let plane = OrientedPlane::new(leading(Complex64::new(1.0, 0.0)), leading(I))
        .map_err(|_| Error::AmbiguousProfile(format!("leading term at {} has rank < 2", loc.name())))?;
    let frame = plane.complete_frame();

    let (pg, mg) = grassmann::plane_gauss(&plane)?;
    let (lp, lm) = (gp.limit(loc), gm.limit(loc));
    if pg.chordal(&lp) > 1e-8 || mg.chordal(&lm) > 1e-8 {
        return Err(Error::InconsistentEnds(format!(
            "tangent plane at {} disagrees with the Gauss map limits",
            loc.name()
        )));
    }

    let growth1 = [0, 1].iter().filter_map(|&i| growth(&f[i], loc)).max();
    let growth2 = [2, 3].iter().filter_map(|&i| growth(&f[i], loc)).max();
    let dominant_factor = match (growth1, growth2) {
        (Some(a), Some(b)) if a > b => Some(1),
        (Some(a), Some(b)) if b > a => Some(2),
        (Some(_), None) => Some(1),
        (None, Some(_)) => Some(2),
        _ => None,
    };

    // w' = Σ c_k x_k = h + conj(k), h = Σ c_k H_k, k = Σ c̄_k H_k
    let hh = harmonic(s);
    let rot = |e: &Vec4, fv: &Vec4| -> (FloatMero, FloatMero) {
        let mut h = FloatMero::default();
        let mut kk = FloatMero::default();
        for j in 0..4 {
            let cj = Complex64::new(e[j], fv[j]);
            h = h.add(&hh[j].scale(cj));
            kk = kk.add(&hh[j].scale(cj.conj()));
        }
        (h, kk)
    };
    let (h1, k1) = rot(&frame[0], &frame[1]);
    let lead = (h1.coeff(k), k1.coeff(k).conj());
    let (h2, k2) = rot(&frame[2], &frame[3]);
    let tol = 1e-12 * s.coeff_scale().max(1e-300);
    let order = |e: i32| match loc {
        EndLocation::Infinity => e,
        EndLocation::Zero => -e,
    };
    let mut best: Option<i32> = None;
    for (e, v) in h2.terms.iter().chain(k2.terms.iter()) {
        let o = order(*e);
        if o > 0 && o < n && v.norm() > tol && best.is_none_or(|b| o > b) {
            best = Some(o);
        }
    }
    let (second, a, b) = match best {
        Some(p) => {
            let e = if loc == EndLocation::Infinity { p } else { -p };
            (SecondOrder::Power(p), h2.coeff(e), k2.coeff(e).conj())
        }
        None if h2.log.norm() > tol || k2.log.norm() > tol => (SecondOrder::Log, h2.log, k2.log.conj()),
        None => (SecondOrder::Vanishing, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
    };
    Ok(EndProfile {
        end_id: id,
        location: loc,
        n: n as u32,
        plane,
        frame,
        second,
        a,
        b,
        dominant_factor,
        lead,
        series: [h1, k1, h2.without(k), k2.without(k)],
    })
}

/// Exact-rational helper for fixtures: `c·z^k`.
pub fn mono(c: CRat, k: i32) -> MeroFn {
    MeroFn::monomial(c, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> CRat {
        CRat::ratio(n, d)
    }

    fn example2(n: i32) -> SurfaceSpec {
        let c = -(2 * n * n) as i64;
        SurfaceSpec::from_functions(
            "ex2",
            [mono(r(2, 1), n), mono(r(1, 1), n), mono(r(c, (2 * n - 1) as i64), 2 * n - 1), mono(r(1, 1), 1)],
        )
        .unwrap()
    }

    fn prop11(a: CRat, beta: CRat) -> SurfaceSpec {
        let f1 = MeroFn::from_terms([(3, r(1, 3)), (1, -&(&a * &a))]);
        let f2 = mono(-&(&beta * &beta), 1);
        let half_b = &beta * &r(1, 2);
        let ba = &beta * &a;
        let f3 = MeroFn::from_terms([(2, half_b.clone()), (1, ba.clone())]);
        let f4 = MeroFn::from_terms([(2, half_b), (1, -&ba)]);
        SurfaceSpec::from_functions("p11", [f1, f2, f3, f4]).unwrap()
    }

    #[test]
    fn conformality_examples() {
        assert_eq!(check_conformal(&prop11(CRat::one(), CRat::one())).unwrap(), Conformality::Exact);
        let log1 = MeroFn::log_term(CRat::one());
        let ex4 = SurfaceSpec::from_functions(
            "ex4",
            [
                mono(CRat::one(), 2).add(&log1),
                log1.clone(),
                mono(r(2, 1), 1),
                MeroFn::from_terms([(1, r(-1, 1)), (-1, r(1, 2))]),
            ],
        )
        .unwrap();
        assert_eq!(check_conformal(&ex4).unwrap(), Conformality::Exact);
        let as_given = SurfaceSpec::from_functions(
            "ex3",
            [mono(CRat::one(), 1), mono(CRat::one(), 3), mono(CRat::one(), 2), mono(r(3, 4), 2)],
        )
        .unwrap();
        assert_eq!(conformality_residual(&as_given).unwrap(), mono(r(6, 1), 2));
        assert!(!check_conformal(&as_given).unwrap().holds());
    }

    #[test]
    fn gauss_maps_closed_forms() {
        let (gp, gm) = gamma_maps(&example2(2)).unwrap();
        let z = Complex64::new(0.3, -1.1);
        assert!(gp.eval(z).chordal(&ExtComplex::Finite(-4.0 * z)) < 1e-12);
        assert!(gm.eval(z).chordal(&ExtComplex::Finite(-1.0 / (2.0 * z))) < 1e-12);
        let a = CRat::from_parts((1, 1), (1, 2));
        let b = CRat::from_parts((-2, 3), (1, 1));
        let (gp, gm) = gamma_maps(&prop11(a.clone(), b.clone())).unwrap();
        let (ac, bc) = (a.to_c64(), b.to_c64());
        assert!(gp.eval(z).chordal(&ExtComplex::Finite(-(z + ac) / bc)) < 1e-12);
        assert!(gm.eval(z).chordal(&ExtComplex::Finite((z - ac) / bc)) < 1e-12);
    }

    #[test]
    fn holomorphic_curve_has_constant_gauss_map() {
        let s = SurfaceSpec::from_functions(
            "holo",
            [mono(CRat::one(), 1), MeroFn::zero(), mono(CRat::one(), 2), MeroFn::zero()],
        )
        .unwrap();
        let (gp, gm) = gamma_maps(&s).unwrap();
        assert_eq!(gp.constant_value(), Some(ExtComplex::Infinity));
        assert_eq!(gm.constant_value(), None);
    }

    #[test]
    fn fraction_forms_agree_when_conformal() {
        assert!(gamma_forms_agree(&example2(3)).unwrap());
        assert!(gamma_forms_agree(&prop11(CRat::one(), CRat::i())).unwrap());
    }

    #[test]
    fn end_profile_example2() {
        let e = end_profiles(&example2(2)).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].n, 3);
        assert_eq!(e[0].dominant_factor, Some(2));
        // tangent plane at infinity = second factor
        let (jp, jm) = grassmann::jplus_jminus(&e[0].plane).unwrap();
        assert!((jp.alpha - 1.0).abs() < 1e-12 && (jm.alpha + 1.0).abs() < 1e-12);
    }

    #[test]
    fn end_profile_prop11() {
        let beta = CRat::from_parts((1, 1), (1, 1));
        let e = end_profiles(&prop11(CRat::one(), beta.clone())).unwrap();
        assert_eq!(e[0].n, 3);
        assert_eq!(e[0].second, SecondOrder::Power(2));
        let half = beta.abs_f64() / 2.0;
        assert!((e[0].a.norm() - half).abs() < 1e-12 && (e[0].b.norm() - half).abs() < 1e-12);
    }

    #[test]
    fn end_profiles_prop12() {
        // b = 2, β = 1+i, α = 1 → a = i, c = 1/2
        let log1 = MeroFn::log_term(CRat::one());
        let beta = CRat::from_parts((1, 1), (1, 1));
        let s = SurfaceSpec::new(
            "p12",
            [
                MeroFn::from_terms([(1, CRat::i()), (-1, r(1, 2))]),
                mono(r(2, 1), 1),
                log1.add(&mono(beta.clone(), 1)),
                log1.add(&mono(-&beta, 1)),
            ],
            &[Complex64::new(0.0, 0.0)],
        )
        .unwrap();
        let e = end_profiles(&s).unwrap();
        assert_eq!(e.len(), 2);
        assert!(e.iter().all(|p| p.n == 1));
        assert_eq!(e[0].second, SecondOrder::Log);
    }

    #[test]
    fn rejects_bad_inputs() {
        let log1 = MeroFn::log_term(CRat::one());
        let bad = SurfaceSpec::from_functions("mv", [log1.clone(), MeroFn::zero(), MeroFn::zero(), MeroFn::zero()]);
        assert_eq!(bad.unwrap_err(), Error::MultiValued(1));
        let p = SurfaceSpec::new("pm", [mono(CRat::one(), 1), MeroFn::zero(), MeroFn::zero(), MeroFn::zero()], &[Complex64::new(0.0, 0.0)]);
        assert!(matches!(p, Err(Error::PunctureMismatch(_))));
        let p = SurfaceSpec::new("pm", [mono(CRat::one(), -1), MeroFn::zero(), MeroFn::zero(), MeroFn::zero()], &[]);
        assert!(matches!(p, Err(Error::PunctureMismatch(_))));
    }

    #[test]
    fn cusp_branch_point() {
        let s = SurfaceSpec::from_functions(
            "cusp",
            [mono(CRat::one(), 2), MeroFn::zero(), mono(CRat::one(), 3), MeroFn::zero()],
        )
        .unwrap();
        let (b, pts) = branch_data(&s);
        assert_eq!(b, 1);
        assert!(pts[0].norm() < 1e-12);
        assert_eq!(branch_data(&example2(2)).0, 0);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let s = prop11(CRat::one(), CRat::from_parts((1, 2), (-1, 1)));
        let z = Complex64::new(0.7, -0.4);
        let (fx, fy) = s.jacobian(z);
        let h = 1e-6;
        let a = s.eval(z + h);
        let b = s.eval(z - h);
        let c = s.eval(z + I * h);
        let d = s.eval(z - I * h);
        for k in 0..4 {
            assert!(((a[k] - b[k]) / (2.0 * h) - fx[k]).abs() < 1e-6);
            assert!(((c[k] - d[k]) / (2.0 * h) - fy[k]).abs() < 1e-6);
        }
        // conformal: |F_x| = |F_y| = λ, F_x ⟂ F_y
        let l2 = s.conformal_factor(z);
        assert!((grassmann::dot(&fx, &fx) - l2).abs() < 1e-9 * l2);
        assert!(grassmann::dot(&fx, &fy).abs() < 1e-9 * l2);
    }
}
