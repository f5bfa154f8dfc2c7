//! Degrees of the Gauss maps, curvature totals (by formula and by
//! quadrature), pointwise curvatures, and the embeddedness bounds.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poly::{self, eval_scaled, CPoly};
use crate::surface::{self, EndProfile, RationalFn, SecondOrder, SurfaceSpec};

/// Degree of a Gauss map as a map of the sphere; 0 for constants.
pub fn rational_degree(g: &RationalFn, approx: bool) -> u32 {
    if g.constant_value().is_some() {
        return 0;
    }
    if !approx {
        let (p, q) = g.polys();
        return p.degree().unwrap_or(0).max(q.degree().unwrap_or(0)) as u32;
    }
    // float coefficients: cancel numerically coincident roots
    let (p, q) = g.raw_polys();
    let rp = poly::roots(&p.to_float());
    let mut rq = poly::roots(&q.to_float());
    let mut left = 0usize;
    for a in rp {
        match rq.iter().position(|b| (a - b).norm() < 1e-7 * (1.0 + a.norm())) {
            Some(i) => {
                rq.swap_remove(i);
            }
            None => left += 1,
        }
    }
    left.max(rq.len()) as u32
}

/// `(d₊, d₋)`.
pub fn gauss_degrees(s: &SurfaceSpec) -> Result<(u32, u32)> {
    let (gp, gm) = surface::gamma_maps(s)?;
    Ok((rational_degree(&gp, s.is_approx()), rational_degree(&gm, s.is_approx())))
}

/// Pullback density `4|γ'|²/(1+|γ|²)²` of a rational map `P/Q`.
struct Density {
    p: Vec<Complex64>,
    q: Vec<Complex64>,
    w: Vec<Complex64>,
    m: usize,
}

impl Density {
    fn new(p: &CPoly, q: &CPoly) -> Self {
        let w = p.derivative().mul(q).sub(&p.mul(&q.derivative()));
        let m = p.degree().unwrap_or(0).max(q.degree().unwrap_or(0));
        Density { p: p.to_float(), q: q.to_float(), w: w.to_float(), m }
    }

    fn at(&self, z: Complex64) -> f64 {
        // invariant under (P, Q) → (hP, hQ); h = z^{−m} keeps large |z| finite
        let (p, q, w) = if z.norm() > 1.0 {
            (eval_scaled(&self.p, z, self.m), eval_scaled(&self.q, z, self.m), eval_scaled(&self.w, z, 2 * self.m))
        } else {
            (poly::horner(&self.p, z), poly::horner(&self.q, z), poly::horner(&self.w, z))
        };
        let d = p.norm_sqr() + q.norm_sqr();
        if d == 0.0 {
            return 0.0;
        }
        4.0 * w.norm_sqr() / (d * d)
    }

    /// `∫₀^{2π} ρ(re^{iθ}) dθ` by periodic trapezoid with doubling.
    fn ring(&self, r: f64) -> f64 {
        let mut n = 64usize;
        let mut sum: f64 = (0..n).map(|k| self.at(Complex64::from_polar(r, phase(k, n)))).sum();
        let mut t = sum * std::f64::consts::TAU / n as f64;
        while n < 1 << 16 {
            let extra: f64 = (0..n).map(|k| self.at(Complex64::from_polar(r, phase(2 * k + 1, 2 * n)))).sum();
            sum += extra;
            n *= 2;
            let t2 = sum * std::f64::consts::TAU / n as f64;
            let done = (t2 - t).abs() <= 1e-11 * t2.abs() + 1e-300;
            t = t2;
            if done && n >= 256 {
                break;
            }
        }
        t
    }
}

fn phase(k: usize, n: usize) -> f64 {
    // offset avoids sampling exactly on the real axis
    std::f64::consts::TAU * (k as f64 + 0.137) / n as f64
}

const GK_X: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GK_WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64 + Sync>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let nodes: Vec<f64> = (0..15)
        .map(|i| if i < 7 { c - h * GK_X[i] } else if i == 7 { c } else { c + h * GK_X[14 - i] })
        .collect();
    let vals: Vec<f64> = nodes.par_iter().map(|&x| f(x)).collect();
    let mut k = GK_WK[7] * vals[7];
    let mut g = GK_WG[3] * vals[7];
    for i in 0..7 {
        let pair = vals[i] + vals[14 - i];
        k += GK_WK[i] * pair;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * pair;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod on `[a, b]`; returns `(value, error estimate)`.
pub fn integrate<F: Fn(f64) -> f64 + Sync>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let mut stack = vec![(a, b, gk15(f, a, b))];
    let (mut total, mut err) = (0.0, 0.0);
    let mut evals = 0usize;
    while let Some((lo, hi, (v, e))) = stack.pop() {
        let width = (hi - lo) / (b - a);
        if e <= tol * width.max(1e-3) || hi - lo < 1e-12 * (b - a) || evals > 4000 {
            total += v;
            err += e;
            continue;
        }
        evals += 1;
        let mid = 0.5 * (lo + hi);
        stack.push((mid, hi, gk15(f, mid, hi)));
        stack.push((lo, mid, gk15(f, lo, mid)));
    }
    (total, err)
}

/// `(1/4π) ∫∫ 4|γ'|²/(1+|γ|²)² dA`, with its error estimate.
pub fn quadrature_degree_with_error(g: &RationalFn) -> Result<(f64, f64)> {
    if g.constant_value().is_some() {
        return Ok((0.0, 0.0));
    }
    let (p, q) = g.polys();
    let dens = Density::new(&p, &q);
    // radial scale from the geometric mean of the root moduli
    let rs: Vec<f64> = poly::roots(&p.to_float())
        .into_iter()
        .chain(poly::roots(&q.to_float()))
        .map(|z| z.norm())
        .filter(|&r| r > 1e-8)
        .collect();
    let c = if rs.is_empty() { 1.0 } else { (rs.iter().map(|r| r.ln()).sum::<f64>() / rs.len() as f64).exp() };
    // r = c·u/(1−u)
    let f = |u: f64| {
        let r = c * u / (1.0 - u);
        let dr = c / ((1.0 - u) * (1.0 - u));
        dens.ring(r) * r * dr
    };
    let four_pi = 4.0 * std::f64::consts::PI;
    let (v, e) = integrate(&f, 0.0, 1.0, 1e-6 * four_pi);
    let (deg, err) = (v / four_pi, e / four_pi);
    if err > 1e-3 || !deg.is_finite() {
        return Err(Error::QuadratureNotConverged(err));
    }
    Ok((deg, err))
}

pub fn quadrature_degree(g: &RationalFn) -> Result<f64> {
    quadrature_degree_with_error(g).map(|(d, _)| d)
}

/// `4|γ'|²/(1+|γ|²)²` at `z` from the unreduced fraction.
fn density_at(g: &RationalFn, z: Complex64) -> f64 {
    if g.den.is_zero() || g.num.is_zero() {
        return 0.0;
    }
    let (n, d) = (g.num.to_float(), g.den.to_float());
    let (nv, dv) = (n.eval(z), d.eval(z));
    let w = n.eval_derivative(z) * dv - nv * d.eval_derivative(z);
    let s = nv.norm_sqr() + dv.norm_sqr();
    if s == 0.0 {
        return 0.0;
    }
    4.0 * w.norm_sqr() / (s * s)
}

/// `(K^T, K^N)` at `z`, using `½‖∇γ±‖² = −K^T ∓ K^N` and
/// `‖∇γ‖² = 8|γ'|²/((1+|γ|²)² λ²)`.
pub fn pointwise_curvatures(s: &SurfaceSpec, z: Complex64) -> Result<(f64, f64)> {
    if s.is_punctured() && z.norm() == 0.0 {
        return Err(Error::PuncturePoint(z.to_string()));
    }
    let l2 = s.conformal_factor(z);
    let scale = s.coeff_scale().max(1e-300);
    if !(l2 > 1e-24 * scale * scale) {
        return Err(Error::NonImmersionPoint(z.to_string()));
    }
    let (gp, gm) = surface::gamma_maps(s)?;
    let np = 2.0 * density_at(&gp, z) / l2;
    let nm = 2.0 * density_at(&gm, z) / l2;
    Ok((-0.25 * (np + nm), 0.25 * (nm - np)))
}

/// Which Gauss map is constant, if any (the surface is then a complex curve).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Holomorphic {
    PlusConstant,
    MinusConstant,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureReport {
    pub d_plus: u32,
    pub d_minus: u32,
    pub total_kt_over_2pi: i64,
    pub total_kn_over_2pi: i64,
    pub quad_d_plus: f64,
    pub quad_d_minus: f64,
    pub quad_error: f64,
    pub quad_kt_over_2pi: f64,
    pub quad_kn_over_2pi: f64,
    pub end_multiplicities: Vec<u32>,
    /// Total order of branch points; 0 for immersions.
    pub branch_order: usize,
    /// `2 − Σ(1+N_i) + B`.
    pub ends_formula_kt: i64,
    pub holomorphic: Option<Holomorphic>,
}

impl CurvatureReport {
    /// `(d₊, d₋)`: the homology class `d₊S₊ + d₋S₋`.
    pub fn homology(&self) -> (u32, u32) {
        (self.d_plus, self.d_minus)
    }

    pub fn quadrature_agrees(&self) -> bool {
        (self.quad_d_plus - self.d_plus as f64).abs() < 0.02 && (self.quad_d_minus - self.d_minus as f64).abs() < 0.02
    }
}

/// Degree formula, quadrature and the end-count formula (with branch correction).
pub fn total_curvatures(s: &SurfaceSpec) -> Result<CurvatureReport> {
    let (gp, gm) = surface::gamma_maps(s)?;
    let approx = s.is_approx();
    let (dp, dm) = (rational_degree(&gp, approx), rational_degree(&gm, approx));
    let (qp, ep) = quadrature_degree_with_error(&gp)?;
    let (qm, em) = quadrature_degree_with_error(&gm)?;
    let ends = surface::end_profiles(s)?;
    let ns: Vec<u32> = ends.iter().map(|e| e.n).collect();
    let (b, _) = surface::branch_data(s);
    let rhs = 2 - ns.iter().map(|&n| 1 + n as i64).sum::<i64>() + b as i64;
    let kt = -((dp + dm) as i64);
    if kt != rhs {
        return Err(Error::InconsistentEnds(format!(
            "-(d+ + d-) = {kt} but 2 - sum(1+N_i) + B = {rhs} (N = {ns:?}, B = {b})"
        )));
    }
    let holomorphic = match (gp.constant_value(), gm.constant_value()) {
        (Some(_), _) => Some(Holomorphic::PlusConstant),
        (_, Some(_)) => Some(Holomorphic::MinusConstant),
        _ => None,
    };
    Ok(CurvatureReport {
        d_plus: dp,
        d_minus: dm,
        total_kt_over_2pi: kt,
        total_kn_over_2pi: dm as i64 - dp as i64,
        quad_d_plus: qp,
        quad_d_minus: qm,
        quad_error: ep + em,
        quad_kt_over_2pi: -(qp + qm),
        quad_kn_over_2pi: qm - qp,
        end_multiplicities: ns,
        branch_order: b,
        ends_formula_kt: rhs,
        holomorphic,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundOutcome {
    SatisfiedStrict,
    Equality { holomorphic: bool },
    /// The surface cannot be embedded.
    Violated,
}

impl BoundOutcome {
    pub fn name(&self) -> &'static str {
        match self {
            BoundOutcome::SatisfiedStrict => "satisfied_strict",
            BoundOutcome::Equality { holomorphic: true } => "equality_holomorphic_case",
            BoundOutcome::Equality { holomorphic: false } => "equality",
            BoundOutcome::Violated => "violated_not_embeddable",
        }
    }
}

/// Slice-Bennequin: `|e(K)| ≤ N − 1 + 2g`.
pub fn bennequin_bound(report: &CurvatureReport, e: i64, n: u32, g: u32) -> BoundOutcome {
    let rhs = n as i64 - 1 + 2 * g as i64;
    match e.abs().cmp(&rhs) {
        std::cmp::Ordering::Less => BoundOutcome::SatisfiedStrict,
        std::cmp::Ordering::Equal => BoundOutcome::Equality { holomorphic: report.holomorphic.is_some() },
        std::cmp::Ordering::Greater => BoundOutcome::Violated,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdjunctionOutcome {
    /// `2d₊d₋` versus `½[(2g+N−1)² − e²]`; a mismatch means the surface is not embedded.
    pub lhs: i64,
    pub rhs_twice: i64,
    pub consistent: bool,
    /// `e² ≤ (2g+N−3)² − 4g`.
    pub bound_rhs: i64,
    pub bound_holds: bool,
}

pub fn adjunction_bound(report: &CurvatureReport, e: i64, n: u32, g: u32) -> Result<AdjunctionOutcome> {
    if report.holomorphic.is_some() || report.d_plus == 0 || report.d_minus == 0 {
        return Err(Error::HolomorphicSurface);
    }
    let (n, g) = (n as i64, g as i64);
    let lhs = 2 * report.d_plus as i64 * report.d_minus as i64;
    let rhs_twice = (2 * g + n - 1).pow(2) - e * e;
    let bound_rhs = (2 * g + n - 3).pow(2) - 4 * g;
    Ok(AdjunctionOutcome {
        lhs,
        rhs_twice,
        consistent: 2 * lhs == rhs_twice,
        bound_rhs,
        bound_holds: e * e <= bound_rhs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BranchBoundOutcome {
    pub d_lower: i64,
    pub d_upper: i64,
    pub degrees_hold: bool,
    pub e_bound: i64,
    pub e_holds: bool,
}

/// For an end with `|A| = |B|`: `N − p ≤ d± ≤ p − 1 + 2g` and `|e| ≤ 2p − N − 1 + 2g`.
pub fn branch_order_bounds(report: &CurvatureReport, end: &EndProfile, e: i64, g: u32) -> Option<BranchBoundOutcome> {
    let p = match end.second {
        SecondOrder::Power(p) => p as i64,
        _ => return None,
    };
    if (end.a.norm() - end.b.norm()).abs() > 1e-9 * end.a.norm().max(end.b.norm()) {
        return None;
    }
    let (n, g) = (end.n as i64, g as i64);
    let (lo, hi) = (n - p, p - 1 + 2 * g);
    let ok = |d: u32| lo <= d as i64 && d as i64 <= hi;
    let e_bound = 2 * p - n - 1 + 2 * g;
    Some(BranchBoundOutcome {
        d_lower: lo,
        d_upper: hi,
        degrees_hold: ok(report.d_plus) && ok(report.d_minus),
        e_bound,
        e_holds: e.abs() <= e_bound,
    })
}
