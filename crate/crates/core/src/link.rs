//! The link at infinity: knots cut out by large spheres, their cylinder
//! braids, algebraic lengths, linking numbers and the push-off writhe.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::curvature::CurvatureReport;
use crate::error::{Error, Result};
use crate::grassmann::{self, Vec4};
use crate::knots::BraidWord;
use crate::surface::{EndLocation, EndProfile, SurfaceSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Closed polyline `K(R) = S(0,R) ∩ F(end)`; first point repeated at the end.
#[derive(Clone, Debug)]
pub struct KnotSample {
    pub end_id: usize,
    pub radius: f64,
    pub points: Vec<Vec4>,
    /// Chart point of each sample.
    pub param: Vec<Complex64>,
    /// Chart angle of each sample (runs backwards at the end at 0).
    pub theta: Vec<f64>,
    /// Unwrapped argument of the first rotated coordinate.
    pub tau: Vec<f64>,
}

impl KnotSample {
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_spacing(&self) -> f64 {
        self.points.windows(2).map(|w| grassmann::norm(&sub(&w[1], &w[0]))).fold(0.0, f64::max)
    }

    /// `t,x1,x2,x3,x4` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x1,x2,x3,x4\n");
        for (t, x) in self.theta.iter().zip(&self.points) {
            let _ = writeln!(out, "{t:.12e},{:.12e},{:.12e},{:.12e},{:.12e}", x[0], x[1], x[2], x[3]);
        }
        out
    }
}

fn sub(a: &Vec4, b: &Vec4) -> Vec4 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

/// `max(4096, 512·N·(p+1))`.
pub fn sample_count(end: &EndProfile) -> usize {
    let p = end.second_exponent().unwrap_or(1).max(1) as usize;
    (512 * end.n as usize * (p + 1)).max(4096)
}

fn exponent(end: &EndProfile) -> f64 {
    match end.location {
        EndLocation::Infinity => end.n as f64,
        EndLocation::Zero => -(end.n as f64),
    }
}

fn chart(rho: f64, theta: f64) -> Complex64 {
    Complex64::from_polar(rho.exp(), theta)
}

/// `(w₁', w₂', ∂ρ w₁', ∂θ w₁', ∂ρ w₂', ∂θ w₂')` in log-polar chart coordinates.
fn rotated_jet(end: &EndProfile, z: Complex64) -> [Complex64; 6] {
    let (w1, w2) = end.eval_rotated(z);
    let [(a1, b1), (a2, b2)] = end.rotated_derivatives(z);
    let zc = z.conj();
    [w1, w2, a1 * z + b1 * zc, I * (a1 * z - b1 * zc), a2 * z + b2 * zc, I * (a2 * z - b2 * zc)]
}

/// Solves `‖F(e^{ρ+iθ})‖ = R` for `ρ`; returns `(ρ, d ln‖F‖/dρ)`.
fn radial_solve(end: &EndProfile, theta: f64, log_r: f64, guess: f64) -> Result<(f64, f64)> {
    let mut rho = guess;
    let mut g = f64::INFINITY;
    for _ in 0..200 {
        let [w1, w2, d1, _, d2, _] = rotated_jet(end, chart(rho, theta));
        let n2 = w1.norm_sqr() + w2.norm_sqr();
        g = 0.5 * n2.ln() - log_r;
        let d = (w1.conj() * d1 + w2.conj() * d2).re / n2;
        if !d.is_finite() || d.abs() < 1e-3 {
            return Err(Error::NotTransverse(d));
        }
        if g.abs() < 1e-12 {
            return Ok((rho, d));
        }
        rho += (-g / d).clamp(-1.0, 1.0);
    }
    Err(Error::RootFindFailed(g))
}

/// Samples the knot of one end on the sphere of radius `R` at `M` chart angles.
pub fn sample_knot(s: &SurfaceSpec, end: &EndProfile, radius: f64) -> Result<KnotSample> {
    sample_knot_with(s, end, radius, sample_count(end))
}

pub fn sample_knot_with(s: &SurfaceSpec, end: &EndProfile, radius: f64, m: usize) -> Result<KnotSample> {
    let log_r = radius.ln();
    let k = exponent(end);
    let (la, lb) = end.lead;
    let solved: Vec<(f64, f64)> = (0..m)
        .into_par_iter()
        .map(|j| {
            let theta = end.theta_sign() * TAU * j as f64 / m as f64;
            let c = (la * Complex64::from_polar(1.0, k * theta) + lb * Complex64::from_polar(1.0, -k * theta)).norm();
            let (rho, _) = radial_solve(end, theta, log_r, (log_r - c.ln()) / k)?;
            Ok((rho, theta))
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let mut param: Vec<Complex64> = solved.iter().map(|&(r, t)| chart(r, t)).collect();
    let mut theta: Vec<f64> = solved.iter().map(|p| p.1).collect();
    param.push(param[0]);
    theta.push(end.theta_sign() * TAU);
    let points: Vec<Vec4> = param.iter().map(|&z| s.eval(z)).collect();
    for x in &points {
        if (grassmann::norm(x) - radius).abs() > 1e-6 * radius {
            return Err(Error::RootFindFailed(grassmann::norm(x) - radius));
        }
    }
    let mut tau = Vec::with_capacity(param.len());
    let mut prev: Option<(f64, f64)> = None;
    for &z in &param {
        let a = end.eval_rotated(z).0.arg();
        let t = match prev {
            None => a,
            Some((pa, pt)) => pt + wrap(a - pa),
        };
        tau.push(t);
        prev = Some((a, t));
    }
    Ok(KnotSample { end_id: end.end_id, radius, points, param, theta, tau })
}

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Crossing {
    pub t: f64,
    /// Strand labels, lower position first.
    pub pair: (usize, usize),
    /// 0-based position of the lower strand (the Artin generator is `slot + 1`).
    pub slot: usize,
    pub sign: i8,
}

#[derive(Clone, Debug)]
pub struct CylinderBraid {
    pub end_id: usize,
    pub strands: usize,
    pub crossings: Vec<Crossing>,
    pub word: BraidWord,
    /// `Σ_{i<j} Δarg(w_i − w_j) / π` over one period.
    pub winding_e: i64,
    pub min_separation: f64,
    /// Projection direction (angle in the `w₂'` plane).
    pub direction: f64,
    /// Strand positions on a uniform grid of braid times `[0, 2π]`.
    pub positions: Vec<Vec<Complex64>>,
}

/// Locates chart points by braid time along one knot sample.
struct Tracker<'a> {
    end: &'a EndProfile,
    log_r: f64,
    tau: &'a [f64],
    rho: Vec<f64>,
    theta: &'a [f64],
}

#[derive(Clone, Copy)]
struct Located {
    rho: f64,
    theta: f64,
    w2: Complex64,
}

impl<'a> Tracker<'a> {
    fn new(k: &'a KnotSample, end: &'a EndProfile) -> Self {
        Tracker { end, log_r: k.radius.ln(), tau: &k.tau, rho: k.param.iter().map(|z| z.norm().ln()).collect(), theta: &k.theta }
    }

    fn seed(&self, tau: f64) -> (f64, f64) {
        let j = self.tau.partition_point(|&t| t < tau).clamp(1, self.tau.len() - 1);
        let (t0, t1) = (self.tau[j - 1], self.tau[j]);
        let f = if t1 > t0 { ((tau - t0) / (t1 - t0)).clamp(0.0, 1.0) } else { 0.0 };
        (self.rho[j - 1] + f * (self.rho[j] - self.rho[j - 1]), self.theta[j - 1] + f * (self.theta[j] - self.theta[j - 1]))
    }

    /// Two-dimensional Newton on `(ln‖F‖ − ln R, arg w₁' − τ)`.
    fn locate(&self, tau: f64, seed: Option<(f64, f64)>) -> Result<Located> {
        let (mut rho, mut theta) = seed.unwrap_or_else(|| self.seed(tau));
        let rot = Complex64::from_polar(1.0, -tau);
        let mut res = f64::INFINITY;
        for _ in 0..80 {
            let [w1, w2, r1, t1, r2, t2] = rotated_jet(self.end, chart(rho, theta));
            let n2 = w1.norm_sqr() + w2.norm_sqr();
            let g1 = 0.5 * n2.ln() - self.log_r;
            let g2 = (w1 * rot).arg();
            res = g1.abs().max(g2.abs());
            if res < 1e-12 {
                return Ok(Located { rho, theta, w2 });
            }
            let j11 = (w1.conj() * r1 + w2.conj() * r2).re / n2;
            let j12 = (w1.conj() * t1 + w2.conj() * t2).re / n2;
            let j21 = (r1 / w1).im;
            let j22 = (t1 / w1).im;
            let det = j11 * j22 - j12 * j21;
            if !det.is_finite() || det.abs() < 1e-300 {
                return Err(Error::NotTransverse(det));
            }
            let dr = (-g1 * j22 + g2 * j12) / det;
            let dt = (-g2 * j11 + g1 * j21) / det;
            let scale = (dr.abs().max(dt.abs()) / 0.5).max(1.0);
            rho += dr / scale;
            theta += dt / scale;
        }
        Err(Error::RootFindFailed(res))
    }
}

struct Scan<'a> {
    tr: &'a Tracker<'a>,
    n: usize,
    tau0: f64,
    dir: Complex64,
    events: Vec<Crossing>,
    winding: f64,
    pos_scale: f64,
}

impl Scan<'_> {
    fn at(&self, t: f64, seeds: &[Located]) -> Result<Vec<Located>> {
        (0..self.n)
            .map(|k| self.tr.locate(self.tau0 + TAU * k as f64 + t, Some((seeds[k].rho, seeds[k].theta))))
            .collect()
    }

    fn proj(&self, w: Complex64) -> Complex64 {
        w * self.dir.conj()
    }

    fn order(&self, s: &[Located]) -> Vec<usize> {
        let mut o: Vec<usize> = (0..self.n).collect();
        o.sort_by(|&a, &b| self.proj(s[a].w2).re.total_cmp(&self.proj(s[b].w2).re));
        o
    }

    fn step(&mut self, ta: f64, a: &[Located], tb: f64, b: &[Located], depth: u32) -> Result<()> {
        let (oa, ob) = (self.order(a), self.order(b));
        let mut ok = true;
        let mut swaps = Vec::new();
        let mut s = 0;
        while s < self.n {
            if oa[s] == ob[s] {
                s += 1;
            } else if s + 1 < self.n && oa[s] == ob[s + 1] && oa[s + 1] == ob[s] {
                swaps.push(s);
                s += 2;
            } else {
                ok = false;
                break;
            }
        }
        let mut dw = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let d = ((b[i].w2 - b[j].w2) / (a[i].w2 - a[j].w2)).arg();
                ok &= d.abs() <= 0.5;
                dw += d;
            }
        }
        if !ok {
            if depth >= 48 {
                return Err(Error::DegenerateCrossing(tb - ta));
            }
            let tm = 0.5 * (ta + tb);
            let m = self.at(tm, a)?;
            self.step(ta, a, tm, &m, depth + 1)?;
            return self.step(tm, &m, tb, b, depth + 1);
        }
        self.winding += dw;
        let mut found = Vec::new();
        for s in swaps {
            found.push(self.refine(ta, a, tb, oa[s], oa[s + 1], s)?);
        }
        found.sort_by(|x, y| x.t.total_cmp(&y.t));
        self.events.extend(found);
        Ok(())
    }

    /// Bisects the crossing time of strands `i` (lower at `ta`) and `j`.
    fn refine(&self, ta: f64, a: &[Located], tb: f64, i: usize, j: usize, slot: usize) -> Result<Crossing> {
        let (mut lo, mut hi) = (ta, tb);
        let (mut si, mut sj) = (a[i], a[j]);
        let mut d = self.proj(si.w2 - sj.w2);
        for _ in 0..40 {
            if hi - lo < 1e-12 {
                break;
            }
            let tm = 0.5 * (lo + hi);
            let mi = self.tr.locate(self.tau0 + TAU * i as f64 + tm, Some((si.rho, si.theta)))?;
            let mj = self.tr.locate(self.tau0 + TAU * j as f64 + tm, Some((sj.rho, sj.theta)))?;
            d = self.proj(mi.w2 - mj.w2);
            if d.re < 0.0 {
                lo = tm;
                (si, sj) = (mi, mj);
            } else {
                hi = tm;
            }
        }
        // x_d increases through 0; counterclockwise rotation of the difference is positive
        if d.im.abs() < 1e-9 * self.pos_scale {
            return Err(Error::DegenerateCrossing(d.im.abs()));
        }
        Ok(Crossing { t: 0.5 * (lo + hi), pair: (i, j), slot, sign: if d.im < 0.0 { 1 } else { -1 } })
    }
}

const DIRECTIONS: [f64; 10] = [0.6180339887, 2.2360679775, 1.4142135624, 2.7182818285, 0.5772156649, 1.7320508076, 0.3010299957, 2.5029078751, 1.1892071150, 0.9159655942];

/// Cylinder braid of a knot sample, trying a fixed list of generic projections.
pub fn extract_braid(k: &KnotSample, end: &EndProfile) -> Result<CylinderBraid> {
    let mut last = None;
    for &phi in &DIRECTIONS {
        match extract_braid_with(k, end, phi) {
            Err(e @ Error::DegenerateCrossing(_)) => last = Some(e),
            r => return r,
        }
    }
    Err(last.unwrap())
}

pub fn extract_braid_with(k: &KnotSample, end: &EndProfile, phi: f64) -> Result<CylinderBraid> {
    let n = end.n as usize;
    let total = k.tau.last().unwrap() - k.tau[0];
    if k.tau.windows(2).any(|w| w[1] <= w[0]) || (total - TAU * n as f64).abs() > 0.5 {
        return Err(Error::NonMonotoneAxis);
    }
    let tr = Tracker::new(k, end);
    let tau0 = k.tau[0];
    let steps = k.len().div_ceil(n).max(64);
    let grid: Vec<Vec<Located>> = (0..=steps)
        .into_par_iter()
        .map(|m| {
            let t = TAU * m as f64 / steps as f64;
            (0..n).map(|s| tr.locate(tau0 + TAU * s as f64 + t, None)).collect::<Result<Vec<_>>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let positions: Vec<Vec<Complex64>> = (0..n).map(|s| grid.iter().map(|g| g[s].w2).collect()).collect();
    let pos_scale = positions.iter().flatten().map(|w| w.norm()).fold(0.0, f64::max).max(1e-300);
    let mut min_sep = f64::INFINITY;
    for g in &grid {
        for i in 0..n {
            for j in i + 1..n {
                min_sep = min_sep.min((g[i].w2 - g[j].w2).norm());
            }
        }
    }
    for s in 0..n {
        if (positions[s][steps] - positions[(s + 1) % n][0]).norm() > 1e-6 * pos_scale {
            return Err(Error::NonMonotoneAxis);
        }
    }
    let mut scan = Scan { tr: &tr, n, tau0, dir: Complex64::from_polar(1.0, phi), events: vec![], winding: 0.0, pos_scale };
    for m in 0..steps {
        let (ta, tb) = (TAU * m as f64 / steps as f64, TAU * (m + 1) as f64 / steps as f64);
        scan.step(ta, &grid[m], tb, &grid[m + 1], 0)?;
    }
    let letters: Vec<(usize, i8)> = scan.events.iter().map(|c| (c.slot + 1, c.sign)).collect();
    let word = BraidWord::new(n, letters)?;
    // closure check: strand s ends where strand s+1 starts
    let o0 = scan.order(&grid[0]);
    let mut slot_of = vec![0; n];
    for (p, &s) in o0.iter().enumerate() {
        slot_of[s] = p;
    }
    let perm = word.permutation();
    if (0..n).any(|p| perm[p] != slot_of[(o0[p] + 1) % n]) {
        return Err(Error::DegenerateCrossing(0.0));
    }
    let w = scan.winding / PI;
    if (w - w.round()).abs() > 1e-3 {
        return Err(Error::CrossValidationMismatch { crossings: word.exponent_sum(), winding: w.round() as i64 });
    }
    Ok(CylinderBraid {
        end_id: end.end_id,
        strands: n,
        crossings: scan.events,
        word,
        winding_e: w.round() as i64,
        min_separation: if n > 1 { min_sep } else { f64::INFINITY },
        direction: phi,
        positions,
    })
}

/// Σ crossing signs, checked against the pairwise winding count.
pub fn algebraic_length(b: &CylinderBraid) -> Result<i64> {
    let e = b.word.exponent_sum();
    if e != b.winding_e {
        return Err(Error::CrossValidationMismatch { crossings: e, winding: b.winding_e });
    }
    Ok(e)
}

#[derive(Clone, Debug)]
pub struct StableKnot {
    pub radius: f64,
    pub sample: KnotSample,
    pub braid: CylinderBraid,
    /// Radii probed before stabilization.
    pub probes: usize,
}

fn canonical(w: &BraidWord) -> BraidWord {
    w.free_reduce().canonical_rotation()
}

pub fn braid_at(s: &SurfaceSpec, end: &EndProfile, radius: f64) -> Result<StableKnot> {
    braid_at_with(s, end, radius, None)
}

/// As [`braid_at`], with `samples` overriding [`sample_count`].
pub fn braid_at_with(s: &SurfaceSpec, end: &EndProfile, radius: f64, samples: Option<usize>) -> Result<StableKnot> {
    let m = samples.unwrap_or_else(|| sample_count(end));
    let sample = sample_knot_with(s, end, radius, m)?;
    let braid = extract_braid(&sample, end)?;
    algebraic_length(&braid)?;
    Ok(StableKnot { radius, sample, braid, probes: 1 })
}

/// Doubles `R` from `10³·scale` until the braid words at `R` and `4R` agree
/// up to free reduction and cyclic rotation.
pub fn stabilize_radius(s: &SurfaceSpec, end: &EndProfile) -> Result<StableKnot> {
    stabilize_radius_with(s, end, None)
}

pub fn stabilize_radius_with(s: &SurfaceSpec, end: &EndProfile, samples: Option<usize>) -> Result<StableKnot> {
    let r0 = 1e3 * s.coeff_scale().max(f64::MIN_POSITIVE);
    let mut cache: Vec<Option<std::result::Result<StableKnot, String>>> = vec![None; 43];
    let mut get = |k: usize| -> std::result::Result<StableKnot, String> {
        cache[k].get_or_insert_with(|| braid_at_with(s, end, r0 * 2f64.powi(k as i32), samples).map_err(|e| e.to_string())).clone()
    };
    let mut diag = String::new();
    for k in 0..=40 {
        match (get(k), get(k + 2)) {
            (Ok(a), Ok(b)) if canonical(&a.braid.word) == canonical(&b.braid.word) => {
                return Ok(StableKnot { probes: k + 3, ..a });
            }
            (Ok(a), Ok(b)) => diag = format!("R={:.3e}: '{}' vs '{}'", a.radius, a.braid.word, b.braid.word),
            (Err(e), _) | (_, Err(e)) => diag = format!("R={:.3e}: {e}", r0 * 2f64.powi(k as i32)),
        }
    }
    Err(Error::NoStabilization(diag))
}

type P3 = [f64; 3];

fn cross(a: P3, b: P3) -> P3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot3(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub3(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn unit3(a: P3) -> Option<P3> {
    let n = dot3(a, a).sqrt();
    (n > 0.0).then(|| [a[0] / n, a[1] / n, a[2] / n])
}

/// Signed solid angle swept by segment pair `(a→b, c→d)` (exact for polygons).
fn segment_omega(a: P3, b: P3, c: P3, d: P3) -> f64 {
    let (r13, r14, r23, r24) = (sub3(c, a), sub3(d, a), sub3(c, b), sub3(d, b));
    let ns = [cross(r13, r14), cross(r14, r24), cross(r24, r23), cross(r23, r13)];
    let mut n = [[0.0; 3]; 4];
    for k in 0..4 {
        match unit3(ns[k]) {
            Some(u) => n[k] = u,
            None => return 0.0,
        }
    }
    let asin = |x: f64| x.clamp(-1.0, 1.0).asin();
    let omega = asin(dot3(n[0], n[1])) + asin(dot3(n[1], n[2])) + asin(dot3(n[2], n[3])) + asin(dot3(n[3], n[0]));
    let s = dot3(cross(sub3(d, c), sub3(b, a)), r13);
    if s > 0.0 {
        omega
    } else if s < 0.0 {
        -omega
    } else {
        0.0
    }
}

/// Linking number of two closed polygons in ℝ³ (vertices without repetition).
pub fn polygon_linking(a: &[P3], b: &[P3]) -> f64 {
    let (na, nb) = (a.len(), b.len());
    let rows: Vec<f64> = (0..na)
        .into_par_iter()
        .map(|i| {
            let (p, q) = (a[i], a[(i + 1) % na]);
            (0..nb).map(|j| segment_omega(p, q, b[j], b[(j + 1) % nb])).sum()
        })
        .collect();
    rows.iter().sum::<f64>() / (4.0 * PI)
}

/// Orthonormal `(u₁,u₂,u₃)` completing `p` with `det(p,u₁,u₂,u₃) = −1`, so that
/// projection from `p` preserves the boundary orientation of the sphere.
fn stereo_frame(p: &Vec4) -> [Vec4; 3] {
    let mut basis: Vec<Vec4> = vec![*p];
    for k in 0..4 {
        let mut e = [0.0; 4];
        e[k] = 1.0;
        for b in &basis {
            e = grassmann::axpy(-grassmann::dot(&e, b), b, &e);
        }
        let n = grassmann::norm(&e);
        if n > 1e-6 && basis.len() < 4 {
            basis.push(grassmann::scale(1.0 / n, &e));
        }
    }
    let (mut u1, u2, u3) = (basis[1], basis[2], basis[3]);
    if grassmann::det4([*p, u1, u2, u3]) > 0.0 {
        u1 = grassmann::scale(-1.0, &u1);
    }
    [u1, u2, u3]
}

fn project(points: &[Vec4], pole: &Vec4, radius: f64) -> Vec<P3> {
    let u = stereo_frame(pole);
    points
        .iter()
        .map(|x| {
            let den = radius - grassmann::dot(x, pole);
            let d = |k: usize| grassmann::dot(x, &u[k]) * radius / den;
            [d(0), d(1), d(2)]
        })
        .collect()
}

/// Pole on the unit sphere far from every point (deterministic candidate set).
fn choose_pole(points: &[&[Vec4]], radius: f64) -> Vec4 {
    let mut cands: Vec<Vec4> = Vec::new();
    for k in 0..4 {
        for s in [1.0, -1.0] {
            let mut e = [0.0; 4];
            e[k] = s;
            cands.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..40 {
        let v: Vec4 = [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5];
        cands.push(grassmann::scale(1.0 / grassmann::norm(&v), &v));
    }
    let stride = (points.iter().map(|p| p.len()).sum::<usize>() / 4096).max(1);
    let score = |c: &Vec4| {
        points
            .iter()
            .flat_map(|p| p.iter().step_by(stride))
            .map(|x| grassmann::norm(&sub(&grassmann::scale(1.0 / radius, x), c)))
            .fold(f64::INFINITY, f64::min)
    };
    let scores: Vec<f64> = cands.iter().map(score).collect();
    let best = (0..cands.len()).max_by(|&a, &b| scores[a].total_cmp(&scores[b])).unwrap();
    cands[best]
}

/// Vertex indices (open cycle) with chord deviations below `0.2·clearance`.
fn decimate(points: &[Vec4], clearance: f64) -> Vec<usize> {
    let n = points.len() - 1;
    let mut stride = n.div_ceil(2048).max(1);
    loop {
        let idx: Vec<usize> = (0..n).step_by(stride).collect();
        if stride == 1 {
            return idx;
        }
        let mut worst: f64 = 0.0;
        for w in 0..idx.len() {
            let (a, b) = (idx[w], if w + 1 < idx.len() { idx[w + 1] } else { n });
            let (pa, pb) = (points[a], points[b]);
            let chord = sub(&pb, &pa);
            let l2 = grassmann::dot(&chord, &chord).max(f64::MIN_POSITIVE);
            for q in &points[a + 1..b] {
                let v = sub(q, &pa);
                let t = (grassmann::dot(&v, &chord) / l2).clamp(0.0, 1.0);
                worst = worst.max(grassmann::norm(&grassmann::axpy(-t, &chord, &v)));
            }
        }
        if worst < 0.2 * clearance {
            return idx;
        }
        stride /= 2;
    }
}

fn min_distance(a: &[Vec4], b: &[Vec4]) -> f64 {
    let sa = (a.len() / 2048).max(1);
    let sb = (b.len() / 2048).max(1);
    a.iter()
        .step_by(sa)
        .map(|x| b.iter().step_by(sb).map(|y| grassmann::norm(&sub(x, y))).fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min)
}

/// Linking number of two closed polylines on the sphere `S(0,R)`; both
/// carry their own decimation, chords staying within `clearance`.
pub fn linking_polylines(a: &[Vec4], ia: &[usize], b: &[Vec4], ib: &[usize], radius: f64) -> Result<(i64, f64)> {
    let va: Vec<Vec4> = ia.iter().map(|&i| a[i]).collect();
    let vb: Vec<Vec4> = ib.iter().map(|&i| b[i]).collect();
    let pole = choose_pole(&[&va, &vb], radius);
    let lk = polygon_linking(&project(&va, &pole, radius), &project(&vb, &pole, radius));
    if !lk.is_finite() || (lk - lk.round()).abs() > 0.1 {
        return Err(Error::QuadratureNotConverged(lk));
    }
    Ok((lk.round() as i64, (lk - lk.round()).abs()))
}

pub fn linking_number(k1: &KnotSample, k2: &KnotSample) -> Result<i64> {
    let d = min_distance(&k1.points, &k2.points);
    if d < 1e-12 * k1.radius {
        return Err(Error::CurvesTooClose(d));
    }
    let ia = decimate(&k1.points, d);
    let ib = decimate(&k2.points, d);
    Ok(linking_polylines(&k1.points, &ia, &k2.points, &ib, k1.radius)?.0)
}

/// All ends sampled on one common sphere.
#[derive(Clone, Debug)]
pub struct LinkAtInfinity {
    pub radius: f64,
    pub stable_radii: Vec<f64>,
    pub knots: Vec<KnotSample>,
    pub braids: Vec<CylinderBraid>,
}

impl LinkAtInfinity {
    pub fn e(&self) -> Vec<i64> {
        self.braids.iter().map(|b| b.winding_e).collect()
    }
}

/// Stabilizes every end and resamples all of them at the largest radius
/// (or at `radius` when given).
pub fn link_at_infinity(s: &SurfaceSpec, ends: &[EndProfile], radius: Option<f64>) -> Result<LinkAtInfinity> {
    link_at_infinity_with(s, ends, radius, None)
}

pub fn link_at_infinity_with(s: &SurfaceSpec, ends: &[EndProfile], radius: Option<f64>, samples: Option<usize>) -> Result<LinkAtInfinity> {
    let (stable_radii, r) = match radius {
        Some(r) => (vec![r; ends.len()], r),
        None => {
            let st: Vec<Result<f64>> = ends.par_iter().map(|e| stabilize_radius_with(s, e, samples).map(|k| k.radius)).collect();
            let st: Vec<f64> = st.into_iter().collect::<Result<_>>()?;
            let r = st.iter().copied().fold(0.0, f64::max);
            (st, r)
        }
    };
    let stable: Vec<Result<StableKnot>> = ends.par_iter().map(|e| braid_at_with(s, e, r, samples)).collect();
    let stable: Vec<StableKnot> = stable.into_iter().collect::<Result<_>>()?;
    let (knots, braids) = stable.into_iter().map(|k| (k.sample, k.braid)).unzip();
    Ok(LinkAtInfinity { radius: r, stable_radii, knots, braids })
}

#[derive(Clone, Debug)]
pub struct WritheReport {
    pub radius: f64,
    pub x: Vec4,
    pub e: Vec<i64>,
    /// Pairwise linking numbers of distinct components.
    pub lk: Vec<Vec<i64>>,
    /// `Σ e_i + 2 Σ_{i<j} lk(K_i, K_j)`.
    pub assembled: i64,
    /// `lk(L, L̂)` computed directly on the pushed-off link.
    pub direct: i64,
    pub self_pushoff: Vec<i64>,
}

/// A fixed generic push-off direction, re-drawn if it lies too close to a
/// tangent plane at infinity.
pub fn default_pushoff(ends: &[EndProfile]) -> Vec4 {
    let mut x: Vec4 = [0.3141592654, -0.5772156649, 0.2718281828, 0.7071067812];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    while check_pushoff(ends, &x).is_err() {
        x = [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5];
    }
    grassmann::scale(1.0 / grassmann::norm(&x), &x)
}

fn check_pushoff(ends: &[EndProfile], x: &Vec4) -> Result<()> {
    let n = grassmann::norm(x);
    for e in ends {
        let normal = (grassmann::dot(x, &e.frame[2]).powi(2) + grassmann::dot(x, &e.frame[3]).powi(2)).sqrt();
        if !(normal > 1e-3 * n) {
            return Err(Error::XInTangentPlane);
        }
    }
    Ok(())
}

fn push_off(k: &KnotSample, x: &Vec4, delta: f64) -> Vec<Vec4> {
    k.points
        .iter()
        .map(|p| {
            let xt = grassmann::axpy(-grassmann::dot(x, p) / (k.radius * k.radius), p, x);
            let q = grassmann::axpy(delta, &xt, p);
            grassmann::scale(k.radius / grassmann::norm(&q), &q)
        })
        .collect()
}

pub fn writhe_at_infinity(s: &SurfaceSpec, x: Vec4) -> Result<WritheReport> {
    let ends = crate::surface::end_profiles(s)?;
    let link = link_at_infinity(s, &ends, None)?;
    writhe_of_link(&link, &ends, x)
}

pub fn writhe_of_link(link: &LinkAtInfinity, ends: &[EndProfile], x: Vec4) -> Result<WritheReport> {
    check_pushoff(ends, &x)?;
    let x = grassmann::scale(1.0 / grassmann::norm(&x), &x);
    let r = link.radius;
    let c = link.knots.len();
    let mut clear = vec![vec![f64::INFINITY; c]; c];
    for i in 0..c {
        clear[i][i] = link.braids[i].min_separation.min(r);
        for j in 0..i {
            let d = min_distance(&link.knots[i].points, &link.knots[j].points);
            if d < 1e-12 * r {
                return Err(Error::CurvesTooClose(d));
            }
            clear[i][j] = d;
            clear[j][i] = d;
        }
    }
    let global = clear.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let delta = 1e-3 * global;
    let pushed: Vec<Vec<Vec4>> = link.knots.iter().map(|k| push_off(k, &x, delta)).collect();
    let e = link.e();
    let mut lk = vec![vec![0i64; c]; c];
    let mut direct = 0;
    let mut self_pushoff = vec![0; c];
    for i in 0..c {
        for j in 0..c {
            let cl = clear[i][j];
            let ia = decimate(&link.knots[i].points, cl);
            let ib = if i == j { ia.clone() } else { decimate(&pushed[j], cl) };
            let (v, _) = linking_polylines(&link.knots[i].points, &ia, &pushed[j], &ib, r)?;
            direct += v;
            if i == j {
                self_pushoff[i] = v;
            } else if i < j {
                let ik = decimate(&link.knots[j].points, cl);
                let (l, _) = linking_polylines(&link.knots[i].points, &ia, &link.knots[j].points, &ik, r)?;
                lk[i][j] = l;
                lk[j][i] = l;
            }
        }
    }
    let assembled = e.iter().sum::<i64>() + 2 * (0..c).flat_map(|i| (i + 1..c).map(move |j| (i, j))).map(|(i, j)| lk[i][j]).sum::<i64>();
    if assembled != direct {
        return Err(Error::CrossValidationMismatch { crossings: assembled, winding: direct });
    }
    Ok(WritheReport { radius: r, x, e, lk, assembled, direct, self_pushoff })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Reconciliation {
    Holds,
    Fails,
    NotApplicable(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    /// `d₋ − d₊ = (1/2π)∫K^N`.
    pub lhs: i64,
    pub writhe: i64,
    pub double_point_sum: Option<i64>,
    /// `(W − (d₋ − d₊))/2`: the signed double-point count the identity demands.
    pub implied_double_points: Option<i64>,
    pub status: Reconciliation,
}

/// `d₋ − d₊ = W − 2D` with `W` the writhe at infinity and `D` the signed
/// double-point total (`None` when, e.g., the self-intersection is a curve).
pub fn normal_identity_check(report: &CurvatureReport, writhe: &WritheReport, double_points: Option<i64>) -> IdentityReport {
    let lhs = report.d_minus as i64 - report.d_plus as i64;
    let w = writhe.assembled;
    let gap = w - lhs;
    let implied = (gap % 2 == 0).then_some(gap / 2);
    let status = if report.branch_order > 0 {
        Reconciliation::NotApplicable(format!("branched (order {})", report.branch_order))
    } else {
        match double_points {
            None => Reconciliation::NotApplicable("double points not isolated".into()),
            Some(d) if lhs == w - 2 * d => Reconciliation::Holds,
            Some(_) => Reconciliation::Fails,
        }
    };
    IdentityReport { lhs, writhe: w, double_point_sum: double_points, implied_double_points: implied, status }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusKnot {
    pub n: u32,
    pub p: u32,
    /// `±(N−1)p`, positive when the second coordinate is holomorphic-dominant.
    pub predicted_e: i64,
}

/// Torus knot `(N, p)` read off `w₂' ≈ A z^p + B z̄^p` when `|A| ≠ |B|`.
pub fn torus_knot_detect(end: &EndProfile) -> Option<TorusKnot> {
    let p = end.second_exponent()?;
    let (a, b) = (end.a.norm(), end.b.norm());
    let top = a.max(b);
    if p <= 0 || top == 0.0 || (a - b).abs() <= 1e-9 * top || (end.n as i32).gcd(&p) != 1 {
        return None;
    }
    let e = (end.n as i64 - 1) * p as i64;
    Some(TorusKnot { n: end.n, p: p as u32, predicted_e: if a > b { e } else { -e } })
}
