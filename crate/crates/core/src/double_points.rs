//! Self-intersections: a seeded Levenberg–Marquardt search for
//! `F(z₁) = F(z₂)`, intersection signs, and closed forms for two explicit
//! families.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::complex_fn::{CRat, MeroFn};
use crate::error::{Error, Result};
use crate::grassmann::{self, Vec4};
use crate::surface::SurfaceSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct DoublePoint {
    pub z1: Complex64,
    pub z2: Complex64,
    pub image: Vec4,
    /// `None` when the tangent planes are not transverse.
    pub sign: Option<i8>,
    pub residual: f64,
    /// `det[F_x(z₁), F_y(z₁), F_x(z₂), F_y(z₂)] / (|F_x||F_y|)²`.
    pub transversality: f64,
}

impl DoublePoint {
    fn new(s: &SurfaceSpec, z1: Complex64, z2: Complex64) -> Self {
        let (z1, z2) = canonical_pair(z1, z2);
        let (a, b) = (s.eval(z1), s.eval(z2));
        let residual = grassmann::norm(&sub(&a, &b));
        let t = transversality(s, z1, z2);
        DoublePoint {
            z1,
            z2,
            image: grassmann::scale(0.5, &grassmann::axpy(1.0, &a, &b)),
            sign: (t.abs() > 1e-6).then_some(if t > 0.0 { 1 } else { -1 }),
            residual,
            transversality: t,
        }
    }

    /// Same unordered pair within `tol` (relative to the point moduli).
    pub fn same_as(&self, o: &DoublePoint, tol: f64) -> bool {
        let sc = 1f64.max(self.z1.norm()).max(self.z2.norm());
        let d = |a: Complex64, b: Complex64| (a - b).norm();
        d(self.z1, o.z1).max(d(self.z2, o.z2)).min(d(self.z1, o.z2).max(d(self.z2, o.z1))) < tol * sc
    }
}

fn sub(a: &Vec4, b: &Vec4) -> Vec4 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

fn canonical_pair(z1: Complex64, z2: Complex64) -> (Complex64, Complex64) {
    if (z1.re, z1.im) <= (z2.re, z2.im) {
        (z1, z2)
    } else {
        (z2, z1)
    }
}

fn transversality(s: &SurfaceSpec, z1: Complex64, z2: Complex64) -> f64 {
    let (a, b) = s.jacobian(z1);
    let (c, d) = s.jacobian(z2);
    let n = grassmann::norm(&a) * grassmann::norm(&b) * grassmann::norm(&c) * grassmann::norm(&d);
    grassmann::det4([a, b, c, d]) / n
}

/// Orientation sign of the intersection of the two sheets.
pub fn intersection_sign(s: &SurfaceSpec, dp: &DoublePoint) -> Result<i8> {
    let t = transversality(s, dp.z1, dp.z2);
    if t.abs() <= 1e-6 {
        return Err(Error::TangentPlanesNotTransverse);
    }
    Ok(if t > 0.0 { 1 } else { -1 })
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub radius: f64,
    pub seed: u64,
    pub seeds: usize,
    pub shell_seeds: usize,
}

impl SearchConfig {
    pub fn new(radius: f64) -> Self {
        SearchConfig { radius, seed: 0, seeds: 4096, shell_seeds: 4096 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct DoublePointSearch {
    /// Distinct roots outside any detected family.
    pub points: Vec<DoublePoint>,
    /// Non-transverse roots; a curve of self-intersection when numerous.
    pub family: Vec<DoublePoint>,
    pub is_family: bool,
    pub seeds: usize,
    pub converged: usize,
}

const FAMILY_MIN: usize = 32;

impl DoublePointSearch {
    /// `Σ signs`, or `None` when some point is tangential or a family is present.
    pub fn signed_total(&self) -> Option<i64> {
        if self.is_family {
            return None;
        }
        self.points.iter().map(|p| p.sign.map(i64::from)).sum()
    }

    pub fn to_csv(&self) -> String {
        points_csv(self.points.iter().chain(&self.family))
    }
}

pub fn points_csv<'a>(pts: impl Iterator<Item = &'a DoublePoint>) -> String {
    let mut out = String::from("re_z1,im_z1,re_z2,im_z2,x1,x2,x3,x4,sign,residual\n");
    for p in pts {
        let _ = writeln!(
            out,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{:.3e}",
            p.z1.re,
            p.z1.im,
            p.z2.re,
            p.z2.im,
            p.image[0],
            p.image[1],
            p.image[2],
            p.image[3],
            p.sign.map_or("0".to_string(), |s| s.to_string()),
            p.residual
        );
    }
    out
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Scrambled Halton seeds in log-radius/angle, then equal-modulus shells.
fn seed_pairs(cfg: &SearchConfig) -> Vec<(Complex64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shift: [f64; 7] = std::array::from_fn(|_| rng.gen());
    let (lo, hi) = ((1e-2f64).ln(), cfg.radius.ln());
    let u = |x: f64, k: usize| (x + shift[k]).fract();
    let r = |x: f64| (lo + x * (hi - lo)).exp();
    let mut out = Vec::with_capacity(cfg.seeds + cfg.shell_seeds);
    for i in 1..=cfg.seeds {
        let z1 = Complex64::from_polar(r(u(radical_inverse(i, 2), 0)), TAU * u(radical_inverse(i, 3), 1));
        let z2 = Complex64::from_polar(r(u(radical_inverse(i, 5), 2)), TAU * u(radical_inverse(i, 7), 3));
        out.push((z1, z2));
    }
    for i in 1..=cfg.shell_seeds {
        let rr = r(u(radical_inverse(i, 11), 4));
        let t1 = TAU * u(radical_inverse(i, 13), 5);
        let dt = PI * (0.02 + 1.96 * u(radical_inverse(i, 17), 6));
        out.push((Complex64::from_polar(rr, t1), Complex64::from_polar(rr, t1 + dt)));
    }
    out
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for c in 0..4 {
        let p = (c..4).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..4 {
            let f = a[r][c] / a[c][c];
            for k in c..4 {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 4];
    for c in (0..4).rev() {
        x[c] = (b[c] - (c + 1..4).map(|k| a[c][k] * x[k]).sum::<f64>()) / a[c][c];
    }
    Some(x)
}

/// `G = D/|X|` with `D = F(z₁) − F(z₂)`, `X = z₁ − z₂`, `Y = z₁ + z₂`, and
/// its Jacobian in `(Re X, Im X, Re Y, Im Y)`.
fn deflated(s: &SurfaceSpec, v: &[f64; 4]) -> ([f64; 4], [[f64; 4]; 4], f64, Complex64, Complex64) {
    let x = Complex64::new(v[0], v[1]);
    let y = Complex64::new(v[2], v[3]);
    let (z1, z2) = ((y + x) * 0.5, (y - x) * 0.5);
    let d = sub(&s.eval(z1), &s.eval(z2));
    let (fx1, fy1) = s.jacobian(z1);
    let (fx2, fy2) = s.jacobian(z2);
    let m = x.norm();
    let mut j = [[0.0; 4]; 4];
    let mut g = [0.0; 4];
    for r in 0..4 {
        g[r] = d[r] / m;
        let dd = [0.5 * (fx1[r] + fx2[r]), 0.5 * (fy1[r] + fy2[r]), 0.5 * (fx1[r] - fx2[r]), 0.5 * (fy1[r] - fy2[r])];
        let dm = [x.re / m, x.im / m, 0.0, 0.0];
        for c in 0..4 {
            j[r][c] = dd[c] / m - d[r] * dm[c] / (m * m);
        }
    }
    (g, j, grassmann::norm(&d), z1, z2)
}

fn tolerance(s: &SurfaceSpec, z1: Complex64) -> f64 {
    1e-10 * grassmann::norm(&s.eval(z1)).max(1.0)
}

/// Plain Newton on `F(z₁) − F(z₂)` in `(z₁, z₂)`; only moves while the residual drops.
fn polish(s: &SurfaceSpec, mut z1: Complex64, mut z2: Complex64) -> (Complex64, Complex64) {
    let mut res = grassmann::norm(&sub(&s.eval(z1), &s.eval(z2)));
    for _ in 0..6 {
        let d = sub(&s.eval(z1), &s.eval(z2));
        let (fx1, fy1) = s.jacobian(z1);
        let (fx2, fy2) = s.jacobian(z2);
        let m: [[f64; 4]; 4] = std::array::from_fn(|r| [fx1[r], fy1[r], -fx2[r], -fy2[r]]);
        let Some(st) = solve4(m, d.map(|t| -t)) else { break };
        let (a, b) = (z1 + Complex64::new(st[0], st[1]), z2 + Complex64::new(st[2], st[3]));
        let r = grassmann::norm(&sub(&s.eval(a), &s.eval(b)));
        if !(r < res) {
            break;
        }
        (z1, z2, res) = (a, b, r);
    }
    (z1, z2)
}

/// Levenberg–Marquardt from one seed; `Some((z₁, z₂))` on convergence.
fn lm(s: &SurfaceSpec, z1: Complex64, z2: Complex64, radius: f64) -> Option<(Complex64, Complex64)> {
    let (x, y) = (z1 - z2, z1 + z2);
    let mut v = [x.re, x.im, y.re, y.im];
    let (mut g, mut j, mut res, mut a, mut b) = deflated(s, &v);
    let mut cost: f64 = g.iter().map(|t| t * t).sum();
    let mut mu = 1e-3;
    for _ in 0..300 {
        if res < tolerance(s, a) * 1e-3 {
            break;
        }
        let mut jtj = [[0.0; 4]; 4];
        let mut jtg = [0.0; 4];
        for r in 0..4 {
            for c in 0..4 {
                jtg[c] -= j[r][c] * g[r];
                for k in 0..4 {
                    jtj[c][k] += j[r][c] * j[r][k];
                }
            }
        }
        let mut accepted = false;
        for _ in 0..30 {
            let mut m = jtj;
            for c in 0..4 {
                m[c][c] += mu * (jtj[c][c] + 1e-300);
            }
            let Some(step) = solve4(m, jtg) else {
                mu *= 4.0;
                continue;
            };
            let trial = [v[0] + step[0], v[1] + step[1], v[2] + step[2], v[3] + step[3]];
            if Complex64::new(trial[0], trial[1]).norm() == 0.0 {
                mu *= 4.0;
                continue;
            }
            let t = deflated(s, &trial);
            let tc: f64 = t.0.iter().map(|q| q * q).sum();
            if tc.is_finite() && tc < cost {
                v = trial;
                (g, j, res, a, b) = t;
                cost = tc;
                mu = (mu / 3.0).max(1e-15);
                accepted = true;
                break;
            }
            mu *= 4.0;
        }
        if !accepted || a.norm() > 4.0 * radius || b.norm() > 4.0 * radius {
            break;
        }
    }
    (res < tolerance(s, a)).then(|| polish(s, a, b))
}

pub fn find_double_points(s: &SurfaceSpec, radius: f64) -> DoublePointSearch {
    find_double_points_with(s, &SearchConfig::new(radius))
}

pub fn find_double_points_with(s: &SurfaceSpec, cfg: &SearchConfig) -> DoublePointSearch {
    let seeds = seed_pairs(cfg);
    let punct = s.is_punctured();
    let roots: Vec<Option<(Complex64, Complex64)>> = seeds
        .par_iter()
        .map(|&(z1, z2)| {
            let (a, b) = lm(s, z1, z2, cfg.radius)?;
            let sc = 1f64.max(a.norm()).max(b.norm());
            let inside = a.norm() <= cfg.radius * (1.0 + 1e-9) && b.norm() <= cfg.radius * (1.0 + 1e-9);
            let off_puncture = !punct || (a.norm() > 1e-9 && b.norm() > 1e-9);
            ((a - b).norm() > 1e-4 * sc && inside && off_puncture).then_some(canonical_pair(a, b))
        })
        .collect();
    let mut found: Vec<(Complex64, Complex64)> = roots.into_iter().flatten().collect();
    let converged = found.len();
    found.sort_by(|p, q| (p.0.re, p.0.im, p.1.re, p.1.im).partial_cmp(&(q.0.re, q.0.im, q.1.re, q.1.im)).unwrap());
    let mut kept: Vec<DoublePoint> = Vec::new();
    for (a, b) in found {
        let dp = DoublePoint::new(s, a, b);
        if !kept.iter().any(|k| k.same_as(&dp, 1e-6)) {
            kept.push(dp);
        }
    }
    let (points, family): (Vec<_>, Vec<_>) = kept.into_iter().partition(|p| p.sign.is_some());
    let is_family = family.len() >= FAMILY_MIN;
    let (points, family) = if is_family {
        (points, family)
    } else {
        let mut all = points;
        all.extend(family);
        all.sort_by(|p, q| (p.z1.re, p.z1.im).partial_cmp(&(q.z1.re, q.z1.im)).unwrap());
        (all, Vec::new())
    };
    DoublePointSearch { points, family, is_family, seeds: seeds.len(), converged }
}

fn c(z: Complex64) -> CRat {
    CRat::from_c64(z)
}

/// `F = (z³/3 − a²z, −β²z, βz²/2 + βaz, βz²/2 − βaz)`.
pub fn prop11_surface(a: Complex64, beta: Complex64) -> Result<SurfaceSpec> {
    let (a, b) = (c(a), c(beta));
    let half = CRat::ratio(1, 2);
    let ab = &b * &a;
    let f1 = MeroFn::from_terms([(3, CRat::ratio(1, 3)), (1, -(&a * &a))]);
    let f2 = MeroFn::monomial(-(&b * &b), 1);
    let f3 = MeroFn::from_terms([(2, &b * &half), (1, ab.clone())]);
    let f4 = MeroFn::from_terms([(2, &b * &half), (1, -ab)]);
    SurfaceSpec::from_functions("prop11", [f1, f2, f3, f4])
}

/// `F = (2z^N, z^N, −(2N²/(2N−1)) z^{2N−1}, z)`.
pub fn example2_surface(n: u32) -> Result<SurfaceSpec> {
    let n = n as i32;
    let f = [
        MeroFn::monomial(CRat::from_int(2), n),
        MeroFn::monomial(CRat::one(), n),
        MeroFn::monomial(CRat::ratio(-(2 * n * n) as i64, (2 * n - 1) as i64), 2 * n - 1),
        MeroFn::monomial(CRat::one(), 1),
    ];
    SurfaceSpec::from_functions(format!("example2_N{n}"), f)
}

#[derive(Clone, Debug)]
pub enum FamilyAnalysis {
    Embedded {
        certificate: String,
    },
    NonEmbedded {
        /// `X̄ = kX`.
        k: Complex64,
        /// Unit directions of the lines carrying `X` and `Y`.
        x_direction: Complex64,
        y_direction: Complex64,
        /// `|X|² − 3|Y|² = rhs`.
        hyperbola_rhs: f64,
        samples: Vec<DoublePoint>,
    },
}

impl FamilyAnalysis {
    pub fn is_embedded(&self) -> bool {
        matches!(self, FamilyAnalysis::Embedded { .. })
    }

    /// Whether `{z₁, z₂}` satisfies the three family equations within `tol`
    /// (relative to `1 + |X|²`).
    pub fn contains(&self, a: Complex64, z1: Complex64, z2: Complex64, tol: f64) -> bool {
        let FamilyAnalysis::NonEmbedded { k, hyperbola_rhs, .. } = self else {
            return false;
        };
        let (x, y) = (z1 - z2, z1 + z2);
        let sc = 1.0 + x.norm_sqr();
        (x.conj() - k * x).norm() < tol * sc.sqrt()
            && (y.conj() + a.conj() / a * y).norm() < tol * sc.sqrt()
            && (x.norm_sqr() - 3.0 * y.norm_sqr() - hyperbola_rhs).abs() < tol * sc
    }
}

/// Closed-form double points of the quartic (−4π) family: the surface
/// embeds iff `β̄ā² ≠ βa²`; otherwise the self-intersection is the curve
/// `X̄ = kX`, `Ȳ = −(ā/a)Y`, `|X|² − 3|Y|² = 12(|a|² + |β|²)`.
pub fn quartic_family_solver(a: Complex64, beta: Complex64) -> Result<FamilyAnalysis> {
    if beta.norm() == 0.0 {
        return Err(Error::BetaZero);
    }
    if a.norm() == 0.0 {
        return Err(Error::DegenerateParameter("a = 0 collapses the phase equations".into()));
    }
    let lhs = beta.conj() * a.conj() * a.conj();
    let rhs = beta * a * a;
    let gap = (lhs - rhs).norm();
    if gap > 1e-12 * beta.norm() * a.norm_sqr() {
        return Ok(FamilyAnalysis::Embedded {
            certificate: format!("conj(β)·conj(a)² − β·a² = {:.6}{:+.6}i ≠ 0: no X satisfies both phase equations", (lhs - rhs).re, (lhs - rhs).im),
        });
    }
    let s = prop11_surface(a, beta)?;
    let k = a * beta / (a.conj() * beta.conj());
    let x_dir = Complex64::from_polar(1.0, -k.arg() / 2.0);
    let y_dir = Complex64::from_polar(1.0, -(-a.conj() / a).arg() / 2.0);
    let h = 12.0 * (a.norm_sqr() + beta.norm_sqr());
    let samples = [0.0, 0.25, -0.25, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 4.0, -4.0]
        .iter()
        .map(|&t| {
            let y = y_dir * t;
            let x = x_dir * (h + 3.0 * t * t).sqrt();
            DoublePoint::new(&s, (y + x) * 0.5, (y - x) * 0.5)
        })
        .collect();
    Ok(FamilyAnalysis::NonEmbedded { k, x_direction: x_dir, y_direction: y_dir, hyperbola_rhs: h, samples })
}

/// The `N(N−1)` double points of the planar degenerate family: the second
/// factor vanishes on `|z|^{2N−2} = (2N−1)/(2N²)`, `e^{2iNθ} = 1`, and the
/// first factor is constant on orbits of `z ↦ νz`, `ν^N = 1`.
pub fn degenerate_family_solver(n: u32) -> Result<Vec<DoublePoint>> {
    if n < 2 {
        return Err(Error::DegenerateParameter(format!("N = {n} < 2")));
    }
    let s = example2_surface(n)?;
    let nf = n as f64;
    let rho = ((2.0 * nf - 1.0) / (2.0 * nf * nf)).powf(1.0 / (2.0 * nf - 2.0));
    let zs: Vec<Complex64> = (0..2 * n).map(|k| Complex64::from_polar(rho, PI * k as f64 / nf)).collect();
    let mut out = Vec::new();
    for i in 0..zs.len() {
        for j in (i + 2..zs.len()).step_by(2) {
            out.push(DoublePoint::new(&s, zs[i], zs[j]));
        }
    }
    Ok(out)
}
