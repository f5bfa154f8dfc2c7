//! Oriented 2-planes in ℝ⁴: the sphere-product model (J±) and the quadric
//! model (Segre coordinates g±).

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Vec4 = [f64; 4];

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn dot(a: &Vec4, b: &Vec4) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &Vec4) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(a: f64, x: &Vec4, y: &Vec4) -> Vec4 {
    [a * x[0] + y[0], a * x[1] + y[1], a * x[2] + y[2], a * x[3] + y[3]]
}

pub fn scale(a: f64, x: &Vec4) -> Vec4 {
    [a * x[0], a * x[1], a * x[2], a * x[3]]
}

pub fn det4(m: [Vec4; 4]) -> f64 {
    // cofactor expansion along the first column vector's entries
    let mut a = [[0.0; 4]; 4];
    for (j, col) in m.iter().enumerate() {
        for i in 0..4 {
            a[i][j] = col[i];
        }
    }
    let minor = |r: usize, c: usize| {
        let rows: Vec<usize> = (0..4).filter(|&x| x != r).collect();
        let cols: Vec<usize> = (0..4).filter(|&x| x != c).collect();
        let g = |i: usize, j: usize| a[rows[i]][cols[j]];
        g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
            + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0))
    };
    (0..4).map(|c| if c % 2 == 0 { 1.0 } else { -1.0 } * a[0][c] * minor(0, c)).sum()
}

/// Oriented plane stored as an ordered orthonormal pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientedPlane {
    pub e1: Vec4,
    pub e2: Vec4,
}

impl OrientedPlane {
    /// Gram–Schmidt on `(u, v)`; fails when the angle between them is below 1e-8 rad.
    pub fn new(u: Vec4, v: Vec4) -> Result<Self> {
        let nu = norm(&u);
        if nu == 0.0 || !nu.is_finite() {
            return Err(Error::DegeneratePlane);
        }
        let e1 = scale(1.0 / nu, &u);
        let w = axpy(-dot(&e1, &v), &e1, &v);
        let nw = norm(&w);
        if nw <= 1e-8 * norm(&v) || nw == 0.0 {
            return Err(Error::DegeneratePlane);
        }
        Ok(OrientedPlane { e1, e2: scale(1.0 / nw, &w) })
    }

    pub fn basis(i: usize, j: usize) -> Self {
        let mut u = [0.0; 4];
        let mut v = [0.0; 4];
        u[i - 1] = 1.0;
        v[j - 1] = 1.0;
        OrientedPlane { e1: u, e2: v }
    }

    pub fn swapped(&self) -> Self {
        OrientedPlane { e1: self.e2, e2: self.e1 }
    }

    /// Plücker coordinates `[p12, p13, p14, p23, p24, p34]`.
    pub fn bivector(&self) -> [f64; 6] {
        let (a, b) = (&self.e1, &self.e2);
        let p = |i: usize, j: usize| a[i] * b[j] - a[j] * b[i];
        [p(0, 1), p(0, 2), p(0, 3), p(1, 2), p(1, 3), p(2, 3)]
    }

    /// Positive orthonormal frame `(e1, e2, e3, e4)` with the plane as its first two vectors.
    pub fn complete_frame(&self) -> [Vec4; 4] {
        let mut frame = vec![self.e1, self.e2];
        for k in 0..4 {
            let mut v = [0.0; 4];
            v[k] = 1.0;
            for f in &frame {
                v = axpy(-dot(f, &v), f, &v);
            }
            let n = norm(&v);
            if n > 0.3 {
                frame.push(scale(1.0 / n, &v));
            }
            if frame.len() == 4 {
                break;
            }
        }
        let mut m = [frame[0], frame[1], frame[2], frame[3]];
        if det4(m) < 0.0 {
            m[3] = scale(-1.0, &m[3]);
        }
        m
    }
}

/// Coordinates of a unit self-dual (or anti-self-dual) 2-vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereCoeff {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl SphereCoeff {
    pub fn norm(&self) -> f64 {
        (self.alpha * self.alpha + self.beta * self.beta + self.gamma * self.gamma).sqrt()
    }

    pub fn neg(&self) -> Self {
        SphereCoeff { alpha: -self.alpha, beta: -self.beta, gamma: -self.gamma }
    }
}

/// `J₊` in `{J₀, J₁, J₂}` and `J₋` in `{(e12−e34), (e13+e24), (e14−e23)}/√2`.
pub fn jplus_jminus(p: &OrientedPlane) -> Result<(SphereCoeff, SphereCoeff)> {
    if (norm(&p.e1) - 1.0).abs() > 1e-9 || (norm(&p.e2) - 1.0).abs() > 1e-9 || dot(&p.e1, &p.e2).abs() > 1e-9 {
        return Err(Error::DegeneratePlane);
    }
    let [p12, p13, p14, p23, p24, p34] = p.bivector();
    Ok((
        SphereCoeff { alpha: p12 + p34, beta: p13 - p24, gamma: p14 + p23 },
        SphereCoeff { alpha: p12 - p34, beta: p13 + p24, gamma: p14 - p23 },
    ))
}

/// Point of ℂ ∪ {∞}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtComplex {
    Finite(Complex64),
    Infinity,
}

impl ExtComplex {
    /// `num/den`, reading `x/0` as ∞.
    pub fn ratio(num: Complex64, den: Complex64) -> Self {
        if den.norm() == 0.0 {
            ExtComplex::Infinity
        } else {
            ExtComplex::Finite(num / den)
        }
    }

    /// Point on the unit sphere under inverse stereographic projection.
    pub fn to_sphere(&self) -> [f64; 3] {
        match *self {
            ExtComplex::Infinity => [0.0, 0.0, 1.0],
            ExtComplex::Finite(z) => {
                if !z.is_finite() {
                    return [0.0, 0.0, 1.0];
                }
                let n = z.norm_sqr();
                [2.0 * z.re / (1.0 + n), 2.0 * z.im / (1.0 + n), (n - 1.0) / (n + 1.0)]
            }
        }
    }

    /// Chordal distance, `2|a−b| / √((1+|a|²)(1+|b|²))`.
    pub fn chordal(&self, o: &ExtComplex) -> f64 {
        match (*self, *o) {
            (ExtComplex::Infinity, ExtComplex::Infinity) => 0.0,
            (ExtComplex::Finite(a), ExtComplex::Infinity) | (ExtComplex::Infinity, ExtComplex::Finite(a)) => {
                2.0 / (1.0 + a.norm_sqr()).sqrt()
            }
            (ExtComplex::Finite(a), ExtComplex::Finite(b)) => {
                if a.norm() > 1e150 || b.norm() > 1e150 {
                    let (s, t) = (self.to_sphere(), o.to_sphere());
                    return ((s[0] - t[0]).powi(2) + (s[1] - t[1]).powi(2) + (s[2] - t[2]).powi(2)).sqrt();
                }
                2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
            }
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtComplex::Infinity)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadricPoint {
    pub phi: [Complex64; 4],
}

impl QuadricPoint {
    pub fn quadric_residual(&self) -> f64 {
        let s: Complex64 = self.phi.iter().map(|p| p * p).sum();
        let n: f64 = self.phi.iter().map(|p| p.norm_sqr()).sum();
        s.norm() / n
    }
}

/// `[ε₁ − iε₂]`.
pub fn quadric_embed(p: &OrientedPlane) -> Result<QuadricPoint> {
    jplus_jminus(p)?;
    let phi = [0, 1, 2, 3].map(|k| Complex64::new(p.e1[k], -p.e2[k]));
    Ok(QuadricPoint { phi })
}

/// Chooses the fraction with the larger denominator; `x/0` with `x ≠ 0` is ∞.
fn pick(n1: Complex64, d1: Complex64, n2: Complex64, d2: Complex64, scale: f64) -> Result<ExtComplex> {
    let tiny = 1e-14 * scale;
    let (n, d) = if d1.norm() >= d2.norm() { (n1, d1) } else { (n2, d2) };
    if d.norm() > tiny {
        return Ok(ExtComplex::Finite(n / d));
    }
    if n1.norm().max(n2.norm()) > tiny {
        Ok(ExtComplex::Infinity)
    } else {
        Err(Error::NotOnQuadric)
    }
}

/// Segre coordinates `(g₊, g₋)`.
pub fn segre(q: &QuadricPoint) -> Result<(ExtComplex, ExtComplex)> {
    let [p1, p2, p3, p4] = q.phi;
    let scale = q.phi.iter().map(|p| p.norm()).fold(0.0, f64::max);
    if scale == 0.0 || q.quadric_residual() > 1e-10 {
        return Err(Error::NotOnQuadric);
    }
    let gp = pick(p3 + I * p4, p1 - I * p2, p1 + I * p2, -p3 + I * p4, scale)?;
    let gm = pick(-p3 + I * p4, p1 - I * p2, p1 + I * p2, p3 + I * p4, scale)?;
    Ok((gp, gm))
}

fn stereo_chart(j: &SphereCoeff, sign_beta: f64) -> ExtComplex {
    let w = Complex64::new(j.gamma, -sign_beta * j.beta);
    if j.alpha <= 0.0 {
        ExtComplex::Finite(w / (1.0 - j.alpha))
    } else {
        // (γ ∓ iβ)/(1−α) = (1+α)/(γ ± iβ) on the unit sphere
        ExtComplex::ratio(Complex64::new(1.0 + j.alpha, 0.0), w.conj())
    }
}

/// Stereographic projection of `J₊` from `J₀`: `(γ − iβ)/(1 − α)`.
pub fn stereo(j: &SphereCoeff) -> ExtComplex {
    stereo_chart(j, 1.0)
}

/// Chart for the `J₋` factor: `(γ + iβ)/(1 − α)`.
pub fn stereo_minus(j: &SphereCoeff) -> ExtComplex {
    stereo_chart(j, -1.0)
}

/// `(g₊, stereo(J₊), agree)` with agreement in chordal distance below 1e-9.
pub fn verify_gauss_identity(p: &OrientedPlane) -> Result<(ExtComplex, ExtComplex, bool)> {
    let (gp, _) = segre(&quadric_embed(p)?)?;
    let (jp, _) = jplus_jminus(p)?;
    let s = stereo(&jp);
    Ok((gp, s, gp.chordal(&s) < 1e-9))
}

/// Same check for the minus factor.
pub fn verify_gauss_identity_minus(p: &OrientedPlane) -> Result<(ExtComplex, ExtComplex, bool)> {
    let (_, gm) = segre(&quadric_embed(p)?)?;
    let (_, jm) = jplus_jminus(p)?;
    let s = stereo_minus(&jm);
    Ok((gm, s, gm.chordal(&s) < 1e-9))
}

/// `(g₊, g₋)` of a plane.
pub fn plane_gauss(p: &OrientedPlane) -> Result<(ExtComplex, ExtComplex)> {
    segre(&quadric_embed(p)?)
}

/// The `J₀`-complex line spanned by `ε₁ = (a,b,c,d)`, `ε₂ = (−b,a,−d,c)`,
/// where `λ = a+ib`, `μ = c+id`.
pub fn j0_complex_plane(lambda: Complex64, mu: Complex64) -> Result<OrientedPlane> {
    let (a, b, c, d) = (lambda.re, lambda.im, mu.re, mu.im);
    OrientedPlane::new([a, b, c, d], [-b, a, -d, c])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: &SphereCoeff, b: [f64; 3]) -> bool {
        (a.alpha - b[0]).abs() < 1e-12 && (a.beta - b[1]).abs() < 1e-12 && (a.gamma - b[2]).abs() < 1e-12
    }

    fn fin(z: ExtComplex) -> Complex64 {
        match z {
            ExtComplex::Finite(z) => z,
            ExtComplex::Infinity => panic!("unexpected ∞"),
        }
    }

    pub(crate) fn random_plane(rng: &mut ChaCha8Rng) -> OrientedPlane {
        loop {
            let u: Vec4 = [0; 4].map(|_| rng.gen_range(-1.0..1.0));
            let v: Vec4 = [0; 4].map(|_| rng.gen_range(-1.0..1.0));
            if let Ok(p) = OrientedPlane::new(u, v) {
                return p;
            }
        }
    }

    #[test]
    fn sphere_coordinates_of_basis_planes() {
        let (jp, jm) = jplus_jminus(&OrientedPlane::basis(1, 2)).unwrap();
        assert!(close(&jp, [1.0, 0.0, 0.0]) && close(&jm, [1.0, 0.0, 0.0]));
        let (jp, _) = jplus_jminus(&OrientedPlane::basis(1, 3)).unwrap();
        assert!(close(&jp, [0.0, 1.0, 0.0]));
        let (jp, jm34) = jplus_jminus(&OrientedPlane::basis(3, 4)).unwrap();
        assert!(close(&jp, [1.0, 0.0, 0.0]));
        assert!(close(&jm34, [-1.0, 0.0, 0.0]));
    }

    #[test]
    fn quadric_embedding_of_basis_planes() {
        let q = quadric_embed(&OrientedPlane::basis(1, 2)).unwrap();
        assert_eq!(q.phi, [Complex64::new(1.0, 0.0), -I, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]);
        let q = quadric_embed(&OrientedPlane::basis(1, 4)).unwrap();
        assert_eq!(q.phi[3], -I);
    }

    #[test]
    fn segre_of_basis_planes() {
        let g = |i, j| segre(&quadric_embed(&OrientedPlane::basis(i, j)).unwrap()).unwrap().0;
        assert!(g(1, 2).is_infinite());
        assert!((fin(g(1, 3)) + I).norm() < 1e-15);
        assert!((fin(g(1, 4)) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn stereographic_chart() {
        assert!(stereo(&SphereCoeff { alpha: 1.0, beta: 0.0, gamma: 0.0 }).is_infinite());
        assert!((fin(stereo(&SphereCoeff { alpha: 0.0, beta: 0.0, gamma: 1.0 })) - 1.0).norm() < 1e-15);
        assert!((fin(stereo(&SphereCoeff { alpha: 0.0, beta: 1.0, gamma: 0.0 })) + I).norm() < 1e-15);
    }

    #[test]
    fn gauss_identity_on_examples() {
        let (a, b, ok) = verify_gauss_identity(&OrientedPlane::basis(1, 2)).unwrap();
        assert!(a.is_infinite() && b.is_infinite() && ok);
        let (a, b, ok) = verify_gauss_identity(&OrientedPlane::basis(1, 4)).unwrap();
        assert!((fin(a) - 1.0).norm() < 1e-12 && (fin(b) - 1.0).norm() < 1e-12 && ok);
        // g₋(e1∧e3) = +i in both computations
        let (a, b, ok) = verify_gauss_identity_minus(&OrientedPlane::basis(1, 3)).unwrap();
        assert!((fin(a) - I).norm() < 1e-12 && ok, "{a:?} {b:?}");
    }

    #[test]
    fn gauss_identity_random_planes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let p = random_plane(&mut rng);
            assert!(verify_gauss_identity(&p).unwrap().2);
            assert!(verify_gauss_identity_minus(&p).unwrap().2);
            let (jp, jm) = jplus_jminus(&p).unwrap();
            assert!((jp.norm() - 1.0).abs() < 1e-12 && (jm.norm() - 1.0).abs() < 1e-12);
            assert!(quadric_embed(&p).unwrap().quadric_residual() < 1e-12);
        }
    }

    #[test]
    fn orientation_reversal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_plane(&mut rng);
        let q = quadric_embed(&p.swapped()).unwrap();
        for k in 0..4 {
            assert_eq!(q.phi[k], Complex64::new(p.e2[k], -p.e1[k]));
        }
        let (jp, jm) = jplus_jminus(&p).unwrap();
        let (rp, rm) = jplus_jminus(&p.swapped()).unwrap();
        assert!(close(&rp, [-jp.alpha, -jp.beta, -jp.gamma]) && close(&rm, [-jm.alpha, -jm.beta, -jm.gamma]));
    }

    #[test]
    fn basis_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = random_plane(&mut rng);
        let t: f64 = 0.73;
        let rotated = OrientedPlane::new(
            axpy(t.sin(), &p.e2, &scale(t.cos(), &p.e1)),
            axpy(t.cos(), &p.e2, &scale(-t.sin(), &p.e1)),
        )
        .unwrap();
        for (a, b) in p.bivector().iter().zip(rotated.bivector()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_lines_of_j0() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let l = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let m = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let p = j0_complex_plane(l, m).unwrap();
            let q = quadric_embed(&p).unwrap();
            // proportional to (λ, −iλ, μ, −iμ)
            let lam_n = (l.norm_sqr() + m.norm_sqr()).sqrt();
            let target = [l, -I * l, m, -I * m].map(|v| v / lam_n);
            for k in 0..4 {
                assert!((q.phi[k] - target[k]).norm() < 1e-12);
            }
            let (gp, gm) = segre(&q).unwrap();
            assert!(gp.is_infinite());
            assert!(gm.chordal(&ExtComplex::Finite(l / m)) < 1e-9);
        }
    }

    #[test]
    fn frame_completion_is_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let f = random_plane(&mut rng).complete_frame();
            assert!((det4(f) - 1.0).abs() < 1e-12);
            for i in 0..4 {
                for j in 0..4 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot(&f[i], &f[j]) - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn degenerate_plane_rejected() {
        assert_eq!(OrientedPlane::new([1.0, 0.0, 0.0, 0.0], [2.0, 0.0, 0.0, 1e-10]), Err(Error::DegeneratePlane));
    }
}
