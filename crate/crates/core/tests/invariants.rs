use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linkinf::double_points::{self, SearchConfig};
use linkinf::grassmann::{self, Vec4};
use linkinf::link::{self, KnotSample};
use linkinf::report::{build_report, ReportOptions};
use linkinf::surface::{self, SurfaceSpec};
use linkinf::{gallery, knots};

fn spec(name: &str) -> SurfaceSpec {
    gallery::fixture(name).unwrap().to_spec().unwrap()
}

#[test]
fn gallery_regressions_pass() {
    for d in gallery::all() {
        let r = build_report(&d, &ReportOptions::default()).unwrap();
        let bad: Vec<_> = r.regression.iter().filter(|c| !c.ok).collect();
        assert!(bad.is_empty(), "{}: {bad:?}", d.label);
        let want = if d.label == "example3_as_printed" { 1 } else { 0 };
        assert_eq!(r.exit_code, want, "{}: {}", d.label, r.summary);
    }
}

#[test]
fn algebraic_length_ignores_projection_direction() {
    for name in ["example2_N2", "example3_corrected", "prop16_minus8pi"] {
        let s = spec(name);
        let end = &surface::end_profiles(&s).unwrap()[0];
        let k = link::stabilize_radius(&s, end).unwrap();
        let base = k.braid.winding_e;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            let b = link::extract_braid_with(&k.sample, end, phi).unwrap();
            assert_eq!(link::algebraic_length(&b).unwrap(), base, "{name} at φ = {phi}");
        }
    }
}

#[test]
fn words_are_stable_beyond_the_stable_radius() {
    for name in ["example2_N2", "prop16_minus8pi", "example3_corrected"] {
        let s = spec(name);
        let end = &surface::end_profiles(&s).unwrap()[0];
        let k = link::stabilize_radius(&s, end).unwrap();
        let canon = |w: &knots::BraidWord| w.free_reduce().canonical_rotation();
        for f in [4.0, 16.0] {
            let far = link::braid_at(&s, end, k.radius * f).unwrap();
            assert_eq!(canon(&far.braid.word), canon(&k.braid.word), "{name} at {f}R");
        }
    }
}

#[test]
fn writhe_ignores_pushoff_direction() {
    for name in ["minus6pi_example4", "example2_N2"] {
        let s = spec(name);
        let ends = surface::end_profiles(&s).unwrap();
        let l = link::link_at_infinity(&s, &ends, None).unwrap();
        let base = link::writhe_of_link(&l, &ends, link::default_pushoff(&ends)).unwrap().assembled;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut tried = 0;
        while tried < 5 {
            let x: Vec4 = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            match link::writhe_of_link(&l, &ends, x) {
                Ok(w) => {
                    assert_eq!(w.assembled, base, "{name}");
                    assert_eq!(w.direct, base, "{name}");
                    tried += 1;
                }
                Err(linkinf::Error::XInTangentPlane) => {}
                Err(e) => panic!("{name}: {e}"),
            }
        }
    }
}

#[test]
fn pushoff_inside_a_tangent_plane_is_rejected() {
    let s = spec("example2_N2");
    let ends = surface::end_profiles(&s).unwrap();
    let l = link::link_at_infinity(&s, &ends, None).unwrap();
    let x = ends[0].frame[0];
    assert_eq!(link::writhe_of_link(&l, &ends, x).unwrap_err(), linkinf::Error::XInTangentPlane);
}

fn rotation(seed: u64) -> [Vec4; 4] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<Vec4> = Vec::new();
    while q.len() < 4 {
        let mut v: Vec4 = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        for u in &q {
            v = grassmann::axpy(-grassmann::dot(&v, u), u, &v);
        }
        let n = grassmann::norm(&v);
        if n > 1e-3 {
            q.push(grassmann::scale(1.0 / n, &v));
        }
    }
    if grassmann::det4([q[0], q[1], q[2], q[3]]) < 0.0 {
        q[3] = grassmann::scale(-1.0, &q[3]);
    }
    [q[0], q[1], q[2], q[3]]
}

fn rotate(k: &KnotSample, m: &[Vec4; 4]) -> KnotSample {
    let mut out = k.clone();
    for p in &mut out.points {
        *p = std::array::from_fn(|r| grassmann::dot(&m[r], p));
    }
    out
}

fn minus6pi_link() -> (KnotSample, KnotSample) {
    let s = spec("minus6pi_example4");
    let ends = surface::end_profiles(&s).unwrap();
    let l = link::link_at_infinity(&s, &ends, None).unwrap();
    (l.knots[0].clone(), l.knots[1].clone())
}

#[test]
fn linking_is_symmetric() {
    let (a, b) = minus6pi_link();
    let ab = link::linking_number(&a, &b).unwrap();
    assert_eq!(ab, link::linking_number(&b, &a).unwrap());
    assert_eq!(ab, -2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn linking_survives_rotations(seed in 0u64..1000) {
        let (a, b) = minus6pi_link();
        let m = rotation(seed);
        prop_assert_eq!(link::linking_number(&rotate(&a, &m), &rotate(&b, &m)).unwrap(), -2);
    }

    #[test]
    fn double_points_ignore_the_seed(seed in 0u64..1000) {
        let s = double_points::example2_surface(2).unwrap();
        let cfg = SearchConfig { seed, seeds: 1024, shell_seeds: 1024, ..SearchConfig::new(50.0) };
        let found = double_points::find_double_points_with(&s, &cfg);
        prop_assert_eq!(found.points.len(), 2);
        prop_assert_eq!(found.signed_total(), Some(2));
    }

    #[test]
    fn torus_braids_match_closed_form(n in 2usize..5, q in 1usize..7) {
        prop_assume!(num_integer::gcd(n, q) == 1);
        let d = knots::alexander_poly(&knots::torus_braid(n, q)).unwrap();
        prop_assert_eq!(d, knots::torus_alexander(n as u32, q as u32).unwrap());
    }
}
