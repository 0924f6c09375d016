use kanvex::gam::{
    check_monotone, component_envelopes, gam_relaxation_eval, gam_relaxation_min, Direction, GamRelaxation, Mpgam,
};
use kanvex::oracles::gam_grid_min;
use kanvex::{Error, Interval, Polynomial};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

fn poly(c: &[f64]) -> Polynomial {
    Polynomial::new(c.to_vec())
}

fn unit(d: usize) -> Vec<Interval> {
    vec![Interval { lo: -1.0, hi: 1.0 }; d]
}

fn random_point(rng: &mut ChaCha8Rng, b: &[Interval]) -> Vec<f64> {
    b.iter().map(|iv| rng.random_range(iv.lo..=iv.hi)).collect()
}

#[test]
fn component_envelope_examples() {
    let g = Mpgam::new(vec![poly(&[0., 0., 1.]), poly(&[1., -1., 0., 0., 1.])], Polynomial::identity(), unit(2)).unwrap();
    let ce = component_envelopes(&g, TOL).unwrap();
    assert!(ce.lower.iter().all(|e| e.is_exact()));

    let g = Mpgam::new(vec![poly(&[0., 0., -1.])], Polynomial::identity(), unit(1)).unwrap();
    let ce = component_envelopes(&g, TOL).unwrap();
    for x in [-1.0, -0.3, 0.0, 0.8, 1.0] {
        assert!((ce.lower[0].eval(x).unwrap() + 1.0).abs() < 1e-12);
    }
    assert!((ce.range.lo + 1.0).abs() < 1e-12 && ce.range.hi.abs() < 1e-12, "{:?}", ce.range);
}

#[test]
fn range_contains_component_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for seed in 0..10 {
        let g = Mpgam::generate_random(3, 5, seed);
        let iv = component_envelopes(&g, TOL).unwrap().range;
        for _ in 0..10_000 {
            let x = random_point(&mut rng, g.input_box());
            let s: f64 = g.components().iter().zip(&x).map(|(p, &v)| p.eval(v)).sum();
            assert!(s >= iv.lo - 1e-12 && s <= iv.hi + 1e-12);
        }
    }
}

#[test]
fn monotone_examples() {
    let wide = Interval { lo: -2.0, hi: 2.0 };
    assert_eq!(check_monotone(&Polynomial::identity(), wide, TOL), Ok(Direction::Increasing));
    assert_eq!(check_monotone(&poly(&[0., -1., 0., -1.]), wide, TOL), Ok(Direction::Decreasing));
    assert_eq!(check_monotone(&poly(&[0., 0., 0., 1.]), wide, TOL), Ok(Direction::Increasing));
    match check_monotone(&poly(&[0., 0., 1.]), unit(1)[0], TOL) {
        Err(Error::NotMonotone { at, .. }) => assert_eq!(at, 0.0),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        Mpgam::new(vec![poly(&[0., 1.])], poly(&[0., 0., 1.]), unit(1)),
        Err(Error::NotMonotone { .. })
    ));
}

#[test]
fn minimum_examples() {
    let g = Mpgam::new(vec![poly(&[0., 0., 1.])], Polynomial::identity(), unit(1)).unwrap();
    assert_eq!(gam_relaxation_min(&g, TOL).unwrap(), (0.0, vec![0.0]));

    let g = Mpgam::new(vec![poly(&[0., 0., -1.]), poly(&[0., 0., 1.])], Polynomial::identity(), unit(2)).unwrap();
    let (v, x) = gam_relaxation_min(&g, TOL).unwrap();
    assert!((v + 1.0).abs() < 1e-12);
    assert_eq!(x, vec![-1.0, 0.0]);

    // decreasing link picks per-component maxima
    let g = Mpgam::new(vec![poly(&[0., 0., 1.])], poly(&[0., -1.]), unit(1)).unwrap();
    let (v, x) = gam_relaxation_min(&g, TOL).unwrap();
    assert!((v + 1.0).abs() < 1e-12);
    assert_eq!(x, vec![-1.0]);
}

#[test]
fn link_envelope_is_monotone() {
    for seed in 0..20 {
        let g = Mpgam::generate_random(3, 5, seed);
        let relax = GamRelaxation::new(&g, TOL).unwrap();
        let e = relax.link_envelope();
        let iv = e.domain();
        for k in 0..=1000 {
            let s = e.slope_clamped(iv.lo + iv.width() * k as f64 / 1000.0);
            match relax.direction() {
                Direction::Increasing => assert!(s >= -1e-12, "{s}"),
                Direction::Decreasing => assert!(s <= 1e-12, "{s}"),
            }
        }
    }
}

#[test]
fn minimum_matches_grid_oracle() {
    for seed in 0..30 {
        let g = Mpgam::generate_random(1 + seed as usize % 4, 2 + seed as usize % 5, seed);
        let (v, x) = gam_relaxation_min(&g, TOL).unwrap();
        let (grid, _) = gam_grid_min(&g, 200).unwrap();
        let tol = 1e-5 * (1.0 + grid.abs());
        assert!((v - grid).abs() <= tol, "seed {seed}: {v} vs {grid}");
        assert!(g.eval(&x).unwrap() <= grid + tol);
    }
}

#[test]
fn relaxation_underestimates_and_is_convex() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for seed in 0..10 {
        let g = Mpgam::generate_random(3, 6, seed);
        let relax = GamRelaxation::new(&g, TOL).unwrap();
        for _ in 0..10_000 {
            let x = random_point(&mut rng, g.input_box());
            assert!(relax.eval(&x).unwrap() <= g.eval(&x).unwrap() + 1e-8);
        }
        for _ in 0..100 {
            let a = random_point(&mut rng, g.input_box());
            let b = random_point(&mut rng, g.input_box());
            let m: Vec<f64> = a.iter().zip(&b).map(|(u, v)| 0.5 * (u + v)).collect();
            let (fa, fb, fm) = (relax.eval(&a).unwrap(), relax.eval(&b).unwrap(), relax.eval(&m).unwrap());
            let chord = 0.5 * (fa + fb);
            assert!(fm <= chord + 1e-9 * (1.0 + chord.abs()), "{fm} > {chord}");
        }
    }
}

#[test]
fn convex_identity_gam_is_its_own_relaxation() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let g = Mpgam::new(
        vec![poly(&[0., 1., 2.]), poly(&[1., 0., 0., 0., 1.]), poly(&[0., -1., 0.5])],
        Polynomial::identity(),
        vec![Interval { lo: -1.0, hi: 2.0 }, Interval { lo: -1.5, hi: 0.5 }, Interval { lo: 0.0, hi: 3.0 }],
    )
    .unwrap();
    for _ in 0..1000 {
        let x = random_point(&mut rng, g.input_box());
        let (m, m2) = (g.eval(&x).unwrap(), gam_relaxation_eval(&g, &x, TOL).unwrap());
        assert!((m - m2).abs() <= 1e-12 * (1.0 + m.abs()));
    }
}

#[test]
fn eval_errors() {
    let g = Mpgam::new(vec![poly(&[0., 0., 1.])], Polynomial::identity(), unit(1)).unwrap();
    assert!(matches!(gam_relaxation_eval(&g, &[2.0], TOL), Err(Error::OutOfDomain { .. })));
    assert!(matches!(gam_relaxation_eval(&g, &[0.0, 0.0], TOL), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn json_round_trip() {
    let g = Mpgam::generate_random(4, 6, 3);
    assert_eq!(Mpgam::from_json(&g.to_json().unwrap()).unwrap(), g);
    let text = r#"{ "components": [[0, 0, 1]], "link": [0, 1], "box": [[-1, 1]] }"#;
    assert_eq!(gam_relaxation_min(&Mpgam::from_json(text).unwrap(), TOL).unwrap().0, 0.0);
    let bad = r#"{ "components": [[0, 0, 1]], "link": [0, 1], "box": [[1, -1]] }"#;
    assert!(Mpgam::from_json(bad).is_err());
}

#[test]
fn gam_as_pkan_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let g = Mpgam::generate_random(3, 4, 1);
    let net = g.to_pkan().unwrap();
    assert_eq!(net.dims(), &[3, 1, 1]);
    for _ in 0..100 {
        let x = random_point(&mut rng, g.input_box());
        let (a, b) = (g.eval(&x).unwrap(), net.forward_eval(&x).unwrap());
        assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}
