use kanvex::pkan::{build_relaxation, Pkan, RelaxedProblem, Sense};
use kanvex::{Error, Interval, Polynomial, Segment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

fn poly(c: &[f64]) -> Polynomial {
    Polynomial::new(c.to_vec())
}

fn unit_box(d: usize) -> Vec<Interval> {
    vec![Interval { lo: -1.0, hi: 1.0 }; d]
}

fn random_input(rng: &mut ChaCha8Rng, net: &Pkan) -> Vec<f64> {
    net.input_box().iter().map(|b| rng.random_range(b.lo..=b.hi)).collect()
}

/// Forward pass straight from the JSON text, with plain nested loops.
fn forward_from_json(text: &str, x: &[f64]) -> f64 {
    let v: serde_json::Value = serde_json::from_str(text).unwrap();
    let mut act: Vec<f64> = x.to_vec();
    for layer in v["layers"].as_array().unwrap() {
        let mut next = Vec::new();
        for row in layer.as_array().unwrap() {
            let mut s = 0.0;
            for (j, coeffs) in row.as_array().unwrap().iter().enumerate() {
                let mut power = 1.0;
                for c in coeffs.as_array().unwrap() {
                    s += c.as_f64().unwrap() * power;
                    power *= act[j];
                }
            }
            next.push(s);
        }
        act = next;
    }
    act[0]
}

#[test]
fn forward_examples() {
    let id = Pkan::new(vec![1, 1], vec![vec![vec![Polynomial::identity()]]], unit_box(1)).unwrap();
    assert_eq!(id.forward_eval(&[3.0]).unwrap(), 3.0);
    let sq = Pkan::new(vec![2, 1], vec![vec![vec![poly(&[0., 0., 1.]), poly(&[0., 0., 1.])]]], unit_box(2)).unwrap();
    assert_eq!(sq.forward_eval(&[1.0, 2.0]).unwrap(), 5.0);
    assert_eq!(
        sq.forward_eval(&[1.0]),
        Err(Error::DimensionMismatch { expected: 2, found: 1 })
    );
}

#[test]
fn forward_matches_independent_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..5 {
        let net = Pkan::generate_random(3, 4, 3, 5, seed);
        let text = net.to_json().unwrap();
        for _ in 0..100 {
            let x = random_input(&mut rng, &net);
            let a = net.forward_eval(&x).unwrap();
            let b = forward_from_json(&text, &x);
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }
}

#[test]
fn bound_examples() {
    let sq = poly(&[0., 0., 1.]);
    let one = Pkan::new(vec![1, 1], vec![vec![vec![sq.clone()]]], unit_box(1)).unwrap();
    let b = one.propagate_bounds(TOL).unwrap();
    assert_eq!(b.layer(0), &unit_box(1)[..]);
    assert_eq!(b.output(), Interval { lo: 0.0, hi: 1.0 });
    let two = Pkan::new(vec![1, 1, 1], vec![vec![vec![sq.clone()]], vec![vec![sq]]], unit_box(1)).unwrap();
    assert_eq!(two.propagate_bounds(TOL).unwrap().output(), Interval { lo: 0.0, hi: 1.0 });
}

#[test]
fn bounds_contain_sampled_activations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for seed in 0..50 {
        let net = Pkan::generate_random(1 + seed as usize % 4, 3, 2, 4, seed);
        let b = net.propagate_bounds(TOL).unwrap();
        for layer in b.layers() {
            assert!(layer.iter().all(|iv| iv.lo <= iv.hi));
        }
        for _ in 0..10_000 {
            let x = random_input(&mut rng, &net);
            assert!(b.contains(&net.activations(&x).unwrap(), 1e-12));
        }
    }
}

#[test]
fn relaxation_contains_network_graph() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..20 {
        let net = Pkan::generate_random(2, 3, 3, 4, seed);
        let rp = build_relaxation(&net, TOL).unwrap();
        for _ in 0..1000 {
            let acts = net.activations(&random_input(&mut rng, &net)).unwrap();
            let v = rp.assignment(&acts);
            assert!(rp.max_violation(&v) <= 1e-8, "{}", rp.max_violation(&v));
        }
    }
}

#[test]
fn envelope_domains_are_parent_bounds() {
    let net = Pkan::generate_random(3, 4, 3, 4, 9);
    let rp = build_relaxation(&net, TOL).unwrap();
    let bounds = rp.layer_bounds();
    for c in rp.constraints() {
        for (j, term) in c.terms.iter().enumerate() {
            assert_eq!(term.var, rp.z(c.layer - 1, j));
            assert_eq!(term.envelope.domain(), bounds.layer(c.layer - 1)[j]);
        }
        assert_eq!(c.target, rp.z(c.layer, c.unit));
    }
}

#[test]
fn structural_counts() {
    for (l, w, i) in [(1, 2, 3), (3, 4, 2), (4, 5, 5)] {
        let net = Pkan::generate_random(l, w, i, 3, 0);
        let rp = build_relaxation(&net, TOL).unwrap();
        let dims = net.dims();
        assert_eq!(rp.constraints().len(), 2 * dims[1..].iter().sum::<usize>());
        assert_eq!(rp.var_count(), 1 + dims.iter().sum::<usize>());
        assert_eq!(rp.var_name(RelaxedProblem::T), "t");
        assert_eq!(rp.var_name(rp.output_var()), format!("z_{}_0", dims.len() - 1));
    }
}

#[test]
fn concave_edge_relaxation() {
    let net = Pkan::new(vec![1, 1], vec![vec![vec![poly(&[0., 0., -1.])]]], unit_box(1)).unwrap();
    let rp = build_relaxation(&net, TOL).unwrap();
    for c in rp.constraints() {
        let env = &c.terms[0].envelope;
        match c.sense {
            Sense::Lower => {
                assert!(env.segments()[0].is_affine());
                assert!((env.eval(0.0).unwrap() + 1.0).abs() < 1e-12);
            }
            Sense::Upper => assert_eq!(env.segments(), &[Segment::Poly { from: -1.0, to: 1.0 }]),
        }
    }
}

#[test]
fn convex_edges_keep_the_polynomial() {
    let net = Pkan::new(
        vec![2, 1],
        vec![vec![vec![poly(&[0., 1., 1.]), poly(&[1., 0., 0., 0., 1.])]]],
        unit_box(2),
    )
    .unwrap();
    let rp = build_relaxation(&net, TOL).unwrap();
    for c in rp.constraints().iter().filter(|c| c.sense == Sense::Lower) {
        assert!(c.terms.iter().all(|t| t.envelope.is_exact()));
    }
}

#[test]
fn generation_is_deterministic() {
    let a = Pkan::generate_random(4, 4, 4, 4, 7);
    assert_eq!(a, Pkan::generate_random(4, 4, 4, 4, 7));
    assert_ne!(a, Pkan::generate_random(4, 4, 4, 4, 8));
    assert_eq!(a.dims(), &[4, 4, 4, 4, 4, 1]);
    assert!(a.input_box().iter().all(|b| b.lo == -1.5 && b.hi == 1.5));
}

#[test]
fn generated_bounds_are_finite() {
    for l in [4, 5, 6] {
        for w in [4, 5, 6] {
            for n in [4, 5, 6] {
                let net = Pkan::generate_random(l, w, 4, n, 0);
                let b = net.propagate_bounds(TOL).unwrap();
                for layer in b.layers() {
                    assert!(layer.iter().all(|iv| iv.lo.is_finite() && iv.hi.is_finite()));
                }
            }
        }
    }
}

#[test]
fn json_round_trip_and_errors() {
    let net = Pkan::generate_random(2, 3, 2, 4, 5);
    assert_eq!(Pkan::from_json(&net.to_json().unwrap()).unwrap(), net);

    let minimal = r#"{ "dims": [1, 1], "box": [[-1, 1]], "layers": [[[[0, 1]]]] }"#;
    assert_eq!(Pkan::from_json(minimal).unwrap().forward_eval(&[2.0]).unwrap(), 2.0);

    let empty = r#"{ "dims": [1, 1], "box": [[-1, 1]], "layers": [] }"#;
    assert!(matches!(Pkan::from_json(empty), Err(Error::Parse { .. })));

    let broken = "{ \"dims\": [1, 1],\n \"box\": [[-1, 1]],\n \"layers\": [[[[0, 1]]]";
    match Pkan::from_json(broken) {
        Err(Error::Parse { location, .. }) => assert!(location.contains("line 3"), "{location}"),
        other => panic!("{other:?}"),
    }
    let wrong_row = r#"{ "dims": [2, 1], "box": [[-1, 1], [-1, 1]], "layers": [[[[0, 1]]]] }"#;
    match Pkan::from_json(wrong_row) {
        Err(Error::Parse { location, .. }) => assert_eq!(location, "layers[0][0]"),
        other => panic!("{other:?}"),
    }
}
