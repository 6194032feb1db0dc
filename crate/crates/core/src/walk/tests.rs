use super::*;
use crate::builders::*;
use proptest::prelude::*;
use rand::Rng;
use std::collections::BTreeMap;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Dense `U` assembled directly from the vertex rules, independent of the
/// factored blocks used by `StepOperator`.
fn dense_oracle(g: &Graph, space: &StateSpace) -> DMatrix<C64> {
    let d = space.dim();
    let mut m = DMatrix::zeros(d, d);
    for (col, s) in space.states().iter().enumerate() {
        let (k, j) = (s.tail, s.head);
        match g.behavior(j) {
            VertexBehavior::GroverScatter | VertexBehavior::Transmissive => {
                let n = g.port_count(j) as f64;
                let (r, t) = ((n - 2.0) / n, 2.0 / n);
                m[(space.index_of(j, k).unwrap(), col)] += c(-r);
                for &l in g.neighbors(j).iter().filter(|&&l| l != k) {
                    m[(space.index_of(j, l).unwrap(), col)] += c(t);
                }
            }
            VertexBehavior::LoopRelay => {
                let spoke = *g.neighbors(j).iter().find(|&&u| u != j).unwrap();
                let row = if k == j { space.index_of(j, spoke) } else { space.index_of(j, j) };
                m[(row.unwrap(), col)] = c(1.0);
            }
            VertexBehavior::DummyLoop { phi } => {
                let entry = if k == j { c(1.0) } else { C64::from_polar(1.0, phi) };
                m[(space.index_of(j, k).unwrap(), col)] = entry;
            }
        }
    }
    m
}

fn all_builders() -> Vec<Graph> {
    vec![
        build_star_loop(3).unwrap(),
        build_star_loop(12).unwrap(),
        build_star_dummy_loops(5, std::f64::consts::PI).unwrap(),
        build_star_dummy_loops(7, 0.5).unwrap(),
        build_star_clique(8, 3).unwrap(),
        build_star_clique(12, 5).unwrap(),
        build_two_stars(3).unwrap(),
        build_two_stars(9).unwrap(),
        build_bipartite_extra(3, 2).unwrap(),
        build_bipartite_extra(7, 4).unwrap(),
        build_complete_bipartite(6, 3).unwrap(),
    ]
}

#[test]
fn dimensions() {
    assert_eq!(enumerate_states(&build_star_loop(3).unwrap()).len(), 7);
    assert_eq!(enumerate_states(&build_two_stars(3).unwrap()).len(), 12);
    assert_eq!(enumerate_states(&build_bipartite_extra(3, 2).unwrap()).len(), 14);
    let states = enumerate_states(&build_star_loop(3).unwrap());
    assert!(states.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(states.iter().filter(|s| s.is_loop()).count(), 1);
}

#[test]
fn star_loop_central_column() {
    let n = 10;
    let g = build_star_loop(n).unwrap();
    let op = build_step_operator(&g).unwrap();
    let sp = op.space();
    let col: BTreeMap<usize, C64> = op.column(sp.index_of(1u32, 0u32).unwrap()).into_iter().collect();
    let r = (n as f64 - 2.0) / n as f64;
    let t = 2.0 / n as f64;
    assert_eq!(col.len(), n);
    assert!((col[&sp.index_of(0u32, 1u32).unwrap()] - c(-r)).norm() < 1e-15);
    for j in 2..=n as u32 {
        assert!((col[&sp.index_of(0u32, j).unwrap()] - c(t)).norm() < 1e-15);
    }
}

#[test]
fn dummy_loop_reflects_with_phase() {
    let g = build_star_dummy_loops(6, std::f64::consts::PI).unwrap();
    let op = build_step_operator(&g).unwrap();
    let sp = op.space();
    let col = op.column(sp.index_of(0u32, 1u32).unwrap());
    assert_eq!(col.len(), 1);
    assert_eq!(col[0].0, sp.index_of(1u32, 0u32).unwrap());
    assert!((col[0].1 - c(-1.0)).norm() < 1e-15);
    // dummy loop state is a fixed point, ordinary loops relay
    let l1 = sp.index_of(1u32, 1u32).unwrap();
    assert_eq!(op.column(l1), vec![(l1, c(1.0))]);
    assert_eq!(op.column(sp.index_of(0u32, 3u32).unwrap()), vec![(sp.index_of(3u32, 3u32).unwrap(), c(1.0))]);
}

#[test]
fn every_builder_is_unitary() {
    for g in all_builders() {
        let op = build_step_operator(&g).unwrap();
        let dev = op.unitarity_deviation();
        assert!(dev <= 1e-12, "deviation {dev:e}");
        // the structured check agrees with a dense U^dagger U
        let u = op.to_dense();
        let gram = u.adjoint() * &u;
        let dense_dev = (gram - DMatrix::<C64>::identity(op.dim(), op.dim()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(dense_dev <= 1e-12);
    }
}

#[test]
fn operator_matches_formula_oracle() {
    for g in all_builders() {
        let op = build_step_operator(&g).unwrap();
        let diff = (op.to_dense() - dense_oracle(&g, op.space())).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-15, "max entry difference {diff:e}");
    }
}

#[test]
fn columns_are_local() {
    for g in all_builders() {
        let op = build_step_operator(&g).unwrap();
        let sp = op.space();
        for i in 0..op.dim() {
            let head = sp.state(i).head;
            assert_eq!(op.scattering_vertex(i), head);
            assert!(op.column(i).iter().all(|&(o, _)| sp.state(o).tail == head));
        }
    }
}

#[test]
fn transmissive_equals_degree_two_grover() {
    let g = build_two_stars(5).unwrap();
    let plain = Graph::new(g.vertices(), g.edges(), BTreeMap::new(), []).unwrap();
    assert_eq!(plain.behavior(VertexId(1)), VertexBehavior::GroverScatter);
    let a = build_step_operator(&g).unwrap();
    let b = build_step_operator(&plain).unwrap();
    for i in 0..a.dim() {
        assert_eq!(a.column(i), b.column(i));
    }
}

#[test]
fn degree_one_vertices_reflect() {
    let g = Graph::new(
        (0..=6u32).map(VertexId),
        (1..=6u32).map(|j| Edge::new(0u32, j)),
        BTreeMap::new(),
        [],
    )
    .unwrap();
    let op = build_step_operator(&g).unwrap();
    let sp = op.space();
    for j in 1..=6u32 {
        assert_eq!(op.column(sp.index_of(0u32, j).unwrap()), vec![(sp.index_of(j, 0u32).unwrap(), c(1.0))]);
    }
    // U^2 = I on the uniform incoming/outgoing spoke states
    let incoming = make_initial_state(
        &g,
        sp,
        &InitialStateKind::Custom((1..=6u32).map(|j| (DirectedEdgeState::new(j, 0u32), c(1.0))).collect()),
    )
    .unwrap();
    let outgoing = op.apply(&incoming).unwrap();
    for j in 1..=6u32 {
        assert!((outgoing.amplitude(sp.index_of(0u32, j).unwrap()) - c(1.0 / 6f64.sqrt())).norm() < 1e-15);
    }
    assert!(evolve(&op, &incoming, 2).unwrap().max_abs_diff(&incoming) < 1e-15);
}

#[test]
fn antisymmetric_uniform_star_loop() {
    let g = build_star_loop(4).unwrap();
    let sp = StateSpace::new(&g);
    let s = make_initial_state(&g, &sp, &InitialStateKind::AntisymmetricUniform).unwrap();
    let a = 1.0 / 8f64.sqrt();
    for j in 1..=4u32 {
        assert!((s.amplitude(sp.index_of(0u32, j).unwrap()) - c(a)).norm() < 1e-15);
        assert!((s.amplitude(sp.index_of(j, 0u32).unwrap()) - c(-a)).norm() < 1e-15);
    }
    assert_eq!(s.amplitude(sp.index_of(1u32, 1u32).unwrap()), c(0.0));
}

#[test]
fn antisymmetric_uniform_skips_hidden_edges() {
    let g = build_star_clique(6, 3).unwrap();
    let sp = StateSpace::new(&g);
    let s = make_initial_state(&g, &sp, &InitialStateKind::AntisymmetricUniform).unwrap();
    assert_eq!(s.amplitude(sp.index_of(1u32, 2u32).unwrap()), c(0.0));
    assert!((s.amplitude(sp.index_of(0u32, 2u32).unwrap()) - c(1.0 / 12f64.sqrt())).norm() < 1e-15);

    let g = build_bipartite_extra(3, 2).unwrap();
    let sp = StateSpace::new(&g);
    let s = make_initial_state(&g, &sp, &InitialStateKind::AntisymmetricUniform).unwrap();
    let a = 1.0 / 12f64.sqrt();
    for k in 1..=3u32 {
        for j in 4..=5u32 {
            assert!((s.amplitude(sp.index_of(j, k).unwrap()) - c(a)).norm() < 1e-15);
            assert!((s.amplitude(sp.index_of(k, j).unwrap()) - c(-a)).norm() < 1e-15);
        }
    }
    assert_eq!(s.amplitude(sp.index_of(1u32, 2u32).unwrap()), c(0.0));
}

#[test]
fn two_star_signed_states() {
    let n = 3;
    let g = build_two_stars(n).unwrap();
    let sp = StateSpace::new(&g);
    let s = make_initial_state(&g, &sp, &InitialStateKind::TwoStarSigned).unwrap();
    let a = 1.0 / (2.0 * (n as f64).sqrt());
    let b = two_stars_center_b(n);
    for (i, st) in sp.states().iter().enumerate() {
        let want = if st.tail == VertexId(0) || st.head == VertexId(0) { a } else { -a };
        assert!((s.amplitude(i) - c(want)).norm() < 1e-15, "{st:?}");
    }
    assert!((s.amplitude(sp.index_of(1u32, b).unwrap()) - c(-a)).norm() < 1e-15);
    assert!((s.amplitude(sp.index_of(b, 1u32).unwrap()) - c(-a)).norm() < 1e-15);

    let out = make_initial_state(&g, &sp, &InitialStateKind::TwoStarOutgoingSigned).unwrap();
    let a = 1.0 / (2.0 * n as f64).sqrt();
    assert!((out.amplitude(sp.index_of(0u32, 2u32).unwrap()) - c(a)).norm() < 1e-15);
    assert!((out.amplitude(sp.index_of(b, 1u32).unwrap()) - c(-a)).norm() < 1e-15);
    assert_eq!(out.amplitude(sp.index_of(2u32, 0u32).unwrap()), c(0.0));

    let star = build_star_loop(5).unwrap();
    assert!(make_initial_state(&star, &StateSpace::new(&star), &InitialStateKind::TwoStarSigned).is_err());
}

#[test]
fn initial_states_are_unit_norm() {
    let kinds = [InitialStateKind::AntisymmetricUniform, InitialStateKind::UniformAllWithLoops];
    for g in all_builders() {
        let sp = StateSpace::new(&g);
        for k in &kinds {
            let s = make_initial_state(&g, &sp, k).unwrap();
            assert!((s.norm() - 1.0).abs() <= 1e-12);
        }
    }
    let g = build_star_dummy_loops(10, std::f64::consts::PI).unwrap();
    let s = make_initial_state(&g, &StateSpace::new(&g), &InitialStateKind::UniformAllWithLoops).unwrap();
    assert!((s.amplitude(0) - c(1.0 / 30f64.sqrt())).norm() < 1e-15);
}

#[test]
fn evolve_basics() {
    let g = build_star_loop(4).unwrap();
    let op = build_step_operator(&g).unwrap();
    let s = make_initial_state(&g, op.space(), &InitialStateKind::AntisymmetricUniform).unwrap();
    assert_eq!(evolve(&op, &s, 0).unwrap(), s);

    let u = dense_oracle(&g, op.space());
    assert_eq!(u.nrows(), 9);
    let dense = u.pow(3) * nalgebra::DVector::from_column_slice(s.amplitudes());
    let sparse = evolve(&op, &s, 3).unwrap();
    let dev = dense.iter().zip(sparse.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(dev <= 1e-12, "{dev:e}");

    assert!((evolve(&op, &s, 1000).unwrap().norm() - 1.0).abs() <= 1e-10);
    assert!(matches!(
        evolve(&op, &StateVector::zeros(3), 1),
        Err(Error::DimensionMismatch { expected: 9, got: 3 })
    ));
}

#[test]
fn long_evolution_keeps_norm() {
    let g = build_bipartite_extra(20, 3).unwrap();
    let op = build_step_operator(&g).unwrap();
    let s = make_initial_state(&g, op.space(), &InitialStateKind::AntisymmetricUniform).unwrap();
    assert!((evolve(&op, &s, 100_000).unwrap().norm() - 1.0).abs() <= 1e-10);
}

/// Peak state of the star-with-loop walk: `(|0,1> - |l_1> + |1,0>) / sqrt 3`.
fn star_loop_peak(sp: &StateSpace) -> StateVector {
    let a = 1.0 / 3f64.sqrt();
    let mut v = StateVector::zeros(sp.dim());
    v.amplitudes_mut()[sp.index_of(0u32, 1u32).unwrap()] = c(a);
    v.amplitudes_mut()[sp.index_of(1u32, 1u32).unwrap()] = c(-a);
    v.amplitudes_mut()[sp.index_of(1u32, 0u32).unwrap()] = c(a);
    v
}

#[test]
fn edge_probabilities_cases() {
    let g = build_star_loop(6).unwrap();
    let sp = StateSpace::new(&g);
    let d = edge_probabilities(&g, &sp, &StateVector::basis(sp.dim(), sp.index_of(0u32, 1u32).unwrap()));
    assert_eq!(d.probabilities[&Edge::new(0u32, 1u32)], 1.0);
    assert_eq!(d.total(), 1.0);
    assert_eq!(d.not_found, 0.0);

    let d = edge_probabilities(&g, &sp, &star_loop_peak(&sp));
    assert!((d.probabilities[&Edge::new(0u32, 1u32)] - 2.0 / 3.0).abs() < 1e-15);
    assert!((d.probabilities[&Edge::new(1u32, 1u32)] - 1.0 / 3.0).abs() < 1e-15);
    assert!((d.not_found - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn sampling_cases() {
    let g = build_star_loop(6).unwrap();
    let sp = StateSpace::new(&g);
    let on_loop = StateVector::basis(sp.dim(), sp.index_of(1u32, 1u32).unwrap());
    let on_spoke = StateVector::basis(sp.dim(), sp.index_of(0u32, 2u32).unwrap());
    for seed in 0..50 {
        assert_eq!(sample_measurement(&g, &sp, &on_loop, seed), Outcome::NotFound);
        assert_eq!(sample_measurement(&g, &sp, &on_spoke, seed), Outcome::Edge(Edge::new(0u32, 2u32)));
    }
    let peak = star_loop_peak(&sp);
    assert_eq!(sample_measurement(&g, &sp, &peak, 7), sample_measurement(&g, &sp, &peak, 7));
}

#[test]
fn monte_carlo_not_found_rate() {
    let g = build_star_loop(50).unwrap();
    let sp = StateSpace::new(&g);
    let dist = edge_probabilities(&g, &sp, &star_loop_peak(&sp));
    let sampler = MeasurementSampler::new(&g, &dist);
    let mut rng = trial_rng(2024, 0);
    let trials = 100_000;
    let misses = (0..trials).filter(|_| sampler.sample(&mut rng) == Outcome::NotFound).count();
    let freq = misses as f64 / trials as f64;
    assert!((freq - 1.0 / 3.0).abs() <= 0.01, "{freq}");
}

proptest! {
    #[test]
    fn probabilities_sum_to_one(re in prop::collection::vec(-1.0f64..1.0, 14), im in prop::collection::vec(-1.0f64..1.0, 14)) {
        let g = build_bipartite_extra(3, 2).unwrap();
        let sp = StateSpace::new(&g);
        let amps = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect();
        prop_assume!(StateVector::from_amplitudes(re.iter().map(|&x| c(x)).collect()).norm() > 1e-3);
        if let Ok(s) = StateVector::from_amplitudes(amps).normalized() {
            prop_assert!((edge_probabilities(&g, &sp, &s).total() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn conservation_along_evolution(n in 3usize..20, seed in 0u64..1000) {
        let g = build_star_clique(n, 2 + (seed as usize % (n - 2)).min(3)).unwrap();
        let op = build_step_operator(&g).unwrap();
        let mut rng = trial_rng(seed, 0);
        let amps = (0..op.dim()).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let mut s = StateVector::from_amplitudes(amps).normalized().unwrap();
        for _ in 0..50 {
            s = op.apply(&s).unwrap();
            prop_assert!((edge_probabilities(&g, op.space(), &s).total() - 1.0).abs() <= 1e-10);
        }
    }
}
