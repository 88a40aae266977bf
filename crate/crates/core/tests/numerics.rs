use portionforge_core::numerics::fm::verify_certificate;
use portionforge_core::numerics::grid::lattice_size;
use portionforge_core::numerics::rational::q;
use portionforge_core::numerics::{
    grid_argmax, lp_feasible, max_flow, Feasibility, FlowNetwork, LinearConstraint, LpMode,
    Rational, Rel,
};
use portionforge_core::sampling::rng;
use proptest::prelude::*;
use rand::Rng;

fn cut_of<C: Clone + core::ops::Add<Output = C>>(
    arcs: &[(usize, usize, C)],
    side: &[bool],
    zero: C,
) -> C {
    arcs.iter()
        .filter(|(u, v, _)| side[*u] && !side[*v])
        .fold(zero, |acc, (_, _, c)| acc + c.clone())
}

proptest! {
    #[test]
    fn rational_flow_equals_cut(nodes in 2usize..8, raw in prop::collection::vec((0usize..8, 0usize..8, 0i64..20, 1i64..6), 0..24)) {
        let arcs: Vec<(usize, usize, Rational)> =
            raw.into_iter().map(|(u, v, a, b)| (u % nodes, v % nodes, q(a, b))).collect();
        let mut net = FlowNetwork::new(nodes, 0, nodes - 1);
        for (u, v, c) in &arcs {
            net.add_arc(*u, *v, c.clone());
        }
        let flow = max_flow(net);
        prop_assert!(flow.source_side[0]);
        prop_assert!(!flow.source_side[nodes - 1]);
        prop_assert_eq!(&flow.value, &cut_of(&arcs, &flow.source_side, Rational::zero()));
        prop_assert_eq!(&flow.value, &flow.cut_capacity);
        for ((_, _, c), f) in arcs.iter().zip(&flow.arc_flows) {
            prop_assert!(!f.is_negative() && f <= c);
        }
        let mut net_out = Rational::zero();
        for ((u, v, _), f) in arcs.iter().zip(&flow.arc_flows) {
            if *u == 0 && *v != 0 {
                net_out += f.clone();
            }
            if *v == 0 && *u != 0 {
                net_out -= f.clone();
            }
        }
        prop_assert_eq!(net_out, flow.value);
    }

    #[test]
    fn float_flow_equals_cut(nodes in 2usize..8, raw in prop::collection::vec((0usize..8, 0usize..8, 0.0f64..5.0), 0..24)) {
        let arcs: Vec<(usize, usize, f64)> = raw.into_iter().map(|(u, v, c)| (u % nodes, v % nodes, c)).collect();
        let mut net = FlowNetwork::new(nodes, 0, nodes - 1);
        for (u, v, c) in &arcs {
            net.add_arc(*u, *v, *c);
        }
        let flow = max_flow(net);
        let cut = cut_of(&arcs, &flow.source_side, 0.0);
        prop_assert!((flow.value - cut).abs() <= 1e-9 * (1.0 + cut));
    }
}

fn random_system(r: &mut impl Rng, nvars: usize) -> Vec<LinearConstraint<Rational>> {
    let rels = [Rel::Le, Rel::Ge, Rel::Eq, Rel::Lt, Rel::Gt];
    let rows = r.gen_range(1..=6);
    let mut sys: Vec<LinearConstraint<Rational>> = (0..rows)
        .map(|_| {
            let coeffs = (0..nvars)
                .map(|_| q(r.gen_range(-4..=4), r.gen_range(1..=3)))
                .collect();
            let rel = if r.gen_bool(0.15) {
                Rel::Eq
            } else {
                rels[r.gen_range(0..rels.len())]
            };
            LinearConstraint::new(coeffs, rel, q(r.gen_range(-6..=6), r.gen_range(1..=4)))
        })
        .collect();
    for j in 0..nvars {
        let mut e = vec![Rational::zero(); nvars];
        e[j] = Rational::one();
        sys.push(LinearConstraint::new(e.clone(), Rel::Ge, q(-5, 1)));
        sys.push(LinearConstraint::new(e, Rel::Le, q(5, 1)));
    }
    sys
}

#[test]
fn lp_modes_agree_on_random_rational_systems() {
    let mut r = rng(2024);
    let (mut feasible, mut infeasible) = (0, 0);
    for case in 0..200 {
        let nvars = r.gen_range(1..=3);
        let sys = random_system(&mut r, nvars);
        let exact = lp_feasible(&sys, nvars, LpMode::Exact).unwrap();
        let float = lp_feasible(&sys, nvars, LpMode::Float).unwrap();
        assert_eq!(
            exact.is_feasible(),
            float.is_feasible(),
            "case {case}: {sys:?}"
        );
        match exact {
            Feasibility::Feasible(x) => {
                feasible += 1;
                assert!(sys.iter().all(|c| c.holds_at(&x)), "case {case}");
            }
            Feasibility::Infeasible(y) => {
                infeasible += 1;
                assert!(verify_certificate(&sys, &y), "case {case}");
            }
        }
    }
    assert!(
        feasible >= 20 && infeasible >= 20,
        "{feasible} feasible, {infeasible} infeasible"
    );
}

#[test]
fn grid_argmax_is_monotone_under_refinement() {
    let mut r = rng(7);
    for _ in 0..20 {
        let m = r.gen_range(2..=4);
        let w: Vec<f64> = (0..m).map(|_| r.gen_range(0.1..1.0)).collect();
        let c: Vec<f64> = (0..m).map(|_| r.gen_range(0.0..1.0)).collect();
        let objective = |x: &[f64]| {
            x.iter()
                .zip(&w)
                .map(|(xi, wi)| wi * (xi + 1e-3).ln())
                .sum::<f64>()
                - x.iter()
                    .zip(&c)
                    .map(|(xi, ci)| (xi - ci).abs())
                    .sum::<f64>()
        };
        let mut k = 3;
        let mut last = f64::NEG_INFINITY;
        while lattice_size(m, 2 * k) <= 200_000 {
            let best = grid_argmax(objective, m, k, lattice_size(m, k)).unwrap();
            assert!(best.value >= last, "k = {k}: {} < {last}", best.value);
            last = best.value;
            k *= 2;
        }
    }
}
