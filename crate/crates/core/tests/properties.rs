mod oracle;

use oracle::{mask, max_abs_diff, Brute};
use proptest::prelude::*;
use qso_lab::classical::{nonergodic_predicate, volterra_apply, zakharevitch_apply, VolterraParams};
use qso_lab::convolution::{convolve_direct, CharacterTransform};
use qso_lab::dynamics::{envelope_f, iterate};
use qso_lab::group::{enumerate_subgroups, GroupSpec, Subgroup};
use qso_lab::simplex::sample_interior;
use qso_lab::{build_operator, haar_center, validate_simplex, SimplexPoint};

fn factors() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=6, 1..=3).prop_filter("order <= 36", |f| f.iter().product::<usize>() <= 36)
}

fn simplex3() -> impl Strategy<Value = SimplexPoint> {
    prop::array::uniform3(0.0f64..1.0)
        .prop_filter("non-zero mass", |v| v.iter().sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let s: f64 = v.iter().sum();
            validate_simplex(&v.map(|w| w / s)).unwrap()
        })
}

fn param() -> impl Strategy<Value = f64> {
    -1.0f64..=1.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law_matches_brute(f in factors(), a in 0usize..1000, b in 0usize..1000, c in 0usize..1000) {
        let g = GroupSpec::new(f.clone()).unwrap();
        let brute = Brute::new(&f);
        let n = g.order();
        let (a, b, c) = (a % n, b % n, c % n);
        prop_assert_eq!(g.add_index(a, b), brute.add(a, b));
        prop_assert_eq!(g.add_index(a, b), g.add_index(b, a));
        prop_assert_eq!(g.add_index(g.add_index(a, b), c), g.add_index(a, g.add_index(b, c)));
        prop_assert_eq!(g.add_index(a, g.negate_index(a)), 0);
        let e = g.element_at(a).unwrap();
        prop_assert_eq!(g.index_of(&e).unwrap(), a);
        prop_assert_eq!(g.to_string().parse::<GroupSpec>().unwrap(), g);
    }

    #[test]
    fn operators_preserve_the_simplex(f in factors(), seed in any::<u64>(), pick in any::<usize>()) {
        let g = GroupSpec::new(f.clone()).unwrap();
        let subgroups = enumerate_subgroups(&g).unwrap();
        let h = &subgroups[pick % subgroups.len()];
        let mu = sample_interior(&g, seed);
        let op = build_operator(&g, h, &mu).unwrap();
        let x = sample_interior(&g, seed.wrapping_add(1));
        let y = op.apply(&x).unwrap();
        prop_assert!(y.weights().iter().all(|&w| w >= 0.0));
        prop_assert!((y.mass() - 1.0).abs() < 1e-12);
        let def = Brute::new(&f).apply_definition(x.weights(), &mask(g.order(), h.members()), mu.weights());
        prop_assert!(max_abs_diff(y.weights(), &def) < 1e-13);
    }

    #[test]
    fn sup_norm_never_grows(f in factors(), seed in any::<u64>()) {
        let g = GroupSpec::new(f).unwrap();
        let op = build_operator(&g, &Subgroup::trivial(&g), &haar_center(&g)).unwrap();
        let x = sample_interior(&g, seed);
        let y = op.apply(&x).unwrap();
        prop_assert!(y.sup_norm() <= x.sup_norm() + 1e-12);
        if g.order() >= 2 {
            prop_assert!(x.sum_of_squares() <= envelope_f(x.sup_norm()).unwrap() + 1e-12);
        }
    }

    #[test]
    fn trajectories_are_monotone(f in factors(), seed in any::<u64>()) {
        let g = GroupSpec::new(f).unwrap();
        let op = build_operator(&g, &Subgroup::trivial(&g), &haar_center(&g)).unwrap();
        let r = iterate(&op, &sample_interior(&g, seed), 500, 1e-9).unwrap();
        prop_assert!(r.is_monotone());
        prop_assert_eq!(r.sup_norm_series.len(), r.steps + 1);
    }

    #[test]
    fn transform_matches_direct(f in factors(), seed in any::<u64>()) {
        let g = GroupSpec::new(f).unwrap();
        let x = sample_interior(&g, seed);
        let direct = convolve_direct(&g, x.weights(), x.weights());
        let fast = CharacterTransform::new(&g).self_convolve(x.weights());
        prop_assert!(max_abs_diff(&direct, &fast) < 1e-12);
    }

    #[test]
    fn sampler_is_interior(f in factors(), seed in any::<u64>()) {
        let g = GroupSpec::new(f).unwrap();
        let x = sample_interior(&g, seed);
        prop_assert!(x.is_strictly_positive());
        prop_assert!((x.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn volterra_maps_simplex_into_itself(a in param(), b in param(), c in param(), x in simplex3()) {
        let p = VolterraParams::new(a, b, c).unwrap();
        let y = volterra_apply(&p, &x).unwrap();
        prop_assert!(y.weights().iter().all(|&w| w >= 0.0));
        prop_assert!((y.mass() - 1.0).abs() < 1e-14);
        let w = x.weights();
        let raw = [
            w[0] * (1.0 + a * w[1] - b * w[2]),
            w[1] * (1.0 - a * w[0] + c * w[2]),
            w[2] * (1.0 + b * w[0] - c * w[1]),
        ];
        prop_assert!((raw.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        prop_assert!(max_abs_diff(y.weights(), &raw) < 1e-14);
    }

    #[test]
    fn zakharevitch_is_volterra_at_ones(x in simplex3()) {
        let z = zakharevitch_apply(&x).unwrap();
        let v = volterra_apply(&VolterraParams::new(1.0, 1.0, 1.0).unwrap(), &x).unwrap();
        prop_assert!(max_abs_diff(z.weights(), v.weights()) < 1e-15);
    }

    #[test]
    fn volterra_commutes_with_cyclic_relabeling(a in param(), b in param(), c in param(), x in simplex3()) {
        // (x, y, z) -> (y, z, x) turns (a, b, c) into (c, a, b).
        let p = VolterraParams::new(a, b, c).unwrap();
        let q = VolterraParams::new(c, a, b).unwrap();
        let w = x.weights();
        let rotated = validate_simplex(&[w[1], w[2], w[0]]).unwrap();
        let lhs = volterra_apply(&q, &rotated).unwrap();
        let y = volterra_apply(&p, &x).unwrap();
        let rhs = [y.weights()[1], y.weights()[2], y.weights()[0]];
        prop_assert!(max_abs_diff(lhs.weights(), &rhs) < 1e-14);
        prop_assert_eq!(nonergodic_predicate(&p), nonergodic_predicate(&q));
    }
}

#[test]
fn nonergodic_predicate_examples() {
    let p = |a, b, c| nonergodic_predicate(&VolterraParams::new(a, b, c).unwrap());
    assert!(p(1.0, 1.0, 1.0));
    assert!(!p(1.0, -1.0, 1.0));
    assert!(p(-0.5, -0.2, -0.9));
    assert!(!p(0.0, 0.0, 0.0));
    assert!(!p(0.3, 0.0, 0.7));
}
