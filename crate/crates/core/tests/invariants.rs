use gaussdim::bound_lab::{cover_cost_exact, CantorMeasure, CantorSpec};
use gaussdim::dimension::critical_exponent;
use gaussdim::exec;
use gaussdim::pressure::{partition_total, PressureSource};
use gaussdim::weights::{a_of_b, a_of_s, a_of_s_exact};
use gaussdim::{SimplexPoint, SystemSpec, TargetSpec};
use num_rational::BigRational;
use num_traits::FromPrimitive;
use proptest::prelude::*;

fn system(kind: u8, m: u64) -> SystemSpec {
    match kind {
        0 => SystemSpec::gauss(m).unwrap(),
        1 => SystemSpec::lueroth(m).unwrap(),
        _ => SystemSpec::power_law(2.5, m).unwrap(),
    }
}

fn rational(x: f64) -> BigRational {
    BigRational::from_f64(x).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn branches_land_in_their_cylinder(kind in 0u8..3, a in 1u64..500, y in 0.0f64..=1.0) {
        let sys = system(kind, 1000);
        let (lo, hi) = sys.level_one(a);
        let x = sys.branch(a, y);
        prop_assert!(lo - 1e-15 <= x && x <= hi + 1e-15);
        prop_assert!((sys.level_one_length(a) - (hi - lo)).abs() <= 1e-15);
        if y > 1e-9 && y < 1.0 - 1e-9 {
            prop_assert_eq!(sys.locate(x), a);
            prop_assert!((sys.forward(a, x) - y).abs() < 1e-6);
        }
    }

    #[test]
    fn lp_value_is_a_minimum(
        w in prop::collection::vec(0.3f64..3.0, 1..=4),
        raw in prop::collection::vec(0.01f64..1.0, 4),
        s in 0.4f64..1.0,
        d in 1.5f64..3.0,
    ) {
        let k = w.len();
        let target = TargetSpec::new((0..k as u32).collect(), w.clone(), 2.0).unwrap();
        let sol = a_of_s(&target, s, d).unwrap();
        let b = sol.argmin.coords();
        prop_assert!(b.iter().all(|&x| x >= 0.0));
        let dot: f64 = b.iter().zip(&w).map(|(b, t)| b * t).sum();
        prop_assert!((dot - 1.0).abs() < 1e-9);
        // any other feasible point does no better
        let scale: f64 = raw[..k].iter().zip(&w).map(|(r, t)| r * t).sum();
        let other = SimplexPoint::new(raw[..k].iter().map(|r| r / scale).collect(), &target).unwrap();
        prop_assert!(sol.value <= a_of_b(&other, s, d) + 1e-12);
    }

    #[test]
    fn float_and_rational_programs_agree(
        w in prop::collection::vec(1u32..8, 1..=3),
        s in 1u32..20,
        d in 3u32..7,
    ) {
        let (s, d) = (s as f64 / 20.0, d as f64 / 2.0);
        let wf: Vec<f64> = w.iter().map(|&t| t as f64).collect();
        let target = TargetSpec::new((0..w.len() as u32).collect(), wf.clone(), 2.0).unwrap();
        let float = a_of_s(&target, s, d).unwrap().value;
        let wr: Vec<BigRational> = wf.iter().map(|&t| rational(t)).collect();
        let (exact, _) = a_of_s_exact(&wr, &rational(s), &rational(d)).unwrap();
        let exact = num_traits::ToPrimitive::to_f64(&exact).unwrap();
        prop_assert!((float - exact).abs() < 1e-12, "{} vs {}", float, exact);
    }

    #[test]
    fn lueroth_pressure_decreases(s1 in 0.55f64..1.3, gap in 0.01f64..0.3) {
        let sys = SystemSpec::lueroth(1000).unwrap();
        let src = PressureSource::Full { grid: 64 };
        let p1 = src.evaluate(&sys, s1).unwrap();
        let p2 = src.evaluate(&sys, s1 + gap).unwrap();
        prop_assert!(p1.value > p2.value);
        prop_assert!(p1.lo <= p1.value && p1.value <= p1.hi);
    }

    #[test]
    fn critical_exponent_decreases_in_base(b in 1.2f64..50.0, ratio in 1.1f64..4.0) {
        let sys = SystemSpec::lueroth(1000).unwrap();
        let src = PressureSource::Full { grid: 64 };
        let lo = critical_exponent(&sys, &TargetSpec::single(b).unwrap(), 1e-9, src).unwrap();
        let hi = critical_exponent(&sys, &TargetSpec::single(b * ratio).unwrap(), 1e-9, src).unwrap();
        prop_assert!(lo.s0 > hi.s0);
        prop_assert!(hi.s0 > 0.5 && lo.s0 < 1.0);
        prop_assert!(lo.lo <= lo.s0 && lo.s0 <= lo.hi && lo.hi - lo.lo <= 1e-9);
    }

    #[test]
    fn cover_cost_decreases_in_s(n in 3u32..7, s in 0.55f64..0.95) {
        let sys = SystemSpec::lueroth(1000).unwrap();
        let target = TargetSpec::new(vec![0, 1], vec![1.0, 1.0], 2.0).unwrap();
        let a = cover_cost_exact(&sys, &target, n, s).unwrap();
        let b = cover_cost_exact(&sys, &target, n, s + 0.05).unwrap();
        prop_assert!(b.value < a.value);
        prop_assert!(a.lo <= a.hi);
    }

    #[test]
    fn sampled_leaves_lie_in_target(seed in any::<u64>()) {
        let sys = SystemSpec::lueroth(50).unwrap();
        let target = TargetSpec::single(2.0).unwrap();
        let (spec, _) = CantorSpec::at_critical(&sys, &target, 4, 2).unwrap();
        let mu = CantorMeasure::new(&sys, &target, &spec).unwrap();
        for leaf in mu.sample_leaves(seed, 8) {
            prop_assert!(mu.in_target(&leaf.digits));
            prop_assert!(mu.ln_mass(&leaf.digits, leaf.digits.len()) <= 0.0);
        }
    }
}

#[test]
fn sequential_fallback_is_bit_identical() {
    for kind in 0..3 {
        let sys = system(kind, 40);
        let par = partition_total(&sys, 3, 0.77).unwrap();
        let seq = exec::sequential(|| partition_total(&sys, 3, 0.77).unwrap());
        assert_eq!(par.to_bits(), seq.to_bits());
    }
}
