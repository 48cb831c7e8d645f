use approx::assert_relative_eq;
use gaussdim::bound_lab::{cover_cost_transition, local_dimension_sample, CantorMeasure, CantorSpec, EnumerationMode};
use gaussdim::dimension::{critical_exponent, critical_exponent_sweep};
use gaussdim::pressure::{partition_sum, pressure_eigenvalue, PressureSource};
use gaussdim::series::zeta;
use gaussdim::{SystemSpec, TargetSpec};

#[test]
fn lueroth_pressure_matches_closed_form() {
    // the untruncated Lüroth pressure is log Σ (a(a+1))^{-s}
    let sys = SystemSpec::lueroth(1000).unwrap();
    let direct: f64 = (1..=200_000u64).map(|a| ((a * (a + 1)) as f64).powf(-1.5)).sum();
    let p = PressureSource::Full { grid: 64 }.evaluate(&sys, 1.5).unwrap();
    assert!(p.lo - 1e-9 <= direct.ln() && direct.ln() <= p.hi + 1e-9, "{p:?} vs {}", direct.ln());
}

#[test]
fn gauss_backends_share_a_bracket() {
    let sys = SystemSpec::gauss(20).unwrap();
    let eig = pressure_eigenvalue(&sys, 0.8, 256).unwrap();
    for n in 1..=4 {
        let part = partition_sum(&sys, n, 0.8).unwrap();
        assert!(part.lo <= part.value && part.value <= part.hi);
        assert!(part.lo <= eig.value && eig.value <= part.hi, "n = {n}");
    }
}

#[test]
fn gauss_at_two_is_below_zeta_bound() {
    // Σ_a |C[a]|^2 ≤ Σ a^{-4} = ζ(4), so P(2) < log ζ(4)
    let sys = SystemSpec::gauss(200).unwrap();
    let p = PressureSource::Full { grid: 256 }.evaluate(&sys, 2.0).unwrap();
    assert!(p.hi < zeta(4.0).ln());
}

#[test]
fn dimension_between_limits_for_each_system() {
    let target = TargetSpec::new(vec![0, 2], vec![1.0, 2.0], 3.0).unwrap();
    for sys in
        [SystemSpec::gauss(100).unwrap(), SystemSpec::lueroth(1000).unwrap(), SystemSpec::power_law(3.0, 1000).unwrap()]
    {
        let r = critical_exponent(&sys, &target, 1e-8, PressureSource::Full { grid: 256 }).unwrap();
        assert!(r.s0 > 1.0 / sys.d() && r.s0 < 1.0, "{:?} {}", sys.kind(), r.s0);
        assert!(r.envelope_lo <= r.s0 && r.s0 <= r.envelope_hi);
    }
}

#[test]
fn sweep_is_decreasing_for_power_law() {
    let sys = SystemSpec::power_law(2.5, 500).unwrap();
    let target = TargetSpec::single(2.0).unwrap();
    let t = critical_exponent_sweep(&sys, &target, &[1.5, 3.0, 9.0, 81.0], 1e-8, PressureSource::Full { grid: 128 })
        .unwrap();
    assert!(t.strictly_decreasing());
    assert_eq!(t.rows.len(), 4);
}

#[test]
fn cover_transition_tracks_critical_exponent() {
    let sys = SystemSpec::lueroth(1000).unwrap();
    let target = TargetSpec::single(2.0).unwrap();
    let s0 = critical_exponent(&sys, &target, 1e-10, PressureSource::Full { grid: 256 }).unwrap().s0;
    let grid: Vec<f64> = (0..11).map(|i| s0 - 0.1 + 0.02 * i as f64).collect();
    let ns: Vec<u32> = (8..=16).collect();
    let tr = cover_cost_transition(&sys, &target, &ns, &grid, EnumerationMode::Exact).unwrap();
    let crossing = tr.crossing.expect("slope changes sign");
    assert!((crossing - s0).abs() < 0.03, "{crossing} vs {s0}");
    assert!(tr.fits.first().unwrap().slope > 0.0 && tr.fits.last().unwrap().slope < 0.0);
}

#[test]
fn local_dimension_is_reproducible_and_bounded() {
    let sys = SystemSpec::lueroth(2000).unwrap();
    let target = TargetSpec::single(2.0).unwrap();
    let (spec, dim) = CantorSpec::at_critical(&sys, &target, 6, 2).unwrap();
    let mu = CantorMeasure::new(&sys, &target, &spec).unwrap();
    let a = local_dimension_sample(&mu, 50, 3).unwrap();
    let b = local_dimension_sample(&mu, 50, 3).unwrap();
    assert_eq!(a.rows.len(), b.rows.len());
    assert_relative_eq!(a.min, b.min);
    assert!(a.all_in_target);
    assert!(a.min > dim.s0 - 0.15 && a.min < 1.0 + 1e-9);
}
