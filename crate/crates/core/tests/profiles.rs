use approx::assert_relative_eq;
use proptest::prelude::*;
use yamabe::interp::CubicHermite;
use yamabe::params::{barenblatt_params, derive_params, ClosedForm, SolitonClass};
use yamabe::profile::{
    asymptotic_classify, elliptic_residual, integrate_cylindrical, integrate_euclidean, radial_grid,
    read_cylindrical_csv, read_radial_csv, to_cylindrical, to_radial, write_cylindrical_csv, write_radial_csv,
    ProfileError, RadialProfile, RateKind,
};

fn steady() -> yamabe::SolitonParams {
    derive_params(3, SolitonClass::Steady, 1.0).unwrap()
}

#[test]
fn shooting_is_bitwise_deterministic() {
    let p = derive_params(4, SolitonClass::Expander, 0.8).unwrap();
    let a = integrate_euclidean(&p, 1.3, 200.0, 1e-10).unwrap();
    let b = integrate_euclidean(&p, 1.3, 200.0, 1e-10).unwrap();
    assert_eq!(a, b);
    let c = integrate_cylindrical(&p, 1.3, -12.0, 15.0, 1e-10).unwrap();
    let d = integrate_cylindrical(&p, 1.3, -12.0, 15.0, 1e-10).unwrap();
    assert_eq!(c, d);
}

#[test]
fn shooting_matches_barenblatt_through_each_origin_value() {
    let p = barenblatt_params(4).unwrap();
    for u0 in [0.5, 1.0, 3.0] {
        let cf = ClosedForm::barenblatt_with_origin_value(4, u0).unwrap();
        let prof = integrate_euclidean(&p, u0, 50.0, 1e-10).unwrap();
        for (&r, &u) in prof.r().iter().zip(prof.u()) {
            assert_relative_eq!(u, cf.eval(r).0, max_relative = 1e-6);
        }
    }
}

#[test]
fn integrated_barenblatt_members_never_cross() {
    let p = barenblatt_params(3).unwrap();
    let grid = radial_grid(1e-2, 100.0, 300);
    let curves: Vec<Vec<f64>> = [0.25, 0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|&lambda| {
            let prof = integrate_euclidean(&p, lambda, 100.0, 1e-10).unwrap();
            let h = CubicHermite::from_slopes(prof.r().to_vec(), prof.u().to_vec(), prof.du_dr().to_vec()).unwrap();
            grid.iter().map(|&r| h.eval(r).unwrap()).collect()
        })
        .collect();
    for pair in curves.windows(2) {
        assert!(pair[0].iter().zip(&pair[1]).all(|(a, b)| a < b));
    }
}

#[test]
fn cylindrical_round_trip_is_exact_to_rounding() {
    let p = derive_params(3, SolitonClass::Shrinker, 1.7).unwrap();
    let prof = integrate_euclidean(&p, 0.8, 300.0, 1e-10).unwrap();
    let back = to_radial(&to_cylindrical(&prof).unwrap()).unwrap();
    assert_eq!(back.len(), prof.len());
    for i in 0..prof.len() {
        assert_relative_eq!(back.u()[i], prof.u()[i], max_relative = 1e-12);
        assert_relative_eq!(back.r()[i], prof.r()[i], max_relative = 1e-12);
    }
}

#[test]
fn start_is_insensitive_to_s_min() {
    let p = steady();
    let a = integrate_cylindrical(&p, 1.0, -12.0, 5.0, 1e-11).unwrap();
    let b = integrate_cylindrical(&p, 1.0, -24.0, 5.0, 1e-11).unwrap();
    let (wa, wb) = (a.w().last().unwrap(), b.w().last().unwrap());
    assert_relative_eq!(*wa, *wb, max_relative = 1e-7);
}

#[test]
fn steady_profile_to_e40_via_hand_off() {
    let prof = integrate_euclidean(&steady(), 1.0, 40f64.exp(), 1e-9).unwrap();
    assert_relative_eq!(prof.r_max(), 40f64.exp(), max_relative = 1e-12);
    assert!(prof.u().iter().all(|&u| u > 0.0));
}

#[test]
fn steady_cylindrical_run_grows_linearly() {
    let prof = integrate_cylindrical(&steady(), 1.0, -10.0, 40.0, 1e-10).unwrap();
    assert!(prof.w().iter().all(|&w| w > 0.0));
    assert!(prof.dw_ds().iter().all(|&ws| ws > 0.0));
    let rep = asymptotic_classify(&prof).unwrap();
    assert_eq!(rep.rate_kind, RateKind::LogCigar);
    assert!(rep.drift <= 0.05, "{rep:?}");
}

#[test]
fn barenblatt_tail_amplitude() {
    let prof = integrate_cylindrical(&barenblatt_params(3).unwrap(), 1.0, -12.0, 12.0, 1e-10).unwrap();
    let w_end = *prof.w().last().unwrap();
    assert_relative_eq!(w_end, 2.0, max_relative = 1e-8);
    let cf = ClosedForm::barenblatt(3, 1.0).unwrap();
    let closed = RadialProfile::closed_form(cf, radial_grid(1e-2, 1e5, 400)).unwrap();
    let rep = asymptotic_classify(&closed).unwrap();
    assert_eq!(rep.rate_kind, RateKind::SlowDecayCigar);
    assert_relative_eq!(rep.fitted_amplitude, 2f64.powf(1.25), max_relative = 1e-6);
    assert!(rep.drift <= 0.05);
}

#[test]
fn classification_needs_a_long_grid() {
    let prof = integrate_cylindrical(&steady(), 1.0, -12.0, 3.0, 1e-10).unwrap();
    assert!(matches!(asymptotic_classify(&prof), Err(ProfileError::GridTooShort { .. })));
}

#[test]
fn csv_round_trips_bitwise() {
    let p = derive_params(5, SolitonClass::Steady, 0.4).unwrap();
    let prof = integrate_euclidean(&p, 2.0, 30.0, 1e-10).unwrap();
    let mut buf = Vec::new();
    write_radial_csv(&prof, &mut buf).unwrap();
    let back = read_radial_csv(&buf[..], p).unwrap();
    assert_eq!(back.r(), prof.r());
    assert_eq!(back.u(), prof.u());
    assert_eq!(back.du_dr(), prof.du_dr());

    let cyl = to_cylindrical(&prof).unwrap();
    let mut buf = Vec::new();
    write_cylindrical_csv(&cyl, &mut buf).unwrap();
    let back = read_cylindrical_csv(&buf[..], 5, Some(p)).unwrap();
    assert_eq!(back.s(), cyl.s());
    assert_eq!(back.w(), cyl.w());
    assert_eq!(back.f(), cyl.f());
    assert!(read_radial_csv(&b"x,y\n1,2\n"[..], p).is_err());
}

#[test]
fn elliptic_residual_of_shooting_is_small() {
    let prof = integrate_euclidean(&steady(), 1.0, 50.0, 1e-11).unwrap();
    let res = elliptic_residual(&prof).unwrap();
    let worst = res.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    assert!(worst < 1e-3, "{worst}");
}

fn positive_gamma_case() -> impl Strategy<Value = (usize, SolitonClass, f64)> {
    prop_oneof![
        (3usize..7, 0.05f64..4.0).prop_map(|(n, b)| (n, SolitonClass::Steady, b)),
        // R > 1 needs β at least the Barenblatt value (n+2)/(2(n−2)); below it w overshoots its limit
        (3usize..7, 0.0f64..1.0).prop_map(|(n, t)| {
            let nf = n as f64;
            (n, SolitonClass::Shrinker, (nf + 2.0) / (2.0 * (nf - 2.0)) * (1.0 + t))
        }),
        (3usize..7, 0.0f64..1.0).prop_map(|(n, t)| {
            // γ > 0 means 2β > 1
            (n, SolitonClass::Expander, 0.55 + 3.0 * t)
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn w_and_f_increase_for_positive_gamma((n, class, beta) in positive_gamma_case(), lambda in 0.3f64..3.0) {
        let p = derive_params(n, class, beta).unwrap();
        prop_assert!(p.gamma() > 0.0);
        let prof = integrate_cylindrical(&p, lambda, -14.0, 8.0, 1e-10).unwrap();
        prop_assert!(prof.w().iter().all(|&w| w > 0.0));
        prop_assert!(prof.dw_ds().iter().all(|&ws| ws > 0.0));
        prop_assert!(prof.f().windows(2).all(|f| f[1] >= f[0]));
    }

    #[test]
    fn radial_profiles_are_positive_and_smooth_at_origin(n in 3usize..7, beta in 0.1f64..3.0, lambda in 0.3f64..3.0) {
        let p = derive_params(n, SolitonClass::Steady, beta).unwrap();
        let prof = integrate_euclidean(&p, lambda, 20.0, 1e-9).unwrap();
        prop_assert_eq!(prof.r()[0], 0.0);
        prop_assert_eq!(prof.u()[0], lambda);
        prop_assert_eq!(prof.du_dr()[0], 0.0);
        prop_assert!(prof.u().iter().all(|&u| u > 0.0));
        prop_assert!(prof.r().windows(2).all(|r| r[1] > r[0]));
    }
}
