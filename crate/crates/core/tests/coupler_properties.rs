use floquet_well::coupler::{propagate_coupler, CouplerSpec, ModulationProfile};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn spec(profile: ModulationProfile) -> CouplerSpec {
    CouplerSpec::new(0.5, 0.2, c(0.0, 0.5), profile).unwrap()
}

#[test]
fn favoured_mode_input_stays_put() {
    let a_in = [c(H, 0.0), c(-H, 0.0)];
    let s_in = [c(H, 0.0), c(H, 0.0)];
    let tr = propagate_coupler(&spec(ModulationProfile::OneSidedNegative), a_in, 5000.0, 10.0).unwrap();
    let worst = tr.antisymmetric_fraction().into_iter().fold(1.0, f64::min);
    assert!(worst > 0.5, "A input lost dominance: {worst}");
    let tr = propagate_coupler(&spec(ModulationProfile::OneSidedPositive), s_in, 5000.0, 10.0).unwrap();
    let worst = tr.antisymmetric_fraction().into_iter().fold(0.0, f64::max);
    assert!(worst < 0.5, "S input lost dominance: {worst}");
}

#[test]
fn unfavoured_mode_input_converts() {
    let s_in = [c(H, 0.0), c(H, 0.0)];
    let a_in = [c(H, 0.0), c(-H, 0.0)];
    let tr = propagate_coupler(&spec(ModulationProfile::OneSidedNegative), s_in, 2e4, 100.0).unwrap();
    assert!(*tr.antisymmetric_fraction().last().unwrap() > 0.5);
    let tr = propagate_coupler(&spec(ModulationProfile::OneSidedPositive), a_in, 2e4, 100.0).unwrap();
    assert!(*tr.antisymmetric_fraction().last().unwrap() < 0.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn guide_and_supermode_norms_agree(
        b1 in (-1.0f64..1.0, -1.0f64..1.0),
        b2 in (-1.0f64..1.0, -1.0f64..1.0),
        v in (-0.8f64..0.8, -0.8f64..0.8),
        eps in 0.1f64..1.0,
        profile in prop_oneof![
            Just(ModulationProfile::HermitianCos),
            Just(ModulationProfile::OneSidedNegative),
            Just(ModulationProfile::OneSidedPositive),
        ],
    ) {
        let s = CouplerSpec::new(0.5, eps, c(v.0, v.1), profile).unwrap();
        let tr = propagate_coupler(&s, [c(b1.0, b1.1), c(b2.0, b2.1)], 300.0, 7.0).unwrap();
        for (a, b) in tr.supermodes.iter().zip(&tr.guides) {
            let na = a[0].norm_sqr() + a[1].norm_sqr();
            let nb = b[0].norm_sqr() + b[1].norm_sqr();
            prop_assert!((na - nb).abs() <= 1e-12 * na.max(1e-300));
        }
    }
}
