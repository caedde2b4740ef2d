use floquet_well::twolevel::{
    fold, generalized_eigenvector, monodromy, propagate, sweep, wkb_quasi_energies, DriveSpec,
};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Signed distance `a − b` on the circle of circumference `eps`.
fn circle(a: f64, b: f64, eps: f64) -> f64 {
    fold(a - b + 0.5 * eps, eps) - 0.5 * eps
}

#[test]
fn hermitian_quasi_energies_are_real_and_opposite() {
    let d = DriveSpec::hermitian(0.5, 1.0, 0.2).unwrap();
    let eps: Vec<f64> = (0..200).map(|k| 0.1 + 0.005 * k as f64 + 1e-4).collect();
    for p in sweep(&d, &eps, 8).unwrap() {
        assert!(p.mu_imag[0].abs() < 1e-10 && p.mu_imag[1].abs() < 1e-10, "{p:?}");
        let s = circle(p.mu_folded[0] + p.mu_folded[1], 0.0, p.eps);
        assert!(s.abs() < 1e-10, "eps {}: μ₁ + μ₂ = {s:e} mod ε", p.eps);
    }
}

#[test]
fn hermitian_trajectories_conserve_norm() {
    // 10⁴ periods.
    let d = DriveSpec::hermitian(0.5, 1.0, 0.5).unwrap();
    let rec = propagate(&d, [c(0.6, 0.0), c(0.0, 0.8)], 1e4 * d.period(), 50.0 * d.period()).unwrap();
    let drift = rec.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-8, "{drift:e}");
}

#[test]
fn wkb_error_is_quartic_in_eps() {
    // Frequencies midway between resonances ε = ω₀/N.
    let d = DriveSpec::hermitian(0.5, 1.0, 0.2).unwrap();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for n in [5.5, 6.5, 7.5, 8.5, 10.5, 12.5] {
        let d = d.with_eps(1.0 / n);
        let exact = monodromy(&d).unwrap().unfolded[0].re;
        let approx = wkb_quasi_energies(&d).unwrap().quadrature.0;
        xs.push(d.eps.ln());
        ys.push(circle(exact, approx, d.eps).abs().ln());
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - 4.0).abs() < 0.3, "log-log slope {slope}");
}

#[test]
fn one_sided_defect_approaches_one_at_odd_resonances() {
    let d = DriveSpec::one_sided(0.5, 1.0, 0.2).unwrap();
    for order in [3.0, 5.0, 7.0] {
        let at = monodromy(&d.with_eps(1.0 / order)).unwrap();
        assert!(at.defect >= 0.999 && at.is_exceptional(), "N = {order}: {}", at.defect);
        let near = monodromy(&d.with_eps((1.0 + 1e-8) / order)).unwrap();
        assert!(near.defect > 0.99, "N = {order}: {}", near.defect);
    }
    for order in [2.0, 4.0, 6.0] {
        let at = monodromy(&d.with_eps(1.0 / order)).unwrap();
        assert!(at.defect < 0.2, "N = {order}: {}", at.defect);
    }
}

#[test]
fn jordan_chain_predicts_linear_growth() {
    let d = DriveSpec::new(c(0.0, 0.0), c(0.0, 0.5), 1.0, 0.2).unwrap();
    let mono = monodromy(&d).unwrap();
    let chain = generalized_eigenvector(&mono).unwrap();
    assert!(chain.residual <= 1e-6, "{:e}", chain.residual);

    // With (R − μ)Q = q and (R − μ)q = 0 the stroboscopic solution from Q
    // is e^{−iμt}(Q − it q).
    let periods = 40;
    let t_final = periods as f64 * d.period();
    let rec = propagate(&d, chain.associated, t_final, d.period()).unwrap();
    for (k, a) in rec.amplitudes.iter().enumerate().skip(1) {
        let t = rec.times[k];
        let phase = C64::new(0.0, -chain.mu * t).exp();
        let expect = [
            phase * (chain.associated[0] - C64::new(0.0, t) * chain.eigenvector[0]),
            phase * (chain.associated[1] - C64::new(0.0, t) * chain.eigenvector[1]),
        ];
        let err = ((a[0] - expect[0]).norm_sqr() + (a[1] - expect[1]).norm_sqr()).sqrt();
        let size = (expect[0].norm_sqr() + expect[1].norm_sqr()).sqrt();
        assert!(err < 1e-4 * size, "t = {t}: {err:e} of {size}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn one_sided_quasi_energies_are_exact(
        v in 0.05f64..1.0,
        phase in 0.0f64..std::f64::consts::TAU,
        eps in 0.12f64..1.5,
    ) {
        let d = DriveSpec::new(c(0.0, 0.0), C64::from_polar(v, phase), 1.0, eps).unwrap();
        let m = monodromy(&d).unwrap();
        prop_assert!((m.unfolded[0] - c(-0.5, 0.0)).norm() < 1e-8, "{:?}", m.unfolded);
        prop_assert!((m.unfolded[1] - c(0.5, 0.0)).norm() < 1e-8, "{:?}", m.unfolded);
    }

    #[test]
    fn real_product_matches_hermitian_equivalent(
        v1 in 0.1f64..1.0,
        v2 in 0.1f64..1.0,
        phase in 0.0f64..std::f64::consts::TAU,
        eps in 0.12f64..1.2,
    ) {
        // V₁ = v₁e^{iφ}, V₂ = v₂e^{−iφ} behaves like a Hermitian drive with √(v₁v₂).
        let d = DriveSpec::new(C64::from_polar(v1, phase), C64::from_polar(v2, -phase), 1.0, eps).unwrap();
        let h = DriveSpec::hermitian((v1 * v2).sqrt(), 1.0, eps).unwrap();
        let (md, mh) = (monodromy(&d).unwrap(), monodromy(&h).unwrap());
        let mut a = [md.quasi_energies[0].re, md.quasi_energies[1].re];
        let mut b = [mh.quasi_energies[0].re, mh.quasi_energies[1].re];
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let direct = circle(a[0], b[0], eps).abs().max(circle(a[1], b[1], eps).abs());
        let crossed = circle(a[0], b[1], eps).abs().max(circle(a[1], b[0], eps).abs());
        prop_assert!(direct.min(crossed) < 1e-8, "{a:?} vs {b:?}");
        prop_assert!(md.quasi_energies[0].im.abs() < 1e-8 && md.quasi_energies[1].im.abs() < 1e-8);
    }
}
