use anlq::diagnostics::{fit_decay, modq_sobolev_ratio, random_band_limited, random_state};
use anlq::dynamics::nonlinear_residual;
use anlq::expcli::config::parse_config;
use anlq::expcli::series::fmt_real;
use anlq::expcli::snapshot::{decode_snapshot, encode_snapshot};
use anlq::grid::{GridSpec, SpectralField};
use anlq::qtensor::PhysParams;
use proptest::prelude::*;

fn max_abs(f: &SpectralField) -> f64 {
    f.data().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fit_ignores_amplitude(c in -20.0f64..20.0, alpha in 0.0f64..3.0, beta in 0.0f64..0.5, scale in -10.0f64..10.0) {
        let series: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let t = 10f64.powf(i as f64 / 13.0);
                (t, (c - alpha * (1.0 + t).ln() - beta * t).exp())
            })
            .collect();
        let scaled: Vec<(f64, f64)> = series.iter().map(|&(t, y)| (t, y * scale.exp())).collect();
        let a = fit_decay(&series, Some([1.0, 1e3])).unwrap();
        let b = fit_decay(&scaled, Some([1.0, 1e3])).unwrap();
        prop_assert!((a.alpha - alpha).abs() < 1e-8);
        prop_assert!((a.beta - beta).abs() < 1e-8);
        prop_assert!((a.alpha - b.alpha).abs() < 1e-8);
        prop_assert!((b.log_c - a.log_c - scale).abs() < 1e-7);
    }

    #[test]
    fn real_formatting_round_trips(bits in any::<u64>()) {
        let v = f64::from_bits(bits);
        prop_assume!(v.is_finite());
        prop_assert_eq!(fmt_real(v).parse::<f64>().unwrap().to_bits(), bits);
    }

    #[test]
    fn snapshot_round_trips(seed in 0u64..1000, t in 0.0f64..100.0, a in 0.1f64..5.0) {
        let grid = GridSpec::periodic(8).unwrap();
        let mut st = random_state(&grid, 2, seed).unwrap();
        st.t = t;
        let p = PhysParams::new(a, 2.0, 1.5, 0.3, 0.7, 1.1, 0.9).unwrap();
        let (back, q) = decode_snapshot(&encode_snapshot(&st, &p)).unwrap();
        prop_assert_eq!(back.t.to_bits(), t.to_bits());
        prop_assert_eq!(&back.qhat, &st.qhat);
        prop_assert_eq!(&back.uhat, &st.uhat);
        prop_assert_eq!(q, p);
    }

    #[test]
    fn modq_ratio_is_scale_invariant(seed in 0u64..1000, scale in 0.01f64..100.0) {
        let grid = GridSpec::periodic(16).unwrap();
        let q = random_band_limited(&grid, 5, 3, seed);
        let mut q2 = q.clone();
        q2.scale(scale);
        let r1 = modq_sobolev_ratio(&grid, &q, 2).unwrap();
        let r2 = modq_sobolev_ratio(&grid, &q2, 2).unwrap();
        prop_assert!((r1 - r2).abs() <= 1e-10 * r1);
    }

    #[test]
    fn derived_parameters_agree(c in 0.1f64..10.0, b in 0.1f64..10.0, a in 0.1f64..5.0, k in 0.1f64..5.0, l in 0.1f64..2.0) {
        let direct = parse_config(&format!("[phys]\na = {a}\nb = {b}\nc = {c}\nkappa = {k}\nlambda = {l}\n")).unwrap();
        let c_star = c - 2.0 * a;
        let alpha2 = k / (c * c);
        let derived = parse_config(&format!(
            "[phys]\nc_star = {c_star}\nb = {b}\nc = {c}\nalpha2 = {alpha2}\nlambda = {l}\n"
        ));
        let derived = derived.unwrap();
        prop_assert!((derived.phys.a - direct.phys.a).abs() <= 1e-12 * c.max(a));
        prop_assert!((derived.phys.kappa - direct.phys.kappa).abs() <= 1e-12 * k.max(1.0));
    }
}

#[test]
fn nonlinearity_is_quadratic_near_zero() {
    let grid = GridSpec::periodic(16).unwrap();
    let p = PhysParams::new(1.0, 6.0, 1.0, 1.5, 0.7, 1.0, 1.0).unwrap();
    for seed in 0..20 {
        let mut small = random_state(&grid, 3, seed).unwrap();
        small.qhat.scale(1e-3);
        small.uhat.scale(1e-3);
        let mut twice = small.clone();
        twice.qhat.scale(2.0);
        twice.uhat.scale(2.0);
        let r1 = nonlinear_residual(&small, &p).unwrap();
        let r2 = nonlinear_residual(&twice, &p).unwrap();
        for (x, y) in [(&r1.gq, &r2.gq), (&r1.gu, &r2.gu)] {
            let ratio = max_abs(y) / max_abs(x);
            assert!((3.9..4.1).contains(&ratio), "seed {seed}: ratio {ratio}");
        }
    }
}
