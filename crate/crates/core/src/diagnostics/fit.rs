use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares fit of `log y = logC − α log(1+t) − β t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub log_c: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Residual sum of squares in `log y`.
    pub rss: f64,
    pub window: [f64; 2],
    pub samples: usize,
}

/// Default window: the last decade of the sampled times.
pub fn default_window(times: &[f64]) -> Option<[f64; 2]> {
    let hi = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi.is_finite().then_some([hi / 10.0, hi])
}

/// Window membership, inclusive up to a relative `1e−12` so log-spaced
/// samples landing on an endpoint are kept.
fn in_window(t: f64, w: [f64; 2]) -> bool {
    let eps = 1e-12;
    t >= w[0] - eps * w[0].abs() && t <= w[1] + eps * w[1].abs()
}

/// Fit `(t, y)` samples inside `window` (inclusive); `None` selects
/// [`default_window`].
pub fn fit_decay(series: &[(f64, f64)], window: Option<[f64; 2]>) -> Result<DecayFit> {
    if let Some(&(t, y)) = series.iter().find(|&&(_, y)| !(y > 0.0 && y.is_finite())) {
        return Err(Error::Degenerate(format!("decay fit needs positive samples, got y({t}) = {y}")));
    }
    let logs: Vec<(f64, f64)> = series.iter().map(|&(t, y)| (t, y.ln())).collect();
    fit_decay_log(&logs, window)
}

/// As [`fit_decay`] with `log y` supplied directly, for series whose values
/// underflow.
pub fn fit_decay_log(series: &[(f64, f64)], window: Option<[f64; 2]>) -> Result<DecayFit> {
    let times: Vec<f64> = series.iter().map(|s| s.0).collect();
    let window = match window.or_else(|| default_window(&times)) {
        Some(w) => w,
        None => return Err(Error::Degenerate("empty series".into())),
    };
    let pts: Vec<(f64, f64)> = series.iter().copied().filter(|&(t, _)| in_window(t, window)).collect();
    if pts.len() < 4 {
        return Err(Error::Degenerate(format!(
            "decay fit needs at least 4 samples in [{}, {}], got {}",
            window[0],
            window[1],
            pts.len()
        )));
    }
    if let Some(&(t, ly)) = pts.iter().find(|&&(t, ly)| !(t.is_finite() && ly.is_finite() && t > -1.0)) {
        return Err(Error::Degenerate(format!("invalid sample (t, log y) = ({t}, {ly})")));
    }
    let a = DMatrix::from_fn(pts.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => -(1.0 + pts[i].0).ln(),
        _ => -pts[i].0,
    });
    let b = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::SingularFit(format!("design matrix condition {:e}", smax / smin)));
    }
    let x = svd.solve(&b, 1e-14 * smax).map_err(|e| Error::SingularFit(e.to_string()))?;
    let r = &a * &x - &b;
    Ok(DecayFit { log_c: x[0], alpha: x[1], beta: x[2], rss: r.norm_squared(), window, samples: pts.len() })
}

/// `(inf, sup)` of `(1+t)^{3/4+k/2} y(t)` over the series.
pub fn lower_bound_check(series: &[(f64, f64)], k: u32) -> Result<(f64, f64)> {
    if series.is_empty() {
        return Err(Error::Degenerate("empty series".into()));
    }
    let exp = 0.75 + 0.5 * k as f64;
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &(t, y) in series {
        if !(y > 0.0 && y.is_finite()) {
            return Err(Error::Degenerate(format!("compensated series needs positive samples, got y({t}) = {y}")));
        }
        let c = (1.0 + t).powf(exp) * y;
        lo = lo.min(c);
        hi = hi.max(c);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn exact_model_is_recovered() {
        let s: Vec<(f64, f64)> =
            (0..=50).map(|i| (i as f64, 2.0 * (1.0 + i as f64).powf(-0.75) * (-0.5 * i as f64).exp())).collect();
        let f = fit_decay(&s, Some([0.0, 50.0])).unwrap();
        assert!((f.log_c - 2f64.ln()).abs() < 1e-10);
        assert!((f.alpha - 0.75).abs() < 1e-10);
        assert!((f.beta - 0.5).abs() < 1e-10);
        assert!(f.rss < 1e-20);
        assert_eq!(f.samples, 51);

        let s: Vec<(f64, f64)> = (0..=50).map(|i| (i as f64, (1.0 + i as f64).powf(-1.25))).collect();
        let f = fit_decay(&s, Some([0.0, 50.0])).unwrap();
        assert!((f.alpha - 1.25).abs() < 1e-10 && f.beta.abs() < 1e-10);
    }

    #[test]
    fn rescaling_only_shifts_log_c() {
        let s: Vec<(f64, f64)> = (1..40).map(|i| (i as f64, (1.0 + i as f64).powf(-0.9) * (1.0 + 0.1 * (i as f64).sin()))).collect();
        let f1 = fit_decay(&s, Some([1.0, 40.0])).unwrap();
        let scaled: Vec<(f64, f64)> = s.iter().map(|&(t, y)| (t, 7.5 * y)).collect();
        let f2 = fit_decay(&scaled, Some([1.0, 40.0])).unwrap();
        assert!((f1.alpha - f2.alpha).abs() < 1e-12 && (f1.beta - f2.beta).abs() < 1e-12);
        assert!((f2.log_c - f1.log_c - 7.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn noisy_fits_stay_close() {
        for seed in 0..20 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let noise = Normal::new(0.0, 0.01).unwrap();
            let s: Vec<(f64, f64)> = (0..200)
                .map(|i| {
                    let t = 0.25 * i as f64;
                    (t, 3.0 * (1.0 + t).powf(-1.25) * (-0.2 * t).exp() * (1.0 + noise.sample(&mut rng)))
                })
                .collect();
            let f = fit_decay(&s, Some([0.0, 50.0])).unwrap();
            assert!((f.alpha - 1.25).abs() < 0.05, "seed {seed}: alpha {}", f.alpha);
            assert!((f.beta - 0.2).abs() < 0.01, "seed {seed}: beta {}", f.beta);
        }
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let few = [(1.0, 1.0), (2.0, 0.5), (3.0, 0.3)];
        assert!(matches!(fit_decay(&few, None), Err(Error::Degenerate(_))));
        let same_t = [(1.0, 1.0); 6];
        assert!(matches!(fit_decay(&same_t, Some([0.0, 2.0])), Err(Error::SingularFit(_))));
        assert!(fit_decay(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0)], None).is_err());
    }

    #[test]
    fn default_window_is_last_decade() {
        let s: Vec<(f64, f64)> = (0..=100).map(|i| (10f64.powf(i as f64 / 25.0), 1.0 / (1.0 + i as f64))).collect();
        let f = fit_decay(&s, None).unwrap();
        assert_eq!(f.window, [1000.0, 10000.0]);
        assert_eq!(f.samples, 26);
    }

    #[test]
    fn compensated_heat_series() {
        // Heat flow of a Gaussian: the L² norm decays like (1+2t)^{−3/4}.
        let s: Vec<(f64, f64)> = (0..60).map(|i| 10f64.powf(3.0 * i as f64 / 59.0)).map(|t| (t, (1.0 + 2.0 * t).powf(-0.75))).collect();
        let (lo, hi) = lower_bound_check(&s, 0).unwrap();
        assert!(hi / lo < 10.0);
        assert!(lower_bound_check(&[(1.0, 0.0)], 0).is_err());
    }
}
