//! Kolmogorov-Smirnov distances.

use libm::erfc;

use crate::error::{Error, Result};

pub const MIN_KS_SAMPLES: usize = 10;

pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.len() < MIN_KS_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_KS_SAMPLES,
            got: samples.len(),
        });
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("NaN in KS sample".into()));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `sup_x |F_n(x) - F(x)|` for the empirical CDF of `samples` against a
/// continuous reference CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    let xs = sorted(samples)?;
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// `sup_x |F_n(x) - G_m(x)|` between two empirical CDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let xs = sorted(a)?;
    let ys = sorted(b)?;
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}
