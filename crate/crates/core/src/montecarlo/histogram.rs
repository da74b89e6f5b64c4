use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform binning of `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramSpec {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl HistogramSpec {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Self { lo, hi, bins }
    }

    /// Standardized correlations, `a` in `[-5, 5)`.
    pub fn standardized() -> Self {
        Self::new(-5.0, 5.0, 100)
    }

    /// CHSH values on the `D(<F> - 2)` axis.
    pub fn chsh() -> Self {
        Self::new(-40.0, 12.0, 200)
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins == 0 || !self.lo.is_finite() || !self.hi.is_finite() || self.lo >= self.hi {
            return Err(Error::InvalidPlan(format!(
                "histogram needs finite lo < hi and at least one bin, got [{}, {}) with {} bins",
                self.lo, self.hi, self.bins
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    spec: HistogramSpec,
    counts: Vec<u64>,
    underflow: u64,
    overflow: u64,
}

impl Histogram {
    pub fn new(spec: HistogramSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec,
            counts: vec![0; spec.bins],
            underflow: 0,
            overflow: 0,
        })
    }

    /// Values below `lo` count as underflow; values at or above `hi`, and
    /// NaN, as overflow.
    pub fn record(&mut self, x: f64) {
        if x < self.spec.lo {
            self.underflow += 1;
        } else if x < self.spec.hi {
            let bin = ((x - self.spec.lo) / self.spec.width()) as usize;
            self.counts[bin.min(self.spec.bins - 1)] += 1;
        } else {
            self.overflow += 1;
        }
    }

    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::InvalidPlan(
                "cannot merge histograms with different binning".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        Ok(())
    }

    pub fn spec(&self) -> &HistogramSpec {
        &self.spec
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn underflow(&self) -> u64 {
        self.underflow
    }

    pub fn overflow(&self) -> u64 {
        self.overflow
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    pub fn bin_edges(&self, bin: usize) -> (f64, f64) {
        let w = self.spec.width();
        (
            self.spec.lo + bin as f64 * w,
            self.spec.lo + (bin + 1) as f64 * w,
        )
    }

    pub fn bin_center(&self, bin: usize) -> f64 {
        let (l, h) = self.bin_edges(bin);
        0.5 * (l + h)
    }

    /// Counts normalized by the total number of samples (including under- and
    /// overflow) and the bin width.
    pub fn density(&self, bin: usize) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        self.counts[bin] as f64 / (total as f64 * self.spec.width())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binning_and_edges() {
        let mut h = Histogram::new(HistogramSpec::new(0.0, 1.0, 4)).unwrap();
        for x in [-0.1, 0.0, 0.24, 0.25, 0.99, 1.0, f64::NAN] {
            h.record(x);
        }
        assert_eq!(h.counts(), &[2, 1, 0, 1]);
        assert_eq!(h.underflow(), 1);
        assert_eq!(h.overflow(), 2);
        assert_eq!(h.total(), 7);
        assert_eq!(h.bin_edges(1), (0.25, 0.5));
        assert_eq!(h.bin_center(0), 0.125);
    }

    #[test]
    fn invalid_specs() {
        assert!(Histogram::new(HistogramSpec::new(1.0, 1.0, 3)).is_err());
        assert!(Histogram::new(HistogramSpec::new(0.0, 1.0, 0)).is_err());
        assert!(Histogram::new(HistogramSpec::new(0.0, f64::INFINITY, 3)).is_err());
        let mut a = Histogram::new(HistogramSpec::new(0.0, 1.0, 3)).unwrap();
        let b = Histogram::new(HistogramSpec::new(0.0, 2.0, 3)).unwrap();
        assert!(a.merge(&b).is_err());
    }

    proptest! {
        #[test]
        fn totals_are_conserved(xs in prop::collection::vec(-60f64..20.0, 0..500), split in 0usize..500) {
            let spec = HistogramSpec::chsh();
            let mut whole = Histogram::new(spec).unwrap();
            xs.iter().for_each(|&x| whole.record(x));
            prop_assert_eq!(whole.total(), xs.len() as u64);

            let cut = split.min(xs.len());
            let mut left = Histogram::new(spec).unwrap();
            let mut right = Histogram::new(spec).unwrap();
            xs[..cut].iter().for_each(|&x| left.record(x));
            xs[cut..].iter().for_each(|&x| right.record(x));
            left.merge(&right).unwrap();
            prop_assert_eq!(left, whole);
        }
    }
}
