use serde::{Deserialize, Serialize};

use super::{
    ks_distance, sharded_fold, sharded_map, standard_normal_cdf, Histogram, HistogramSpec,
    SampleStats,
};
use crate::chsh::{
    chsh_mean_exact, sample_chsh_fast, sample_chsh_full, sample_readings_fast,
    sample_readings_full, violation_fraction_analytic, ChshReadings, ChshSetting,
};
use crate::error::{Error, Result};
use crate::fock::{dimension, enumerate_basis, SectorSpec};
use crate::hilbert::{sample_uniform_state, BipartiteSpace, Dims, PureState, SeedSpec};
use crate::observables::{
    correlation, exact_variance, hilbert_average, mode_parity_observable, DiagonalObservable,
    SubsystemObservable,
};

/// Product dimension above which CHSH runs default to the fast path.
pub const FAST_PATH_THRESHOLD: usize = 10_000;

/// Two sectors, a sample count and a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub sector_a: SectorSpec,
    pub sector_b: SectorSpec,
    pub samples: u64,
    pub seed: u64,
}

impl ExperimentPlan {
    pub fn new(sector_a: SectorSpec, sector_b: SectorSpec, samples: u64, seed: u64) -> Self {
        Self {
            sector_a,
            sector_b,
            samples,
            seed,
        }
    }

    /// Both subsystems in the same sector.
    pub fn symmetric(sector: SectorSpec, samples: u64, seed: u64) -> Self {
        Self::new(sector, sector, samples, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidPlan("sample count must be at least 1".into()));
        }
        self.sector_a.validate()?;
        self.sector_b.validate()?;
        Ok(())
    }

    /// Subsystem dimensions from the counting recurrence, without enumeration.
    pub fn dims(&self) -> Result<Dims> {
        self.validate()?;
        let a = side_dim(&self.sector_a)?;
        let b = side_dim(&self.sector_b)?;
        a.checked_mul(b).ok_or(Error::Overflow)?;
        Ok(Dims::new(a, b))
    }

    pub fn space(&self) -> Result<BipartiteSpace> {
        self.validate()?;
        let a = enumerate_basis(&self.sector_a)?;
        let b = enumerate_basis(&self.sector_b)?;
        crate::hilbert::make_space(a, b)
    }

    fn seed_for(&self, index: u64) -> SeedSpec {
        SeedSpec::new(self.seed, index)
    }
}

fn side_dim(spec: &SectorSpec) -> Result<usize> {
    match dimension(spec)? {
        0 => Err(Error::EmptySector),
        d => usize::try_from(d).map_err(|_| Error::Overflow),
    }
}

/// `<O_A O_B^(q)>` for one `O_A` and several diagonal `O_B^(q)`.
///
/// The A factor is folded into per-column weights once, after which each
/// B observable costs `O(D_B)`. Numerators and the norm are accumulated in
/// the same order, so a product that is `+-1` on every basis state gives
/// exactly `+-1`.
pub fn sweep_correlations(
    state: &PureState,
    obs_a: &DiagonalObservable,
    obs_b: &[DiagonalObservable],
) -> Result<Vec<f64>> {
    let dims = state.dims();
    if obs_a.dim() != dims.a {
        return Err(Error::DimensionMismatch {
            expected: dims.a,
            found: obs_a.dim(),
        });
    }
    if let Some(bad) = obs_b.iter().find(|o| o.dim() != dims.b) {
        return Err(Error::DimensionMismatch {
            expected: dims.b,
            found: bad.dim(),
        });
    }
    let mut weighted = vec![0.0; dims.b];
    let mut plain = vec![0.0; dims.b];
    for (row, &la) in state.vector().rows().zip(obs_a.values()) {
        for ((z, w), p) in row.iter().zip(&mut weighted).zip(&mut plain) {
            let x = z.norm_sqr();
            *w += la * x;
            *p += x;
        }
    }
    let den: f64 = plain.iter().sum();
    Ok(obs_b
        .iter()
        .map(|o| {
            o.values()
                .iter()
                .zip(&weighted)
                .map(|(l, w)| l * w)
                .sum::<f64>()
                / den
        })
        .collect())
}

/// Per-`q` statistics of `<O_A^(mode_a) O_B^(q)>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub q: u32,
    pub mean: f64,
    pub std: f64,
    pub std_error: f64,
    pub min: f64,
    pub max: f64,
    pub hilbert_average: f64,
    pub exact_std: f64,
}

/// The full correlation curve of one sampled state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Showcase {
    pub sample_id: u64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSweep {
    pub rows: Vec<SweepRow>,
    pub showcase: Vec<Showcase>,
}

/// Samples `plan.samples` states and records `<O_A^(mode_a) O_B^(q)>` for
/// every `q` in `qs` on each of them. The first `showcase` states are also
/// returned curve by curve.
pub fn run_correlation_sweep(
    plan: &ExperimentPlan,
    mode_a: u32,
    qs: &[u32],
    showcase: u64,
) -> Result<CorrelationSweep> {
    let space = plan.space()?;
    let oa = mode_parity_observable(space.basis_a(), mode_a);
    let obs_b: Vec<DiagonalObservable> = qs
        .iter()
        .map(|&q| mode_parity_observable(space.basis_b(), q))
        .collect();

    let sa = SubsystemObservable::on_a(oa.clone());
    let mut predictions = Vec::with_capacity(qs.len());
    for ob in &obs_b {
        let sb = SubsystemObservable::on_b(ob.clone());
        predictions.push((hilbert_average(&sa, &sb)?, exact_variance(&sa, &sb)?.sqrt()));
    }

    let draw = |i: u64| {
        let state = sample_uniform_state(&space, plan.seed_for(i));
        sweep_correlations(&state, &oa, &obs_b).expect("observables built on the plan's bases")
    };
    let stats = sharded_fold(
        plan.samples,
        || vec![SampleStats::new(); qs.len()],
        |acc, i| {
            for (s, v) in acc.iter_mut().zip(draw(i)) {
                s.push(v);
            }
        },
        |acc, part| {
            for (s, p) in acc.iter_mut().zip(&part) {
                s.merge(p);
            }
        },
    );

    let rows = qs
        .iter()
        .zip(&stats)
        .zip(&predictions)
        .map(|((&q, s), &(hilbert_average, exact_std))| SweepRow {
            q,
            mean: s.mean(),
            std: s.std_dev(),
            std_error: s.std_error(),
            min: s.min(),
            max: s.max(),
            hilbert_average,
            exact_std,
        })
        .collect();
    let showcase = (0..showcase.min(plan.samples))
        .map(|sample_id| Showcase {
            sample_id,
            values: draw(sample_id),
        })
        .collect();
    Ok(CorrelationSweep { rows, showcase })
}

/// Which mode parities to correlate at quanta `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSelector {
    /// `(O^(0), O^(0))`
    ZeroMode,
    /// `(O^(M), O^(M))`
    TopMode,
    Modes(u32, u32),
}

impl PairSelector {
    pub fn modes(&self, quanta: u64) -> (u32, u32) {
        match *self {
            PairSelector::ZeroMode => (0, 0),
            PairSelector::TopMode => {
                let m = u32::try_from(quanta).unwrap_or(u32::MAX);
                (m, m)
            }
            PairSelector::Modes(a, b) => (a, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceRow {
    pub quanta: u64,
    pub dim: u64,
    pub samples: u64,
    pub hilbert_average: f64,
    /// Mean squared deviation of the samples from `hilbert_average`.
    pub empirical_var: f64,
    /// Unbiased variance about the sample mean.
    pub sample_var: f64,
    pub exact_var: f64,
    pub inv_dim: f64,
}

/// One row per `M`: both sectors of `base` moved to quanta `M`, correlating
/// the modes picked by `selector`.
pub fn run_variance_scan(
    base: &ExperimentPlan,
    ms: &[u64],
    selector: PairSelector,
) -> Result<Vec<VarianceRow>> {
    ms.iter()
        .map(|&m| {
            let plan = ExperimentPlan {
                sector_a: SectorSpec {
                    quanta: m,
                    ..base.sector_a
                },
                sector_b: SectorSpec {
                    quanta: m,
                    ..base.sector_b
                },
                ..*base
            };
            let (qa, qb) = selector.modes(m);
            let raw = correlation_stats(&plan, qa, qb)?;
            let s = raw.stats;
            let offset = s.mean() - raw.hilbert_average;
            Ok(VarianceRow {
                quanta: m,
                dim: raw.dim as u64,
                samples: s.count(),
                hilbert_average: raw.hilbert_average,
                empirical_var: s.population_variance() + offset * offset,
                sample_var: s.variance(),
                exact_var: raw.exact_var,
                inv_dim: 1.0 / raw.dim as f64,
            })
        })
        .collect()
}

struct RawCorrelations {
    dim: usize,
    stats: SampleStats,
    hilbert_average: f64,
    exact_var: f64,
}

fn parity_pair(
    space: &BipartiteSpace,
    qa: u32,
    qb: u32,
) -> (SubsystemObservable, SubsystemObservable) {
    (
        SubsystemObservable::on_a(mode_parity_observable(space.basis_a(), qa)),
        SubsystemObservable::on_b(mode_parity_observable(space.basis_b(), qb)),
    )
}

fn correlation_stats(plan: &ExperimentPlan, qa: u32, qb: u32) -> Result<RawCorrelations> {
    let space = plan.space()?;
    let (oa, ob) = parity_pair(&space, qa, qb);
    let stats = sharded_fold(
        plan.samples,
        SampleStats::new,
        |s, i| {
            let state = sample_uniform_state(&space, plan.seed_for(i));
            s.push(correlation(&state, &oa, &ob).expect("observables built on the plan's bases"));
        },
        |acc, part| acc.merge(&part),
    );
    Ok(RawCorrelations {
        dim: space.dim(),
        stats,
        hilbert_average: hilbert_average(&oa, &ob)?,
        exact_var: exact_variance(&oa, &ob)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionRun {
    pub modes: (u32, u32),
    pub standardized: bool,
    pub hilbert_average: f64,
    pub exact_std: f64,
    /// Statistics of the recorded variable (standardized or raw).
    pub stats: SampleStats,
    pub histogram: Histogram,
    /// KS distance to the standard normal, for standardized runs.
    pub ks_normal: Option<f64>,
    #[serde(skip)]
    pub values: Vec<f64>,
}

/// Histogram of `<O_A^(qa) O_B^(qb)>` over sampled states. With
/// `standardize`, the recorded variable is `a = (<O_A O_B> - mean)/std`
/// using the exact Hilbert-space mean and standard deviation.
pub fn run_distribution(
    plan: &ExperimentPlan,
    modes: (u32, u32),
    standardize: bool,
    hist: HistogramSpec,
) -> Result<DistributionRun> {
    hist.validate()?;
    let space = plan.space()?;
    let (oa, ob) = parity_pair(&space, modes.0, modes.1);
    let mean = hilbert_average(&oa, &ob)?;
    let std = exact_variance(&oa, &ob)?.sqrt();
    if standardize && std == 0.0 {
        return Err(Error::Domain(format!(
            "cannot standardize: the correlation of modes {modes:?} has zero variance"
        )));
    }
    let values = sharded_map(plan.samples, |i| {
        let state = sample_uniform_state(&space, plan.seed_for(i));
        let c = correlation(&state, &oa, &ob).expect("observables built on the plan's bases");
        if standardize {
            (c - mean) / std
        } else {
            c
        }
    });
    let mut histogram = Histogram::new(hist)?;
    let mut stats = SampleStats::new();
    for &v in &values {
        histogram.record(v);
        stats.push(v);
    }
    let ks_normal = if standardize && values.len() >= super::MIN_KS_SAMPLES {
        Some(ks_distance(&values, standard_normal_cdf)?)
    } else {
        None
    };
    Ok(DistributionRun {
        modes,
        standardized: standardize,
        hilbert_average: mean,
        exact_std: std,
        stats,
        histogram,
        ks_normal,
        values,
    })
}

/// How `<F>` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingPath {
    /// Sample the whole state and evaluate the four correlations.
    Full,
    /// Sample only the support of `F - 2` plus one chi-square remainder.
    Fast,
}

impl SamplingPath {
    pub fn auto(dims: Dims) -> Self {
        if dims.total() > FAST_PATH_THRESHOLD {
            SamplingPath::Fast
        } else {
            SamplingPath::Full
        }
    }
}

fn chsh_draw(
    dims: Dims,
    setting: &ChshSetting,
    path: SamplingPath,
    seed: SeedSpec,
) -> ChshReadings {
    let f = match path {
        SamplingPath::Full => sample_readings_full(dims, setting, seed),
        SamplingPath::Fast => sample_readings_fast(dims, setting, seed),
    };
    f.expect("setting validated against the plan's dimensions")
}

/// `<F>` for sample indices `0..plan.samples`.
pub fn sample_chsh_values(
    plan: &ExperimentPlan,
    setting: &ChshSetting,
    path: SamplingPath,
) -> Result<Vec<f64>> {
    let dims = plan.dims()?;
    setting.validate(dims)?;
    Ok(sharded_map(plan.samples, |i| {
        let seed = plan.seed_for(i);
        let f = match path {
            SamplingPath::Full => sample_chsh_full(dims, setting, seed),
            SamplingPath::Fast => sample_chsh_fast(dims, setting, seed),
        };
        f.expect("setting validated against the plan's dimensions")
    }))
}

/// Both readings of `<F>` for sample indices `0..plan.samples`.
pub fn sample_chsh_readings(
    plan: &ExperimentPlan,
    setting: &ChshSetting,
    path: SamplingPath,
) -> Result<Vec<ChshReadings>> {
    let dims = plan.dims()?;
    setting.validate(dims)?;
    Ok(sharded_map(plan.samples, |i| {
        chsh_draw(dims, setting, path, plan.seed_for(i))
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshSummary {
    pub dim_a: usize,
    pub dim_b: usize,
    pub dim: usize,
    pub samples: u64,
    pub path: SamplingPath,
    pub empirical_mean: f64,
    pub std: f64,
    pub std_error: f64,
    pub min: f64,
    pub max: f64,
    /// `Tr F / D`.
    pub trace_mean: f64,
    /// `2 - 8/D`.
    pub block_only_mean: f64,
    pub violations: u64,
    /// Fraction of samples with `<F> > 2`.
    pub empirical_violation: f64,
    pub analytic_violation: f64,
    /// The same states under the block-only reading.
    pub block_only_empirical_mean: f64,
    pub block_only_std_error: f64,
    pub block_only_violations: u64,
    pub block_only_empirical_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshRun {
    pub summary: ChshSummary,
    /// Over `D (<F> - 2)`.
    pub histogram: Histogram,
    /// Block-only reading on the same axis.
    pub block_only_histogram: Histogram,
}

/// Distribution of `<F>` over sampled states. `path = None` picks the fast
/// path above [`FAST_PATH_THRESHOLD`].
pub fn run_chsh_distribution(
    plan: &ExperimentPlan,
    setting: &ChshSetting,
    path: Option<SamplingPath>,
    hist: HistogramSpec,
) -> Result<ChshRun> {
    let dims = plan.dims()?;
    setting.validate(dims)?;
    let empty = Histogram::new(hist)?;
    let path = path.unwrap_or_else(|| SamplingPath::auto(dims));
    let d = dims.total() as f64;

    let fresh = || Tally {
        stats: SampleStats::new(),
        histogram: empty.clone(),
        violations: 0,
    };
    let (op, block) = sharded_fold(
        plan.samples,
        || (fresh(), fresh()),
        |(op, block), i| {
            let r = chsh_draw(dims, setting, path, plan.seed_for(i));
            op.record(r.operator, d);
            block.record(r.block_only, d);
        },
        |(op, block), (pop, pblock)| {
            op.merge(pop);
            block.merge(pblock);
        },
    );
    let stats = op.stats;

    let mean = chsh_mean_exact(setting, dims)?;
    let summary = ChshSummary {
        dim_a: dims.a,
        dim_b: dims.b,
        dim: dims.total(),
        samples: stats.count(),
        path,
        empirical_mean: stats.mean(),
        std: stats.std_dev(),
        std_error: stats.std_error(),
        min: stats.min(),
        max: stats.max(),
        trace_mean: mean.trace,
        block_only_mean: mean.block_only,
        violations: op.violations,
        empirical_violation: op.violations as f64 / stats.count() as f64,
        analytic_violation: violation_fraction_analytic(),
        block_only_empirical_mean: block.stats.mean(),
        block_only_std_error: block.stats.std_error(),
        block_only_violations: block.violations,
        block_only_empirical_violation: block.violations as f64 / stats.count() as f64,
    };
    Ok(ChshRun {
        summary,
        histogram: op.histogram,
        block_only_histogram: block.histogram,
    })
}

struct Tally {
    stats: SampleStats,
    histogram: Histogram,
    violations: u64,
}

impl Tally {
    fn record(&mut self, f: f64, d: f64) {
        self.stats.push(f);
        self.histogram.record(d * (f - 2.0));
        self.violations += u64::from(f > 2.0);
    }

    fn merge(&mut self, other: Tally) {
        self.stats.merge(&other.stats);
        self.histogram
            .merge(&other.histogram)
            .expect("shards share one binning");
        self.violations += other.violations;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Statistics;

    fn bose_plan(m: u64, samples: u64, seed: u64) -> ExperimentPlan {
        ExperimentPlan::symmetric(SectorSpec::bose(5, m), samples, seed)
    }

    #[test]
    fn plan_validation() {
        assert!(bose_plan(3, 0, 1).validate().is_err());
        let empty = ExperimentPlan::symmetric(SectorSpec::fermi(5, 3), 10, 1);
        assert_eq!(empty.dims().unwrap_err(), Error::EmptySector);
        assert_eq!(bose_plan(3, 1, 1).dims().unwrap(), Dims::new(3, 3));
    }

    #[test]
    fn plan_round_trips_and_rejects_unknown_keys() {
        let plan = bose_plan(2, 5, 7);
        let text = serde_json::to_string(&plan).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentPlan>(&text).unwrap(), plan);
        let extra = text.replacen('{', "{\"threads\":4,", 1);
        assert!(serde_json::from_str::<ExperimentPlan>(&extra).is_err());
    }

    #[test]
    fn sweep_matches_pairwise_correlation() {
        let plan = bose_plan(8, 1, 3);
        let space = plan.space().unwrap();
        let qs: Vec<u32> = (0..=8).collect();
        let oa = mode_parity_observable(space.basis_a(), 0);
        let obs_b: Vec<_> = qs
            .iter()
            .map(|&q| mode_parity_observable(space.basis_b(), q))
            .collect();
        for i in 0..20 {
            let state = sample_uniform_state(&space, SeedSpec::new(3, i));
            let fast = sweep_correlations(&state, &oa, &obs_b).unwrap();
            for (ob, v) in obs_b.iter().zip(fast) {
                let slow = correlation(
                    &state,
                    &SubsystemObservable::on_a(oa.clone()),
                    &SubsystemObservable::on_b(ob.clone()),
                )
                .unwrap();
                assert!((slow - v).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn sweep_values_are_bounded() {
        let plan = bose_plan(20, 2, 11);
        let qs: Vec<u32> = (0..=20).collect();
        let sweep = run_correlation_sweep(&plan, 0, &qs, 2).unwrap();
        assert_eq!(sweep.rows.len(), 21);
        assert_eq!(sweep.showcase.len(), 2);
        for row in &sweep.rows {
            assert!(row.min >= -1.0 && row.max <= 1.0);
        }
        for s in &sweep.showcase {
            assert!(s.values.iter().all(|v| v.abs() <= 1.0));
        }
    }

    #[test]
    fn fermi_sweep_flat_beyond_highest_mode() {
        let spec = SectorSpec::exact(Statistics::Fermi, 5, 30);
        let plan = ExperimentPlan::symmetric(spec, 50, 5);
        let qs: Vec<u32> = (20..=30).collect();
        let sweep = run_correlation_sweep(&plan, 0, &qs, 2).unwrap();
        let a_side = {
            let space = plan.space().unwrap();
            let oa = SubsystemObservable::on_a(mode_parity_observable(space.basis_a(), 0));
            crate::observables::microcanonical_average(&oa, space.basis_a()).unwrap()
        };
        for row in sweep.rows.iter().filter(|r| r.q >= 25) {
            assert_eq!(row.hilbert_average, a_side);
        }
        // the B factor is the identity there, so every curve is flat
        for s in &sweep.showcase {
            let tail = &s.values[5..];
            assert!(tail.iter().all(|&v| v == tail[0]));
        }
    }

    #[test]
    fn degenerate_rows_vanish_exactly() {
        let base = bose_plan(0, 300, 9);
        for row in run_variance_scan(&base, &[0, 1, 2, 3, 4], PairSelector::ZeroMode).unwrap() {
            assert_eq!(row.exact_var, 0.0, "M = {}", row.quanta);
            assert_eq!(row.empirical_var, 0.0, "M = {}", row.quanta);
        }
        for row in run_variance_scan(&base, &[0, 1], PairSelector::TopMode).unwrap() {
            assert_eq!(row.exact_var, 0.0);
            assert_eq!(row.empirical_var, 0.0);
        }
        let rows = run_variance_scan(&base, &[5, 6, 2], PairSelector::TopMode).unwrap();
        assert!(rows
            .iter()
            .all(|r| r.exact_var > 0.0 && r.exact_var < r.inv_dim));
    }

    #[test]
    fn standardized_moments() {
        let plan = bose_plan(8, 4000, 21);
        let run = run_distribution(&plan, (0, 0), true, HistogramSpec::standardized()).unwrap();
        let n = run.stats.count() as f64;
        assert_eq!(run.histogram.total(), plan.samples);
        assert!(run.stats.mean().abs() < 4.0 / n.sqrt());
        assert!((run.stats.variance() - 1.0).abs() < 4.0 * (2.0 / n).sqrt());
        let raw =
            run_distribution(&plan, (0, 0), false, HistogramSpec::new(-1.0, 1.0, 50)).unwrap();
        let expected: SampleStats = raw
            .values
            .iter()
            .map(|c| (c - run.hilbert_average) / run.exact_std)
            .collect();
        assert!((expected.mean() - run.stats.mean()).abs() < 1e-12);
        assert!(raw.ks_normal.is_none());
        assert!(run_distribution(
            &bose_plan(3, 20, 1),
            (0, 0),
            true,
            HistogramSpec::standardized()
        )
        .is_err());
    }

    #[test]
    fn chsh_run_summary() {
        let plan = bose_plan(3, 20_000, 13);
        let run =
            run_chsh_distribution(&plan, &ChshSetting::default(), None, HistogramSpec::chsh())
                .unwrap();
        let s = run.summary;
        assert_eq!(s.path, SamplingPath::Full);
        assert_eq!(s.dim, 9);
        assert_eq!(run.histogram.total(), 20_000);
        assert!((s.empirical_mean - s.trace_mean).abs() < 4.0 * s.std_error);
        assert!(s.violations > 0);
        assert!(s.max <= 2.0 * std::f64::consts::SQRT_2 + 1e-12);
        assert!(s.min >= -2.0 * std::f64::consts::SQRT_2 - 1e-12);
        assert_eq!(run.block_only_histogram.total(), 20_000);
        let mean = s.block_only_mean;
        assert!((s.block_only_empirical_mean - mean).abs() < 4.0 * s.block_only_std_error);
        let big = bose_plan(20, 1, 1);
        assert_eq!(SamplingPath::auto(big.dims().unwrap()), SamplingPath::Fast);
    }

    #[test]
    fn chsh_values_follow_stream_indices() {
        let plan = bose_plan(2, 10, 4);
        let v = sample_chsh_values(&plan, &ChshSetting::default(), SamplingPath::Full).unwrap();
        let dims = plan.dims().unwrap();
        for (i, &f) in v.iter().enumerate() {
            let direct =
                sample_chsh_full(dims, &ChshSetting::default(), SeedSpec::new(4, i as u64))
                    .unwrap();
            assert_eq!(f.to_bits(), direct.to_bits());
        }
    }
}
