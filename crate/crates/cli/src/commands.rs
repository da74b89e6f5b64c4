use std::path::{Path, PathBuf};

use serde::Serialize;
use typgas::chsh::{scaled_density, scaled_lower_tail, scaled_upper_tail};
use typgas::fock::{dimension, SectorSpec};
use typgas::montecarlo::{
    run_chsh_distribution, run_correlation_sweep, run_distribution, run_variance_scan, ChshSummary,
    PairSelector, SampleStats,
};

use crate::config::{DimsConfig, Fig1Config, Fig2Config, Fig3Config, Fig4Config, RunConfig};
use crate::error::CliResult;
use crate::output::{ensure_dir, fmt_f64, to_json, write_json, Table};

/// Files written by a run, plus the JSON summary also printed to stdout.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Option<String>,
}

/// Validates `config`, writes `config.json` and the run's tables into `out`.
pub fn execute(config: &RunConfig, out: &Path) -> CliResult<Outcome> {
    config.validate()?;
    ensure_dir(out)?;
    let mut files = vec![write_json(out, "config.json", config)?];
    let summary = match config {
        RunConfig::Dims(c) => {
            files.push(dims_table(c)?.write(out, "dims.csv")?);
            None
        }
        RunConfig::Fig1(c) => {
            let (stats, showcase) = fig1_tables(c)?;
            files.push(stats.write(out, "fig1_stats.csv")?);
            files.push(showcase.write(out, "fig1_showcase.csv")?);
            None
        }
        RunConfig::Fig2(c) => {
            files.push(fig2_table(c)?.write(out, "fig2.csv")?);
            None
        }
        RunConfig::Fig3(c) => {
            let (hist, summary) = fig3(c)?;
            files.push(hist.write(out, "fig3_hist.csv")?);
            files.push(write_json(out, "fig3_summary.json", &summary)?);
            Some(to_json(&summary))
        }
        RunConfig::Fig4(c) => {
            let run = fig4(c)?;
            files.push(run.histogram.write(out, "fig4_hist.csv")?);
            files.push(run.curve.write(out, "fig4_curve.csv")?);
            files.push(write_json(out, "fig4_summary.json", &run.summary)?);
            Some(to_json(&run.summary))
        }
    };
    Ok(Outcome { files, summary })
}

/// `M, D, ln D, ln D / sqrt M` from the smallest admissible `M` to `m_max`.
pub fn dims_table(c: &DimsConfig) -> CliResult<Table> {
    let mut t = Table::new(&["M", "D", "ln_D", "ln_D_over_sqrt_M"]);
    let floor = SectorSpec::min_quanta(c.statistics, c.particles, c.shell);
    for m in floor..=c.m_max {
        let d = dimension(&SectorSpec::new(c.statistics, c.particles, m, c.shell))?;
        let ln_d = (d as f64).ln();
        t.push(vec![
            m.to_string(),
            d.to_string(),
            fmt_f64(ln_d),
            fmt_f64(ln_d / (m as f64).sqrt()),
        ]);
    }
    Ok(t)
}

/// Per-`q` statistics, and the individual curves of the showcase states.
pub fn fig1_tables(c: &Fig1Config) -> CliResult<(Table, Table)> {
    let qs: Vec<u32> = (0..=c.q_max).collect();
    let sweep = run_correlation_sweep(&c.plan, c.mode_a, &qs, c.showcase)?;
    let mut stats = Table::new(&[
        "q",
        "samples",
        "mean",
        "std",
        "std_error",
        "hilbert_average",
        "exact_std",
    ]);
    for r in &sweep.rows {
        stats.push(vec![
            r.q.to_string(),
            c.plan.samples.to_string(),
            fmt_f64(r.mean),
            fmt_f64(r.std),
            fmt_f64(r.std_error),
            fmt_f64(r.hilbert_average),
            fmt_f64(r.exact_std),
        ]);
    }
    let mut showcase = Table::new(&[
        "q",
        "sample_id",
        "correlation",
        "hilbert_average",
        "exact_std",
    ]);
    for s in &sweep.showcase {
        for (r, v) in sweep.rows.iter().zip(&s.values) {
            showcase.push(vec![
                r.q.to_string(),
                s.sample_id.to_string(),
                fmt_f64(*v),
                fmt_f64(r.hilbert_average),
                fmt_f64(r.exact_std),
            ]);
        }
    }
    Ok((stats, showcase))
}

pub fn pair_label(p: PairSelector) -> String {
    match p {
        PairSelector::ZeroMode => "zero".into(),
        PairSelector::TopMode => "top".into(),
        PairSelector::Modes(a, b) => format!("{a}:{b}"),
    }
}

pub fn fig2_table(c: &Fig2Config) -> CliResult<Table> {
    let mut t = Table::new(&[
        "pair",
        "M",
        "D",
        "samples",
        "hilbert_average",
        "empirical_var",
        "sample_var",
        "exact_var",
        "inv_D",
    ]);
    let base = c.base_plan();
    let ms = c.quanta();
    for &pair in &c.pairs {
        for r in run_variance_scan(&base, &ms, pair)? {
            t.push(vec![
                pair_label(pair),
                r.quanta.to_string(),
                r.dim.to_string(),
                r.samples.to_string(),
                fmt_f64(r.hilbert_average),
                fmt_f64(r.empirical_var),
                fmt_f64(r.sample_var),
                fmt_f64(r.exact_var),
                fmt_f64(r.inv_dim),
            ]);
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig3Summary {
    pub dim: usize,
    pub modes: (u32, u32),
    pub standardized: bool,
    /// Mean and standard deviation used for standardization.
    pub hilbert_average: f64,
    pub exact_std: f64,
    pub stats: SampleStats,
    pub ks_normal: Option<f64>,
    pub underflow: u64,
    pub overflow: u64,
    pub histogram_total: u64,
}

fn normal_pdf(x: f64, mean: f64, std: f64) -> f64 {
    let z = (x - mean) / std;
    (-0.5 * z * z).exp() / (std * (2.0 * std::f64::consts::PI).sqrt())
}

pub fn fig3(c: &Fig3Config) -> CliResult<(Table, Fig3Summary)> {
    let run = run_distribution(&c.plan, c.modes, c.standardize, c.histogram)?;
    let (mean, std) = if c.standardize {
        (0.0, 1.0)
    } else {
        (run.hilbert_average, run.exact_std)
    };
    let h = &run.histogram;
    let mut t = Table::new(&["bin_lo", "bin_hi", "count", "density", "normal_density"]);
    for bin in 0..h.counts().len() {
        let (lo, hi) = h.bin_edges(bin);
        let reference = if std > 0.0 {
            normal_pdf(h.bin_center(bin), mean, std)
        } else {
            f64::NAN
        };
        t.push(vec![
            fmt_f64(lo),
            fmt_f64(hi),
            h.counts()[bin].to_string(),
            fmt_f64(h.density(bin)),
            fmt_f64(reference),
        ]);
    }
    let dims = c.plan.dims()?;
    let summary = Fig3Summary {
        dim: dims.total(),
        modes: c.modes,
        standardized: c.standardize,
        hilbert_average: run.hilbert_average,
        exact_std: run.exact_std,
        stats: run.stats,
        ks_normal: run.ks_normal,
        underflow: h.underflow(),
        overflow: h.overflow(),
        histogram_total: h.total(),
    };
    Ok((t, summary))
}

/// Large-`D` density of `X = D(<F> - 2) = 2x`.
pub fn density_in_x(big_x: f64) -> f64 {
    scaled_density(big_x / 2.0) / 2.0
}

/// Mass of the large-`D` density below `X`.
pub fn mass_below(big_x: f64) -> f64 {
    let x = big_x / 2.0;
    if x <= 0.0 {
        scaled_lower_tail(x)
    } else {
        1.0 - scaled_upper_tail(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSummary {
    pub points: usize,
    pub lo: f64,
    pub hi: f64,
    /// Trapezoid rule over the emitted grid.
    pub trapezoid: f64,
    pub tail_below: f64,
    pub tail_above: f64,
    /// `trapezoid + tail_below + tail_above`; 1 up to quadrature error.
    pub integral: f64,
}

/// Grid `(X, density)` over `[lo, hi]` and its tail-corrected integral.
pub fn density_curve(lo: f64, hi: f64, points: usize) -> (Vec<(f64, f64)>, CurveSummary) {
    let h = (hi - lo) / (points - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..points)
        .map(|i| {
            let x = if i + 1 == points {
                hi
            } else {
                lo + i as f64 * h
            };
            (x, density_in_x(x))
        })
        .collect();
    let trapezoid: f64 = grid
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    let tail_below = mass_below(lo);
    let tail_above = 1.0 - mass_below(hi);
    let summary = CurveSummary {
        points,
        lo,
        hi,
        trapezoid,
        tail_below,
        tail_above,
        integral: trapezoid + tail_below + tail_above,
    };
    (grid, summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig4Summary {
    #[serde(flatten)]
    pub chsh: ChshSummary,
    pub underflow: u64,
    pub overflow: u64,
    pub histogram_total: u64,
    pub block_only_underflow: u64,
    pub block_only_overflow: u64,
    pub curve: CurveSummary,
}

pub struct Fig4Run {
    pub histogram: Table,
    pub curve: Table,
    pub summary: Fig4Summary,
}

pub fn fig4(c: &Fig4Config) -> CliResult<Fig4Run> {
    let run = run_chsh_distribution(&c.plan, &c.setting, Some(c.path), c.histogram)?;
    let h = &run.histogram;
    let b = &run.block_only_histogram;
    let mut histogram = Table::new(&[
        "x_lo",
        "x_hi",
        "count",
        "density",
        "block_only_count",
        "block_only_density",
        "analytic_density",
    ]);
    for bin in 0..h.counts().len() {
        let (lo, hi) = h.bin_edges(bin);
        histogram.push(vec![
            fmt_f64(lo),
            fmt_f64(hi),
            h.counts()[bin].to_string(),
            fmt_f64(h.density(bin)),
            b.counts()[bin].to_string(),
            fmt_f64(b.density(bin)),
            fmt_f64(density_in_x(h.bin_center(bin))),
        ]);
    }
    let (grid, curve_summary) = density_curve(c.histogram.lo, c.histogram.hi, c.curve_points);
    let mut curve = Table::new(&["x", "density"]);
    for (x, p) in grid {
        curve.push(vec![fmt_f64(x), fmt_f64(p)]);
    }
    let summary = Fig4Summary {
        chsh: run.summary,
        underflow: h.underflow(),
        overflow: h.overflow(),
        histogram_total: h.total(),
        block_only_underflow: b.underflow(),
        block_only_overflow: b.overflow(),
        curve: curve_summary,
    };
    Ok(Fig4Run {
        histogram,
        curve,
        summary,
    })
}
