//! Resolved run configurations. Every subcommand turns its flags into one of
//! these, echoes it as `config.json`, and `typgas run --config` replays it.

use std::path::Path;

use serde::{Deserialize, Serialize};
use typgas::chsh::ChshSetting;
use typgas::fock::{SectorSpec, ShellKind, Statistics};
use typgas::montecarlo::{ExperimentPlan, HistogramSpec, PairSelector, SamplingPath};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum RunConfig {
    Dims(DimsConfig),
    Fig1(Fig1Config),
    Fig2(Fig2Config),
    Fig3(Fig3Config),
    Fig4(Fig4Config),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimsConfig {
    pub statistics: Statistics,
    pub particles: u32,
    pub shell: ShellKind,
    pub m_max: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig1Config {
    pub plan: ExperimentPlan,
    pub mode_a: u32,
    pub q_max: u32,
    pub showcase: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig2Config {
    pub statistics: Statistics,
    pub shell: ShellKind,
    pub na: u32,
    pub nb: u32,
    pub m_min: u64,
    pub m_max: u64,
    pub samples: u64,
    pub seed: u64,
    pub pairs: Vec<PairSelector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig3Config {
    pub plan: ExperimentPlan,
    pub modes: (u32, u32),
    pub standardize: bool,
    pub histogram: HistogramSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig4Config {
    pub plan: ExperimentPlan,
    pub setting: ChshSetting,
    pub path: SamplingPath,
    pub histogram: HistogramSpec,
    pub curve_points: usize,
}

impl Fig2Config {
    pub fn base_plan(&self) -> ExperimentPlan {
        let sector = |n| SectorSpec::new(self.statistics, n, self.m_min, self.shell);
        ExperimentPlan::new(sector(self.na), sector(self.nb), self.samples, self.seed)
    }

    pub fn quanta(&self) -> Vec<u64> {
        (self.m_min..=self.m_max).collect()
    }
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Dims(_) => "dims",
            RunConfig::Fig1(_) => "fig1",
            RunConfig::Fig2(_) => "fig2",
            RunConfig::Fig3(_) => "fig3",
            RunConfig::Fig4(_) => "fig4",
        }
    }

    /// Checks that do not need any sampling.
    pub fn validate(&self) -> CliResult<()> {
        let usage = |m: String| Err(CliError::Usage(m));
        match self {
            RunConfig::Dims(c) => {
                SectorSpec::new(c.statistics, c.particles, 0, c.shell).validate()?;
            }
            RunConfig::Fig1(c) => c.plan.validate()?,
            RunConfig::Fig2(c) => {
                c.base_plan().validate()?;
                if c.m_min > c.m_max {
                    return usage(format!("m-min {} exceeds m-max {}", c.m_min, c.m_max));
                }
                if c.pairs.is_empty() {
                    return usage("no observable pairs selected".into());
                }
            }
            RunConfig::Fig3(c) => {
                c.plan.validate()?;
                c.histogram.validate()?;
            }
            RunConfig::Fig4(c) => {
                c.setting.validate(c.plan.dims()?)?;
                c.histogram.validate()?;
                if c.curve_points < 2 {
                    return usage("the density curve needs at least 2 points".into());
                }
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig4() -> RunConfig {
        RunConfig::Fig4(Fig4Config {
            plan: ExperimentPlan::symmetric(SectorSpec::bose(5, 3), 100, 9),
            setting: ChshSetting::default(),
            path: SamplingPath::Full,
            histogram: HistogramSpec::chsh(),
            curve_points: 11,
        })
    }

    #[test]
    fn json_round_trip() {
        let c = fig4();
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.starts_with("{\"command\":\"fig4\""));
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
    }

    #[test]
    fn unknown_keys_rejected_at_every_level() {
        let text = serde_json::to_string(&fig4()).unwrap();
        for (from, to) in [
            ("\"curve_points\"", "\"colour\":1,\"curve_points\""),
            ("\"samples\"", "\"threads\":2,\"samples\""),
            ("\"bins\"", "\"log\":true,\"bins\""),
            ("\"pair_a\"", "\"pair_c\":[0,1],\"pair_a\""),
            ("\"particles\"", "\"spin\":0,\"particles\""),
        ] {
            let bad = text.replacen(from, to, 1);
            assert_ne!(bad, text);
            assert!(serde_json::from_str::<RunConfig>(&bad).is_err(), "{to}");
        }
        assert!(serde_json::from_str::<RunConfig>(&text.replace("fig4", "fig9")).is_err());
    }

    #[test]
    fn validation() {
        fig4().validate().unwrap();
        let mut c = fig4();
        if let RunConfig::Fig4(f) = &mut c {
            f.setting = ChshSetting::new((0, 5), (0, 1));
        }
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
    }
}
