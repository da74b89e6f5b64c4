//! Fixed-particle-number, fixed-quanta occupation bases of a harmonically
//! trapped gas.
//!
//! A many-body basis state is written in partition form: the sorted list of
//! single-particle mode indices `k_1 .. k_N` with `sum k_i = M` (exact shell)
//! or `sum k_i < M` (below shell). Bosonic lists are non-decreasing, fermionic
//! lists strictly increasing.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest basis `enumerate_basis` will materialize unless told otherwise.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Bose,
    Fermi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShellKind {
    /// `sum k_i == M`
    Exact,
    /// `sum k_i < M`
    Below,
}

/// Sector label: statistics, particle number `N` and excitation quanta
/// `M = E/omega - N/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorSpec {
    pub statistics: Statistics,
    pub particles: u32,
    pub quanta: u64,
    pub shell: ShellKind,
}

impl SectorSpec {
    pub fn new(statistics: Statistics, particles: u32, quanta: u64, shell: ShellKind) -> Self {
        Self {
            statistics,
            particles,
            quanta,
            shell,
        }
    }

    pub fn exact(statistics: Statistics, particles: u32, quanta: u64) -> Self {
        Self::new(statistics, particles, quanta, ShellKind::Exact)
    }

    pub fn bose(particles: u32, quanta: u64) -> Self {
        Self::exact(Statistics::Bose, particles, quanta)
    }

    pub fn fermi(particles: u32, quanta: u64) -> Self {
        Self::exact(Statistics::Fermi, particles, quanta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.particles == 0 {
            return Err(Error::InvalidSector(
                "particle number must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Quanta carried by the lowest fermionic configuration `(0, 1, .., N-1)`.
    pub fn fermi_ground_quanta(particles: u32) -> u64 {
        let n = particles as u64;
        n * n.saturating_sub(1) / 2
    }

    /// Smallest `M` for which this shell kind is nonempty.
    pub fn min_quanta(statistics: Statistics, particles: u32, shell: ShellKind) -> u64 {
        let ground = match statistics {
            Statistics::Bose => 0,
            Statistics::Fermi => Self::fermi_ground_quanta(particles),
        };
        match shell {
            ShellKind::Exact => ground,
            ShellKind::Below => ground + 1,
        }
    }
}

impl fmt::Display for SectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let stats = match self.statistics {
            Statistics::Bose => "bose",
            Statistics::Fermi => "fermi",
        };
        let rel = match self.shell {
            ShellKind::Exact => "=",
            ShellKind::Below => "<",
        };
        write!(
            f,
            "{stats}(N={}, sum k {rel} {})",
            self.particles, self.quanta
        )
    }
}

/// One occupation pattern in partition form. Parts are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    parts: Vec<u32>,
}

impl Configuration {
    /// Wraps a sorted parts list. Returns a domain error when the list is not
    /// non-decreasing.
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain(format!("parts {parts:?} are not sorted")));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn particles(&self) -> usize {
        self.parts.len()
    }

    pub fn quanta(&self) -> u64 {
        self.parts.iter().map(|&k| k as u64).sum()
    }

    /// Occupation `n_q` of mode `q`.
    pub fn occupation(&self, mode: u32) -> u32 {
        let lo = self.parts.partition_point(|&k| k < mode);
        let hi = self.parts.partition_point(|&k| k <= mode);
        (hi - lo) as u32
    }

    /// Nonzero occupations as `(mode, n_mode)`, ascending in mode.
    pub fn occupations(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for &k in &self.parts {
            match out.last_mut() {
                Some((mode, n)) if *mode == k => *n += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.parts.windows(2).all(|w| w[0] < w[1])
    }

    /// Whether this configuration belongs to the sector `spec`.
    pub fn satisfies(&self, spec: &SectorSpec) -> bool {
        if self.parts.len() != spec.particles as usize {
            return false;
        }
        if spec.statistics == Statistics::Fermi && !self.is_strictly_increasing() {
            return false;
        }
        match spec.shell {
            ShellKind::Exact => self.quanta() == spec.quanta,
            ShellKind::Below => self.quanta() < spec.quanta,
        }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, k) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        f.write_str(")")
    }
}

/// Ordered basis of one sector. Configurations ascend lexicographically in
/// their parts list, so index lookup is a binary search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    spec: SectorSpec,
    configs: Vec<Configuration>,
}

impl SectorBasis {
    pub fn spec(&self) -> &SectorSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn get(&self, index: usize) -> Option<&Configuration> {
        self.configs.get(index)
    }

    pub fn index_of(&self, config: &Configuration) -> Option<usize> {
        self.configs.binary_search(config).ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Configuration> {
        self.configs.iter()
    }
}

/// Enumerates a sector with the default capacity limit.
pub fn enumerate_basis(spec: &SectorSpec) -> Result<SectorBasis> {
    enumerate_basis_with_limit(spec, DEFAULT_ENUMERATION_LIMIT)
}

pub fn enumerate_basis_with_limit(spec: &SectorSpec, limit: u64) -> Result<SectorBasis> {
    spec.validate()?;
    let count = match dimension(spec) {
        Ok(count) => count,
        Err(Error::Overflow) => {
            return Err(Error::Capacity {
                count: u64::MAX,
                limit,
            })
        }
        Err(e) => return Err(e),
    };
    if count > limit {
        return Err(Error::Capacity { count, limit });
    }

    let mut configs = Vec::with_capacity(count as usize);
    let budget = match spec.shell {
        ShellKind::Exact => Some(spec.quanta),
        ShellKind::Below => spec.quanta.checked_sub(1),
    };
    if let Some(budget) = budget {
        let mut walker = Walker {
            fermi: spec.statistics == Statistics::Fermi,
            exact: spec.shell == ShellKind::Exact,
            particles: spec.particles as usize,
            parts: Vec::with_capacity(spec.particles as usize),
            out: &mut configs,
        };
        walker.descend(budget);
    }
    debug_assert_eq!(configs.len() as u64, count);

    Ok(SectorBasis {
        spec: *spec,
        configs,
    })
}

struct Walker<'a> {
    fermi: bool,
    exact: bool,
    particles: usize,
    parts: Vec<u32>,
    out: &'a mut Vec<Configuration>,
}

impl Walker<'_> {
    /// Smallest total of `remaining` parts whose first part is `first`.
    fn min_total(&self, first: u64, remaining: u64) -> u64 {
        if self.fermi {
            remaining * first + remaining * (remaining - 1) / 2
        } else {
            remaining * first
        }
    }

    fn descend(&mut self, budget: u64) {
        let remaining = (self.particles - self.parts.len()) as u64;
        let first = match self.parts.last() {
            None => 0,
            Some(&p) if self.fermi => p as u64 + 1,
            Some(&p) => p as u64,
        };

        if remaining == 1 && self.exact {
            if budget >= first {
                self.parts.push(budget as u32);
                self.out.push(Configuration {
                    parts: self.parts.clone(),
                });
                self.parts.pop();
            }
            return;
        }

        let mut k = first;
        while self.min_total(k, remaining) <= budget {
            self.parts.push(k as u32);
            if remaining == 1 {
                self.out.push(Configuration {
                    parts: self.parts.clone(),
                });
            } else {
                self.descend(budget - k);
            }
            self.parts.pop();
            k += 1;
        }
    }
}

type Layer = Vec<Vec<Option<u64>>>;

/// Sector dimension `D` by counting alone.
///
/// The recurrence runs on `(quanta, largest part allowed, parts remaining)`
/// and is tabulated bottom-up one part at a time, so no configuration is ever
/// materialized. Table entries that exceed 64 bits are carried as `None` and
/// only reported if the requested count needs them.
pub fn dimension(spec: &SectorSpec) -> Result<u64> {
    spec.validate()?;
    let top = match spec.shell {
        ShellKind::Exact => spec.quanta,
        ShellKind::Below => match spec.quanta.checked_sub(1) {
            Some(top) => top,
            None => return Ok(0),
        },
    };
    let table = count_table(spec.statistics, spec.particles, top as usize);
    // entry [m][m + 1]: parts bounded by m, which never binds
    let count = |m: usize| table[m][m + 1].ok_or(Error::Overflow);
    match spec.shell {
        ShellKind::Exact => count(top as usize),
        ShellKind::Below => (0..=top as usize).try_fold(0u64, |acc, m| {
            acc.checked_add(count(m)?).ok_or(Error::Overflow)
        }),
    }
}

/// `t[m][j]` = number of sorted `particles`-tuples with every part `< j`
/// summing to `m` (non-decreasing for bosons, strictly increasing for
/// fermions). Splitting on whether the largest part equals `j - 1`:
///
/// bose:  t_r[m][j] = t_r[m][j-1] + t_{r-1}[m-(j-1)][j]
/// fermi: t_r[m][j] = t_r[m][j-1] + t_{r-1}[m-(j-1)][j-1]
fn count_table(statistics: Statistics, particles: u32, top: usize) -> Layer {
    let width = top + 2;
    let mut prev: Layer = (0..=top)
        .map(|m| vec![Some((m == 0) as u64); width])
        .collect();
    for _ in 0..particles {
        let mut cur: Layer = vec![vec![Some(0); width]; top + 1];
        for m in 0..=top {
            for j in 1..width {
                let largest = j - 1;
                let with_largest = if largest <= m {
                    match statistics {
                        Statistics::Bose => prev[m - largest][j],
                        Statistics::Fermi => prev[m - largest][j - 1],
                    }
                } else {
                    Some(0)
                };
                cur[m][j] = match (cur[m][j - 1], with_largest) {
                    (Some(a), Some(b)) => a.checked_add(b),
                    _ => None,
                };
            }
        }
        prev = cur;
    }
    prev
}

/// Maps a fermionic configuration to the bosonic one `k'_i = k_i - i + 1`
/// (1-indexed), lowering the quanta by `N(N-1)/2`.
pub fn staircase_map(config: &Configuration) -> Result<Configuration> {
    if !config.is_strictly_increasing() {
        return Err(Error::Domain(format!(
            "{config} is not strictly increasing, so it is not a fermionic configuration"
        )));
    }
    let parts = config
        .parts
        .iter()
        .enumerate()
        .map(|(i, &k)| k - i as u32)
        .collect();
    Ok(Configuration { parts })
}

/// Inverse of [`staircase_map`]: `k_i = k'_i + i - 1`.
pub fn staircase_inverse(config: &Configuration) -> Configuration {
    let parts = config
        .parts
        .iter()
        .enumerate()
        .map(|(i, &k)| k + i as u32)
        .collect();
    Configuration { parts }
}

/// Entropy `ln D` in nats (Boltzmann constant set to one).
pub fn entropy(spec: &SectorSpec) -> Result<f64> {
    match dimension(spec)? {
        0 => Err(Error::EmptySector),
        d => Ok((d as f64).ln()),
    }
}
