//! CHSH functional built from two designated basis-state pairs.
//!
//! With `X`, `Z` the Pauli blocks on a pair and the identity elsewhere,
//!
//! ```text
//! F = sx_A (su_B + sv_B) + sz_A (su_B - sv_B)
//! ```
//!
//! `F` is block diagonal over four regions of the product basis:
//!
//! | A \ B        | pair_b              | outside pair_b |
//! |--------------|---------------------|----------------|
//! | pair_a       | 4x4 block, spectrum `{2 sqrt 2, 0, 0, -2 sqrt 2}` | `2 sx_A` |
//! | outside      | `2 su_B`            | `2`            |

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{fill_gaussian, sample_state_with_dims, Dims, PureState, SeedSpec};
use crate::observables::{
    correlation, pauli_x, pauli_z, Block, SubsystemObservable, TwoLevelObservable,
};

/// Operator convention for the B-side blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// `su = (X - Z)/sqrt 2`, `sv = (X + Z)/sqrt 2`. The state with
    /// `Psi++ = Psi-- = 0`, `Psi+- = Psi-+` is the `2 sqrt 2` eigenvector.
    #[default]
    Relabeled,
    /// `su = (Z - X)/sqrt 2`, `sv = (Z + X)/sqrt 2`. Same block spectrum,
    /// but the state above lies in the null space of `F`.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChshSetting {
    /// `(plus, minus)` basis indices of subsystem A.
    pub pair_a: (usize, usize),
    /// `(plus, minus)` basis indices of subsystem B.
    pub pair_b: (usize, usize),
    pub convention: Convention,
}

impl ChshSetting {
    pub fn new(pair_a: (usize, usize), pair_b: (usize, usize)) -> Self {
        Self {
            pair_a,
            pair_b,
            convention: Convention::Relabeled,
        }
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn validate(&self, dims: Dims) -> Result<()> {
        for (name, (p, m), d) in [("A", self.pair_a, dims.a), ("B", self.pair_b, dims.b)] {
            if p == m {
                return Err(Error::InvalidObservable(format!(
                    "pair on {name} uses index {p} twice"
                )));
            }
            if p >= d || m >= d {
                return Err(Error::InvalidObservable(format!(
                    "pair ({p}, {m}) on {name} outside a basis of dimension {d}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for ChshSetting {
    fn default() -> Self {
        Self::new((0, 1), (0, 1))
    }
}

/// `(su, sv)` blocks on the B pair.
pub fn b_blocks(convention: Convention) -> (Block, Block) {
    let x = pauli_x();
    let z = pauli_z();
    let s = FRAC_1_SQRT_2;
    let combine = |p: f64, q: f64| -> Block {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = (x[i][j] * p + z[i][j] * q) * s;
            }
        }
        out
    };
    match convention {
        Convention::Relabeled => (combine(1.0, -1.0), combine(1.0, 1.0)),
        Convention::Literal => (combine(-1.0, 1.0), combine(1.0, 1.0)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChshObservables {
    pub sigma_x_a: SubsystemObservable,
    pub sigma_z_a: SubsystemObservable,
    pub sigma_u_b: SubsystemObservable,
    pub sigma_v_b: SubsystemObservable,
}

pub fn build_chsh(setting: &ChshSetting, dims: Dims) -> Result<ChshObservables> {
    setting.validate(dims)?;
    let (u, v) = b_blocks(setting.convention);
    let two_level = |d, pair, block| TwoLevelObservable::new(d, pair, block);
    Ok(ChshObservables {
        sigma_x_a: SubsystemObservable::on_a(two_level(dims.a, setting.pair_a, pauli_x())?),
        sigma_z_a: SubsystemObservable::on_a(two_level(dims.a, setting.pair_a, pauli_z())?),
        sigma_u_b: SubsystemObservable::on_b(two_level(dims.b, setting.pair_b, u)?),
        sigma_v_b: SubsystemObservable::on_b(two_level(dims.b, setting.pair_b, v)?),
    })
}

/// Exact `<Psi|F|Psi>`.
pub fn chsh_value(state: &PureState, setting: &ChshSetting) -> Result<f64> {
    let obs = build_chsh(setting, state.dims())?;
    let corr = |a: &SubsystemObservable, b: &SubsystemObservable| correlation(state, a, b);
    Ok(corr(&obs.sigma_x_a, &obs.sigma_u_b)?
        + corr(&obs.sigma_x_a, &obs.sigma_v_b)?
        + corr(&obs.sigma_z_a, &obs.sigma_u_b)?
        - corr(&obs.sigma_z_a, &obs.sigma_v_b)?)
}

/// Components `Psi_{+-+-}` on the pair (x) pair block, indexed
/// `[a_sign][b_sign]` with 0 for `+` and 1 for `-`, and the weight outside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockAmplitudes {
    pub psi: [[Complex64; 2]; 2],
    pub residual_weight: f64,
}

impl BlockAmplitudes {
    pub fn from_state(state: &PureState, setting: &ChshSetting) -> Result<Self> {
        let dims = state.dims();
        setting.validate(dims)?;
        let v = state.vector();
        let rows = [setting.pair_a.0, setting.pair_a.1];
        let cols = [setting.pair_b.0, setting.pair_b.1];
        let mut psi = [[Complex64::new(0.0, 0.0); 2]; 2];
        let mut inside = 0.0;
        for (r, &a) in rows.iter().enumerate() {
            for (s, &b) in cols.iter().enumerate() {
                psi[r][s] = v.get(a, b);
                inside += psi[r][s].norm_sqr();
            }
        }
        Ok(Self {
            psi,
            residual_weight: state.norm_sqr() - inside,
        })
    }

    /// `eta = 2 |Psi+-|^2`.
    pub fn eta(&self) -> f64 {
        2.0 * self.psi[0][1].norm_sqr()
    }
}

/// Member of the family `Psi++ = Psi-- = 0`, `Psi+- = Psi-+` with block
/// weight `eta = 2 |Psi+-|^2`; the remaining weight `1 - eta` is spread
/// evenly over the states outside both pairs, where `F = 2`.
pub fn eta_state(dims: Dims, setting: &ChshSetting, eta: f64) -> Result<PureState> {
    setting.validate(dims)?;
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!("eta = {eta} outside [0, 1]")));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); dims.total()];
    let c = Complex64::from_polar((eta / 2.0).sqrt(), 0.4);
    amps[dims.compose(setting.pair_a.0, setting.pair_b.1)] = c;
    amps[dims.compose(setting.pair_a.1, setting.pair_b.0)] = c;
    let outside: Vec<(usize, usize)> = (0..dims.a)
        .filter(|&a| a != setting.pair_a.0 && a != setting.pair_a.1)
        .flat_map(|a| {
            (0..dims.b)
                .filter(|&b| b != setting.pair_b.0 && b != setting.pair_b.1)
                .map(move |b| (a, b))
        })
        .collect();
    if eta < 1.0 && outside.is_empty() {
        return Err(Error::Domain(
            "eta < 1 needs basis states outside both pairs".into(),
        ));
    }
    if !outside.is_empty() {
        let r = ((1.0 - eta) / outside.len() as f64).sqrt();
        for (a, b) in outside {
            amps[dims.compose(a, b)] = Complex64::new(r, 0.0);
        }
    }
    PureState::from_amplitudes(dims, amps)
}

/// `F` restricted to the pair (x) pair block, basis order `++, +-, -+, --`.
pub fn block_operator(convention: Convention) -> [[f64; 4]; 4] {
    let (u, v) = b_blocks(convention);
    let x = pauli_x();
    let z = pauli_z();
    let mut out = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let val = x[i][j] * (u[k][l] + v[k][l]) + z[i][j] * (u[k][l] - v[k][l]);
                    out[2 * i + k][2 * j + l] = val.re;
                }
            }
        }
    }
    out
}

/// Dense `F` on the full product space, row-major with the flat index
/// `a * D_B + b`. Only for small spaces.
pub fn dense_operator(setting: &ChshSetting, dims: Dims) -> Result<Vec<Vec<f64>>> {
    let obs = build_chsh(setting, dims)?;
    let dense = |o: &SubsystemObservable| o.op.to_dense();
    let (x, z, u, v) = (
        dense(&obs.sigma_x_a),
        dense(&obs.sigma_z_a),
        dense(&obs.sigma_u_b),
        dense(&obs.sigma_v_b),
    );
    let n = dims.total();
    let mut f = vec![vec![0.0; n]; n];
    for a in 0..dims.a {
        for a2 in 0..dims.a {
            for b in 0..dims.b {
                for b2 in 0..dims.b {
                    let val = x[a][a2] * (u[b][b2] + v[b][b2]) + z[a][a2] * (u[b][b2] - v[b][b2]);
                    f[dims.compose(a, b)][dims.compose(a2, b2)] = val.re;
                }
            }
        }
    }
    Ok(f)
}

/// Mean of `<F>` under the uniform measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshMean {
    /// `Tr F / D = 2 (D_A - 2)(D_B - 2) / D`.
    pub trace: f64,
    /// `2 - 8/D`: `F` taken as `2` everywhere outside the pair (x) pair block.
    pub block_only: f64,
}

pub fn chsh_mean_exact(setting: &ChshSetting, dims: Dims) -> Result<ChshMean> {
    let obs = build_chsh(setting, dims)?;
    let tr = |o: &SubsystemObservable| o.op.trace();
    let trace_f = tr(&obs.sigma_x_a) * (tr(&obs.sigma_u_b) + tr(&obs.sigma_v_b))
        + tr(&obs.sigma_z_a) * (tr(&obs.sigma_u_b) - tr(&obs.sigma_v_b));
    let d = dims.total() as f64;
    Ok(ChshMean {
        trace: trace_f / d,
        block_only: 2.0 - 8.0 / d,
    })
}

/// Number of amplitudes on which `F - 2` is supported: `2 D_B + 2 (D_A - 2)`.
pub fn support_size(dims: Dims) -> usize {
    2 * dims.b + 2 * (dims.a - 2)
}

fn re_dot(x: Complex64, y: Complex64) -> f64 {
    (x.conj() * y).re
}

/// Draws `<F>` for a uniformly random state without materializing it.
///
/// Only the amplitudes on the support of `F - 2` are drawn, in the order:
/// block (`++, +-, -+, --`), pair_a rows over the other B states, pair_b
/// columns over the other A states. The squared norm of the remaining
/// `(D_A - 2)(D_B - 2)` components is a single chi-square draw with
/// `2 (D_A - 2)(D_B - 2)` degrees of freedom.
pub fn sample_chsh_fast(dims: Dims, setting: &ChshSetting, seed: SeedSpec) -> Result<f64> {
    Ok(sample_readings_fast(dims, setting, seed)?.operator)
}

/// Both readings of `<F>` from one fast draw.
pub fn sample_readings_fast(
    dims: Dims,
    setting: &ChshSetting,
    seed: SeedSpec,
) -> Result<ChshReadings> {
    setting.validate(dims)?;
    let mut rng = seed.rng();
    Ok(fast_draw(dims, setting, &mut rng))
}

fn fast_draw<R: Rng>(dims: Dims, setting: &ChshSetting, rng: &mut R) -> ChshReadings {
    let mut block = [Complex64::new(0.0, 0.0); 4];
    fill_gaussian(rng, &mut block);
    let mut cross_a = vec![Complex64::new(0.0, 0.0); 2 * (dims.b - 2)];
    fill_gaussian(rng, &mut cross_a);
    let mut cross_b = vec![Complex64::new(0.0, 0.0); 2 * (dims.a - 2)];
    fill_gaussian(rng, &mut cross_b);
    let outside = ((dims.a - 2) * (dims.b - 2)) as f64;
    let rest = if outside > 0.0 {
        Gamma::new(outside, 2.0)
            .expect("shape and scale are positive")
            .sample(rng)
    } else {
        0.0
    };
    evaluate_regions(setting.convention, &block, &cross_a, &cross_b, rest)
}

/// `<F>` of one state under two readings of `F` away from the pair (x) pair
/// block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshReadings {
    /// Identity-extended observables: `F` as built by [`build_chsh`].
    pub operator: f64,
    /// The block part of `F`, with `F = 2` on every state outside the block.
    pub block_only: f64,
}

fn block_quadratic(convention: Convention, block: &[Complex64; 4]) -> (f64, f64) {
    let f_block = block_operator(convention);
    let mut num = 0.0;
    let mut norm_sqr = 0.0;
    for (i, row) in f_block.iter().enumerate() {
        norm_sqr += block[i].norm_sqr();
        for (j, &fij) in row.iter().enumerate() {
            if fij != 0.0 {
                num += fij * re_dot(block[i], block[j]);
            }
        }
    }
    (num, norm_sqr)
}

/// Block-only reading of `<F>` for `state`.
pub fn block_only_value(state: &PureState, setting: &ChshSetting) -> Result<f64> {
    let amps = BlockAmplitudes::from_state(state, setting)?;
    let [[pp, pm], [mp, mm]] = amps.psi;
    let (num, _) = block_quadratic(setting.convention, &[pp, pm, mp, mm]);
    Ok((num + 2.0 * amps.residual_weight) / state.norm_sqr())
}

/// `<F>` from the region decomposition of an unnormalized vector: the four
/// block amplitudes, `(plus, minus)` pairs of the A-pair rows and of the
/// B-pair columns, and the squared norm of everything else.
fn evaluate_regions(
    convention: Convention,
    block: &[Complex64; 4],
    cross_a: &[Complex64],
    cross_b: &[Complex64],
    rest: f64,
) -> ChshReadings {
    let (u, _) = b_blocks(convention);
    let (block_num, block_norm) = block_quadratic(convention, block);
    let mut num = block_num + 2.0 * rest;
    let mut norm_sqr = block_norm + rest;
    // 2 sx_A on pair_a rows
    for pm in cross_a.chunks_exact(2) {
        norm_sqr += pm[0].norm_sqr() + pm[1].norm_sqr();
        num += 4.0 * re_dot(pm[0], pm[1]);
    }
    // 2 su_B on pair_b columns
    for pm in cross_b.chunks_exact(2) {
        norm_sqr += pm[0].norm_sqr() + pm[1].norm_sqr();
        let su = u[0][0].re * pm[0].norm_sqr()
            + u[1][1].re * pm[1].norm_sqr()
            + 2.0 * u[0][1].re * re_dot(pm[0], pm[1]);
        num += 2.0 * su;
    }
    ChshReadings {
        operator: num / norm_sqr,
        block_only: (block_num + 2.0 * (norm_sqr - block_norm)) / norm_sqr,
    }
}

/// Draws `<F>` by sampling a full state and evaluating `F` on it.
pub fn sample_chsh_full(dims: Dims, setting: &ChshSetting, seed: SeedSpec) -> Result<f64> {
    setting.validate(dims)?;
    chsh_value(&sample_state_with_dims(dims, seed), setting)
}

/// Both readings of `<F>` on one fully sampled state.
pub fn sample_readings_full(
    dims: Dims,
    setting: &ChshSetting,
    seed: SeedSpec,
) -> Result<ChshReadings> {
    setting.validate(dims)?;
    let state = sample_state_with_dims(dims, seed);
    Ok(ChshReadings {
        operator: chsh_value(&state, setting)?,
        block_only: block_only_value(&state, setting)?,
    })
}

/// Large-`D` density of `<F>`, with `x = D(<F> - 2)/2`:
///
/// ```text
/// P = D/8 exp(-x (sqrt2 + 1)) / (3 sqrt2 + 4)                     x > 0
/// P = D/8 [exp(x (sqrt2 - 1)) / (3 sqrt2 - 4) + 2 exp(x) (x - 2)]  x <= 0
/// ```
pub fn analytic_density(dim: f64, f: f64) -> f64 {
    let x = dim * (f - 2.0) / 2.0;
    dim / 8.0 * density_kernel(x)
}

/// Density of the scaled variable `x` itself (`P df/dx`), independent of `D`.
pub fn scaled_density(x: f64) -> f64 {
    density_kernel(x) / 4.0
}

fn density_kernel(x: f64) -> f64 {
    if x > 0.0 {
        (-x * (SQRT_2 + 1.0)).exp() / (3.0 * SQRT_2 + 4.0)
    } else {
        (x * (SQRT_2 - 1.0)).exp() / (3.0 * SQRT_2 - 4.0) + 2.0 * x.exp() * (x - 2.0)
    }
}

/// Probability mass of `<F> > 2` under [`analytic_density`]:
/// `(10 - 7 sqrt2)/8 = 1/(40 + 28 sqrt2)`.
pub fn violation_fraction_analytic() -> f64 {
    1.0 / (40.0 + 28.0 * SQRT_2)
}

/// Mass of the scaled density on `x > x0` for `x0 >= 0`.
pub fn scaled_upper_tail(x0: f64) -> f64 {
    debug_assert!(x0 >= 0.0);
    let a = SQRT_2 + 1.0;
    (-a * x0).exp() / (4.0 * a * (3.0 * SQRT_2 + 4.0))
}

/// Mass of the scaled density on `x < x0` for `x0 <= 0`.
pub fn scaled_lower_tail(x0: f64) -> f64 {
    debug_assert!(x0 <= 0.0);
    let b = SQRT_2 - 1.0;
    // int_{-inf}^{x0} 2 e^x (x - 2) dx = 2 e^{x0} (x0 - 3)
    ((b * x0).exp() / (b * (3.0 * SQRT_2 - 4.0)) + 2.0 * x0.exp() * (x0 - 3.0)) / 4.0
}
