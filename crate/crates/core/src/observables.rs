//! Local observables of one gas and their bipartite correlators.
//!
//! Two kinds are supported: observables diagonal in the sector basis, and
//! two-level observables that act as a Hermitian 2x2 block on a designated
//! pair of basis states and as the identity everywhere else. All eigenvalues
//! lie in `[-1, 1]`.
//!
//! The moment formulas below are exact for the uniform measure on the unit
//! sphere of `H = H_A (x) H_B` with `D = D_A D_B` and `T = O_A (x) O_B`:
//!
//! * mean:      `Tr T / D = <O_A>_E <O_B>_E`
//! * variance:  `(Tr T^2 - (Tr T)^2 / D) / (D (D + 1))`

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::SectorBasis;
use crate::hilbert::{PureState, StateVector};

const EIGEN_TOLERANCE: f64 = 1e-12;
const HERMITIAN_TOLERANCE: f64 = 1e-12;
const IMAGINARY_TOLERANCE: f64 = 1e-10;

pub type Block = [[Complex64; 2]; 2];

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn pauli_x() -> Block {
    [[c(0.0), c(1.0)], [c(1.0), c(0.0)]]
}

pub fn pauli_z() -> Block {
    [[c(1.0), c(0.0)], [c(0.0), c(-1.0)]]
}

pub fn identity_block() -> Block {
    [[c(1.0), c(0.0)], [c(0.0), c(1.0)]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

/// One eigenvalue per basis configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalObservable {
    values: Vec<f64>,
}

impl DiagonalObservable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::InvalidObservable(format!(
                "eigenvalue {v} outside [-1, 1]"
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Identity outside the pair `(plus, minus)`, `block` on it. Block rows and
/// columns are ordered `(plus, minus)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelObservable {
    dim: usize,
    pair: (usize, usize),
    block: Block,
}

impl TwoLevelObservable {
    pub fn new(dim: usize, pair: (usize, usize), block: Block) -> Result<Self> {
        let (p, m) = pair;
        if p == m {
            return Err(Error::InvalidObservable(format!(
                "pair indices must differ, got ({p}, {m})"
            )));
        }
        if p >= dim || m >= dim {
            return Err(Error::InvalidObservable(format!(
                "pair ({p}, {m}) outside a basis of dimension {dim}"
            )));
        }
        let herm_err = (block[0][1] - block[1][0].conj())
            .norm()
            .max(block[0][0].im.abs())
            .max(block[1][1].im.abs());
        if herm_err > HERMITIAN_TOLERANCE {
            return Err(Error::InvalidObservable("block is not Hermitian".into()));
        }
        let (lo, hi) = block_eigenvalues(&block);
        if lo < -1.0 - EIGEN_TOLERANCE || hi > 1.0 + EIGEN_TOLERANCE {
            return Err(Error::InvalidObservable(format!(
                "block eigenvalues ({lo}, {hi}) outside [-1, 1]"
            )));
        }
        Ok(Self { dim, pair, block })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pair(&self) -> (usize, usize) {
        self.pair
    }

    pub fn block(&self) -> &Block {
        &self.block
    }

    /// `block - 1`, the part that differs from the identity.
    fn delta(&self) -> Block {
        let b = &self.block;
        [[b[0][0] - 1.0, b[0][1]], [b[1][0], b[1][1] - 1.0]]
    }
}

/// Eigenvalues of a Hermitian 2x2 block, ascending.
pub fn block_eigenvalues(block: &Block) -> (f64, f64) {
    let a = block[0][0].re;
    let d = block[1][1].re;
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + block[0][1].norm_sqr()).sqrt();
    (mean - radius, mean + radius)
}

#[derive(Debug, Clone, PartialEq)]
pub enum LocalObservable {
    Diagonal(DiagonalObservable),
    TwoLevel(TwoLevelObservable),
}

impl LocalObservable {
    pub fn dim(&self) -> usize {
        match self {
            Self::Diagonal(d) => d.dim(),
            Self::TwoLevel(t) => t.dim(),
        }
    }

    /// `<i|O|i>`
    pub fn diagonal_element(&self, i: usize) -> f64 {
        match self {
            Self::Diagonal(d) => d.values[i],
            Self::TwoLevel(t) => {
                if i == t.pair.0 {
                    t.block[0][0].re
                } else if i == t.pair.1 {
                    t.block[1][1].re
                } else {
                    1.0
                }
            }
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            Self::Diagonal(d) => d.values.iter().sum(),
            Self::TwoLevel(t) => (t.dim - 2) as f64 + t.block[0][0].re + t.block[1][1].re,
        }
    }

    /// `Tr O^2`, which for Hermitian `O` is the sum of squared moduli of
    /// all matrix elements.
    pub fn trace_of_square(&self) -> f64 {
        match self {
            Self::Diagonal(d) => d.values.iter().map(|v| v * v).sum(),
            Self::TwoLevel(t) => {
                (t.dim - 2) as f64 + t.block.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>()
            }
        }
    }

    /// Dense matrix, row-major. Intended for small sectors and checks.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let n = self.dim();
        let mut m = vec![vec![c(0.0); n]; n];
        match self {
            Self::Diagonal(d) => {
                for (i, &v) in d.values.iter().enumerate() {
                    m[i][i] = c(v);
                }
            }
            Self::TwoLevel(t) => {
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] = c(1.0);
                }
                let idx = [t.pair.0, t.pair.1];
                for (r, &i) in idx.iter().enumerate() {
                    for (s, &j) in idx.iter().enumerate() {
                        m[i][j] = t.block[r][s];
                    }
                }
            }
        }
        m
    }
}

impl From<DiagonalObservable> for LocalObservable {
    fn from(d: DiagonalObservable) -> Self {
        Self::Diagonal(d)
    }
}

impl From<TwoLevelObservable> for LocalObservable {
    fn from(t: TwoLevelObservable) -> Self {
        Self::TwoLevel(t)
    }
}

/// A local observable placed on subsystem A or B.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemObservable {
    pub side: Subsystem,
    pub op: LocalObservable,
}

impl SubsystemObservable {
    pub fn new(side: Subsystem, op: impl Into<LocalObservable>) -> Self {
        Self {
            side,
            op: op.into(),
        }
    }

    pub fn on_a(op: impl Into<LocalObservable>) -> Self {
        Self::new(Subsystem::A, op)
    }

    pub fn on_b(op: impl Into<LocalObservable>) -> Self {
        Self::new(Subsystem::B, op)
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

/// `O^(q)`: `+1` on configurations with mode `q` empty, `-1` otherwise.
pub fn mode_parity_observable(basis: &SectorBasis, mode: u32) -> DiagonalObservable {
    let values = basis
        .iter()
        .map(|c| if c.occupation(mode) == 0 { 1.0 } else { -1.0 })
        .collect();
    DiagonalObservable { values }
}

/// Equal-weight average of `<config|O|config>` over the sector basis.
pub fn microcanonical_average(obs: &SubsystemObservable, basis: &SectorBasis) -> Result<f64> {
    check_dim(obs.dim(), basis.dim())?;
    Ok(obs.op.trace() / basis.dim() as f64)
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn check_pair(obs_a: &SubsystemObservable, obs_b: &SubsystemObservable) -> Result<()> {
    if obs_a.side != Subsystem::A || obs_b.side != Subsystem::B {
        return Err(Error::InvalidObservable(
            "expected an A-side and a B-side observable".into(),
        ));
    }
    Ok(())
}

/// `sum_ij conj(u_i) M_ij v_j` for a 2x2 `M`.
fn sandwich(u: [Complex64; 2], m: &Block, v: [Complex64; 2]) -> Complex64 {
    u[0].conj() * (m[0][0] * v[0] + m[0][1] * v[1])
        + u[1].conj() * (m[1][0] * v[0] + m[1][1] * v[1])
}

/// `<psi| O_A (x) O_B |psi>` for an arbitrary vector, unnormalized.
fn quadratic_form(psi: &StateVector, op_a: &LocalObservable, op_b: &LocalObservable) -> Complex64 {
    use LocalObservable::{Diagonal, TwoLevel};
    let dims = psi.dims();
    // <psi| I (x) B |psi> or <psi| A (x) I |psi> restricted to what the
    // diagonal factor sees; two-level factors are split as 1 + delta.
    match (op_a, op_b) {
        (Diagonal(da), Diagonal(db)) => {
            let mut total = 0.0;
            for (row, &la) in psi.rows().zip(&da.values) {
                let s: f64 = row
                    .iter()
                    .zip(&db.values)
                    .map(|(z, &lb)| lb * z.norm_sqr())
                    .sum();
                total += la * s;
            }
            c(total)
        }
        (TwoLevel(ta), Diagonal(db)) => {
            let base: f64 = psi
                .rows()
                .map(|row| {
                    row.iter()
                        .zip(&db.values)
                        .map(|(z, &lb)| lb * z.norm_sqr())
                        .sum::<f64>()
                })
                .sum();
            let delta = ta.delta();
            let (p, m) = ta.pair;
            let extra: Complex64 = (0..dims.b)
                .map(|b| {
                    let v = [psi.get(p, b), psi.get(m, b)];
                    db.values[b] * sandwich(v, &delta, v)
                })
                .sum();
            c(base) + extra
        }
        (Diagonal(da), TwoLevel(tb)) => {
            let base: f64 = psi
                .rows()
                .zip(&da.values)
                .map(|(row, &la)| la * row.iter().map(|z| z.norm_sqr()).sum::<f64>())
                .sum();
            let delta = tb.delta();
            let (p, m) = tb.pair;
            let extra: Complex64 = (0..dims.a)
                .map(|a| {
                    let w = [psi.get(a, p), psi.get(a, m)];
                    da.values[a] * sandwich(w, &delta, w)
                })
                .sum();
            c(base) + extra
        }
        (TwoLevel(ta), TwoLevel(tb)) => {
            let base = psi.norm_sqr();
            two_level_pair_form(psi, ta, tb) + base
        }
    }
}

/// Everything in `<psi| A (x) B |psi>` beyond `<psi|psi>` when both factors
/// are two-level: `<D_A (x) 1> + <1 (x) D_B> + <D_A (x) D_B>`.
fn two_level_pair_form(
    psi: &StateVector,
    ta: &TwoLevelObservable,
    tb: &TwoLevelObservable,
) -> Complex64 {
    let dims = psi.dims();
    let da = ta.delta();
    let db = tb.delta();
    let (ap, am) = ta.pair;
    let (bp, bm) = tb.pair;
    let mut acc = c(0.0);
    for b in 0..dims.b {
        let v = [psi.get(ap, b), psi.get(am, b)];
        acc += sandwich(v, &da, v);
    }
    for a in 0..dims.a {
        let w = [psi.get(a, bp), psi.get(a, bm)];
        acc += sandwich(w, &db, w);
    }
    let rows = [ap, am];
    let cols = [bp, bm];
    for (r, &a) in rows.iter().enumerate() {
        for (s, &b) in cols.iter().enumerate() {
            let bra = psi.get(a, b).conj();
            for (r2, &a2) in rows.iter().enumerate() {
                for (s2, &b2) in cols.iter().enumerate() {
                    acc += bra * da[r][r2] * db[s][s2] * psi.get(a2, b2);
                }
            }
        }
    }
    acc
}

/// `<Psi| O_A O_B |Psi>`.
///
/// Evaluated as the Rayleigh quotient against the stored norm, which is 1 to
/// within rounding; when `O_A (x) O_B` is `+-1` on every basis state the
/// result is exactly `+-1`.
pub fn correlation(
    state: &PureState,
    obs_a: &SubsystemObservable,
    obs_b: &SubsystemObservable,
) -> Result<f64> {
    check_pair(obs_a, obs_b)?;
    let dims = state.dims();
    check_dim(dims.a, obs_a.dim())?;
    check_dim(dims.b, obs_b.dim())?;
    let psi = state.vector();
    let (num, den) = match (&obs_a.op, &obs_b.op) {
        (LocalObservable::Diagonal(da), LocalObservable::Diagonal(db)) => {
            // numerator and norm accumulated in the same order
            let mut num = 0.0;
            let mut den = 0.0;
            for (row, &la) in psi.rows().zip(&da.values) {
                let mut weighted = 0.0;
                let mut plain = 0.0;
                for (z, &lb) in row.iter().zip(&db.values) {
                    let w = z.norm_sqr();
                    weighted += lb * w;
                    plain += w;
                }
                num += la * weighted;
                den += plain;
            }
            (c(num), den)
        }
        (a, b) => (quadratic_form(psi, a, b), state.norm_sqr()),
    };
    let value = num / den;
    assert!(
        value.im.abs() < IMAGINARY_TOLERANCE,
        "correlation of Hermitian observables has imaginary part {}",
        value.im
    );
    Ok(value.re)
}

/// Hilbert-space average of `<O_A O_B>`: `<O_A>_E <O_B>_E`.
pub fn hilbert_average(obs_a: &SubsystemObservable, obs_b: &SubsystemObservable) -> Result<f64> {
    check_pair(obs_a, obs_b)?;
    let da = obs_a.dim() as f64;
    let db = obs_b.dim() as f64;
    Ok(obs_a.op.trace() / da * (obs_b.op.trace() / db))
}

/// Hilbert-space variance of `<O_A O_B>`,
/// `sum_{n,n'} |<n|O_A O_B|n'>|^2 / (D^2 + D) - <O_A>_E^2 <O_B>_E^2 / (D + 1)`.
pub fn exact_variance(obs_a: &SubsystemObservable, obs_b: &SubsystemObservable) -> Result<f64> {
    check_pair(obs_a, obs_b)?;
    let d = (obs_a.dim() * obs_b.dim()) as f64;
    let tr = obs_a.op.trace() * obs_b.op.trace();
    let tr_sq = obs_a.op.trace_of_square() * obs_b.op.trace_of_square();
    // (Tr T)^2 <= D Tr T^2; rounding may leave a negative residue of a few ulp
    Ok(((tr_sq - tr * tr / d) / (d * (d + 1.0))).max(0.0))
}

/// `O |psi>` for an observable on either side.
pub fn apply(obs: &SubsystemObservable, psi: &StateVector) -> Result<StateVector> {
    let dims = psi.dims();
    let side_dim = match obs.side {
        Subsystem::A => dims.a,
        Subsystem::B => dims.b,
    };
    check_dim(side_dim, obs.dim())?;
    let mut out = psi.clone();
    let amps = out.amplitudes_mut();
    match (&obs.op, obs.side) {
        (LocalObservable::Diagonal(d), Subsystem::A) => {
            for (row, &l) in amps.chunks_exact_mut(dims.b).zip(&d.values) {
                row.iter_mut().for_each(|z| *z *= l);
            }
        }
        (LocalObservable::Diagonal(d), Subsystem::B) => {
            for row in amps.chunks_exact_mut(dims.b) {
                row.iter_mut().zip(&d.values).for_each(|(z, &l)| *z *= l);
            }
        }
        (LocalObservable::TwoLevel(t), Subsystem::A) => {
            let (p, m) = t.pair;
            for b in 0..dims.b {
                let (ip, im) = (dims.compose(p, b), dims.compose(m, b));
                let (x, y) = (amps[ip], amps[im]);
                amps[ip] = t.block[0][0] * x + t.block[0][1] * y;
                amps[im] = t.block[1][0] * x + t.block[1][1] * y;
            }
        }
        (LocalObservable::TwoLevel(t), Subsystem::B) => {
            let (p, m) = t.pair;
            for a in 0..dims.a {
                let (ip, im) = (dims.compose(a, p), dims.compose(a, m));
                let (x, y) = (amps[ip], amps[im]);
                amps[ip] = t.block[0][0] * x + t.block[0][1] * y;
                amps[im] = t.block[1][0] * x + t.block[1][1] * y;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{enumerate_basis, SectorSpec};
    use crate::hilbert::{sample_state_with_dims, Dims, SeedSpec};

    fn bose(n: u32, m: u64) -> SectorBasis {
        enumerate_basis(&SectorSpec::bose(n, m)).unwrap()
    }

    fn parity(side: Subsystem, basis: &SectorBasis, q: u32) -> SubsystemObservable {
        SubsystemObservable::new(side, mode_parity_observable(basis, q))
    }

    // dense reference: kron(A, B) applied to psi
    fn dense_form(psi: &StateVector, a: &LocalObservable, b: &LocalObservable) -> Complex64 {
        let (ma, mb) = (a.to_dense(), b.to_dense());
        let dims = psi.dims();
        let mut acc = c(0.0);
        for i in 0..dims.a {
            for j in 0..dims.b {
                for k in 0..dims.a {
                    for l in 0..dims.b {
                        acc += psi.get(i, j).conj() * ma[i][k] * mb[j][l] * psi.get(k, l);
                    }
                }
            }
        }
        acc
    }

    fn hermitian_block(theta: f64, phi: f64, shift: f64) -> Block {
        // cos(theta) Z + sin(theta) (cos(phi) X + sin(phi) Y), scaled into range
        let s = 1.0 - shift.abs();
        let off = Complex64::from_polar(s * theta.sin(), -phi);
        [
            [c(shift + s * theta.cos()), off],
            [off.conj(), c(shift - s * theta.cos())],
        ]
    }

    #[test]
    fn parity_values_small_sector() {
        let basis = bose(2, 2);
        assert_eq!(mode_parity_observable(&basis, 0).values(), &[-1.0, 1.0]);
        assert!(mode_parity_observable(&basis, 3)
            .values()
            .iter()
            .all(|&v| v == 1.0));
        let fermi = enumerate_basis(&SectorSpec::fermi(5, 30)).unwrap();
        assert!(mode_parity_observable(&fermi, 25)
            .values()
            .iter()
            .all(|&v| v == 1.0));
        // 1 - 2 n_q for fermions
        for q in 0..30 {
            let obs = mode_parity_observable(&fermi, q);
            for (cfg, &v) in fermi.iter().zip(obs.values()) {
                assert_eq!(v, 1.0 - 2.0 * cfg.occupation(q) as f64);
            }
        }
    }

    #[test]
    fn zero_mode_is_always_occupied_at_low_quanta() {
        for m in 0..=4 {
            let basis = bose(5, m);
            let obs = parity(Subsystem::A, &basis, 0);
            assert_eq!(microcanonical_average(&obs, &basis).unwrap(), -1.0);
        }
        let basis = bose(5, 5);
        let obs = parity(Subsystem::A, &basis, 0);
        assert!(microcanonical_average(&obs, &basis).unwrap() > -1.0);
    }

    #[test]
    fn fermi_high_modes_are_flat() {
        for m in 10..=40u64 {
            let basis = enumerate_basis(&SectorSpec::fermi(5, m)).unwrap();
            for q in (m as i64 - 5).max(0) as u32..=m as u32 {
                let obs = parity(Subsystem::B, &basis, q);
                assert_eq!(
                    microcanonical_average(&obs, &basis).unwrap(),
                    1.0,
                    "m={m} q={q}"
                );
            }
        }
    }

    #[test]
    fn traceless_two_level_average() {
        for m in 3..8 {
            let basis = bose(4, m);
            let d = basis.dim();
            let obs = SubsystemObservable::on_a(
                TwoLevelObservable::new(d, (0, d - 1), pauli_x()).unwrap(),
            );
            let dense = obs.op.to_dense();
            let dense_trace: f64 = (0..d).map(|i| dense[i][i].re).sum();
            let avg = microcanonical_average(&obs, &basis).unwrap();
            assert!((avg - dense_trace / d as f64).abs() < 1e-15);
            assert!((avg - (d as f64 - 2.0) / d as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn construction_validates() {
        assert!(DiagonalObservable::new(vec![0.5, 1.2]).is_err());
        assert!(TwoLevelObservable::new(3, (1, 1), pauli_x()).is_err());
        assert!(TwoLevelObservable::new(3, (0, 3), pauli_x()).is_err());
        let mut not_herm = pauli_x();
        not_herm[0][1] = Complex64::new(0.0, 1.0);
        assert!(TwoLevelObservable::new(3, (0, 1), not_herm).is_err());
        let big = [[c(2.0), c(0.0)], [c(0.0), c(0.0)]];
        assert!(TwoLevelObservable::new(3, (0, 1), big).is_err());
        let half = [[c(0.5), c(0.5)], [c(0.5), c(0.5)]];
        assert!(TwoLevelObservable::new(3, (0, 1), half).is_ok());
    }

    #[test]
    fn product_state_correlation() {
        let ba = bose(4, 6);
        let bb = bose(3, 5);
        let oa = parity(Subsystem::A, &ba, 1);
        let ob = parity(Subsystem::B, &bb, 2);
        let dims = Dims::new(ba.dim(), bb.dim());
        for a in 0..dims.a {
            for b in 0..dims.b {
                let mut amps = vec![c(0.0); dims.total()];
                amps[dims.compose(a, b)] = Complex64::from_polar(1.0, 0.3);
                let state = PureState::from_amplitudes(dims, amps).unwrap();
                let expected = mode_parity_observable(&ba, 1).values()[a]
                    * mode_parity_observable(&bb, 2).values()[b];
                assert_eq!(correlation(&state, &oa, &ob).unwrap(), expected);
            }
        }
    }

    #[test]
    fn uniform_superposition_is_uncorrelated() {
        let basis = bose(2, 2);
        let dims = Dims::new(2, 2);
        let state = PureState::from_amplitudes(dims, vec![c(0.5); 4]).unwrap();
        let oa = parity(Subsystem::A, &basis, 0);
        let ob = parity(Subsystem::B, &basis, 0);
        let value = correlation(&state, &oa, &ob).unwrap();
        assert!(value.abs() < 1e-16);
        let dense = dense_form(state.vector(), &oa.op, &ob.op);
        assert!(dense.norm() < 1e-16);
    }

    #[test]
    fn constant_product_gives_exact_unit_correlation() {
        let basis = bose(5, 4);
        let oa = parity(Subsystem::A, &basis, 0);
        let ob = parity(Subsystem::B, &basis, 0);
        let dims = Dims::new(basis.dim(), basis.dim());
        for stream in 0..100 {
            let state = sample_state_with_dims(dims, SeedSpec::new(5, stream));
            assert_eq!(correlation(&state, &oa, &ob).unwrap(), 1.0);
        }
    }

    #[test]
    fn quadratic_form_matches_dense_for_all_kinds() {
        let ba = bose(3, 5);
        let bb = bose(3, 4);
        let dims = Dims::new(ba.dim(), bb.dim());
        assert!(dims.total() <= 36);
        let kinds_a = [
            LocalObservable::from(mode_parity_observable(&ba, 1)),
            LocalObservable::from(
                TwoLevelObservable::new(dims.a, (2, 0), hermitian_block(0.7, 1.1, 0.2)).unwrap(),
            ),
        ];
        let kinds_b = [
            LocalObservable::from(DiagonalObservable::new(vec![0.3, -0.9, 1.0, 0.0]).unwrap()),
            LocalObservable::from(
                TwoLevelObservable::new(dims.b, (1, 3), hermitian_block(2.1, -0.4, -0.1)).unwrap(),
            ),
        ];
        for stream in 0..10 {
            let state = sample_state_with_dims(dims, SeedSpec::new(77, stream));
            for ka in &kinds_a {
                for kb in &kinds_b {
                    let oa = SubsystemObservable::on_a(ka.clone());
                    let ob = SubsystemObservable::on_b(kb.clone());
                    let got = correlation(&state, &oa, &ob).unwrap();
                    let want = dense_form(state.vector(), ka, kb);
                    assert!((got - want.re).abs() < 1e-12);
                    assert!(want.im.abs() < 1e-12);
                    // <psi| O_A (O_B psi)> through apply
                    let applied = apply(&oa, &apply(&ob, state.vector()).unwrap()).unwrap();
                    let via_apply = state.vector().inner(&applied).unwrap();
                    assert!((via_apply.re - got).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn global_phase_invariance() {
        let ba = bose(3, 6);
        let dims = Dims::new(ba.dim(), ba.dim());
        let oa =
            SubsystemObservable::on_a(TwoLevelObservable::new(dims.a, (0, 1), pauli_x()).unwrap());
        let ob = parity(Subsystem::B, &ba, 2);
        let state = sample_state_with_dims(dims, SeedSpec::new(8, 0));
        let phase = Complex64::from_polar(1.0, 2.3);
        let rotated: Vec<Complex64> = state.amplitudes().iter().map(|z| z * phase).collect();
        let rotated = PureState::from_amplitudes(dims, rotated).unwrap();
        let x = correlation(&state, &oa, &ob).unwrap();
        let y = correlation(&rotated, &oa, &ob).unwrap();
        assert!((x - y).abs() < 1e-14);
    }

    #[test]
    fn apply_identities() {
        let basis = bose(4, 6);
        let dims = Dims::new(basis.dim(), basis.dim());
        let state = sample_state_with_dims(dims, SeedSpec::new(3, 3));
        let id = SubsystemObservable::on_b(
            TwoLevelObservable::new(dims.b, (0, 2), identity_block()).unwrap(),
        );
        assert_eq!(&apply(&id, state.vector()).unwrap(), state.vector());
        for side in [Subsystem::A, Subsystem::B] {
            let o = parity(side, &basis, 1);
            let twice = apply(&o, &apply(&o, state.vector()).unwrap()).unwrap();
            assert_eq!(&twice, state.vector());
        }
        let wrong = parity(Subsystem::A, &bose(4, 7), 1);
        assert!(matches!(
            apply(&wrong, state.vector()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn correlation_rejects_mismatch() {
        let basis = bose(4, 6);
        let dims = Dims::new(basis.dim(), basis.dim());
        let state = sample_state_with_dims(dims, SeedSpec::new(3, 3));
        let ok = parity(Subsystem::A, &basis, 1);
        let wrong = parity(Subsystem::B, &bose(4, 7), 1);
        assert!(matches!(
            correlation(&state, &ok, &wrong),
            Err(Error::DimensionMismatch { .. })
        ));
        let swapped = parity(Subsystem::B, &basis, 1);
        assert!(correlation(&state, &swapped, &ok).is_err());
    }

    #[test]
    fn hilbert_average_examples() {
        let basis = bose(5, 4);
        let oa = parity(Subsystem::A, &basis, 0);
        let ob = parity(Subsystem::B, &basis, 0);
        assert_eq!(hilbert_average(&oa, &ob).unwrap(), 1.0);

        let ba = bose(4, 5);
        let zero_avg = SubsystemObservable::on_a(
            DiagonalObservable::new(
                (0..ba.dim())
                    .map(|i| if i % 2 == 0 { 0.5 } else { -0.5 })
                    .collect::<Vec<_>>(),
            )
            .unwrap(),
        );
        assert_eq!(ba.dim(), 6);
        assert_eq!(hilbert_average(&zero_avg, &ob).unwrap(), 0.0);

        // sigma_x on A against sigma_u + sigma_v on B: the latter is not an
        // admissible observable on its own, so compare the product of traces
        for (ma, mb) in [(3, 4), (4, 5), (5, 5)] {
            let ba = bose(3, ma);
            let bb = bose(3, mb);
            let (da, db) = (ba.dim(), bb.dim());
            assert!(da <= 6 && db <= 6);
            let sx = LocalObservable::from(TwoLevelObservable::new(da, (0, 1), pauli_x()).unwrap());
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let u = [[c(-s), c(s)], [c(s), c(s)]];
            let v = [[c(s), c(s)], [c(s), c(-s)]];
            let su = LocalObservable::from(TwoLevelObservable::new(db, (0, 1), u).unwrap());
            let sv = LocalObservable::from(TwoLevelObservable::new(db, (0, 1), v).unwrap());
            let dense_u = su.to_dense();
            let dense_v = sv.to_dense();
            let dense_x = sx.to_dense();
            let tr_x: f64 = (0..da).map(|i| dense_x[i][i].re).sum();
            let tr_uv: f64 = (0..db).map(|i| dense_u[i][i].re + dense_v[i][i].re).sum();
            let d = (da * db) as f64;
            let via_avg = hilbert_average(
                &SubsystemObservable::on_a(sx.clone()),
                &SubsystemObservable::on_b(su),
            )
            .unwrap()
                + hilbert_average(
                    &SubsystemObservable::on_a(sx),
                    &SubsystemObservable::on_b(sv),
                )
                .unwrap();
            let expected = 2.0 * (da as f64 - 2.0) * (db as f64 - 2.0) / d;
            assert!((tr_x * tr_uv / d - expected).abs() < 1e-14);
            assert!((via_avg - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn variance_closed_forms() {
        for m in [6u64, 10, 15] {
            let basis = bose(5, m);
            let d = (basis.dim() * basis.dim()) as f64;
            for (p, q) in [(0, 0), (1, 3), (m as u32, 2)] {
                let oa = parity(Subsystem::A, &basis, p);
                let ob = parity(Subsystem::B, &basis, q);
                let ma = microcanonical_average(&oa, &basis).unwrap();
                let mb = microcanonical_average(&ob, &basis).unwrap();
                let expected = (1.0 - ma * ma * mb * mb) / (d + 1.0);
                let got = exact_variance(&oa, &ob).unwrap();
                assert!((got - expected).abs() < 1e-15 * expected.max(1e-300).max(1.0));
                assert!(got < 1.0 / d);
            }
        }
        for m in 0..=4 {
            let basis = bose(5, m);
            let oa = parity(Subsystem::A, &basis, 0);
            let ob = parity(Subsystem::B, &basis, 0);
            assert_eq!(exact_variance(&oa, &ob).unwrap(), 0.0);
        }
    }

    #[test]
    fn variance_matches_haar_moment_route() {
        // E[<T>^2] = (Tr T^2 + (Tr T)^2) / (D (D + 1)) from
        // E[|psi_i|^2 |psi_j|^2] = (1 + delta_ij) / (D (D + 1)), using dense T
        let ba = bose(3, 5);
        let bb = bose(3, 4);
        let (da, db) = (ba.dim(), bb.dim());
        let oa = SubsystemObservable::on_a(
            TwoLevelObservable::new(da, (0, 3), hermitian_block(0.4, 0.9, 0.3)).unwrap(),
        );
        let ob =
            SubsystemObservable::on_b(DiagonalObservable::new(vec![0.2, -0.7, 0.9, -1.0]).unwrap());
        let (ma, mb) = (oa.op.to_dense(), ob.op.to_dense());
        let d = (da * db) as f64;
        let mut tr = 0.0;
        let mut tr_sq = 0.0;
        for i in 0..da {
            for j in 0..db {
                tr += (ma[i][i] * mb[j][j]).re;
                for k in 0..da {
                    for l in 0..db {
                        tr_sq += (ma[i][k] * mb[j][l]).norm_sqr();
                    }
                }
            }
        }
        let moment = tr_sq / (d * (d + 1.0)) + tr * tr / (d * (d + 1.0)) - (tr / d).powi(2);
        let got = exact_variance(&oa, &ob).unwrap();
        assert!((got - moment).abs() < 1e-12);
        assert!((hilbert_average(&oa, &ob).unwrap() - tr / d).abs() < 1e-14);
    }
}
