//! Product space `H_A (x) H_B` and uniformly distributed pure states on its
//! unit sphere.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::SectorBasis;

/// Generator behind every sampled state. Each `(seed, stream)` pair selects
/// one ChaCha8 keystream: the key is expanded from the 64-bit master seed and
/// the stream index is the 64-bit ChaCha nonce.
pub const RNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha 0.9.0, key = seed_from_u64(seed), nonce = stream); \
     normals: rand_distr 0.5.1 StandardNormal";

/// Largest deviation from unit norm a [`PureState`] may carry.
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub seed: u64,
    pub stream: u64,
}

impl SeedSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// `H_A (x) H_B` with row-major flat index `a * D_B + b`.
#[derive(Debug, Clone)]
pub struct BipartiteSpace {
    basis_a: Arc<SectorBasis>,
    basis_b: Arc<SectorBasis>,
}

impl BipartiteSpace {
    pub fn new(basis_a: Arc<SectorBasis>, basis_b: Arc<SectorBasis>) -> Result<Self> {
        if basis_a.is_empty() || basis_b.is_empty() {
            return Err(Error::EmptySector);
        }
        Ok(Self { basis_a, basis_b })
    }

    pub fn basis_a(&self) -> &SectorBasis {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &SectorBasis {
        &self.basis_b
    }

    pub fn dim_a(&self) -> usize {
        self.basis_a.dim()
    }

    pub fn dim_b(&self) -> usize {
        self.basis_b.dim()
    }

    pub fn dim(&self) -> usize {
        self.dim_a() * self.dim_b()
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.dim_a(), self.dim_b())
    }

    pub fn compose(&self, a: usize, b: usize) -> usize {
        self.dims().compose(a, b)
    }

    pub fn decompose(&self, index: usize) -> (usize, usize) {
        self.dims().decompose(index)
    }
}

/// Builds the product space of two sector bases.
pub fn make_space(basis_a: SectorBasis, basis_b: SectorBasis) -> Result<BipartiteSpace> {
    BipartiteSpace::new(Arc::new(basis_a), Arc::new(basis_b))
}

/// Shape of an amplitude grid: `D_A` rows by `D_B` columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub a: usize,
    pub b: usize,
}

impl Dims {
    pub fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }

    pub fn total(&self) -> usize {
        self.a * self.b
    }

    pub fn compose(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < self.a && b < self.b);
        a * self.b + b
    }

    pub fn decompose(&self, index: usize) -> (usize, usize) {
        (index / self.b, index % self.b)
    }
}

/// Dense amplitude vector on the product space, not necessarily normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: Dims,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(dims: Dims, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != dims.total() {
            return Err(Error::DimensionMismatch {
                expected: dims.total(),
                found: amps.len(),
            });
        }
        Ok(Self { dims, amps })
    }

    pub fn zeros(dims: Dims) -> Self {
        Self {
            dims,
            amps: vec![Complex64::new(0.0, 0.0); dims.total()],
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.amps[self.dims.compose(a, b)]
    }

    /// Row `a` of the grid: all amplitudes with subsystem A in state `a`.
    pub fn row(&self, a: usize) -> &[Complex64] {
        &self.amps[a * self.dims.b..(a + 1) * self.dims.b]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, Complex64> {
        self.amps.chunks_exact(self.dims.b)
    }

    /// `sum |psi_i|^2`, accumulated row by row.
    pub fn norm_sqr(&self) -> f64 {
        self.rows()
            .map(|row| row.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.total(),
                found: other.dims.total(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(x, y)| x.conj() * y)
            .sum())
    }
}

/// Unit-norm amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vector: StateVector,
    norm_sqr: f64,
}

impl PureState {
    /// Accepts amplitudes already on the unit sphere.
    pub fn from_amplitudes(dims: Dims, amps: Vec<Complex64>) -> Result<Self> {
        let vector = StateVector::new(dims, amps)?;
        let norm_sqr = vector.norm_sqr();
        if (norm_sqr.sqrt() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Domain(format!(
                "state norm {} is not 1",
                norm_sqr.sqrt()
            )));
        }
        Ok(Self { vector, norm_sqr })
    }

    /// Divides by the Euclidean norm.
    pub fn normalize(vector: StateVector) -> Result<Self> {
        let norm = vector.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        let scale = norm.recip();
        let mut vector = vector;
        for z in vector.amplitudes_mut() {
            *z *= scale;
        }
        let norm_sqr = vector.norm_sqr();
        Ok(Self { vector, norm_sqr })
    }

    pub fn vector(&self) -> &StateVector {
        &self.vector
    }

    pub fn dims(&self) -> Dims {
        self.vector.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.vector.amps
    }

    /// Cached `sum |psi_i|^2`, equal to 1 within [`NORM_TOLERANCE`].
    pub fn norm_sqr(&self) -> f64 {
        self.norm_sqr
    }
}

/// Euclidean norm of any amplitude vector.
pub fn norm(vector: &StateVector) -> f64 {
    vector.norm()
}

/// Fills `out` with i.i.d. complex Gaussians whose real and imaginary parts
/// are standard normal, drawing the real part first.
pub fn fill_gaussian<R: Rng + ?Sized>(rng: &mut R, out: &mut [Complex64]) {
    for z in out {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = Complex64::new(re, im);
    }
}

/// Draws a pure state from the unitarily invariant measure on the unit sphere
/// by normalizing a vector of i.i.d. complex Gaussians.
pub fn sample_uniform_state(space: &BipartiteSpace, seed: SeedSpec) -> PureState {
    sample_state_with_dims(space.dims(), seed)
}

pub fn sample_state_with_dims(dims: Dims, seed: SeedSpec) -> PureState {
    let mut rng = seed.rng();
    let mut vector = StateVector::zeros(dims);
    loop {
        fill_gaussian(&mut rng, vector.amplitudes_mut());
        let norm = vector.norm();
        // an all-zero draw has probability zero; redraw from the same stream
        if norm > 0.0 {
            let scale = norm.recip();
            for z in vector.amplitudes_mut() {
                *z *= scale;
            }
            let norm_sqr = vector.norm_sqr();
            return PureState { vector, norm_sqr };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{enumerate_basis, SectorSpec};

    fn space(ma: u64, mb: u64) -> BipartiteSpace {
        make_space(
            enumerate_basis(&SectorSpec::bose(5, ma)).unwrap(),
            enumerate_basis(&SectorSpec::bose(5, mb)).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn product_dimensions() {
        // D_A = D_B = 2 at five bosons, two quanta
        assert_eq!(space(2, 2).dim(), 4);
        assert_eq!(space(30, 30).dim(), 674 * 674);
        assert_eq!(space(30, 30).dim(), 454_276);
    }

    #[test]
    fn empty_sector_rejected() {
        let empty = enumerate_basis(&SectorSpec::fermi(5, 9)).unwrap();
        let full = enumerate_basis(&SectorSpec::bose(5, 3)).unwrap();
        assert_eq!(make_space(empty, full).unwrap_err(), Error::EmptySector);
    }

    #[test]
    fn index_round_trip() {
        let dims = Dims::new(3, 5);
        let mut seen = vec![false; 15];
        for a in 0..3 {
            for b in 0..5 {
                let i = dims.compose(a, b);
                assert_eq!(dims.decompose(i), (a, b));
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn one_dimensional_state_has_unit_modulus() {
        let state = sample_state_with_dims(Dims::new(1, 1), SeedSpec::new(3, 0));
        assert!((state.amplitudes()[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sampled_states_are_normalized() {
        for stream in 0..50 {
            let state = sample_uniform_state(&space(10, 12), SeedSpec::new(11, stream));
            assert!((norm(state.vector()) - 1.0).abs() < NORM_TOLERANCE);
            assert!((state.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
        }
    }

    #[test]
    fn fixed_seed_is_bit_reproducible() {
        let s = space(6, 6);
        let x = sample_uniform_state(&s, SeedSpec::new(99, 7));
        let y = sample_uniform_state(&s, SeedSpec::new(99, 7));
        let bits = |p: &PureState| {
            p.amplitudes()
                .iter()
                .flat_map(|z| [z.re.to_bits(), z.im.to_bits()])
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&x), bits(&y));
        let z = sample_uniform_state(&s, SeedSpec::new(99, 8));
        assert_ne!(bits(&x), bits(&z));
        let w = sample_uniform_state(&s, SeedSpec::new(100, 7));
        assert_ne!(bits(&x), bits(&w));
    }

    #[test]
    fn norm_basics() {
        let dims = Dims::new(2, 2);
        assert_eq!(norm(&StateVector::zeros(dims)), 0.0);
        let state = sample_state_with_dims(dims, SeedSpec::new(1, 1));
        let mut doubled = state.vector().clone();
        for z in doubled.amplitudes_mut() {
            *z *= 2.0;
        }
        assert!((norm(&doubled) - 2.0 * norm(state.vector())).abs() < 1e-14);
        assert!(PureState::normalize(StateVector::zeros(dims)).is_err());
        assert!(PureState::from_amplitudes(dims, doubled.into_amplitudes()).is_err());
    }

    #[test]
    fn wrong_length_rejected() {
        let err = StateVector::new(Dims::new(2, 3), vec![Complex64::new(1.0, 0.0); 5]);
        assert_eq!(
            err.unwrap_err(),
            Error::DimensionMismatch {
                expected: 6,
                found: 5
            }
        );
    }

    #[test]
    fn mean_weight_is_one_over_d() {
        // |psi_0|^2 under the uniform measure is Beta(1, D - 1)
        let dims = Dims::new(4, 4);
        let n = 100_000;
        let d = 16.0;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for stream in 0..n {
            let p = sample_state_with_dims(dims, SeedSpec::new(2024, stream)).amplitudes()[0]
                .norm_sqr();
            sum += p;
            sum_sq += p * p;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.0 / d).abs() < 3.0 * se, "mean {mean}, se {se}");
        // Beta(1, D-1) variance: (D-1) / (D^2 (D+1))
        let exact_var = (d - 1.0) / (d * d * (d + 1.0));
        assert!((var / exact_var - 1.0).abs() < 0.05);
    }
}
