//! Seeded random systems shared by the property suites.

use crate::generators::{CompositePart, EntropyGenerator, F2Profile};
use crate::matrix::{random_density_with, random_hermitian, random_pure, DensityMatrix, HermitianMatrix};
use crate::rng::SeededRng;

/// Spectral radius of random Hamiltonians.
pub const HAMILTONIAN_RADIUS: f64 = 2.0;

/// Hamiltonian and initial state drawn together.
#[derive(Debug, Clone)]
pub struct RandomSystem {
    pub hamiltonian: HermitianMatrix,
    pub rho0: DensityMatrix,
}

pub fn uniform_int(rng: &mut SeededRng, lo: usize, hi: usize) -> usize {
    lo + (rng.next_u64() % (hi - lo + 1) as u64) as usize
}

pub fn uniform_in(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

pub fn random_hamiltonian(dim: usize, rng: &mut SeededRng) -> HermitianMatrix {
    random_hermitian(dim, HAMILTONIAN_RADIUS, rng)
}

/// Full-rank mixed state with dimension in `dims`.
pub fn mixed_system(rng: &mut SeededRng, dims: (usize, usize)) -> RandomSystem {
    let dim = uniform_int(rng, dims.0, dims.1);
    let hamiltonian = random_hamiltonian(dim, rng);
    let rho0 = random_density_with(dim, dim, rng).expect("rank equals dimension");
    RandomSystem { hamiltonian, rho0 }
}

/// Normalized pure state with dimension in `dims`.
pub fn pure_system(rng: &mut SeededRng, dims: (usize, usize)) -> RandomSystem {
    let dim = uniform_int(rng, dims.0, dims.1);
    let hamiltonian = random_hamiltonian(dim, rng);
    let rho0 = random_pure(dim, rng).expect("nonzero vector");
    RandomSystem { hamiltonian, rho0 }
}

/// Names of the generator variants, in the order used by [`variant`].
pub const VARIANTS: [&str; 5] = ["quadratic", "renyi_hom", "renyi_pure", "smooth_f2", "composite"];

/// One generator of the requested variant with randomized parameters.
///
/// `min_alpha` bounds the Rényi index from below; dynamics suites use
/// values above 1 so that `ρ^{α-1}` stays bounded near small eigenvalues.
pub fn variant(index: usize, rng: &mut SeededRng, min_alpha: f64) -> EntropyGenerator {
    let mut alpha = || loop {
        let a = uniform_in(rng, min_alpha, 3.0);
        if (a - 1.0).abs() > 0.05 {
            return a;
        }
    };
    match index % VARIANTS.len() {
        0 => EntropyGenerator::Quadratic,
        1 => EntropyGenerator::renyi_homogeneous(alpha()).expect("alpha away from 1"),
        2 => EntropyGenerator::renyi_pure(alpha()).expect("alpha away from 1"),
        3 => {
            let e = uniform_in(rng, 0.5, 3.0);
            EntropyGenerator::SmoothF2(F2Profile::half_power(e).expect("positive exponent"))
        }
        _ => {
            // parts must stay positive, which rules out α < 1 for renyi_hom
            let a1 = loop {
                let a = alpha();
                if a > 1.0 {
                    break a;
                }
            };
            let a2 = alpha();
            let w = uniform_in(rng, 0.1, 0.9);
            EntropyGenerator::composite(vec![
                CompositePart::global(EntropyGenerator::renyi_homogeneous(a1).expect("alpha"), w),
                CompositePart::global(EntropyGenerator::renyi_pure(a2).expect("alpha"), 1.0 - w),
            ])
            .expect("weights sum to one")
        }
    }
}
