use rand::Rng;

use super::Decision;
use crate::gp::Domain;
use crate::scalar::Scalar;

/// Uniform draw over the lattice.
pub fn random_step<T: Scalar, R: Rng + ?Sized>(domain: &Domain<T>, rng: &mut R) -> Decision<T> {
    Decision::sample(domain, rng.random_range(0..domain.len()))
}
