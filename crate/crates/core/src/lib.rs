//! Exact-arithmetic toolkit for even lattices, rational polyhedral cones,
//! toric singularity criteria, perfect cone decompositions of self-adjoint
//! cones, and klt certification of finite quotients of toric varieties.
//!
//! All arithmetic is exact (`BigInt` / `BigRational`); every public operation
//! is a pure function of its inputs and safe to call concurrently.

// Index loops are the house style for the matrix kernels.
#![allow(clippy::needless_range_loop)]

pub mod cones;
pub mod k3;
pub mod lattice;
pub mod linalg;
pub mod perfect;
pub mod quotient;
pub mod report;
pub mod scene;
pub mod toric;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("lattice is degenerate (det = 0)")]
    DegenerateLattice,
    #[error("lattice is not even")]
    NotEven,
    #[error("vector is isotropic: (v,v) = 0")]
    IsotropicVector,
    #[error("vector is not isotropic: (v,v) != 0")]
    NotIsotropic,
    #[error("vector is not primitive")]
    NotPrimitive,
    #[error("matrix is not an isometry of the lattice")]
    NotIsometry,
    #[error("isometry does not stabilize the isotropic line")]
    NotInStabilizer,
    #[error("map on the quotient is not a reflection")]
    NotReflection,
    #[error("cone is not pointed (contains a line)")]
    NotPointed,
    #[error("cone/fan dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid fan: {0}")]
    InvalidFan(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("generator is not unimodular")]
    NotUnimodular,
    #[error("group closure exceeds the order bound {0}")]
    OrderBoundExceeded(usize),
    #[error("group does not act on the fan/cone")]
    GroupDoesNotAct,
    #[error("lattice has signature ({0},{1},{2}), not Lorentzian (1,k)")]
    NotLorentzian(usize, usize, usize),
    #[error("interior point has non-positive norm")]
    NotInterior,
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error(
        "facet certificate failed at height {height}: lattice point {witness:?} lies strictly below the candidate facet; raise the height"
    )]
    CertificateFailure { height: i64, witness: Vec<String> },
    #[error("d must be >= 1, got {0}")]
    InvalidPolarization(i64),
    #[error("unknown lattice name: {0}")]
    UnknownLattice(String),
    #[error("scene validation failed:\n{0}")]
    SceneInvalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Number of worker threads requested via `CONESMITH_THREADS` (default 1).
pub fn configured_threads() -> usize {
    std::env::var("CONESMITH_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

/// Map `f` over `items`, optionally on `configured_threads()` workers.
/// The output order always matches the input order.
pub fn ordered_parallel_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    ordered_parallel_map_with(items, f, configured_threads())
}

pub fn ordered_parallel_map_with<T, U, F>(items: &[T], f: F, threads: usize) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    let threads = threads.min(items.len().max(1));
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let mut out: Vec<Option<U>> = (0..items.len()).map(|_| None).collect();
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|scope| {
        for (slot_chunk, item_chunk) in out.chunks_mut(chunk).zip(items.chunks(chunk)) {
            let f = &f;
            scope.spawn(move || {
                for (slot, item) in slot_chunk.iter_mut().zip(item_chunk.iter()) {
                    *slot = Some(f(item));
                }
            });
        }
    });
    out.into_iter()
        .map(|x| x.expect("worker filled slot"))
        .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn parallel_map_preserves_order() {
        let items: Vec<i64> = (0..37).collect();
        let expect: Vec<i64> = items.iter().map(|x| x * x).collect();
        for threads in [1, 2, 3, 8, 64] {
            let got = super::ordered_parallel_map_with(&items, |x| x * x, threads);
            assert_eq!(got, expect);
        }
        let empty: Vec<i64> = Vec::new();
        assert!(super::ordered_parallel_map_with(&empty, |x| *x, 4).is_empty());
    }
}
