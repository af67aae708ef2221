//! Desk-scale toolkit for low-lying closed geodesics on the Picard manifold.
//!
//! The crate builds, from exact arithmetic up:
//!
//! - [`gaussian`] — Gaussian-integer arithmetic: norms, gcd, factorization,
//!   square-free tests, Gaussian primes, and residue rings `Z[i]/(q)`.
//! - [`cline`] — exact line/circle (cline) geometry and dyadic-box predicates
//!   used to certify the Markov partition.
//! - [`hurwitz`] — the nearest-integer complex continued-fraction map, its
//!   Markov partition restricted to a ball of radius `R`, and the per-cell
//!   branch matrices in `SL2(Z[i])`.
//! - [`subshift`] — the induced subshift of finite type: transition matrix,
//!   word enumeration, glue words, irreducibility/aperiodicity certificates.
//! - [`geodesics`] — words to matrices, trace/length/holonomy invariants,
//!   Dirichlet forms, and pruned enumeration of matrices in a Frobenius ball.
//! - [`thermo`] — Birkhoff sums of the expansion rate, certified pressure
//!   brackets, and the growth-exponent solver.
//! - [`congruence`] — `SL2` over `Z[i]/(q)`: group enumeration, trace fibers,
//!   local densities, and empirical equidistribution reports.
//! - [`charsums`] — additive characters, Kloosterman sums, and `SL2`
//!   dot-product character sums with Weil-bound margins.
//! - [`sieve`] — the multilinear sifting set, congruence ledgers, Mertens
//!   sums over Gaussian primes, and the square-free discriminant harvest.
//!
//! Heavy scans are data-parallel via `rayon` when the `parallel` feature is
//! enabled (the default); every parallel path has a sequential fallback and
//! produces identical output either way.

pub mod charsums;
pub mod cline;
pub mod congruence;
pub mod exec;
pub mod gaussian;
pub mod geodesics;
pub mod hurwitz;
pub mod sieve;
pub mod subshift;
pub mod thermo;

pub use gaussian::GaussianInt;
pub use geodesics::Mat2;
