//! Anonymous group signatures for drone RemoteID broadcasts.
//!
//! Three schemes share one frame format:
//!
//! * [`cs`]: a Cramer-Shoup based dynamic group signature over a symmetric
//!   pairing. Signing evaluates pairings.
//! * [`ds`] in CCA2 and CPA flavours: SPS-EQ credentials with pairing-free
//!   signing and optional pre-computation.
//!
//! [`wire`] encodes signed telemetry into broadcast frames, [`actors`] runs
//! drones, observers and the authority over a simulated channel, and
//! [`cli`] drives it all from the command line.

pub mod actors;
pub mod algebra;
pub mod cli;
pub mod cs;
pub mod ds;
pub mod primitives;
pub mod wire;

pub use algebra::type_a::{Toy, A512};
pub use algebra::{BilinearContext, CurveId, Engine, HashAlg};

/// The 512-bit supersingular curve with an 80-bit security level.
pub type TypeA512 = algebra::TypeA<A512>;
/// Tiny supersingular curve of prime order 65521, for tests and oracles.
pub type ToyCurve = algebra::TypeA<Toy>;
pub use ark_bn254::Bn254;
