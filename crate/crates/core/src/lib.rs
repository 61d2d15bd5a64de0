//! Parseval p-frames on finite-dimensional normed spaces, their p-Shannon and
//! p-Rényi entropies, and numerical certificates for the entropic uncertainty
//! chain
//!
//! ```text
//! log(nm) ≥ S_f(x) + S_g(x) ≥ −p log( sup_{‖y‖=1} max_{j,k} |f_j(y) g_k(y)| )
//! ```
//!
//! together with its mirror for frames of the dual space.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`spaces`] | ℓ^q and weighted ℓ^q norms, dual norms, pairing, sphere sampling |
//! | [`frames`] | analysis frames, exact constructions, Parseval verification |
//! | [`entropy`] | p-Shannon / p-Rényi entropies |
//! | [`certify`] | sup-coherence estimation, certificates, Buzano bound, scans |
//! | [`duality`] | vector frames for `X*` and the dual chain |
//! | [`search`] | equality-gap minimisation and Rényi sweeps |
//! | [`report`] | report envelopes and the frame file format |
//!
//! Independent work items run through rayon when the `parallel` feature is
//! on (the default); [`Execution::Sequential`] forces a single thread. Results
//! do not depend on the choice.
//!
//! ```
//! use pframe::frames::{generate_frame, FrameKind};
//! use pframe::certify::{certify_point, CheckConfig, OptimizerConfig};
//! use pframe::spaces::Vector;
//!
//! let f = generate_frame(&FrameKind::Coordinate { p: 2.0, dim: 2, weights: None }, 0).unwrap();
//! let g = generate_frame(&FrameKind::Fourier { n: 2 }, 0).unwrap();
//! let x = Vector::from_real(&[0.9, 0.3]);
//! let cert = certify_point(&f, &g, &x, &OptimizerConfig::default(), &CheckConfig::default()).unwrap();
//! assert!(cert.passes.all());
//! ```

pub mod certify;
mod coherence;
pub mod duality;
pub mod entropy;
pub mod error;
pub mod exec;
pub mod frames;
pub mod report;
pub mod search;
pub mod spaces;

pub use error::{Error, Result};
pub use exec::Execution;
