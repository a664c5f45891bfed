//! Pure-dephasing channels for two- and three-qubit registers.
//!
//! The crate builds operator-sum (Kraus) maps for local and collective
//! dephasing fields, evolves the fragile, robust, W and GHZ state families,
//! measures pairwise entanglement with the concurrence, fits decay times, and
//! cross-checks the channels against a Monte Carlo average over stochastic
//! Hamiltonians.
//!
//! ```
//! use dephasing::{channels::{evolve, Channel, NoiseScenario}, entanglement::concurrence, states::StateSpec, tensor::Qubit};
//!
//! let h = std::f64::consts::FRAC_1_SQRT_2;
//! let rho0 = StateSpec::fragile(h.into(), 0.0.into(), h.into()).projector()?;
//! let noise = NoiseScenario::new(2, vec![Channel::pair(Qubit::A, Qubit::B, 1.0)])?;
//! let rho = evolve(&rho0, &noise, 0.5)?;
//! assert!((concurrence(&rho)?.value - (-1.0f64).exp()).abs() < 1e-12);
//! # Ok::<(), dephasing::Error>(())
//! ```
//!
//! The guide under `book/` walks through each module; its code listings are
//! compiled as doc-tests of this crate.

pub mod channels;
pub mod cli;
pub mod entanglement;
mod error;
pub mod oracle;
pub mod states;
pub mod tensor;
pub mod timescales;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/matrices.md")]
    mod matrices {}
    #[doc = include_str!("../../../book/src/channels.md")]
    mod channels {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/entanglement.md")]
    mod entanglement {}
    #[doc = include_str!("../../../book/src/timescales.md")]
    mod timescales {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    mod monte_carlo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
