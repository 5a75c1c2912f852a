//! Continuous-time quantum search on balanced binary trees.
//!
//! A walker starts in the uniform superposition over the `N = 2^n - 1`
//! sites of a balanced binary tree and evolves under
//! `H = gamma L - |w><w|`. The crate builds exact lumped reductions of this
//! problem ([`reduction`]), propagates them spectrally ([`evolution`]),
//! and runs the measurement-time and scaling analyses ([`search`]).
//! Closed forms for a marked root live in [`analytic`]; [`classical`] and
//! [`centrality`] hold the classical baselines.
//!
//! ```
//! use treesearch::{reduce_comb, first_peak, PeakPolicy, TreeParams};
//!
//! let sys = reduce_comb(TreeParams::new(15, 1, 1.0)?)?;
//! let peak = first_peak(&sys, &PeakPolicy::default())?;
//! assert!((peak.probability - 0.5).abs() < 0.02);
//! # Ok::<(), treesearch::Error>(())
//! ```

pub mod analytic;
pub mod centrality;
pub mod classical;
pub mod eigen;
pub mod error;
pub mod evolution;
pub mod reduction;
pub mod search;
pub mod tree;

pub use eigen::{decompose, SpectralDecomposition};
pub use error::{Error, Result};
pub use evolution::{evolve_amplitude, first_peak, EvolutionTrace, MarkedSpectrum, Peak, PeakPolicy, Propagator};
pub use reduction::{reduce_comb, reduce_root_case, verify_reduction, ReducedSystem, ReductionMap, VerificationReport};
pub use search::{scaling_experiment, sweep_gamma, GammaSweep, ScalingFit};
pub use tree::{build_full_hamiltonian, build_tree, uniform_state, BalancedTree, FullSystem, TreeParams};
