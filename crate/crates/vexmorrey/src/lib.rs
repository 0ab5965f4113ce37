//! Numerical toolkit for variable-exponent function spaces on sampled data:
//! Lebesgue quasi-norms L_{p(·)}, Morrey norms M^{u(·)}_{p(·)}, dyadic
//! Littlewood-Paley analysis with Peetre maximal functions, 2-microlocal
//! Triebel-Lizorkin-Morrey quasi-norms, and empirical probes that check the
//! governing inequalities and norm equivalences on generated corpora.
//!
//! Functions live on a uniform periodic grid over the torus [-L, L)^n for
//! n ∈ {1, 2}; suprema over balls and pairs are discretized, so reported
//! Morrey-type norms are lower bounds of their continuum counterparts.
//! Probes always compare two quantities computed with the same
//! discretization so that the bias largely cancels.
//!
//! Start with the `examples/` directory: one runnable example per major
//! capability. The `vexmorrey` binary wraps corpus generation, norm
//! evaluation and the probe suite behind a flat key-value config file.

pub mod config;
pub mod dyadic;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod lebesgue;
pub mod morrey;
pub mod probes;
pub mod tlm;

pub use error::{Error, Result};
pub use exponents::{c_pu, ExponentDescriptor, ExponentField, LogHolderCertificate};
pub use grid::{eta_kernel, Grid, GridFunction, Point};
pub use lebesgue::{
    char_ball_prediction, lebesgue_norm, quasi_norm, semimodular, DomainMask,
};
pub use morrey::{mixed_sequence_norm, morrey_norm, power_reindex_check, BallFamily, MorreyNorm};
pub use tlm::{
    hardy_constant, hardy_majorant, peetre_convolution_norm, peetre_maximal_norm, tlm_norm,
    SpaceParams,
};
