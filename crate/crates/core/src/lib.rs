//! Hierarchical small-world networks and consensus dynamics.
//!
//! The crate builds the hierarchical small-world network `M_g^r` (a full
//! r-ary tree of height `g` in which every internal vertex is linked to all
//! of its descendants), computes its Laplacian spectrum in closed form and
//! checks it against a dense numerical eigensolver, evaluates first- and
//! second-order network coherence, and simulates the four linear consensus
//! protocols whose behaviour the spectrum predicts.
//!
//! Module map:
//!
//! | module       | contents                                                   |
//! |--------------|------------------------------------------------------------|
//! | [`graph`]    | simple undirected graphs, baselines, matrices, metrics     |
//! | [`hsw`]      | `M_g^r` construction and its combinatorial closed forms    |
//! | [`spectral`] | closed-form and numeric spectra, eigenvector certificates  |
//! | [`coherence`]| `H1`, `H2`, Kirchhoff index, bounds, scaling tables        |
//! | [`dynamics`] | noiseless, delayed and noisy consensus simulators          |
//! | [`cli`]      | command-line front end                                     |

pub mod cli;
pub mod coherence;
pub mod dynamics;
pub mod eigen;
mod error;
mod flow;
pub mod graph;
pub mod hsw;
pub mod numeric;
pub mod spectral;

pub use error::{Error, Result};
