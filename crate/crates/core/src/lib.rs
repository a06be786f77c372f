//! Pseudo-label generation, filtering and loss computation for unsupervised
//! instance segmentation.
//!
//! The pipeline runs in three phases:
//!
//! 1. Coarse masks: patch features are turned into an 8-neighbour affinity
//!    map ([`affinity`]), partitioned by greedy additive edge contraction
//!    ([`multicut`]), classified with the corner rule and rated by inner
//!    versus edge affinity ([`maskfilter`]).
//! 2. Superpixel-guided mask loss ([`superpixel`], [`sgmloss`]): hard
//!    superpixel labels from a coarse mask plus soft labels propagated over a
//!    minimum spanning tree of superpixel colors.
//! 3. Adaptive self-training loss ([`selftrain`]): stability of predictions
//!    across checkpoints down-weights the boundary band of each mask.
//!
//! Every quantity is exchanged through NPY/PPM/JSON files ([`ndio`]) and the
//! [`pipeline`] module sequences stages over run manifests. [`synthetic`]
//! writes small deterministic scenes for trying the pipeline without models.

pub mod affinity;
pub mod error;
pub mod maskfilter;
pub mod multicut;
pub mod ndio;
pub mod pipeline;
pub mod selftrain;
pub mod sgmloss;
pub mod superpixel;
pub mod synthetic;

mod mask;

pub use error::{Error, Result};
pub use mask::{PatchMask, PixelMask};
pub use ndio::HyperParams;
