//! Identify which linear PDE generated a trajectory by comparing Koopman
//! spectra in a Chebyshev/DCT-II coefficient basis.

pub mod chebyshev;
mod eigen;
mod error;
pub mod experiment;
pub mod expm;
pub mod io;
pub mod koopman;
pub mod linalg;
pub mod linking;
pub mod operators;
pub mod simulate;

pub use chebyshev::{BasisSpec, CoeffVector, LinearOperatorMatrix, NodeVector};
pub use error::{Error, ErrorKind, Result};
pub use experiment::{ConfusionMatrix, ConfusionReport, ExperimentConfig, Metric};
pub use koopman::{KoopmanModes, SnapshotPairs, SpectralDecomposition};
pub use linking::{Identification, LinkScore};
pub use operators::{GeneratorMatrix, KoopmanMatrix, PdeSpec, PdeTerm, PhysicalParams, Provenance};
pub use simulate::{InitialCondition, Trajectory};

pub use faer::{c64, Mat};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/chebyshev.md")]
    struct Chebyshev;
    #[doc = include_str!("../../../book/src/operators.md")]
    struct Operators;
    #[doc = include_str!("../../../book/src/simulate.md")]
    struct Simulate;
    #[doc = include_str!("../../../book/src/koopman.md")]
    struct Koopman;
    #[doc = include_str!("../../../book/src/linking.md")]
    struct Linking;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
    #[doc = include_str!("../../../book/src/limitations.md")]
    struct Limitations;
}
