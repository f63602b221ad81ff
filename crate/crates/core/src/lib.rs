//! Random potentials, Green's operators and corrector laws for stochastic
//! homogenization experiments.

pub mod asymptotics;
pub mod bessel;
pub mod elliptic1d;
pub mod ensemble;
pub mod error;
pub mod greens;
pub mod helmholtz;
pub mod linalg;
pub mod mesh;
mod quad;
pub mod randfield;
pub mod spectral;

pub use error::{Error, Result};
pub use greens::{apply_green_2d, DiagonalSide, GreenKernel1D, GreenOperator, GreenOperator2D, GreenPartials};
pub use mesh::{Grid2D, Mesh1D};
pub use randfield::{
    CorrelatedTripleSpec, FieldRealization, FieldRealization2D, MaProcessSpec, MarginalDist, TripleComponent,
};
pub use ensemble::{Batch, Ensemble, SampleStats};
pub use helmholtz::{HelmholtzProblem, HelmholtzProblem2D, HelmholtzSolution};
pub use elliptic1d::EllipticProblem1D;
pub use spectral::SpectralProblem;
pub use asymptotics::{CorrelationModel, RadialSetup};
