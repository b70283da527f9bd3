//! Super convex spaces, countable affine combinations on the extended reals,
//! finite measurable spaces and the Giry monad, with executable law checks.

pub mod cli;
pub mod giry;
pub mod laws;
pub mod meas;
pub mod numerics;
pub mod report;
pub mod scenario;
pub mod scvx;

pub use giry::{dirac, integrate, mixture, monad_mu, pushforward, GeneralizedPoint, GirySpace, ProbMeasure};
pub use meas::{generate_sigma_algebra, FiniteMeasurableSpace};
pub use numerics::{countable_combine, Budget, Certificate, Combination, Enclosure, ExtReal, PartitionOfOne, Rational};
pub use report::{LawReport, Seeds};
pub use scvx::{AffineMap, SuperConvexSpace};
