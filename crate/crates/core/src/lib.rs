//! Jet-based tensor calculus for checking quasi-Einstein metrics and their level-set geometry.

pub mod adapted;
pub mod catalog;
pub mod chart;
pub mod conformal;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod jet;
pub mod oracle;
pub mod quasi_einstein;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod tensor;
pub mod warp;

pub use error::{Error, Result};
pub use adapted::{AdaptedChartSpec, LevelSample, SamplePlan};
pub use catalog::{Fixture, FixtureId};
pub use chart::{MetricSpec, PotentialSpec};
pub use curvature::CurvaturePack;
pub use expr::Expression;
pub use jet::Jet3;
pub use report::{CheckReport, Tolerances, Verdict};
pub use tensor::{Tensor, Variance};
pub use warp::WarpSpec;
