use thiserror::Error;

use crate::expr::ExprError;
use crate::geometry::Point3;
use crate::jet::JetError;

pub type Result<T> = std::result::Result<T, EngineError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("point {0} is outside the chart domain")]
    OutOfDomain(Point3),
    #[error("metric is singular (or numerically singular) at the evaluation point")]
    SingularMetric,
    #[error("frame is not orthonormal: Gram deviation {0:e}")]
    FrameNotOrthonormal(f64),
    #[error("map differential is rank deficient at the evaluation point")]
    RankDeficient,
    #[error("frame brackets violate the expected structure: residual {0:e}")]
    StructureViolation(f64),
    #[error("frame is not adapted: |f3| = {0:e}")]
    NotAdapted(f64),
    #[error("not a Riemannian submersion: horizontal isometry deviation {0:e}")]
    InvalidSubmersion(f64),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}
