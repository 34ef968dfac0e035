use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("under-resolved field: {0}")]
    UnderResolved(String),
    #[error("divergent weighted norm: {0}")]
    Divergent(String),
    #[error("evolution unstable at t={t}: norm {norm:e} exceeds guard {guard:e}")]
    Unstable { t: f64, norm: f64, guard: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("shooting did not converge: {0}")]
    Shooting(String),
    #[error("rescaled argument {arg} leaves the box [-{half_width}, {half_width}]")]
    OutOfBox { arg: f64, half_width: f64 },
    #[error("support violation at x={x}, t={t}: |x/R + phi(t)| = {value} < 1")]
    SupportViolation { x: f64, t: f64, value: f64 },
    #[error("operator order {0} exceeds the degree bound")]
    DegreeOverflow(u32),
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
    #[error("time {0} is not a sample of the trajectory")]
    TimeNotSampled(f64),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Precondition(msg()))
    }
}
