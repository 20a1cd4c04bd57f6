use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("quadrature did not converge: value {value:e}, error estimate {err_estimate:e} after {n_evals} evaluations")]
    Quadrature {
        value: f64,
        err_estimate: f64,
        n_evals: usize,
    },

    #[error("norming equation has no root in the bracket [{lo}, {hi}]")]
    NormingBracket { lo: f64, hi: f64 },

    #[error("test function violates its declared bound |g(x)| <= c|x|^(beta+gamma) at x = {x:e}")]
    ModulusViolation { x: f64 },

    #[error("operation not available for this law: {0}")]
    Unsupported(&'static str),

    #[error("path too short: need {needed} steps, have {available}")]
    PathTooShort { needed: usize, available: usize },
}

pub(crate) fn check(ok: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
