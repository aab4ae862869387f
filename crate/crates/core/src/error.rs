use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("solver unstable at step {step} (t = {time}): {detail}")]
    Unstable { step: usize, time: f64, detail: String },

    #[error(
        "unstable spectral configuration: effective mechanical stiffness {stiffness:.6} \
         (normal-mode frequency {frequency:.6}i)"
    )]
    UnstableSpectrum { stiffness: f64, frequency: f64 },

    #[error("consistency error: {0}")]
    Consistency(String),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
