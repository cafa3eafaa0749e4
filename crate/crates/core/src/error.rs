use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Demand resolution divides by `k` modulo `K`, which needs `gcd(k, K) = 1`.
    #[error("unsupported parameters: k = {cache_subfiles} is not invertible modulo K = {num_users} (gcd must be 1 when kz < K)")]
    UnsupportedParameters {
        num_users: usize,
        cache_subfiles: usize,
    },

    #[error("invalid demands: {0}")]
    InvalidDemands(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("user {user} could not isolate sub-file {subfile} of file {file}")]
    DecodeIncomplete {
        user: usize,
        file: usize,
        subfile: usize,
    },

    #[error("user {user} recovered two different values for part {part} of sub-file {subfile} of file {file}")]
    InconsistentRecovery {
        user: usize,
        file: usize,
        subfile: usize,
        part: usize,
    },

    #[error("domain error: {0}")]
    DomainError(String),
}
