use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("code length {0} is not a power of two >= 2")]
    CodeLength(usize),

    #[error("{num_users} users x {codes_per_user} codes exceed the {code_length} available Walsh codes")]
    Capacity {
        num_users: usize,
        codes_per_user: usize,
        code_length: usize,
    },

    #[error("framing error: expected {expected} elements, got {actual}")]
    Framing { expected: usize, actual: usize },

    #[error("code index {index} out of range for {codes} codes")]
    IndexRange { index: usize, codes: usize },

    #[error("user {user} has an all-zero channel vector")]
    DegenerateChannel { user: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
