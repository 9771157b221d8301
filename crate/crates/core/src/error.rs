use thiserror::Error;

use crate::bounds::BoundsError;
use crate::gibbs::GibbsError;
use crate::recoding::RecodingError;
use crate::subshift::SubshiftError;
use crate::symbolic::SymbolicError;
use crate::tm::TmError;
use crate::wang::WangError;

/// How an error should be reported by the command line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input or a violated contract (exit code 1).
    Domain,
    /// A configured cap, an iteration limit or a precision budget was hit (exit code 2).
    Resource,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Domain => 1,
            ErrorClass::Resource => 2,
        }
    }
}

/// Crate-wide error, tagged with the module that raised it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("symbolic-core: {0}")]
    Symbolic(#[from] SymbolicError),
    #[error("schedule-bounds: {0}")]
    Bounds(#[from] BoundsError),
    #[error("subshift-x: {0}")]
    Subshift(#[from] SubshiftError),
    #[error("wang-tiling: {0}")]
    Wang(#[from] WangError),
    #[error("tm-tiles: {0}")]
    Tm(#[from] TmError),
    #[error("gibbs: {0}")]
    Gibbs(#[from] GibbsError),
    #[error("recoding: {0}")]
    Recoding(#[from] RecodingError),
    #[error("cli: {0}")]
    Cli(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        let resource = match self {
            Error::Symbolic(e) => e.is_resource(),
            Error::Bounds(e) => e.is_resource(),
            Error::Subshift(e) => e.is_resource(),
            Error::Wang(e) => e.is_resource(),
            Error::Tm(e) => e.is_resource(),
            Error::Gibbs(e) => e.is_resource(),
            Error::Recoding(e) => e.is_resource(),
            Error::Cli(_) | Error::Io(_) => false,
        };
        if resource {
            ErrorClass::Resource
        } else {
            ErrorClass::Domain
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
