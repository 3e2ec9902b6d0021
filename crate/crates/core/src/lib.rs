//! Forms over finite alphabets, extension relations between them, and the
//! point-free spaces those relations generate.
//!
//! Everything is finite and exact. A space is never a set of points; it is
//! a handle from which covers and neighbourhoods are computed on demand.

pub mod config;
pub mod constituents;
pub mod forms;
pub mod foundation;
pub mod modal_topology;
pub mod reals;
pub mod relations;
pub mod systems;

use thiserror::Error;

/// Any library error, carrying a stable name for machine consumers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Form(#[from] forms::FormError),
    #[error(transparent)]
    Relation(#[from] relations::RelationError),
    #[error(transparent)]
    Foundation(#[from] foundation::FoundationError),
    #[error(transparent)]
    Real(#[from] reals::RealError),
    #[error(transparent)]
    Constituent(#[from] constituents::ConstituentError),
    #[error(transparent)]
    Modal(#[from] modal_topology::ModalError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Interval(#[from] systems::IntervalError),
    #[error(transparent)]
    Rational(#[from] systems::RationalError),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::Form(e) => e.name(),
            Error::Relation(e) => e.name(),
            Error::Foundation(e) => e.name(),
            Error::Real(e) => e.name(),
            Error::Constituent(e) => e.name(),
            Error::Modal(e) => e.name(),
            Error::Config(e) => e.name(),
            Error::Interval(_) => "IntervalError",
            Error::Rational(_) => "RationalError",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
