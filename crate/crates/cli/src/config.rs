//! Flag/config-file layering and error-to-exit-code mapping.

use std::fmt;
use std::path::Path;
use std::process::ExitCode;

use dshi_core::Error;
use serde::de::DeserializeOwned;

/// Declares an options struct whose every field is optional, with an
/// `overlay` that keeps command-line values over config-file values.
macro_rules! layered {
    (
        $(#[$meta:meta])*
        pub struct $name:ident {
            $( $(#[$fmeta:meta])* pub $field:ident : Option<$ty:ty>, )*
        }
    ) => {
        $(#[$meta])*
        pub struct $name {
            $( $(#[$fmeta])* pub $field: Option<$ty>, )*
        }

        impl $name {
            pub fn overlay(self, file: Self) -> Self {
                Self { $( $field: self.$field.or(file.$field), )* }
            }
        }
    };
}
pub(crate) use layered;

#[derive(Debug)]
pub enum Failure {
    /// Bad flag, config value or parameter combination.
    Usage(String),
    /// An estimator or fit could not produce a result.
    Estimation(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Usage(_) => 2,
            Failure::Estimation(_) => 3,
            Failure::Io(_) => 4,
        })
    }

    /// Wraps a library error, naming the flags it concerns.
    pub fn with_flags(err: Error, flags: &[&str]) -> Self {
        let failure = Failure::from(err);
        if flags.is_empty() {
            return failure;
        }
        let names = flags.join(", ");
        match failure {
            Failure::Usage(m) => Failure::Usage(format!("{names}: {m}")),
            other => other,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Estimation(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let msg = err.to_string();
        match err {
            Error::InvalidParameter(_) | Error::Resolution(_) | Error::Domain(_) => Failure::Usage(msg),
            Error::WidthUndefined(_)
            | Error::AmbiguousPeak(_)
            | Error::ExtremaNotFound { .. }
            | Error::NoSolution(_)
            | Error::Initialization(_)
            | Error::InsufficientData(_) => Failure::Estimation(msg),
            Error::Parse { .. } | Error::Schema(_) | Error::Io { .. } | Error::Json(_) => Failure::Io(msg),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Reads a TOML file whose keys are the long flag names.
pub fn load_file<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("--config {}: {e}", path.display())))
}

pub fn positive(flag: &str, value: f64) -> CliResult<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(usage(format!("{flag} must be > 0, got {value}")))
    }
}

pub fn non_negative(flag: &str, value: f64) -> CliResult<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(usage(format!("{flag} must be >= 0, got {value}")))
    }
}
