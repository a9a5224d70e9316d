//! Resource guards against accidental exponential blowups.

use thiserror::Error;

pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;
/// Maximum number of real unknowns `D²` in an oracle system (`D ≤ 64`).
pub const DEFAULT_OPERATOR_CAP: u64 = 4096;
pub const CAP_ENV_VAR: &str = "QNONLOC_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of tuples a single cube enumeration may touch.
    pub enumeration_cap: u64,
    /// Maximum `D²` for the oracle.
    pub operator_cap: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            operator_cap: DEFAULT_OPERATOR_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid cap specification {spec:?}: {reason}")]
pub struct CapParseError {
    pub spec: String,
    pub reason: String,
}

impl Limits {
    /// Parses either a bare integer (enumeration cap only) or a comma list of
    /// `enum=N` / `dim=M` assignments.
    pub fn parse(spec: &str) -> Result<Self, CapParseError> {
        let fail = |reason: &str| CapParseError {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let positive = |s: &str| -> Result<u64, CapParseError> {
            match s.trim().parse::<u64>() {
                Ok(0) => Err(fail("caps must be positive")),
                Ok(v) => Ok(v),
                Err(_) => Err(fail("expected a positive integer")),
            }
        };
        let mut limits = Limits::default();
        let spec_trim = spec.trim();
        if !spec_trim.contains('=') {
            limits.enumeration_cap = positive(spec_trim)?;
            return Ok(limits);
        }
        for part in spec_trim.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| fail("expected key=value"))?;
            match key.trim() {
                "enum" => limits.enumeration_cap = positive(value)?,
                "dim" => limits.operator_cap = positive(value)?,
                other => return Err(fail(&format!("unknown key {other:?}"))),
            }
        }
        Ok(limits)
    }

    /// Defaults overridden by the environment variable when present.
    pub fn from_env() -> Result<Self, CapParseError> {
        match std::env::var(CAP_ENV_VAR) {
            Ok(spec) => Self::parse(&spec),
            Err(_) => Ok(Self::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(Limits::parse("500").unwrap().enumeration_cap, 500);
        let l = Limits::parse("enum=10, dim=256").unwrap();
        assert_eq!((l.enumeration_cap, l.operator_cap), (10, 256));
        assert_eq!(
            Limits::parse("dim=16").unwrap().enumeration_cap,
            DEFAULT_ENUMERATION_CAP
        );
        assert!(Limits::parse("0").is_err());
        assert!(Limits::parse("size=3").is_err());
        assert!(Limits::parse("abc").is_err());
    }
}
