//! Flat `key = value` run configuration.
//!
//! Every key is optional; a file lists only what it overrides. `#` starts a
//! comment line. Keys are the long CLI flag names with `_` in place of `-`,
//! so a config file is equivalent to passing those flags ahead of the ones on
//! the command line.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use crate::cca::Ridge;
use crate::data_io::{Delimiter, Orientation};
use crate::error::{AimeError, Result};

trait ConfigValue: Sized {
    fn parse_value(s: &str) -> std::result::Result<Self, String>;
    fn render(&self) -> String;
}

impl ConfigValue for f64 {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("'{s}' is not finite"))
        }
    }
    fn render(&self) -> String {
        format!("{self:?}")
    }
}

macro_rules! display_value {
    ($($t:ty),*) => {$(
        impl ConfigValue for $t {
            fn parse_value(s: &str) -> std::result::Result<Self, String> {
                s.parse::<$t>().map_err(|e| format!("'{s}': {e}"))
            }
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

display_value!(usize, u64, Ridge, Delimiter, Orientation);

impl ConfigValue for PathBuf {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        if s.is_empty() {
            Err("empty path".into())
        } else {
            Ok(PathBuf::from(s))
        }
    }
    fn render(&self) -> String {
        self.to_string_lossy().into_owned()
    }
}

macro_rules! run_config {
    ($($field:ident: $t:ty),* $(,)?) => {
        /// Overrides read from a config file. Unset keys are `None`.
        #[derive(Debug, Clone, Default, PartialEq)]
        pub struct RunConfig {
            $(pub $field: Option<$t>,)*
        }

        /// Recognised keys in canonical (write) order.
        pub const KEYS: &[&str] = &[$(stringify!($field)),*];

        impl RunConfig {
            fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
                match key {
                    $(stringify!($field) => {
                        if self.$field.is_some() {
                            return Err(format!("duplicate key '{key}'"));
                        }
                        self.$field = Some(<$t as ConfigValue>::parse_value(value)?);
                    })*
                    _ => return Err(format!("unknown key '{key}'")),
                }
                Ok(())
            }

            /// `(key, rendered value)` for every key that is set, in canonical order.
            pub fn entries(&self) -> Vec<(&'static str, String)> {
                let mut out = Vec::new();
                $(if let Some(v) = &self.$field {
                    out.push((stringify!($field), v.render()));
                })*
                out
            }
        }
    };
}

run_config! {
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    epochs: usize,
    batch_size: usize,
    seed: u64,
    dim: usize,
    repeats: usize,
    ridge: Ridge,
    fraction: f64,
    delimiter: Delimiter,
    orientation: Orientation,
    x: PathBuf,
    y: PathBuf,
    model: PathBuf,
    labels: PathBuf,
    embedding: PathBuf,
    out: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| AimeError::Parse {
                line: k + 1,
                column: None,
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected 'key = value'".into()))?;
            cfg.set(key.trim(), value.trim()).map_err(err)?;
        }
        Ok(cfg)
    }

    /// Canonical text; `parse` of the result returns an equal config.
    /// Fails for paths that would not survive the trip (surrounding
    /// whitespace, line breaks).
    pub fn write(&self) -> Result<String> {
        let mut s = String::new();
        for (key, value) in self.entries() {
            if value.trim() != value || value.contains(['\n', '\r']) || value.starts_with('#') {
                return Err(AimeError::Validation(format!(
                    "config value for '{key}' cannot be written: {value:?}"
                )));
            }
            let _ = writeln!(s, "{key} = {value}");
        }
        Ok(s)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| AimeError::io(path, e))?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_comments_and_spacing() {
        let cfg = RunConfig::parse("# run\n\nlearning_rate=0.01\n  dim = 4  \nridge = auto\nx = data/x.tsv\n").unwrap();
        assert_eq!(cfg.learning_rate, Some(0.01));
        assert_eq!(cfg.dim, Some(4));
        assert_eq!(cfg.ridge, Some(Ridge::Auto));
        assert_eq!(cfg.x, Some(PathBuf::from("data/x.tsv")));
        assert_eq!(cfg.epochs, None);
        assert_eq!(
            cfg.write().unwrap(),
            "learning_rate = 0.01\ndim = 4\nridge = auto\nx = data/x.tsv\n"
        );
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = RunConfig::parse("dim = 2\nbogus = 1\n").unwrap_err();
        assert!(matches!(e, AimeError::Parse { line: 2, .. }), "{e}");
        assert!(RunConfig::parse("dim 2").is_err());
        assert!(RunConfig::parse("dim = 2\ndim = 3").is_err());
        assert!(RunConfig::parse("dim = -1").is_err());
        assert!(RunConfig::parse("fraction = nan").is_err());
        assert!(RunConfig::parse("x =").is_err());
    }

    #[test]
    fn key_list_matches_struct() {
        let full = RunConfig::parse(
            &KEYS
                .iter()
                .map(|k| {
                    let v = match *k {
                        "ridge" => "0.5",
                        "delimiter" => "comma",
                        "orientation" => "features_in_rows",
                        "x" | "y" | "model" | "labels" | "embedding" | "out" => "p",
                        _ => "1",
                    };
                    format!("{k} = {v}\n")
                })
                .collect::<String>(),
        )
        .unwrap();
        assert_eq!(full.entries().len(), KEYS.len());
    }

    #[test]
    fn unwritable_path_rejected() {
        let cfg = RunConfig {
            out: Some(PathBuf::from(" padded")),
            ..RunConfig::default()
        };
        assert!(cfg.write().is_err());
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), -1e3..1e3f64]
    }

    fn path() -> impl Strategy<Value = PathBuf> {
        "[A-Za-z0-9_./-][A-Za-z0-9_./ =-]{0,20}[A-Za-z0-9_.-]".prop_map(PathBuf::from)
    }

    prop_compose! {
        fn any_config()(
            lr in proptest::option::of(finite()),
            b1 in proptest::option::of(finite()),
            b2 in proptest::option::of(finite()),
            eps in proptest::option::of(finite()),
            epochs in proptest::option::of(any::<usize>()),
            batch in proptest::option::of(any::<usize>()),
            seed in proptest::option::of(any::<u64>()),
            dim in proptest::option::of(0usize..64),
            repeats in proptest::option::of(0usize..100),
            ridge in proptest::option::of(prop_oneof![Just(Ridge::Auto), (0.0..1e6f64).prop_map(Ridge::Fixed)]),
            fraction in proptest::option::of(finite()),
            delim in proptest::option::of(prop_oneof![Just(Delimiter::Tab), Just(Delimiter::Comma)]),
            orient in proptest::option::of(prop_oneof![Just(Orientation::SamplesInRows), Just(Orientation::FeaturesInRows)]),
            paths in proptest::collection::vec(proptest::option::of(path()), 6),
        ) -> RunConfig {
            RunConfig {
                learning_rate: lr, beta1: b1, beta2: b2, epsilon: eps, epochs, batch_size: batch,
                seed, dim, repeats, ridge, fraction, delimiter: delim, orientation: orient,
                x: paths[0].clone(), y: paths[1].clone(), model: paths[2].clone(),
                labels: paths[3].clone(), embedding: paths[4].clone(), out: paths[5].clone(),
            }
        }
    }

    proptest! {
        #[test]
        fn write_parse_round_trip(cfg in any_config()) {
            let text = cfg.write().unwrap();
            let back = RunConfig::parse(&text).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(back.write().unwrap(), text);
        }
    }
}
