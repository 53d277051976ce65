//! Geometric data at the boundary point, loaded from a text fixture.
//!
//! Each line is `key | entry | value`, the value being a rational multiple of
//! `hp = h'(0)` (or `0`). Entries:
//!
//! | entry | meaning |
//! |---|---|
//! | `dn_ginv_tt` | `∂_n g^{ii}`, i < n |
//! | `dt_ginv` | `∂_j g^{ab}`, j < n |
//! | `dn_ginv_nn` | `∂_n g^{nn}` |
//! | `omega_nt` | `ω_{n,i}(e_i)`, i < n, with `ω_{s,t}(X) = ⟨∇_X e_t, e_s⟩` |
//! | `omega_tn` | `ω_{i,n}(e_i)`, i < n |
//! | `gamma_n_tt` | `Γ^n_{ii}`, i < n |
//! | `gamma_t_tn` | `Γ^i_{in}`, i < n |
//! | `contracted_n` | `Γ^n = g^{ij}Γ^n_{ij}` |
//! | `contracted_t` | `Γ^k`, k < n |
//! | `dn_c_t` | κ in `∂_n c(dx_h) = κ h'(0) c(dx_h)`, h < n |

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Rational;

pub const ENTRIES: [(&str, &str); 10] = [
    ("metric-derivative", "dn_ginv_tt"),
    ("metric-derivative", "dt_ginv"),
    ("metric-derivative", "dn_ginv_nn"),
    ("connection", "omega_nt"),
    ("connection", "omega_tn"),
    ("christoffel", "gamma_n_tt"),
    ("christoffel", "gamma_t_tn"),
    ("gamma-contracted", "contracted_n"),
    ("gamma-contracted", "contracted_t"),
    ("clifford-derivative", "dn_c_t"),
];

pub const DEFAULT_FIXTURE: &str = include_str!("../fixtures/boundary_point.txt");

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixtureEntry {
    pub key: String,
    pub entry: String,
    /// coefficient of h'(0)
    pub value: Rational,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fixture {
    pub file: String,
    pub entries: BTreeMap<String, FixtureEntry>,
}

impl Fixture {
    pub fn parse(src: &str, file: &str) -> Result<Fixture> {
        let err = |line: usize, msg: String| Error::Fixture { file: file.to_string(), line, msg };
        let mut entries = BTreeMap::new();
        for (i, raw) in src.lines().enumerate() {
            let line = i + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let parts: Vec<&str> = text.split('|').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(err(line, format!("expected `key | entry | value`, got `{text}`")));
            }
            let (key, entry, value) = (parts[0], parts[1], parts[2]);
            if !ENTRIES.contains(&(key, entry)) {
                return Err(err(line, format!("unknown entry `{key} | {entry}`")));
            }
            let value = parse_hp(value).map_err(|m| err(line, m))?;
            let fe = FixtureEntry { key: key.into(), entry: entry.into(), value, line };
            if entries.insert(entry.to_string(), fe).is_some() {
                return Err(err(line, format!("duplicate entry `{entry}`")));
            }
        }
        for (_, e) in ENTRIES {
            if !entries.contains_key(e) {
                return Err(err(0, format!("missing entry `{e}`")));
            }
        }
        Ok(Fixture { file: file.to_string(), entries })
    }

    pub fn load(path: &Path) -> Result<Fixture> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::Fixture {
            file: path.display().to_string(),
            line: 0,
            msg: e.to_string(),
        })?;
        Fixture::parse(&src, &path.display().to_string())
    }

    pub fn builtin() -> Fixture {
        Fixture::parse(DEFAULT_FIXTURE, "fixtures/boundary_point.txt").expect("shipped fixture parses")
    }

    pub fn get(&self, entry: &str) -> Rational {
        self.entries[entry].value.clone()
    }
}

fn parse_hp(s: &str) -> std::result::Result<Rational, String> {
    let s = s.trim();
    if s == "0" {
        return Ok(Rational::zero());
    }
    let coef = s.strip_suffix("hp").ok_or_else(|| format!("value `{s}` is not a multiple of hp"))?.trim();
    let coef = coef.trim_end_matches(['*', '·']).trim();
    match coef {
        "" | "+" => Ok(Rational::one()),
        "-" => Ok(Rational::from_int(-1)),
        c => c.parse().map_err(|_| format!("bad coefficient `{c}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_values() {
        let f = Fixture::builtin();
        assert_eq!(f.get("contracted_n"), Rational::new(5, 2));
        assert_eq!(f.get("omega_tn"), Rational::new(-1, 2));
        assert_eq!(f.get("dn_ginv_tt"), Rational::one());
        assert!(f.get("dt_ginv").is_zero());
    }

    #[test]
    fn rejects_bad_lines() {
        let bad = DEFAULT_FIXTURE.replace("contracted_n | 5/2 hp", "contracted_n | 5/2");
        match Fixture::parse(&bad, "x") {
            Err(Error::Fixture { line, .. }) => assert!(line > 0),
            other => panic!("{other:?}"),
        }
        let missing = DEFAULT_FIXTURE.replace("clifford-derivative | dn_c_t | 1/2 hp", "");
        assert!(Fixture::parse(&missing, "x").is_err());
    }
}
