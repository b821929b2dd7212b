//! Group-spec strings: the textual names for groups accepted by the CLI.
//!
//! Grammar:
//!
//! ```text
//! spec      := quotient | params | named
//! quotient  := ("Q" | "Q1" | "Qalpha" | "Q81" | "Q16") "@" prime
//! params    := ["params:"] family-params
//! family-params := "Q@" prime ":(" i "," j "," k "," l ")"
//!                | "Qzeta:" zeta "@" prime ":(" j "," k "," m ")"
//! zeta      := number | "alpha"
//! named     := "named:" name "@" prime
//! name      := "G" index ["'"] | "E" index | "E6(" lambda ")"
//!            | "F" index "^(" ("1" | "alpha") ")" ["(" lambda ")"]
//! ```
//!
//! Examples: `Q@5`, `Qzeta:1@7:(1,1,0)`, `named:E5@5`, `params:Q@5:(2,3,1,4)`.
//! A trailing `'` on G4 or G6 selects the second presentation (over the
//! other quotient).

use crate::families::{
    build_candidate, build_g_group_alternate, build_named_group, build_quotient, FamilyError,
    FamilyParams, NamedGroup, QuotientName,
};
use crate::invariants::least_nonresidue;
use crate::pc::PcPresentation;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("unparseable group spec: {0}")]
    Parse(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    Quotient(QuotientName, u32),
    Params(FamilyParams),
    Named {
        name: NamedGroup,
        prime: u32,
        /// Second presentation (G4 over Q1, G6 over Qalpha).
        alternate: bool,
    },
}

impl GroupSpec {
    pub fn prime(&self) -> u32 {
        match self {
            GroupSpec::Quotient(_, p) => *p,
            GroupSpec::Params(fp) => fp.prime,
            GroupSpec::Named { prime, .. } => *prime,
        }
    }

    pub fn build(&self) -> Result<PcPresentation, SpecError> {
        Ok(match self {
            GroupSpec::Quotient(name, p) => build_quotient(*name, *p)?,
            GroupSpec::Params(fp) => build_candidate(fp)?,
            GroupSpec::Named {
                name,
                prime,
                alternate,
            } => {
                if *alternate {
                    match name {
                        NamedGroup::G(i) if *prime == 3 => build_g_group_alternate(*i)?,
                        _ => {
                            return Err(SpecError::Parse(format!(
                                "{name} has no alternate presentation"
                            )))
                        }
                    }
                } else {
                    build_named_group(name, *prime)?
                }
            }
        })
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Quotient(name, p) => write!(f, "{name}@{p}"),
            GroupSpec::Params(fp) => write!(f, "{fp}"),
            GroupSpec::Named {
                name,
                prime,
                alternate,
            } => {
                write!(f, "named:{name}{}@{prime}", if *alternate { "'" } else { "" })
            }
        }
    }
}

fn parse_prime(s: &str) -> Result<u32, SpecError> {
    s.parse::<u32>()
        .map_err(|_| SpecError::Parse(format!("bad prime '{s}'")))
}

fn parse_tuple(s: &str, arity: usize) -> Result<Vec<u32>, SpecError> {
    let inner = s
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| SpecError::Parse(format!("expected a parenthesized tuple, got '{s}'")))?;
    let vals: Result<Vec<u32>, _> = inner.split(',').map(|t| t.trim().parse::<u32>()).collect();
    let vals = vals.map_err(|_| SpecError::Parse(format!("bad tuple '{s}'")))?;
    if vals.len() != arity {
        return Err(SpecError::Parse(format!(
            "expected {arity} entries in '{s}', got {}",
            vals.len()
        )));
    }
    Ok(vals)
}

fn parse_family_params(s: &str) -> Result<FamilyParams, SpecError> {
    if let Some(rest) = s.strip_prefix("Qzeta:") {
        // zeta@p:(j,k,m)
        let (zeta_str, rest) = rest
            .split_once('@')
            .ok_or_else(|| SpecError::Parse(format!("missing '@' in '{s}'")))?;
        let (p_str, tuple) = rest
            .split_once(':')
            .ok_or_else(|| SpecError::Parse(format!("missing parameter tuple in '{s}'")))?;
        let p = parse_prime(p_str)?;
        let zeta = if zeta_str == "alpha" {
            least_nonresidue(p)
        } else {
            zeta_str
                .parse::<u32>()
                .map_err(|_| SpecError::Parse(format!("bad zeta '{zeta_str}'")))?
        };
        let t = parse_tuple(tuple, 3)?;
        Ok(FamilyParams::qzeta(p, zeta, t[0], t[1], t[2])?)
    } else if let Some(rest) = s.strip_prefix("Q@") {
        let (p_str, tuple) = rest
            .split_once(':')
            .ok_or_else(|| SpecError::Parse(format!("missing parameter tuple in '{s}'")))?;
        let p = parse_prime(p_str)?;
        let t = parse_tuple(tuple, 4)?;
        Ok(FamilyParams::q(p, t[0], t[1], t[2], t[3])?)
    } else {
        Err(SpecError::Parse(format!(
            "expected 'Q@p:(...)' or 'Qzeta:z@p:(...)', got '{s}'"
        )))
    }
}

fn parse_named(s: &str) -> Result<GroupSpec, SpecError> {
    let (name_str, p_str) = s
        .rsplit_once('@')
        .ok_or_else(|| SpecError::Parse(format!("missing '@' in named spec '{s}'")))?;
    let prime = parse_prime(p_str)?;
    let (name_str, alternate) = match name_str.strip_suffix('\'') {
        Some(base) => (base, true),
        None => (name_str, false),
    };
    let bad = || SpecError::Parse(format!("unknown group name '{name_str}'"));
    let name = if let Some(rest) = name_str.strip_prefix('G') {
        NamedGroup::G(rest.parse().map_err(|_| bad())?)
    } else if let Some(rest) = name_str.strip_prefix("E6(") {
        let lam = rest.strip_suffix(')').ok_or_else(bad)?;
        NamedGroup::E6(lam.parse().map_err(|_| bad())?)
    } else if let Some(rest) = name_str.strip_prefix('E') {
        NamedGroup::E(rest.parse().map_err(|_| bad())?)
    } else if let Some(rest) = name_str.strip_prefix('F') {
        // F<i>^(1|alpha) or F<i>^(1|alpha)(lambda)
        let (idx_str, rest) = rest.split_once("^(").ok_or_else(bad)?;
        let index: u32 = idx_str.parse().map_err(|_| bad())?;
        let (zeta_str, rest) = rest.split_once(')').ok_or_else(bad)?;
        let zeta_is_alpha = match zeta_str {
            "1" => false,
            "alpha" => true,
            _ => return Err(bad()),
        };
        if rest.is_empty() {
            NamedGroup::F {
                index,
                zeta_is_alpha,
            }
        } else {
            let lam = rest
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(bad)?;
            NamedGroup::FLambda {
                index,
                zeta_is_alpha,
                lambda: lam.parse().map_err(|_| bad())?,
            }
        }
    } else {
        return Err(bad());
    };
    if alternate && !matches!(name, NamedGroup::G(4) | NamedGroup::G(6)) {
        return Err(SpecError::Parse(format!(
            "only G4 and G6 have alternate presentations, not {name}"
        )));
    }
    Ok(GroupSpec::Named {
        name,
        prime,
        alternate,
    })
}

impl FromStr for GroupSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("named:") {
            return parse_named(rest);
        }
        if let Some(rest) = s.strip_prefix("params:") {
            return Ok(GroupSpec::Params(parse_family_params(rest)?));
        }
        // bare family params (contain a tuple)
        if s.contains(":(") || s.starts_with("Qzeta:") {
            return Ok(GroupSpec::Params(parse_family_params(s)?));
        }
        // quotient
        let (name_str, p_str) = s
            .split_once('@')
            .ok_or_else(|| SpecError::Parse(format!("unparseable group spec '{s}'")))?;
        let name = match name_str {
            "Q" => QuotientName::Q,
            "Q1" => QuotientName::Q1,
            "Qalpha" => QuotientName::Qalpha,
            "Q81" => QuotientName::Q81,
            "Q16" => QuotientName::Q16,
            _ => return Err(SpecError::Parse(format!("unknown quotient '{name_str}'"))),
        };
        Ok(GroupSpec::Quotient(name, parse_prime(p_str)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::Family;

    #[test]
    fn parses_documented_examples() {
        let q: GroupSpec = "Q@5".parse().unwrap();
        assert_eq!(q, GroupSpec::Quotient(QuotientName::Q, 5));
        assert_eq!(q.build().unwrap().order(), 625);

        let z: GroupSpec = "Qzeta:1@7:(1,1,0)".parse().unwrap();
        match &z {
            GroupSpec::Params(fp) => {
                assert_eq!(fp.family, Family::Qzeta);
                assert_eq!(fp.zeta, 1);
                assert_eq!(fp.params, vec![1, 1, 0]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(z.build().unwrap().order(), 16807);

        let n: GroupSpec = "named:E5@5".parse().unwrap();
        assert_eq!(n.build().unwrap().order(), 3125);

        let p: GroupSpec = "params:Q@5:(2,3,1,4)".parse().unwrap();
        match &p {
            GroupSpec::Params(fp) => assert_eq!(fp.params, vec![2, 3, 1, 4]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn round_trips() {
        for s in [
            "Q@5",
            "Q1@7",
            "Qalpha@5",
            "Q81@3",
            "Q16@2",
            "Q@5:(2,3,1,4)",
            "Qzeta:2@5:(1,1,0)",
            "named:G4@3",
            "named:G4'@3",
            "named:E6(2)@5",
            "named:F4^(alpha)(1)@7",
            "named:F3^(1)@5",
        ] {
            let spec: GroupSpec = s.parse().unwrap();
            let printed = spec.to_string();
            let reparsed: GroupSpec = printed.parse().unwrap();
            assert_eq!(spec, reparsed, "{s} -> {printed}");
        }
    }

    #[test]
    fn zeta_alpha_keyword() {
        let spec: GroupSpec = "Qzeta:alpha@5:(1,1,0)".parse().unwrap();
        match spec {
            GroupSpec::Params(fp) => assert_eq!(fp.zeta, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn alternate_presentations_build() {
        let a: GroupSpec = "named:G4'@3".parse().unwrap();
        let b: GroupSpec = "named:G6'@3".parse().unwrap();
        assert_eq!(a.build().unwrap().order(), 243);
        assert_eq!(b.build().unwrap().order(), 243);
        assert!("named:G5'@3".parse::<GroupSpec>().is_err());
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "Q", "Q@x", "params:Q@5:(1,2)", "named:H1@5", "Qzeta:1@7"] {
            assert!(s.parse::<GroupSpec>().is_err(), "{s}");
        }
    }
}
