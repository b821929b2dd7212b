//! Constructors for the order-p^4 quotient groups, the candidate central
//! extensions of order p^5, and the generator-map calculus that reduces
//! extension parameters to canonical form.
//!
//! Candidate extensions come in two families. Family `Q` has parameters
//! `(i, j, k, l)` mod p and presentation
//! `x^(p^2) = 1, y^p = n^i, z^p = n^j, [y,z] = x^p n^k, [x,z] = n^l, [x,y] = 1`
//! with `n` central of order p. Family `Qzeta` (one family per Legendre
//! class of the unit `zeta`) has parameters `(j, k, m)` mod p and presentation
//! `x^(p^2) = y^p = 1, z^p = x^(zeta p) n^j, [x,z] = y, [x,y] = n^-m,
//! [y,z] = x^(zeta p) n^(zeta m + k)`.
//!
//! Internally the presentation generator `x` of order p^2 is split into pc
//! generators `x` and `u = x^p`, so that every relation is supported on
//! strictly later pc generators. Family `Q` uses the pc sequence
//! `(z, y, x, u, n)`; family `Qzeta` and the p = 3 named groups use
//! `(z, x, y, u, n)`.

use crate::invariants::{inv_mod, least_nonresidue, legendre, sqrt_mod};
use crate::pc::{is_prime, PcError, PcPresentation};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum FamilyError {
    #[error("incompatible name/prime: {0}")]
    Incompatible(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("generator map condition violated: {0}")]
    MapCondition(String),
    #[error(transparent)]
    Pc(#[from] PcError),
}

/// The four odd-prime quotient types plus the p = 2 quaternionic quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuotientName {
    Q,
    Q1,
    Qalpha,
    Q81,
    Q16,
}

impl fmt::Display for QuotientName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuotientName::Q => "Q",
            QuotientName::Q1 => "Q1",
            QuotientName::Qalpha => "Qalpha",
            QuotientName::Q81 => "Q81",
            QuotientName::Q16 => "Q16",
        })
    }
}

/// Which candidate family a parameter tuple belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Q,
    Qzeta,
}

/// A parameter tuple identifying a candidate central extension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyParams {
    pub family: Family,
    pub prime: u32,
    /// Unit mod p; only meaningful for family `Qzeta`.
    pub zeta: u32,
    /// `(i, j, k, l)` for family `Q`; `(j, k, m)` for `Qzeta`.
    pub params: Vec<u32>,
}

impl FamilyParams {
    pub fn q(prime: u32, i: u32, j: u32, k: u32, l: u32) -> Result<Self, FamilyError> {
        if !is_prime(prime) || prime == 2 {
            return Err(FamilyError::InvalidParams(format!(
                "family Q requires an odd prime, got {prime}"
            )));
        }
        Ok(FamilyParams {
            family: Family::Q,
            prime,
            zeta: 1,
            params: vec![i % prime, j % prime, k % prime, l % prime],
        })
    }

    pub fn qzeta(prime: u32, zeta: u32, j: u32, k: u32, m: u32) -> Result<Self, FamilyError> {
        if !is_prime(prime) || prime <= 3 {
            return Err(FamilyError::InvalidParams(format!(
                "family Qzeta requires p > 3, got {prime}"
            )));
        }
        if zeta % prime == 0 {
            return Err(FamilyError::InvalidParams("zeta must be a unit".into()));
        }
        Ok(FamilyParams {
            family: Family::Qzeta,
            prime,
            zeta: zeta % prime,
            params: vec![j % prime, k % prime, m % prime],
        })
    }
}

impl fmt::Display for FamilyParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.params.iter().map(|x| x.to_string()).collect();
        match self.family {
            Family::Q => write!(f, "Q@{}:({})", self.prime, ps.join(",")),
            Family::Qzeta => write!(f, "Qzeta:{}@{}:({})", self.zeta, self.prime, ps.join(",")),
        }
    }
}

/// One row of the generator-map tables: a re-presentation of the same group
/// that changes the parameter tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorMap {
    /// `(x, y, z, n^(1/lambda))`; scales every parameter by lambda.
    A(u32),
    /// Family Q: `(x^lambda, y^lambda, z, n)`. Family Qzeta:
    /// `(x^lambda, y^lambda n^(m*C(lambda,2)), x^(zeta(lambda-1)) z, n)`.
    B(u32),
    /// Family Q only: `(x^lambda, y, z^lambda, n)`.
    C(u32),
    /// Family Q only, requires i != 0: `(x, y, y^(-j/i) z, n)`.
    D,
    /// Family Q only, requires l = 0: `(x, z, y^-1, n)`.
    E,
}

impl fmt::Display for GeneratorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorMap::A(l) => write!(f, "A({l})"),
            GeneratorMap::B(l) => write!(f, "B({l})"),
            GeneratorMap::C(l) => write!(f, "C({l})"),
            GeneratorMap::D => write!(f, "D"),
            GeneratorMap::E => write!(f, "E"),
        }
    }
}

/// Canonical label of a candidate extension (one per isomorphism class
/// within its family).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalLabel {
    /// Index of the `P_t` row in the family's parameter table.
    pub index: u32,
    /// The `lambda` argument for parametrised rows (`P8`/`P9` in family Q,
    /// `P6`/`P7` in family Qzeta); 0 otherwise.
    pub lambda: u32,
}

impl fmt::Display for CanonicalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.index)?;
        if self.index >= 8 {
            write!(f, "({})", self.lambda)?;
        }
        Ok(())
    }
}

impl CanonicalLabel {
    fn plain(index: u32) -> Self {
        CanonicalLabel { index, lambda: 0 }
    }

    fn with_lambda(index: u32, lambda: u32) -> Self {
        CanonicalLabel { index, lambda }
    }
}

/// Family-aware display of a canonical label.
pub fn label_display(family: Family, label: &CanonicalLabel) -> String {
    let parametrised = match family {
        Family::Q => label.index >= 8,
        Family::Qzeta => label.index >= 6,
    };
    if parametrised {
        format!("P{}({})", label.index, label.lambda)
    } else {
        format!("P{}", label.index)
    }
}

// ---- quotient constructors ----

/// Presentation of one of the possible distinguished quotients of order p^4
/// (16 for `Q16`).
pub fn build_quotient(name: QuotientName, p: u32) -> Result<PcPresentation, FamilyError> {
    if !is_prime(p) {
        return Err(FamilyError::Incompatible(format!("{p} is not prime")));
    }
    match name {
        QuotientName::Q => {
            if p == 2 {
                return Err(FamilyError::Incompatible("Q needs p odd".into()));
            }
            // pc sequence (z, y, x, u) with u = x^p
            let mut power = HashMap::new();
            power.insert(2usize, vec![0, 0, 0, 1]); // x^p = u
            let mut comm = HashMap::new();
            comm.insert((1usize, 0usize), vec![0, 0, 0, 1]); // [y,z] = x^p
            Ok(PcPresentation::new(
                p,
                4,
                labels(&["z", "y", "x", "u"]),
                power,
                comm,
            )?)
        }
        QuotientName::Q1 | QuotientName::Qalpha => {
            if p == 2 {
                return Err(FamilyError::Incompatible("Q1/Qalpha need p odd".into()));
            }
            let zeta = if name == QuotientName::Q1 {
                1
            } else {
                least_nonresidue(p)
            };
            build_qzeta_quotient(p, zeta)
        }
        QuotientName::Q81 => {
            if p != 3 {
                return Err(FamilyError::Incompatible("Q81 needs p = 3".into()));
            }
            // (z, x, y, u): x^3 = u, [x,z] = y, [y,z] = x^-3 = u^2
            let mut power = HashMap::new();
            power.insert(1usize, vec![0, 0, 0, 1]);
            let mut comm = HashMap::new();
            comm.insert((1usize, 0usize), vec![0, 0, 1, 0]);
            comm.insert((2usize, 0usize), vec![0, 0, 0, 2]);
            Ok(PcPresentation::new(
                3,
                4,
                labels(&["z", "x", "y", "u"]),
                power,
                comm,
            )?)
        }
        QuotientName::Q16 => {
            if p != 2 {
                return Err(FamilyError::Incompatible("Q16 needs p = 2".into()));
            }
            // generalized quaternion of order 16, pc sequence (y, x, v, w)
            // with v = x^2, w = x^4: y^2 = w, x^2 = v, v^2 = w,
            // [x,y] = x^-2 = x^6 = v w, [v,y] = w.
            let mut power = HashMap::new();
            power.insert(0usize, vec![0, 0, 0, 1]);
            power.insert(1usize, vec![0, 0, 1, 0]);
            power.insert(2usize, vec![0, 0, 0, 1]);
            let mut comm = HashMap::new();
            comm.insert((1usize, 0usize), vec![0, 0, 1, 1]);
            comm.insert((2usize, 0usize), vec![0, 0, 0, 1]);
            Ok(PcPresentation::new(
                2,
                4,
                labels(&["y", "x", "v", "w"]),
                power,
                comm,
            )?)
        }
    }
}

/// Q_zeta(p) on the pc sequence (z, x, y, u): `z^p = u^zeta`, `x^p = u`,
/// `[x,z] = y`, `[y,z] = u^zeta`.
fn build_qzeta_quotient(p: u32, zeta: u32) -> Result<PcPresentation, FamilyError> {
    let zeta = zeta % p;
    let mut power = HashMap::new();
    power.insert(0usize, vec![0, 0, 0, zeta]);
    power.insert(1usize, vec![0, 0, 0, 1]);
    let mut comm = HashMap::new();
    comm.insert((1usize, 0usize), vec![0, 0, 1, 0]);
    comm.insert((2usize, 0usize), vec![0, 0, 0, zeta]);
    Ok(PcPresentation::new(
        p,
        4,
        labels(&["z", "x", "y", "u"]),
        power,
        comm,
    )?)
}

// ---- candidate constructors ----

/// Presentation of the candidate central extension determined by `fp`,
/// of order p^5 with `n` central and quotient by `<n>` of the family type.
pub fn build_candidate(fp: &FamilyParams) -> Result<PcPresentation, FamilyError> {
    let p = fp.prime;
    match fp.family {
        Family::Q => {
            let (i, j, k, l) = (fp.params[0], fp.params[1], fp.params[2], fp.params[3]);
            // pc sequence (z, y, x, u, n)
            let mut power = HashMap::new();
            power.insert(0usize, vec![0, 0, 0, 0, j]); // z^p = n^j
            power.insert(1usize, vec![0, 0, 0, 0, i]); // y^p = n^i
            power.insert(2usize, vec![0, 0, 0, 1, 0]); // x^p = u
            let mut comm = HashMap::new();
            comm.insert((1usize, 0usize), vec![0, 0, 0, 1, k]); // [y,z] = u n^k
            comm.insert((2usize, 0usize), vec![0, 0, 0, 0, l]); // [x,z] = n^l
            Ok(PcPresentation::new(
                p,
                5,
                labels(&["z", "y", "x", "u", "n"]),
                power,
                comm,
            )?)
        }
        Family::Qzeta => {
            let zeta = fp.zeta;
            let (j, k, m) = (fp.params[0], fp.params[1], fp.params[2]);
            // pc sequence (z, x, y, u, n)
            let mut power = HashMap::new();
            power.insert(0usize, vec![0, 0, 0, zeta, j]); // z^p = u^zeta n^j
            power.insert(1usize, vec![0, 0, 0, 1, 0]); // x^p = u
            let mut comm = HashMap::new();
            comm.insert((1usize, 0usize), vec![0, 0, 1, 0, 0]); // [x,z] = y
            comm.insert((2usize, 0usize), vec![0, 0, 0, zeta, (zeta * m + k) % p]);
            // [y,x] = [x,y]^-1 = n^m
            if m != 0 {
                comm.insert((2usize, 1usize), vec![0, 0, 0, 0, m]);
            }
            Ok(PcPresentation::new(
                p,
                5,
                labels(&["z", "x", "y", "u", "n"]),
                power,
                comm,
            )?)
        }
    }
}

// ---- generator maps ----

/// Parameter change induced by a generator map (Table rows A-E for family Q,
/// A-B for family Qzeta). The group's isomorphism class is unchanged.
pub fn apply_generator_map(
    fp: &FamilyParams,
    gm: &GeneratorMap,
) -> Result<FamilyParams, FamilyError> {
    let p = fp.prime as u64;
    let mut out = fp.clone();
    match fp.family {
        Family::Q => {
            let (i, j, k, l) = (
                fp.params[0] as u64,
                fp.params[1] as u64,
                fp.params[2] as u64,
                fp.params[3] as u64,
            );
            match *gm {
                GeneratorMap::A(lam) => {
                    let lam = nonzero(lam, p)?;
                    out.params = vec![
                        ((lam * i) % p) as u32,
                        ((lam * j) % p) as u32,
                        ((lam * k) % p) as u32,
                        ((lam * l) % p) as u32,
                    ];
                }
                GeneratorMap::B(lam) => {
                    let lam = nonzero(lam, p)?;
                    out.params = vec![
                        ((lam * i) % p) as u32,
                        j as u32,
                        ((lam * k) % p) as u32,
                        ((lam * l) % p) as u32,
                    ];
                }
                GeneratorMap::C(lam) => {
                    let lam = nonzero(lam, p)?;
                    out.params = vec![
                        i as u32,
                        ((lam * j) % p) as u32,
                        ((lam * k) % p) as u32,
                        ((lam * lam % p * l) % p) as u32,
                    ];
                }
                GeneratorMap::D => {
                    if i == 0 {
                        return Err(FamilyError::MapCondition("map D requires i != 0".into()));
                    }
                    out.params = vec![i as u32, 0, k as u32, l as u32];
                }
                GeneratorMap::E => {
                    if l != 0 {
                        return Err(FamilyError::MapCondition("map E requires l = 0".into()));
                    }
                    out.params = vec![j as u32, ((p - i) % p) as u32, k as u32, 0];
                }
            }
        }
        Family::Qzeta => {
            let (j, k, m) = (
                fp.params[0] as u64,
                fp.params[1] as u64,
                fp.params[2] as u64,
            );
            match *gm {
                GeneratorMap::A(lam) => {
                    let lam = nonzero(lam, p)?;
                    out.params = vec![
                        ((lam * j) % p) as u32,
                        ((lam * k) % p) as u32,
                        ((lam * m) % p) as u32,
                    ];
                }
                GeneratorMap::B(lam) => {
                    let lam = nonzero(lam, p)?;
                    out.params = vec![
                        j as u32,
                        ((lam * k) % p) as u32,
                        ((lam * lam % p * m) % p) as u32,
                    ];
                }
                _ => {
                    return Err(FamilyError::MapCondition(format!(
                        "map {gm} is not defined for family Qzeta"
                    )))
                }
            }
        }
    }
    Ok(out)
}

fn nonzero(lam: u32, p: u64) -> Result<u64, FamilyError> {
    let l = lam as u64 % p;
    if l == 0 {
        Err(FamilyError::MapCondition("lambda must be non-zero".into()))
    } else {
        Ok(l)
    }
}

// ---- canonicalization ----

/// Canonical label of the parameter tuple plus the map sequence that carries
/// the input to the distinguished representative.
///
/// Family Q representatives: P0 (0,0,0,0), P1 (0,0,1,0), P2 (1,0,1,0),
/// P3 (1,0,0,0), P4 (0,0,0,1), P5 (0,0,1,1), P6 (0,1,0,1), P7 (0,1,1,1),
/// P8(lambda) (1,0,0,lambda) with lambda in {1, alpha},
/// P9(lambda) (1,0,1,lambda) with lambda a unit.
///
/// Family Qzeta representatives: P0 (0,0,0), P1 (0,0,1), P2 (0,1,0),
/// P3 (1,0,0), P4 (0,1,1), P5 (1,1,0), P6(lambda) (1,lambda,1),
/// P7(lambda) (1,lambda,alpha) with lambda in [0, (p-1)/2].
pub fn canonical_params(
    fp: &FamilyParams,
) -> Result<(CanonicalLabel, FamilyParams, Vec<GeneratorMap>), FamilyError> {
    let p = fp.prime;
    let mut cur = fp.clone();
    let mut trail: Vec<GeneratorMap> = Vec::new();
    let apply = |cur: &mut FamilyParams,
                     trail: &mut Vec<GeneratorMap>,
                     gm: GeneratorMap|
     -> Result<(), FamilyError> {
        // A(1), B(1), C(1) are the identity map; keep the trail minimal.
        if matches!(gm, GeneratorMap::A(1) | GeneratorMap::B(1) | GeneratorMap::C(1)) {
            return Ok(());
        }
        *cur = apply_generator_map(cur, &gm)?;
        trail.push(gm);
        Ok(())
    };
    let label = match fp.family {
        Family::Q => {
            let alpha = least_nonresidue(p);
            if cur.params[3] == 0 {
                // l = 0: targets P0..P3
                if cur.params[0] == 0 && cur.params[1] != 0 {
                    apply(&mut cur, &mut trail, GeneratorMap::E)?;
                }
                let (i, k) = (cur.params[0], cur.params[2]);
                if i != 0 {
                    if cur.params[1] != 0 {
                        apply(&mut cur, &mut trail, GeneratorMap::D)?;
                    }
                    apply(&mut cur, &mut trail, GeneratorMap::A(inv_mod(i, p)))?;
                    let k2 = cur.params[2];
                    if k2 != 0 {
                        apply(&mut cur, &mut trail, GeneratorMap::C(inv_mod(k2, p)))?;
                        CanonicalLabel::plain(2)
                    } else {
                        CanonicalLabel::plain(3)
                    }
                } else if k != 0 {
                    apply(&mut cur, &mut trail, GeneratorMap::A(inv_mod(k, p)))?;
                    CanonicalLabel::plain(1)
                } else {
                    CanonicalLabel::plain(0)
                }
            } else if cur.params[0] == 0 {
                // l != 0, i = 0: targets P4..P7
                let l = cur.params[3];
                if l != 1 {
                    apply(&mut cur, &mut trail, GeneratorMap::A(inv_mod(l, p)))?;
                }
                // helper transforms preserving (i, l) = (0, 1):
                // T(lam) = A(lam^-2) . C(lam): (j, k) -> (j/lam, k/lam)
                // S(lam) = A(lam^-1) . B(lam): (j, k) -> (j/lam, k)
                let k = cur.params[2];
                if k != 0 && k != 1 {
                    apply(&mut cur, &mut trail, GeneratorMap::C(k))?;
                    let ksq = (k as u64 * k as u64 % p as u64) as u32;
                    apply(&mut cur, &mut trail, GeneratorMap::A(inv_mod(ksq, p)))?;
                }
                let j = cur.params[1];
                if j != 0 && j != 1 {
                    apply(&mut cur, &mut trail, GeneratorMap::B(j))?;
                    apply(&mut cur, &mut trail, GeneratorMap::A(inv_mod(j, p)))?;
                }
                match (cur.params[1], cur.params[2]) {
                    (0, 0) => CanonicalLabel::plain(4),
                    (0, 1) => CanonicalLabel::plain(5),
                    (1, 0) => CanonicalLabel::plain(6),
                    (1, 1) => CanonicalLabel::plain(7),
                    other => {
                        return Err(FamilyError::InvalidParams(format!(
                            "canonicalization reached unexpected tuple {other:?}"
                        )))
                    }
                }
            } else {
                // l != 0, i != 0: targets P8(lambda) / P9(lambda)
                let (i, k, l) = (cur.params[0], cur.params[2], cur.params[3]);
                if k == 0 {
                    // lambda^2 in {i/l, alpha i/l}; exactly one class is square
                    let il = mul_inv(i, l, p);
                    let target = if legendre(il as i64, p) == 1 {
                        il
                    } else {
                        (alpha as u64 * il as u64 % p as u64) as u32
                    };
                    let lam = sqrt_mod(target, p).expect("square by construction");
                    apply(&mut cur, &mut trail, GeneratorMap::C(lam))?;
                    apply(&mut cur, &mut trail, GeneratorMap::A(inv_mod(i, p)))?;
                    if cur.params[1] != 0 {
                        apply(&mut cur, &mut trail, GeneratorMap::D)?;
                    }
                    CanonicalLabel::with_lambda(8, cur.params[3])
                } else {
                    apply(&mut cur, &mut trail, GeneratorMap::C(mul_inv(i, k, p)))?;
                    apply(&mut cur, &mut trail, GeneratorMap::A(inv_mod(i, p)))?;
                    if cur.params[1] != 0 {
                        apply(&mut cur, &mut trail, GeneratorMap::D)?;
                    }
                    CanonicalLabel::with_lambda(9, cur.params[3])
                }
            }
        }
        Family::Qzeta => {
            let alpha = least_nonresidue(p);
            let (j, k, m) = (cur.params[0], cur.params[1], cur.params[2]);
            if j != 0 {
                if j != 1 {
                    apply(&mut cur, &mut trail, GeneratorMap::A(inv_mod(j, p)))?;
                }
                let (k, m) = (cur.params[1], cur.params[2]);
                if m == 0 {
                    if k == 0 {
                        CanonicalLabel::plain(3)
                    } else {
                        apply(&mut cur, &mut trail, GeneratorMap::B(inv_mod(k, p)))?;
                        CanonicalLabel::plain(5)
                    }
                } else {
                    // scale m to 1 or alpha via B, then fold k with B(-1)
                    let target = if legendre(m as i64, p) == 1 { 1 } else { alpha };
                    let s = sqrt_mod(mul_inv(target, m, p), p).expect("same Legendre class");
                    if s != 1 {
                        apply(&mut cur, &mut trail, GeneratorMap::B(s))?;
                    }
                    if cur.params[1] > (p - 1) / 2 {
                        apply(&mut cur, &mut trail, GeneratorMap::B(p - 1))?;
                    }
                    let idx = if target == 1 { 6 } else { 7 };
                    CanonicalLabel::with_lambda(idx, cur.params[1])
                }
            } else if k == 0 {
                if m == 0 {
                    CanonicalLabel::plain(0)
                } else {
                    apply(&mut cur, &mut trail, GeneratorMap::A(inv_mod(m, p)))?;
                    CanonicalLabel::plain(1)
                }
            } else if m == 0 {
                apply(&mut cur, &mut trail, GeneratorMap::A(inv_mod(k, p)))?;
                CanonicalLabel::plain(2)
            } else {
                // (0, k, m) with k, m != 0 reduces to P4 = (0, 1, 1):
                // B(k/m) then A(m^2/k^2 * 1/m) lands on (0, 1, 1)
                let lam = mul_inv(k, m, p);
                apply(&mut cur, &mut trail, GeneratorMap::B(lam))?;
                let k2 = cur.params[1];
                apply(&mut cur, &mut trail, GeneratorMap::A(inv_mod(k2, p)))?;
                debug_assert_eq!(cur.params, vec![0, 1, 1]);
                CanonicalLabel::plain(4)
            }
        }
    };
    Ok((label, cur, trail))
}

/// `a / b mod p`
fn mul_inv(a: u32, b: u32, p: u32) -> u32 {
    (a as u64 * inv_mod(b, p) as u64 % p as u64) as u32
}

/// The canonical parameter tuple for a label within a family.
pub fn label_params(
    family: Family,
    prime: u32,
    zeta: u32,
    label: &CanonicalLabel,
) -> Result<FamilyParams, FamilyError> {
    match family {
        Family::Q => {
            let t = match label.index {
                0 => (0, 0, 0, 0),
                1 => (0, 0, 1, 0),
                2 => (1, 0, 1, 0),
                3 => (1, 0, 0, 0),
                4 => (0, 0, 0, 1),
                5 => (0, 0, 1, 1),
                6 => (0, 1, 0, 1),
                7 => (0, 1, 1, 1),
                8 => (1, 0, 0, label.lambda),
                9 => (1, 0, 1, label.lambda),
                _ => return Err(FamilyError::InvalidParams("bad label".into())),
            };
            FamilyParams::q(prime, t.0, t.1, t.2, t.3)
        }
        Family::Qzeta => {
            let alpha = least_nonresidue(prime);
            let t = match label.index {
                0 => (0, 0, 0),
                1 => (0, 0, 1),
                2 => (0, 1, 0),
                3 => (1, 0, 0),
                4 => (0, 1, 1),
                5 => (1, 1, 0),
                6 => (1, label.lambda, 1),
                7 => (1, label.lambda, alpha),
                _ => return Err(FamilyError::InvalidParams("bad label".into())),
            };
            FamilyParams::qzeta(prime, zeta, t.0, t.1, t.2)
        }
    }
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

// ---- named groups (Table 1) ----

/// A named exceptional group from the classification table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NamedGroup {
    /// G1, G2 over Q16 (p = 2).
    G(u32),
    /// E1..E5 over Q(p); E6 carries lambda.
    E(u32),
    E6(u32),
    /// F1..F3 over Q_zeta; zeta is 1 or the fixed non-residue alpha.
    F { index: u32, zeta_is_alpha: bool },
    /// F4(lambda), F5(lambda).
    FLambda {
        index: u32,
        zeta_is_alpha: bool,
        lambda: u32,
    },
}

impl fmt::Display for NamedGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedGroup::G(i) => write!(f, "G{i}"),
            NamedGroup::E(i) => write!(f, "E{i}"),
            NamedGroup::E6(l) => write!(f, "E6({l})"),
            NamedGroup::F { index, zeta_is_alpha } => {
                write!(f, "F{index}^({})", if *zeta_is_alpha { "alpha" } else { "1" })
            }
            NamedGroup::FLambda {
                index,
                zeta_is_alpha,
                lambda,
            } => write!(
                f,
                "F{index}^({})({lambda})",
                if *zeta_is_alpha { "alpha" } else { "1" }
            ),
        }
    }
}

/// Builds the presentation of a named group from the classification table.
///
/// E and F names are bound to their canonical family parameters; the G
/// names (p = 2 and p = 3) are built from their explicit presentations.
pub fn build_named_group(name: &NamedGroup, p: u32) -> Result<PcPresentation, FamilyError> {
    match name {
        NamedGroup::E(i) => {
            if p == 2 {
                return Err(FamilyError::Incompatible("E names need p odd".into()));
            }
            let fp = match i {
                1 => FamilyParams::q(p, 0, 0, 1, 0)?,
                2 => FamilyParams::q(p, 1, 0, 1, 0)?,
                3 => FamilyParams::q(p, 0, 0, 1, 1)?,
                4 => FamilyParams::q(p, 0, 1, 1, 1)?,
                5 => FamilyParams::q(p, 1, 0, 0, 1)?,
                _ => return Err(FamilyError::Incompatible(format!("no group E{i}"))),
            };
            build_candidate(&fp)
        }
        NamedGroup::E6(lam) => {
            if p == 2 {
                return Err(FamilyError::Incompatible("E names need p odd".into()));
            }
            let lam = lam % p;
            if lam == 0 || legendre((1 + 4 * lam as i64) % p as i64, p) != 1 {
                return Err(FamilyError::Incompatible(format!(
                    "E6({lam}) requires lambda != 0 and 1+4*lambda a non-zero residue mod {p}"
                )));
            }
            build_candidate(&FamilyParams::q(p, 1, 0, 1, lam)?)
        }
        NamedGroup::F { index, zeta_is_alpha } => {
            let zeta = if *zeta_is_alpha { least_nonresidue(p) } else { 1 };
            let fp = match index {
                1 => FamilyParams::qzeta(p, zeta, 0, 1, 0)?,
                2 => FamilyParams::qzeta(p, zeta, 0, 1, 1)?,
                3 => FamilyParams::qzeta(p, zeta, 1, 1, 0)?,
                _ => return Err(FamilyError::Incompatible(format!("no plain group F{index}"))),
            };
            build_candidate(&fp)
        }
        NamedGroup::FLambda {
            index,
            zeta_is_alpha,
            lambda,
        } => {
            let zeta = if *zeta_is_alpha { least_nonresidue(p) } else { 1 };
            let alpha = least_nonresidue(p);
            let lam = lambda % p;
            if lam > (p - 1) / 2 {
                return Err(FamilyError::Incompatible(
                    "lambda must lie in [0, (p-1)/2]".into(),
                ));
            }
            // F4 has m = 1, discriminant lambda^2 + 4 zeta;
            // F5 has m = alpha, discriminant lambda^2 + 4 zeta alpha.
            let (m, disc) = match index {
                4 => (1u32, (lam as u64 * lam as u64 + 4 * zeta as u64) % p as u64),
                5 => (
                    alpha,
                    (lam as u64 * lam as u64 + 4 * zeta as u64 * alpha as u64) % p as u64,
                ),
                _ => {
                    return Err(FamilyError::Incompatible(format!(
                        "no parametrised group F{index}"
                    )))
                }
            };
            if legendre(disc as i64, p) != 1 {
                return Err(FamilyError::Incompatible(format!(
                    "F{index}({lam}) requires its discriminant to be a non-zero residue mod {p}"
                )));
            }
            build_candidate(&FamilyParams::qzeta(p, zeta, 1, lam, m)?)
        }
        NamedGroup::G(i) => build_g_group(*i, p),
    }
}

/// The explicit small-prime presentations: G1, G2 at p = 2 and G3..G7 at
/// p = 3 (the latter on the pc sequence (z, x, y, u, n) with u = x^3).
pub fn build_g_group(i: u32, p: u32) -> Result<PcPresentation, FamilyError> {
    match i {
        1 | 2 => {
            if p != 2 {
                return Err(FamilyError::Incompatible("G1/G2 need p = 2".into()));
            }
            // pc sequence (y, x, v, w, n) with v = x^2, w = x^4
            let mut power = HashMap::new();
            let mut comm = HashMap::new();
            if i == 1 {
                power.insert(0usize, vec![0, 0, 0, 1, 1]); // y^2 = x^4 n
                comm.insert((1usize, 0usize), vec![0, 0, 1, 1, 0]); // [x,y] = x^-2
            } else {
                power.insert(0usize, vec![0, 0, 0, 1, 0]); // y^2 = x^4
                comm.insert((1usize, 0usize), vec![0, 0, 1, 1, 1]); // [x,y] = x^-2 n
            }
            power.insert(1usize, vec![0, 0, 1, 0, 0]); // x^2 = v
            power.insert(2usize, vec![0, 0, 0, 1, 0]); // v^2 = w
            comm.insert((2usize, 0usize), vec![0, 0, 0, 1, 0]); // [v,y] = w
            Ok(PcPresentation::new(
                2,
                5,
                labels(&["y", "x", "v", "w", "n"]),
                power,
                comm,
            )?)
        }
        3..=7 => {
            if p != 3 {
                return Err(FamilyError::Incompatible("G3..G7 need p = 3".into()));
            }
            let mut power = HashMap::new();
            let mut comm = HashMap::new();
            power.insert(1usize, vec![0, 0, 0, 1, 0]); // x^3 = u
            comm.insert((1usize, 0usize), vec![0, 0, 1, 0, 0]); // [x,z] = y
            match i {
                3 => {
                    // z^3 = 1, [x,y] = n, [y,z] = x^-3 n = u^2 n
                    comm.insert((2usize, 1usize), vec![0, 0, 0, 0, 2]); // [y,x] = n^-1
                    comm.insert((2usize, 0usize), vec![0, 0, 0, 2, 1]);
                }
                4 => {
                    // presentation over Q81: z^3 = 1, [x,y] = 1, [y,z] = u^2 n
                    comm.insert((2usize, 0usize), vec![0, 0, 0, 2, 1]);
                }
                5 => {
                    // over Q1(3): z^3 = x^3 n, [x,y] = n, [y,z] = x^3 n
                    power.insert(0usize, vec![0, 0, 0, 1, 1]);
                    comm.insert((2usize, 1usize), vec![0, 0, 0, 0, 2]); // [y,x] = n^-1
                    comm.insert((2usize, 0usize), vec![0, 0, 0, 1, 1]);
                }
                6 => {
                    // presentation over Q1(3): z^3 = x^3, [x,y] = 1, [y,z] = x^3 n
                    power.insert(0usize, vec![0, 0, 0, 1, 0]);
                    comm.insert((2usize, 0usize), vec![0, 0, 0, 1, 1]);
                }
                7 => {
                    // z^3 = x^6, [x,y] = n, [y,z] = x^6
                    power.insert(0usize, vec![0, 0, 0, 2, 0]);
                    comm.insert((2usize, 1usize), vec![0, 0, 0, 0, 1]); // [y,x] = n
                    comm.insert((2usize, 0usize), vec![0, 0, 0, 2, 0]);
                }
                _ => unreachable!(),
            }
            Ok(PcPresentation::new(
                3,
                5,
                labels(&["z", "x", "y", "u", "n"]),
                power,
                comm,
            )?)
        }
        _ => Err(FamilyError::Incompatible(format!("no group G{i}"))),
    }
}

/// The second presentation of G4 (over Q1(3)) and of G6 (over Q_alpha(3)).
/// G4 and G6 each possess two non-isomorphic distinguished quotients; these
/// alternate presentations realise the second quotient map.
pub fn build_g_group_alternate(i: u32) -> Result<PcPresentation, FamilyError> {
    let mut power = HashMap::new();
    let mut comm = HashMap::new();
    power.insert(1usize, vec![0, 0, 0, 1, 0]); // x^3 = u
    comm.insert((1usize, 0usize), vec![0, 0, 1, 0, 0]); // [x,z] = y
    match i {
        4 => {
            // over Q1(3): z^3 = x^3 n, [x,y] = 1, [y,z] = x^3 n^2
            power.insert(0usize, vec![0, 0, 0, 1, 1]);
            comm.insert((2usize, 0usize), vec![0, 0, 0, 1, 2]);
        }
        6 => {
            // over Q_alpha(3): z^3 = x^6, [x,y] = 1, [y,z] = x^6 n
            power.insert(0usize, vec![0, 0, 0, 2, 0]);
            comm.insert((2usize, 0usize), vec![0, 0, 0, 2, 1]);
        }
        _ => {
            return Err(FamilyError::Incompatible(
                "only G4 and G6 have alternate presentations".into(),
            ))
        }
    }
    Ok(PcPresentation::new(
        3,
        5,
        labels(&["z", "x", "y", "u", "n"]),
        power,
        comm,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q5_basics() {
        let q = build_quotient(QuotientName::Q, 5).unwrap();
        assert!(q.check_consistency(2000).consistent);
        // x^7 = x^2 u
        let x7 = q.element_from_word(&[("x", 4), ("x", 3)]).unwrap();
        let expect = q.element_from_word(&[("x", 2), ("u", 1)]).unwrap();
        assert_eq!(x7, expect);
        // [y, z] = u
        let y = q.element_from_word(&[("y", 1)]).unwrap();
        let z = q.element_from_word(&[("z", 1)]).unwrap();
        let c = q.commutator(&y, &z);
        assert_eq!(c, q.element_from_word(&[("u", 1)]).unwrap());
        // x has order 25
        let x = q.element_from_word(&[("x", 1)]).unwrap();
        assert_eq!(q.element_order(&x), 25);
    }

    #[test]
    fn q1_generator_orders() {
        let q1 = build_quotient(QuotientName::Q1, 5).unwrap();
        assert!(q1.check_consistency(2000).consistent);
        let z = q1.element_from_word(&[("z", 1)]).unwrap();
        assert_eq!(q1.element_order(&z), 25);
        // [x, z] = y
        let x = q1.element_from_word(&[("x", 1)]).unwrap();
        assert_eq!(
            q1.commutator(&x, &z),
            q1.element_from_word(&[("y", 1)]).unwrap()
        );
    }

    #[test]
    fn q16_is_quaternion_of_order_16() {
        let q = build_quotient(QuotientName::Q16, 2).unwrap();
        assert!(q.check_consistency(2000).consistent);
        let x = q.element_from_word(&[("x", 1)]).unwrap();
        let y = q.element_from_word(&[("y", 1)]).unwrap();
        assert_eq!(q.element_order(&x), 8);
        assert_eq!(q.element_order(&y), 4);
        // y^-1 x y = x^-1
        let conj = q.conjugate(&x, &y);
        assert_eq!(conj, q.inverse(&x));
    }

    #[test]
    fn qzeta_candidate_commutators() {
        // [x, y] = n^-m in a Qzeta candidate with m != 0
        let fp = FamilyParams::qzeta(5, 1, 1, 1, 2).unwrap();
        let g = build_candidate(&fp).unwrap();
        assert!(g.check_consistency(2000).consistent);
        let x = g.element_from_word(&[("x", 1)]).unwrap();
        let y = g.element_from_word(&[("y", 1)]).unwrap();
        let c = g.commutator(&x, &y);
        assert_eq!(c, g.element_from_word(&[("n", -2)]).unwrap());
    }

    #[test]
    fn generator_map_examples() {
        // A(2) on (1,0,1,1) -> (2,0,2,2)
        let fp = FamilyParams::q(5, 1, 0, 1, 1).unwrap();
        let out = apply_generator_map(&fp, &GeneratorMap::A(2)).unwrap();
        assert_eq!(out.params, vec![2, 0, 2, 2]);
        // D on (1,3,1,4) -> (1,0,1,4)
        let fp = FamilyParams::q(5, 1, 3, 1, 4).unwrap();
        let out = apply_generator_map(&fp, &GeneratorMap::D).unwrap();
        assert_eq!(out.params, vec![1, 0, 1, 4]);
        // Qzeta B(2) on (1,1,1) -> (1,2,4)
        let fp = FamilyParams::qzeta(5, 1, 1, 1, 1).unwrap();
        let out = apply_generator_map(&fp, &GeneratorMap::B(2)).unwrap();
        assert_eq!(out.params, vec![1, 2, 4]);
    }

    #[test]
    fn canonicalization_examples() {
        // (0,0,2,0) at p=5 -> P1
        let fp = FamilyParams::q(5, 0, 0, 2, 0).unwrap();
        let (label, rep, _) = canonical_params(&fp).unwrap();
        assert_eq!(label_display(Family::Q, &label), "P1");
        assert_eq!(rep.params, vec![0, 0, 1, 0]);
        // (2,3,1,4) at p=5 -> P9(3)
        let fp = FamilyParams::q(5, 2, 3, 1, 4).unwrap();
        let (label, rep, trail) = canonical_params(&fp).unwrap();
        assert_eq!(label_display(Family::Q, &label), "P9(3)");
        assert_eq!(rep.params, vec![1, 0, 1, 3]);
        // replay the trail
        let mut replay = fp.clone();
        for gm in &trail {
            replay = apply_generator_map(&replay, gm).unwrap();
        }
        assert_eq!(replay, rep);
        // Qzeta zeta=1 (2,3,4) at p=5 -> P7(1) with alpha = 2
        let fp = FamilyParams::qzeta(5, 1, 2, 3, 4).unwrap();
        let (label, rep, _) = canonical_params(&fp).unwrap();
        assert_eq!(label_display(Family::Qzeta, &label), "P7(1)");
        assert_eq!(rep.params, vec![1, 1, 2]);
    }

    #[test]
    fn canonicalization_is_idempotent() {
        let p = 7;
        for i in 0..p {
            for j in 0..p {
                for k in 0..p {
                    for l in 0..p {
                        let fp = FamilyParams::q(p, i, j, k, l).unwrap();
                        let (label, rep, _) = canonical_params(&fp).unwrap();
                        let (label2, rep2, trail2) = canonical_params(&rep).unwrap();
                        assert_eq!(label, label2);
                        assert_eq!(rep, rep2);
                        assert!(trail2.is_empty() || rep == rep2);
                    }
                }
            }
        }
    }
}
