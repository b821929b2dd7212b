//! Power-commutator presentations of finite p-groups and exact arithmetic
//! on their normal forms.
//!
//! A presentation lives on a generating sequence `g_1, ..., g_n` where every
//! relative order is the prime `p`, every power `g_i^p` is a normal-form word
//! in generators of index `> i`, and every commutator `[g_j, g_i]` (for
//! `j > i`) is a normal-form word in generators of index `> j`. Words are
//! reduced to normal form by collection from the left; the support condition
//! guarantees termination.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

/// Errors raised while building or manipulating a presentation.
#[derive(Debug, thiserror::Error)]
pub enum PcError {
    #[error("generator index {0} out of range (ngens = {1})")]
    IndexOutOfRange(usize, usize),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("prime {0} is not a prime")]
    NotPrime(u32),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// An element in normal form: one exponent in `[0, p)` per pc generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub exponents: Vec<u32>,
}

impl GroupElement {
    pub fn identity(ngens: usize) -> Self {
        GroupElement {
            exponents: vec![0; ngens],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.exponents.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Outcome of the consistency check on a presentation.
#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    pub consistent: bool,
    /// First failing associativity overlap, as three elements `(a, b, c)`
    /// with `(ab)c != a(bc)`.
    pub failing_overlap: Option<(GroupElement, GroupElement, GroupElement)>,
}

/// A consistent power-commutator presentation of a group of order `p^ngens`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcPresentation {
    prime: u32,
    ngens: usize,
    labels: Vec<String>,
    /// `power[i]` is the exponent vector of `g_i^p`; support on indices `> i`.
    power: Vec<Vec<u32>>,
    /// `comm[(j, i)]` with `j > i` is the exponent vector of `[g_j, g_i]`;
    /// support on indices `> j`. Missing entries are trivial.
    comm: HashMap<(usize, usize), Vec<u32>>,
}

pub(crate) fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl PcPresentation {
    /// Builds a presentation, validating the support invariants.
    ///
    /// `power` maps generator index to the exponent vector of its p-th power;
    /// `comm` maps `(j, i)` with `j > i` to the exponent vector of
    /// `[g_j, g_i]`. Omitted relations are trivial.
    pub fn new(
        prime: u32,
        ngens: usize,
        labels: Vec<String>,
        power: HashMap<usize, Vec<u32>>,
        comm: HashMap<(usize, usize), Vec<u32>>,
    ) -> Result<Self, PcError> {
        if !is_prime(prime) {
            return Err(PcError::NotPrime(prime));
        }
        if labels.len() != ngens {
            return Err(PcError::Structural(format!(
                "{} labels for {} generators",
                labels.len(),
                ngens
            )));
        }
        let mut pw = vec![vec![0u32; ngens]; ngens];
        for (i, v) in power {
            if i >= ngens {
                return Err(PcError::IndexOutOfRange(i, ngens));
            }
            check_support(prime, ngens, &v, i, &format!("power relation g_{i}^p"))?;
            pw[i] = v;
        }
        let mut cm = HashMap::new();
        for ((j, i), v) in comm {
            if j >= ngens {
                return Err(PcError::IndexOutOfRange(j, ngens));
            }
            if j <= i {
                return Err(PcError::Structural(format!(
                    "commutator relation ({j},{i}) must have j > i"
                )));
            }
            check_support(prime, ngens, &v, j, &format!("commutator relation [g_{j},g_{i}]"))?;
            if v.iter().any(|&e| e != 0) {
                cm.insert((j, i), v);
            }
        }
        Ok(PcPresentation {
            prime,
            ngens,
            labels,
            power: pw,
            comm: cm,
        })
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn ngens(&self) -> usize {
        self.ngens
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Group order `p^ngens` (fits in u64 for every supported size).
    pub fn order(&self) -> u64 {
        (self.prime as u64).pow(self.ngens as u32)
    }

    pub fn power_relation(&self, i: usize) -> &[u32] {
        &self.power[i]
    }

    pub fn comm_relation(&self, j: usize, i: usize) -> Option<&Vec<u32>> {
        self.comm.get(&(j, i))
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.ngens)
    }

    /// The pc generator `g_i` as an element.
    pub fn generator(&self, i: usize) -> GroupElement {
        let mut e = GroupElement::identity(self.ngens);
        e.exponents[i] = 1;
        e
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }

    /// Element built from `label^exp` pairs, exponents arbitrary integers.
    pub fn element_from_word(&self, word: &[(&str, i64)]) -> Result<GroupElement, PcError> {
        let mut w = Vec::new();
        for (name, e) in word {
            let i = self
                .label_index(name)
                .ok_or_else(|| PcError::Structural(format!("unknown generator {name}")))?;
            w.push((i, *e));
        }
        self.normalize_word(&w)
    }

    // ---- collection ----

    /// Normal form of `a * b`. Both inputs must be normal forms.
    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let mut word: Vec<(usize, u32)> = Vec::with_capacity(2 * self.ngens);
        for (i, &e) in a.exponents.iter().enumerate() {
            if e > 0 {
                word.push((i, e));
            }
        }
        for (i, &e) in b.exponents.iter().enumerate() {
            if e > 0 {
                word.push((i, e));
            }
        }
        self.collect(word)
    }

    /// Collection from the left: repeatedly fix the leftmost violation until
    /// the word is sorted with exponents in `[0, p)`.
    fn collect(&self, mut word: Vec<(usize, u32)>) -> GroupElement {
        let p = self.prime;
        loop {
            let mut changed = false;
            let mut t = 0;
            while t < word.len() {
                // exponent overflow: g^e = g^(e-p) * w_g
                if word[t].1 >= p {
                    let (g, e) = word[t];
                    let mut repl: Vec<(usize, u32)> = Vec::new();
                    if e > p {
                        repl.push((g, e - p));
                    }
                    for (i, &re) in self.power[g].iter().enumerate() {
                        if re > 0 {
                            repl.push((i, re));
                        }
                    }
                    word.splice(t..=t, repl);
                    changed = true;
                    break;
                }
                if t + 1 < word.len() {
                    let (g1, e1) = word[t];
                    let (g2, e2) = word[t + 1];
                    if g1 == g2 {
                        word[t].1 = e1 + e2;
                        word.remove(t + 1);
                        changed = true;
                        break;
                    }
                    if g1 > g2 {
                        // g1^e1 g2 = g1^(e1-1) g2 g1 [g1, g2]
                        let mut repl: Vec<(usize, u32)> = Vec::new();
                        if e1 > 1 {
                            repl.push((g1, e1 - 1));
                        }
                        repl.push((g2, 1));
                        repl.push((g1, 1));
                        if let Some(c) = self.comm.get(&(g1, g2)) {
                            for (i, &ce) in c.iter().enumerate() {
                                if ce > 0 {
                                    repl.push((i, ce));
                                }
                            }
                        }
                        if e2 > 1 {
                            repl.push((g2, e2 - 1));
                        }
                        word.splice(t..=t + 1, repl);
                        changed = true;
                        break;
                    }
                }
                t += 1;
            }
            if !changed {
                break;
            }
        }
        let mut out = GroupElement::identity(self.ngens);
        for (g, e) in word {
            debug_assert!(out.exponents[g] == 0);
            out.exponents[g] = e;
        }
        out
    }

    /// Normal form of an arbitrary word in the generators; exponents may be
    /// negative.
    pub fn normalize_word(&self, word: &[(usize, i64)]) -> Result<GroupElement, PcError> {
        let mut acc = self.identity();
        for &(i, e) in word {
            if i >= self.ngens {
                return Err(PcError::IndexOutOfRange(i, self.ngens));
            }
            let g = self.generator(i);
            let part = if e >= 0 {
                self.pow(&g, e as u64)
            } else {
                let inv = self.inverse(&g);
                self.pow(&inv, (-e) as u64)
            };
            acc = self.multiply(&acc, &part);
        }
        Ok(acc)
    }

    /// `a^e` by binary powering.
    pub fn pow(&self, a: &GroupElement, mut e: u64) -> GroupElement {
        let mut base = a.clone();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.multiply(&acc, &base);
            }
            base = self.multiply(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inverse(&self, a: &GroupElement) -> GroupElement {
        let ord = self.element_order(a);
        self.pow(a, ord - 1)
    }

    /// Least `k >= 1` with `a^k = 1`; always a power of `p`.
    pub fn element_order(&self, a: &GroupElement) -> u64 {
        let mut ord = 1u64;
        let mut x = a.clone();
        while !x.is_identity() {
            x = self.pow(&x, self.prime as u64);
            ord *= self.prime as u64;
        }
        ord
    }

    /// Normal form of `a^-1 b^-1 a b`.
    pub fn commutator(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let ia = self.inverse(a);
        let ib = self.inverse(b);
        let t = self.multiply(&ia, &ib);
        let t = self.multiply(&t, a);
        self.multiply(&t, b)
    }

    /// Normal form of `g^-1 a g`.
    pub fn conjugate(&self, a: &GroupElement, g: &GroupElement) -> GroupElement {
        let ig = self.inverse(g);
        let t = self.multiply(&ig, a);
        self.multiply(&t, g)
    }

    // ---- element enumeration and ids ----

    /// Mixed-radix id of an element; index 0 is the most significant digit.
    pub fn encode(&self, a: &GroupElement) -> u64 {
        let mut id = 0u64;
        for &e in &a.exponents {
            id = id * self.prime as u64 + e as u64;
        }
        id
    }

    pub fn decode(&self, mut id: u64) -> GroupElement {
        let mut e = vec![0u32; self.ngens];
        for i in (0..self.ngens).rev() {
            e[i] = (id % self.prime as u64) as u32;
            id /= self.prime as u64;
        }
        GroupElement { exponents: e }
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order()).map(|id| self.decode(id))
    }

    // ---- consistency ----

    /// Standard pc overlap checks plus seeded random associativity sampling.
    ///
    /// The deterministic part checks, for all generator indices
    /// `k > j > i`, that `(g_k g_j) g_i = g_k (g_j g_i)`, together with the
    /// power overlaps `(g_j^(p-1) g_j) g_i = g_j^(p-1) (g_j g_i)`,
    /// `(g_j g_i^(p-1)) g_i = g_j (g_i^(p-1) g_i)` and
    /// `(g_i g_i^(p-1)) g_i = g_i (g_i^(p-1) g_i)`.
    pub fn check_consistency(&self, random_triples: u64) -> ConsistencyReport {
        let n = self.ngens;
        let check = |a: &GroupElement, b: &GroupElement, c: &GroupElement| -> bool {
            let ab_c = self.multiply(&self.multiply(a, b), c);
            let a_bc = self.multiply(a, &self.multiply(b, c));
            ab_c == a_bc
        };
        for k in 0..n {
            let gk = self.generator(k);
            let gk_pm1 = self.pow(&gk, (self.prime - 1) as u64);
            // g_k^(p-1) * g_k * g_k
            if !check(&gk_pm1, &gk, &gk) {
                return ConsistencyReport {
                    consistent: false,
                    failing_overlap: Some((gk_pm1, gk.clone(), gk)),
                };
            }
            for j in 0..k {
                let gj = self.generator(j);
                let gj_pm1 = self.pow(&gj, (self.prime - 1) as u64);
                if !check(&gk_pm1, &gk, &gj) {
                    return ConsistencyReport {
                        consistent: false,
                        failing_overlap: Some((gk_pm1.clone(), gk.clone(), gj.clone())),
                    };
                }
                if !check(&gk, &gj_pm1, &gj) {
                    return ConsistencyReport {
                        consistent: false,
                        failing_overlap: Some((gk.clone(), gj_pm1, gj.clone())),
                    };
                }
                for i in 0..j {
                    let gi = self.generator(i);
                    if !check(&gk, &gj, &gi) {
                        return ConsistencyReport {
                            consistent: false,
                            failing_overlap: Some((gk.clone(), gj, gi)),
                        };
                    }
                }
            }
        }
        // belt and braces: seeded random triples of full elements
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9e3779b97f4a7c15);
        let order = self.order();
        for _ in 0..random_triples {
            let a = self.decode(rng.gen_range(0..order));
            let b = self.decode(rng.gen_range(0..order));
            let c = self.decode(rng.gen_range(0..order));
            if !check(&a, &b, &c) {
                return ConsistencyReport {
                    consistent: false,
                    failing_overlap: Some((a, b, c)),
                };
            }
        }
        ConsistencyReport {
            consistent: true,
            failing_overlap: None,
        }
    }
}

fn check_support(
    prime: u32,
    ngens: usize,
    v: &[u32],
    after: usize,
    what: &str,
) -> Result<(), PcError> {
    if v.len() != ngens {
        return Err(PcError::Structural(format!(
            "{what}: exponent vector has length {} (expected {ngens})",
            v.len()
        )));
    }
    for (i, &e) in v.iter().enumerate() {
        if e >= prime {
            return Err(PcError::Structural(format!(
                "{what}: exponent {e} at index {i} not reduced mod {prime}"
            )));
        }
        if e != 0 && i <= after {
            return Err(PcError::Structural(format!(
                "{what}: supported on generator {i}, which is not later than {after}"
            )));
        }
    }
    Ok(())
}

// ---- text format ----

impl PcPresentation {
    /// Line-based text format:
    /// `prime <p>`, `ngens <n>`, `label <i> <name>`,
    /// `pow <i> : <e1> ... <en>`, `comm <j> <i> : <e1> ... <en>`.
    /// Omitted relations are trivial.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("prime {}\n", self.prime));
        out.push_str(&format!("ngens {}\n", self.ngens));
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(&format!("label {i} {l}\n"));
        }
        for i in 0..self.ngens {
            if self.power[i].iter().any(|&e| e != 0) {
                let v: Vec<String> = self.power[i].iter().map(|e| e.to_string()).collect();
                out.push_str(&format!("pow {i} : {}\n", v.join(" ")));
            }
        }
        let mut keys: Vec<_> = self.comm.keys().copied().collect();
        keys.sort();
        for (j, i) in keys {
            let v: Vec<String> = self.comm[&(j, i)].iter().map(|e| e.to_string()).collect();
            out.push_str(&format!("comm {j} {i} : {}\n", v.join(" ")));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, PcError> {
        let mut prime: Option<u32> = None;
        let mut ngens: Option<usize> = None;
        let mut labels: Vec<(usize, String)> = Vec::new();
        let mut power = HashMap::new();
        let mut comm = HashMap::new();
        let parse_vec = |rest: &str, line: usize| -> Result<Vec<u32>, PcError> {
            rest.split_whitespace()
                .map(|t| {
                    t.parse::<u32>().map_err(|_| PcError::Parse {
                        line,
                        msg: format!("bad exponent {t}"),
                    })
                })
                .collect()
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let mut parts = l.splitn(2, char::is_whitespace);
            let kw = parts.next().unwrap();
            let rest = parts.next().unwrap_or("").trim();
            match kw {
                "prime" => {
                    prime = Some(rest.parse().map_err(|_| PcError::Parse {
                        line,
                        msg: "bad prime".into(),
                    })?)
                }
                "ngens" => {
                    ngens = Some(rest.parse().map_err(|_| PcError::Parse {
                        line,
                        msg: "bad ngens".into(),
                    })?)
                }
                "label" => {
                    let mut it = rest.split_whitespace();
                    let i: usize = it
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or(PcError::Parse {
                            line,
                            msg: "bad label index".into(),
                        })?;
                    let name = it.next().ok_or(PcError::Parse {
                        line,
                        msg: "missing label name".into(),
                    })?;
                    labels.push((i, name.to_string()));
                }
                "pow" => {
                    let (idx, vec_part) = rest.split_once(':').ok_or(PcError::Parse {
                        line,
                        msg: "missing ':'".into(),
                    })?;
                    let i: usize = idx.trim().parse().map_err(|_| PcError::Parse {
                        line,
                        msg: "bad generator index".into(),
                    })?;
                    power.insert(i, parse_vec(vec_part, line)?);
                }
                "comm" => {
                    let (idx, vec_part) = rest.split_once(':').ok_or(PcError::Parse {
                        line,
                        msg: "missing ':'".into(),
                    })?;
                    let mut it = idx.split_whitespace();
                    let j: usize = it
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or(PcError::Parse {
                            line,
                            msg: "bad index".into(),
                        })?;
                    let i: usize = it
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or(PcError::Parse {
                            line,
                            msg: "bad index".into(),
                        })?;
                    comm.insert((j, i), parse_vec(vec_part, line)?);
                }
                other => {
                    return Err(PcError::Parse {
                        line,
                        msg: format!("unknown keyword {other}"),
                    })
                }
            }
        }
        let prime = prime.ok_or(PcError::Parse {
            line: 0,
            msg: "missing prime".into(),
        })?;
        let ngens = ngens.ok_or(PcError::Parse {
            line: 0,
            msg: "missing ngens".into(),
        })?;
        let mut label_vec = vec![String::new(); ngens];
        for (i, name) in labels {
            if i >= ngens {
                return Err(PcError::IndexOutOfRange(i, ngens));
            }
            label_vec[i] = name;
        }
        for (i, l) in label_vec.iter_mut().enumerate() {
            if l.is_empty() {
                *l = format!("g{i}");
            }
        }
        PcPresentation::new(prime, ngens, label_vec, power, comm)
    }

    /// Content hash of the canonical text form, used as a cache key.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.to_text().as_bytes());
        hex::encode(&h.finalize()[..16])
    }
}
