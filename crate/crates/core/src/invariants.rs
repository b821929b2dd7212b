//! Modular arithmetic helpers, quadratic-residue machinery, and the
//! closed-form exceptionality predicates for the two candidate families.
//!
//! A candidate of order p^5 is *exceptional* when its minimal faithful
//! permutation degree is strictly smaller than that of its distinguished
//! quotient of order p^4. The predicates here decide exceptionality from
//! the canonical parameters alone; `mindeg` provides the independent
//! permutation-degree computation they are checked against.

use crate::families::{canonical_params, CanonicalLabel, Family, FamilyError, FamilyParams};
use crate::pc::{GroupElement, PcPresentation};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InvariantError {
    #[error("unsupported presentation: {0}")]
    Unsupported(String),
    #[error("psi map undefined: {0}")]
    Undefined(String),
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
}

/// Legendre symbol (a/p) in {-1, 0, 1}, computed by the Euler criterion.
pub fn legendre(a: i64, p: u32) -> i32 {
    let p64 = p as i64;
    let a = a.rem_euclid(p64) as u64;
    if a == 0 {
        return 0;
    }
    let e = pow_mod(a, (p as u64 - 1) / 2, p as u64);
    if e == 1 {
        1
    } else {
        -1
    }
}

/// `b^e mod m`
pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

/// Multiplicative inverse of `a` mod prime `p`; a must be a unit.
pub fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0, "inverse of zero mod {p}");
    pow_mod(a as u64, p as u64 - 2, p as u64) as u32
}

/// The least positive quadratic non-residue mod odd p (the fixed `alpha`).
pub fn least_nonresidue(p: u32) -> u32 {
    (2..p).find(|&a| legendre(a as i64, p) == -1).unwrap_or(1)
}

/// A square root of `a` mod odd prime p, if one exists. Primes here are
/// tiny, so a direct scan is fine.
pub fn sqrt_mod(a: u32, p: u32) -> Option<u32> {
    let a = a % p;
    (0..p).find(|&r| (r as u64 * r as u64) % p as u64 == a as u64)
}

/// Exceptionality of a canonical family-Q candidate.
///
/// The exceptional labels are P1, P2, P5, P7, P8(1), and P9(lambda)
/// exactly when 1 + 4*lambda is a non-zero square mod p.
pub fn predicted_exceptional_q(label: &CanonicalLabel, p: u32) -> Result<bool, FamilyError> {
    Ok(match label.index {
        0 | 3 | 4 | 6 => false,
        1 | 2 | 5 | 7 => true,
        8 => label.lambda % p == 1,
        9 => legendre(1 + 4 * label.lambda as i64, p) == 1,
        _ => return Err(FamilyError::InvalidParams("bad Q label".into())),
    })
}

/// Exceptionality of a canonical family-Qzeta candidate.
///
/// With canonical parameters (j, k, m): for j = 0 the group is exceptional
/// iff k != 0 (labels P2, P4); for j = 1 iff k^2 + 4*zeta*m is a non-zero
/// square mod p (always for P5; for P6(lambda)/P7(lambda) this is the
/// defining residue condition on lambda).
pub fn predicted_exceptional_qzeta(
    label: &CanonicalLabel,
    zeta: u32,
    p: u32,
) -> Result<bool, FamilyError> {
    let alpha = least_nonresidue(p);
    Ok(match label.index {
        0 | 1 | 3 => false,
        2 | 4 | 5 => true,
        6 => legendre(label.lambda as i64 * label.lambda as i64 + 4 * zeta as i64, p) == 1,
        7 => {
            legendre(
                label.lambda as i64 * label.lambda as i64 + 4 * zeta as i64 * alpha as i64,
                p,
            ) == 1
        }
        _ => return Err(FamilyError::InvalidParams("bad Qzeta label".into())),
    })
}

/// Number of isomorphism classes of exceptional groups of order p^5.
/// Closed form: 2 for p = 2, 10 for p = 3, p + 6 otherwise.
pub fn expected_exceptional_count(p: u32) -> u32 {
    match p {
        2 => 2,
        3 => 10,
        _ => p + 6,
    }
}

/// Number of exceptional classes arising over Q(p) for p > 3: (p+7)/2.
pub fn expected_q_family_count(p: u32) -> u32 {
    (p + 7) / 2
}

/// Number of exceptional classes arising over a fixed Q_zeta(p) for
/// p > 3: (p+5)/2.
pub fn expected_qzeta_family_count(p: u32) -> u32 {
    (p + 5) / 2
}

/// Exceptionality of arbitrary family parameters, decided by
/// canonicalizing first and applying the per-family closed form.
pub fn predicted_exceptional(fp: &FamilyParams) -> Result<bool, FamilyError> {
    let (label, _, _) = canonical_params(fp)?;
    match fp.family {
        Family::Q => predicted_exceptional_q(&label, fp.prime),
        Family::Qzeta => predicted_exceptional_qzeta(&label, fp.zeta, fp.prime),
    }
}

// ---------------------------------------------------------------------------
// psi maps
// ---------------------------------------------------------------------------

/// The linear self-map of the rank-2 central subgroup V = <u, n> induced by
/// commutation with a witness w: the image of h^p is the commutator of h
/// with w. Changing the witness rescales the matrix, so only the scalar
/// class, trace^2/det, and the Legendre classes of det and of the
/// characteristic discriminant carry isomorphism information.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsiMap {
    /// Matrix mod p; column c is the image of the c-th basis vector.
    pub matrix: [[u32; 2]; 2],
    /// Basis of V, as group elements: (u, n) = (x^p, n).
    pub basis: [GroupElement; 2],
    /// Scalar relating this witness's matrix to the default witness's.
    pub scale_class: u32,
}

impl PsiMap {
    pub fn trace(&self, p: u32) -> u32 {
        (self.matrix[0][0] + self.matrix[1][1]) % p
    }

    pub fn det(&self, p: u32) -> u32 {
        let p = p as u64;
        let pos = self.matrix[0][0] as u64 * self.matrix[1][1] as u64 % p;
        let neg = self.matrix[0][1] as u64 * self.matrix[1][0] as u64 % p;
        ((pos + p - neg) % p) as u32
    }

    /// trace^2 - 4 det mod p (the characteristic discriminant).
    pub fn discriminant(&self, p: u32) -> u32 {
        let t = self.trace(p) as u64;
        let d = self.det(p) as u64;
        let p = p as u64;
        ((t * t % p + 4 * p - 4 * d % (4 * p)) % p) as u32
    }
}

fn mat_vec(p: u64, m: &[[u32; 2]; 2], v: (u32, u32)) -> (u32, u32) {
    let a = (m[0][0] as u64 * v.0 as u64 + m[0][1] as u64 * v.1 as u64) % p;
    let b = (m[1][0] as u64 * v.0 as u64 + m[1][1] as u64 * v.1 as u64) % p;
    (a as u32, b as u32)
}

/// Solve for the 2x2 matrix M with M v_i = c_i over all pairs; requires two
/// independent v_i and consistency on the rest.
fn solve_psi_matrix(p: u32, pairs: &[((u32, u32), (u32, u32))]) -> Option<[[u32; 2]; 2]> {
    let p64 = p as u64;
    let det2 = |a: (u32, u32), b: (u32, u32)| -> u32 {
        ((a.0 as u64 * b.1 as u64 % p64 + p64 - a.1 as u64 * b.0 as u64 % p64) % p64) as u32
    };
    let (i1, i2) = {
        let mut found = None;
        'outer: for a in 0..pairs.len() {
            for b in a + 1..pairs.len() {
                if det2(pairs[a].0, pairs[b].0) != 0 {
                    found = Some((a, b));
                    break 'outer;
                }
            }
        }
        found?
    };
    let (v1, c1) = pairs[i1];
    let (v2, c2) = pairs[i2];
    let d = det2(v1, v2);
    let di = inv_mod(d, p) as u64;
    // M = [c1 c2] * [v1 v2]^{-1}
    let inv = [
        [v2.1 as u64 * di % p64, (p - v1.1) as u64 * di % p64],
        [(p - v2.0) as u64 * di % p64, v1.0 as u64 * di % p64],
    ];
    let cols = [c1, c2];
    let mut m = [[0u32; 2]; 2];
    let col = |i: usize, r: usize| if r == 0 { cols[i].0 } else { cols[i].1 } as u64;
    for r in 0..2 {
        for c in 0..2 {
            m[r][c] = ((col(0, r) * inv[0][c] + col(1, r) * inv[1][c]) % p64) as u32;
        }
    }
    for &(v, cvec) in pairs {
        if mat_vec(p64, &m, v) != cvec {
            return None;
        }
    }
    Some(m)
}

/// Compute the psi matrix for witness `w` on a family candidate, in the
/// basis (u, n) = (generators 3, 4). `q_orientation` selects which way the
/// commutator with the witness is taken (the two families use opposite
/// conventions; the difference is a global scalar -1).
fn candidate_psi_matrix(
    pres: &PcPresentation,
    w: &GroupElement,
    q_orientation: bool,
) -> Result<[[u32; 2]; 2], InvariantError> {
    let p = pres.prime();
    let in_v = |e: &GroupElement| e.exponents[..3].iter().all(|&x| x == 0);
    let mut pairs = Vec::new();
    for i in 0..3 {
        let pr = pres.power_relation(i);
        if pr[..3].iter().any(|&x| x != 0) {
            return Err(InvariantError::Unsupported(
                "generator p-th power lies outside <u, n>".into(),
            ));
        }
        let h = pres.generator(i);
        let c = if q_orientation {
            pres.commutator(&h, w)
        } else {
            pres.commutator(w, &h)
        };
        if !in_v(&c) {
            return Err(InvariantError::InvalidWitness(format!(
                "commutator with generator {i} leaves <u, n>"
            )));
        }
        pairs.push(((pr[3], pr[4]), (c.exponents[3], c.exponents[4])));
    }
    let m = solve_psi_matrix(p, &pairs).ok_or_else(|| {
        InvariantError::Undefined("p-th powers do not span <u, n> consistently".into())
    })?;
    if m == [[0; 2]; 2] {
        return Err(InvariantError::InvalidWitness(
            "witness commutes with all generators".into(),
        ));
    }
    Ok(m)
}

/// The psi map of a family candidate for witness `w`.
///
/// Defined for family-Q candidates with i != 0 and for family-Qzeta
/// candidates with j != 0; the witness must commute into <u, n>. The
/// `scale_class` is the scalar relating `w`'s matrix to the default
/// witness's (z for family Q, y for family Qzeta).
pub fn psi_map(pres: &PcPresentation, w: &GroupElement) -> Result<PsiMap, InvariantError> {
    let labels: Vec<&str> = pres.labels().iter().map(|s| s.as_str()).collect();
    let (q_orientation, default_idx) = match labels.as_slice() {
        ["z", "y", "x", "u", "n"] => (true, 0usize),
        ["z", "x", "y", "u", "n"] => (false, 2usize),
        _ => {
            return Err(InvariantError::Unsupported(
                "not a family candidate presentation".into(),
            ))
        }
    };
    let p = pres.prime();
    let m = candidate_psi_matrix(pres, w, q_orientation)?;
    let m0 = candidate_psi_matrix(pres, &pres.generator(default_idx), q_orientation)?;
    let (r0, c0) = (0..2)
        .flat_map(|r| (0..2).map(move |c| (r, c)))
        .find(|&(r, c)| m0[r][c] != 0)
        .expect("nonzero default matrix");
    let s = (m[r0][c0] as u64 * inv_mod(m0[r0][c0], p) as u64 % p as u64) as u32;
    for r in 0..2 {
        for c in 0..2 {
            if m[r][c] != (s as u64 * m0[r][c] as u64 % p as u64) as u32 {
                return Err(InvariantError::InvalidWitness(
                    "matrix is not a scalar multiple of the default witness's".into(),
                ));
            }
        }
    }
    Ok(PsiMap {
        matrix: m,
        basis: [pres.generator(3), pres.generator(4)],
        scale_class: s,
    })
}

// ---------------------------------------------------------------------------
// fingerprints
// ---------------------------------------------------------------------------

/// Witness- and basis-independent data extracted from a psi matrix (defined
/// up to a nonzero scalar): the Legendre classes of the determinant and of
/// the characteristic discriminant, and trace^2/det when det != 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PsiData {
    pub det_class: i32,
    pub disc_class: i32,
    pub trace_ratio: Option<u32>,
}

/// An exactly-computed isomorphism-invariant profile of a finite p-group
/// given by a consistent pc presentation. Equal fingerprints do not prove
/// isomorphism, but unequal fingerprints certify non-isomorphism.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fingerprint {
    pub order: u64,
    pub exponent: u64,
    /// Abelian invariants of the center, descending prime powers.
    pub center_invariants: Vec<u64>,
    pub derived_order: u64,
    /// (element order, count) histogram of the derived subgroup.
    pub derived_histogram: Vec<(u64, u64)>,
    /// Number of distinct p-th powers g^p.
    pub power_image_size: u64,
    /// Abelian invariants of every abelian subgroup of index p, sorted.
    pub abelian_maximal: Vec<Vec<u64>>,
    /// Scalar-class invariants of the psi map, when it is defined.
    pub psi: Option<PsiData>,
}

/// Abelian invariants (descending prime powers) of an abelian p-group given
/// the multiset of its element orders.
fn abelian_invariants_from_orders(p: u64, orders: &[u64]) -> Vec<u64> {
    let total = orders.len() as u64;
    // c[k] = number of elements of order dividing p^k
    let mut c = vec![0u64; 1];
    let mut k = 0usize;
    loop {
        let pk = p.pow(k as u32);
        let count = orders.iter().filter(|&&o| o <= pk).count() as u64;
        if k == 0 {
            c[0] = count;
        } else {
            c.push(count);
        }
        if count == total {
            break;
        }
        k += 1;
    }
    // m[k] = number of cyclic factors of exponent >= p^k
    let mut m = Vec::new();
    for k in 1..c.len() {
        let ratio = c[k] / c[k - 1];
        let mut e = 0u64;
        let mut r = ratio;
        while r > 1 {
            r /= p;
            e += 1;
        }
        m.push(e);
    }
    let parts = if m.is_empty() { 0 } else { m[0] };
    let mut invs = Vec::new();
    for i in 1..=parts {
        let size = m.iter().filter(|&&mk| mk >= i).count() as u32;
        invs.push(p.pow(size));
    }
    invs.sort_unstable_by(|a, b| b.cmp(a));
    invs
}

/// BFS closure of a generating set under right multiplication.
fn closure_elements(pres: &PcPresentation, gens: &[GroupElement]) -> Vec<GroupElement> {
    let mut seen = HashSet::new();
    let mut out = vec![pres.identity()];
    seen.insert(pres.encode(&pres.identity()));
    let mut frontier = out.clone();
    while let Some(e) = frontier.pop() {
        for g in gens {
            let ng = pres.multiply(&e, g);
            if seen.insert(pres.encode(&ng)) {
                out.push(ng.clone());
                frontier.push(ng);
            }
        }
    }
    out
}

/// Smallest subgroup containing `gens` that is normal in the whole group:
/// close under multiplication, then under conjugation by the pc generators,
/// to a fixpoint.
fn normal_closure_elements(pres: &PcPresentation, gens: &[GroupElement]) -> Vec<GroupElement> {
    let mut gens: Vec<GroupElement> = gens.to_vec();
    loop {
        let elems = closure_elements(pres, &gens);
        let ids: HashSet<u64> = elems.iter().map(|e| pres.encode(e)).collect();
        let mut grew = false;
        for e in &elems {
            for i in 0..pres.ngens() {
                let c = pres.conjugate(e, &pres.generator(i));
                if !ids.contains(&pres.encode(&c)) {
                    gens.push(c);
                    grew = true;
                }
            }
            if grew {
                break;
            }
        }
        if !grew {
            return elems;
        }
    }
}

/// Coordinates in a rank-2 elementary abelian subgroup V.
struct VSpace {
    coords: HashMap<u64, (u32, u32)>,
}

impl VSpace {
    /// Build from the elements of V; `None` unless V is elementary abelian
    /// of order p^2.
    fn build(pres: &PcPresentation, v_elements: &[GroupElement]) -> Option<VSpace> {
        let p = pres.prime();
        if v_elements.len() != (p * p) as usize {
            return None;
        }
        if v_elements
            .iter()
            .any(|e| !pres.pow(e, p as u64).is_identity())
        {
            return None;
        }
        let mut sorted: Vec<&GroupElement> = v_elements.iter().collect();
        sorted.sort_by_key(|e| pres.encode(e));
        let b1 = (*sorted.iter().find(|e| !e.is_identity())?).clone();
        let span1: HashSet<u64> = (0..p).map(|a| pres.encode(&pres.pow(&b1, a as u64))).collect();
        let b2 = (*sorted
            .iter()
            .find(|e| !span1.contains(&pres.encode(e)))?)
        .clone();
        let mut coords = HashMap::new();
        for a in 0..p {
            for b in 0..p {
                let e = pres.multiply(&pres.pow(&b1, a as u64), &pres.pow(&b2, b as u64));
                coords.insert(pres.encode(&e), (a, b));
            }
        }
        if coords.len() != (p * p) as usize {
            return None;
        }
        Some(VSpace { coords })
    }

    fn get(&self, pres: &PcPresentation, e: &GroupElement) -> Option<(u32, u32)> {
        self.coords.get(&pres.encode(e)).copied()
    }
}

/// Intrinsic scalar-class psi invariants: V is the center (required to be
/// elementary abelian of rank 2); the witness is the least element, in
/// encoding order, for which commutation induces a well-defined nonzero
/// linear map of V on p-th powers. Returns `None` when no such map exists.
fn psi_invariants(pres: &PcPresentation, center: &[GroupElement]) -> Option<PsiData> {
    let p = pres.prime();
    if p == 2 {
        return None;
    }
    let vspace = VSpace::build(pres, center)?;
    let n = pres.ngens();
    // source generators: pc generators whose p-th power lies in V
    let mut sources = Vec::new();
    for i in 0..n {
        let gp = GroupElement {
            exponents: pres.power_relation(i).to_vec(),
        };
        if let Some(v) = vspace.get(pres, &gp) {
            sources.push((v, pres.generator(i)));
        }
    }
    {
        // need two independent p-th power vectors
        let p64 = p as u64;
        let independent = sources.iter().any(|&(a, _)| {
            sources
                .iter()
                .any(|&(b, _)| (a.0 as u64 * b.1 as u64) % p64 != (a.1 as u64 * b.0 as u64) % p64)
        });
        if !independent {
            return None;
        }
    }
    // Witness validity only depends on the coset modulo the central V, so
    // when V sits in the last two pc coordinates it suffices to scan
    // representatives with those coordinates zero.
    let tail_v = center
        .iter()
        .all(|e| e.exponents[..n.saturating_sub(2)].iter().all(|&x| x == 0));
    let rep_count = if tail_v {
        (p as u64).pow(n as u32 - 2)
    } else {
        pres.order()
    };
    let rep = |id: u64| -> GroupElement {
        if tail_v {
            pres.decode(id * (p as u64) * (p as u64))
        } else {
            pres.decode(id)
        }
    };
    'witness: for wid in 1..rep_count {
        let w = rep(wid);
        let mut pairs = Vec::with_capacity(sources.len());
        for (v, h) in &sources {
            let c = pres.commutator(&w, h);
            match vspace.get(pres, &c) {
                Some(cv) => pairs.push((*v, cv)),
                None => continue 'witness,
            }
        }
        let m = match solve_psi_matrix(p, &pairs) {
            Some(m) if m != [[0; 2]; 2] => m,
            _ => continue 'witness,
        };
        // full well-definedness check over coset representatives
        for hid in 0..rep_count {
            let h = rep(hid);
            let hp = pres.pow(&h, p as u64);
            if let Some(v) = vspace.get(pres, &hp) {
                let c = pres.commutator(&w, &h);
                match vspace.get(pres, &c) {
                    Some(cv) if mat_vec(p as u64, &m, v) == cv => {}
                    _ => continue 'witness,
                }
            }
        }
        let tr = (m[0][0] + m[1][1]) % p;
        let p64 = p as u64;
        let det = ((m[0][0] as u64 * m[1][1] as u64 % p64 + p64
            - m[0][1] as u64 * m[1][0] as u64 % p64)
            % p64) as u32;
        let disc =
            ((tr as u64 * tr as u64 % p64 + 4 * p64 - 4 * det as u64 % (4 * p64)) % p64) as u32;
        return Some(PsiData {
            det_class: legendre(det as i64, p),
            disc_class: legendre(disc as i64, p),
            trace_ratio: if det == 0 {
                None
            } else {
                Some((tr as u64 * tr as u64 % p64 * inv_mod(det, p) as u64 % p64) as u32)
            },
        });
    }
    None
}

/// Compute the full invariant profile of a consistent presentation.
pub fn fingerprint(pres: &PcPresentation) -> Fingerprint {
    let p = pres.prime() as u64;
    let n = pres.ngens();
    let gens: Vec<GroupElement> = (0..n).map(|i| pres.generator(i)).collect();

    let mut order_hist: BTreeMap<u64, u64> = BTreeMap::new();
    let mut power_image: HashSet<u64> = HashSet::new();
    let mut center: Vec<GroupElement> = Vec::new();
    let mut center_orders: Vec<u64> = Vec::new();
    for e in pres.elements() {
        let ord = pres.element_order(&e);
        *order_hist.entry(ord).or_insert(0) += 1;
        power_image.insert(pres.encode(&pres.pow(&e, p)));
        if gens
            .iter()
            .all(|g| pres.multiply(&e, g) == pres.multiply(g, &e))
        {
            center.push(e);
            center_orders.push(ord);
        }
    }
    let exponent = *order_hist.keys().max().unwrap();
    let center_invariants = abelian_invariants_from_orders(p, &center_orders);

    let mut comms = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let c = pres.commutator(&gens[j], &gens[i]);
            if !c.is_identity() {
                comms.push(c);
            }
        }
    }
    let derived = normal_closure_elements(pres, &comms);
    let mut derived_hist: BTreeMap<u64, u64> = BTreeMap::new();
    for e in &derived {
        *derived_hist.entry(pres.element_order(e)).or_insert(0) += 1;
    }

    let abelian_maximal = abelian_maximal_invariants(pres, &gens);
    let psi = psi_invariants(pres, &center);

    Fingerprint {
        order: pres.order(),
        exponent,
        center_invariants,
        derived_order: derived.len() as u64,
        derived_histogram: derived_hist.into_iter().collect(),
        power_image_size: power_image.len() as u64,
        abelian_maximal,
        psi,
    }
}

/// Abelian invariants of every abelian subgroup of index p, via the
/// hyperplanes of the quotient by the Frattini subgroup.
fn abelian_maximal_invariants(pres: &PcPresentation, gens: &[GroupElement]) -> Vec<Vec<u64>> {
    let p = pres.prime();
    let p64 = p as u64;
    // Frattini subgroup: normal closure of generator p-th powers and
    // pairwise commutators.
    let mut frat_gens = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        frat_gens.push(pres.pow(g, p64));
        for h in gens.iter().skip(i + 1) {
            frat_gens.push(pres.commutator(h, g));
        }
    }
    let frat = normal_closure_elements(pres, &frat_gens);
    let frat_ids: HashSet<u64> = frat.iter().map(|e| pres.encode(e)).collect();
    // lift a basis of the elementary abelian quotient
    let mut lifts: Vec<GroupElement> = Vec::new();
    let mut span: HashSet<u64> = frat_ids.clone();
    for g in gens {
        if !span.contains(&pres.encode(g)) {
            lifts.push(g.clone());
            let mut sub_gens: Vec<GroupElement> = frat_gens.clone();
            sub_gens.extend(lifts.iter().cloned());
            span = closure_elements(pres, &sub_gens)
                .iter()
                .map(|e| pres.encode(e))
                .collect();
        }
    }
    let r = lifts.len();
    debug_assert_eq!(span.len() as u64, pres.order());
    if r == 0 {
        return Vec::new();
    }
    let target = pres.order() / p64;
    let mut results = Vec::new();
    // hyperplane normal vectors, first nonzero coordinate = 1
    let mut normals = Vec::new();
    let mut vec_buf = vec![0u32; r];
    gen_normals(&mut vec_buf, 0, p, &mut normals);
    for a in normals {
        // spanning vectors of the hyperplane a . v = 0
        let pivot = a.iter().position(|&x| x != 0).unwrap();
        let mut sub_gens: Vec<GroupElement> = frat_gens.clone();
        for i in 0..r {
            if i == pivot {
                continue;
            }
            // e_i - a_i * e_pivot
            let mut e = lifts[i].clone();
            if a[i] != 0 {
                let coef = (p - a[i]) % p;
                e = pres.multiply(&e, &pres.pow(&lifts[pivot], coef as u64));
            }
            sub_gens.push(e);
        }
        // abelian iff all generators pairwise commute
        let abelian = (0..sub_gens.len()).all(|i| {
            (i + 1..sub_gens.len()).all(|j| {
                pres.multiply(&sub_gens[i], &sub_gens[j])
                    == pres.multiply(&sub_gens[j], &sub_gens[i])
            })
        });
        if !abelian {
            continue;
        }
        let elems = closure_elements(pres, &sub_gens);
        debug_assert_eq!(elems.len() as u64, target);
        let orders: Vec<u64> = elems.iter().map(|e| pres.element_order(e)).collect();
        results.push(abelian_invariants_from_orders(p64, &orders));
    }
    results.sort();
    results
}

/// Enumerate vectors in F_p^r whose first nonzero coordinate is 1 (one
/// normal per hyperplane).
fn gen_normals(buf: &mut Vec<u32>, idx: usize, p: u32, out: &mut Vec<Vec<u32>>) {
    if idx == buf.len() {
        if buf.iter().any(|&x| x != 0) {
            out.push(buf.clone());
        }
        return;
    }
    let leading_zero = buf[..idx].iter().all(|&x| x == 0);
    let choices: Vec<u32> = if leading_zero {
        let mut v = vec![0];
        v.push(1);
        v
    } else {
        (0..p).collect()
    };
    for c in choices {
        buf[idx] = c;
        gen_normals(buf, idx + 1, p, out);
        buf[idx] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::build_candidate;

    #[test]
    fn legendre_small() {
        // squares mod 7: 1, 2, 4
        assert_eq!(legendre(1, 7), 1);
        assert_eq!(legendre(2, 7), 1);
        assert_eq!(legendre(3, 7), -1);
        assert_eq!(legendre(4, 7), 1);
        assert_eq!(legendre(5, 7), -1);
        assert_eq!(legendre(6, 7), -1);
        assert_eq!(legendre(7, 7), 0);
        assert_eq!(legendre(-1, 5), 1);
        assert_eq!(legendre(-1, 7), -1);
    }

    #[test]
    fn legendre_multiplicative() {
        for p in [3u32, 5, 7, 11, 13] {
            for a in 1..p as i64 {
                for b in 1..p as i64 {
                    assert_eq!(legendre(a * b, p), legendre(a, p) * legendre(b, p));
                }
            }
        }
    }

    #[test]
    fn nonresidue_and_sqrt() {
        assert_eq!(least_nonresidue(5), 2);
        assert_eq!(least_nonresidue(7), 3);
        assert_eq!(least_nonresidue(11), 2);
        assert_eq!(least_nonresidue(13), 2);
        for p in [5u32, 7, 11, 13] {
            for a in 0..p {
                match sqrt_mod(a, p) {
                    Some(r) => assert_eq!((r * r) % p, a),
                    None => assert_eq!(legendre(a as i64, p), -1),
                }
            }
        }
    }

    #[test]
    fn inverse_roundtrip() {
        for p in [3u32, 5, 7, 11] {
            for a in 1..p {
                assert_eq!((a as u64 * inv_mod(a, p) as u64) % p as u64, 1);
            }
        }
    }

    /// Counting the exceptional classes from the predicates alone must
    /// reproduce the closed forms.
    #[test]
    fn family_counts_from_predicates() {
        for p in [5u32, 7, 11, 13, 17] {
            // family Q: enumerate all canonical labels and count exceptional
            let mut q_count = 0;
            let mut seen = std::collections::HashSet::new();
            for i in 0..p {
                for j in 0..p {
                    for k in 0..p {
                        for l in 0..p {
                            let fp = FamilyParams::q(p, i, j, k, l).unwrap();
                            let (label, _, _) = canonical_params(&fp).unwrap();
                            if seen.insert(label) && predicted_exceptional_q(&label, p).unwrap() {
                                q_count += 1;
                            }
                        }
                    }
                }
            }
            assert_eq!(q_count, expected_q_family_count(p), "Q family at p = {p}");

            // family Qzeta at zeta = 1 and zeta = alpha
            for zeta in [1, least_nonresidue(p)] {
                let mut count = 0;
                let mut seen = std::collections::HashSet::new();
                for j in 0..p {
                    for k in 0..p {
                        for m in 0..p {
                            let fp = FamilyParams::qzeta(p, zeta, j, k, m).unwrap();
                            let (label, _, _) = canonical_params(&fp).unwrap();
                            if seen.insert(label)
                                && predicted_exceptional_qzeta(&label, zeta, p).unwrap()
                            {
                                count += 1;
                            }
                        }
                    }
                }
                assert_eq!(
                    count,
                    expected_qzeta_family_count(p),
                    "Qzeta family at p = {p}, zeta = {zeta}"
                );
            }
        }
    }

    #[test]
    fn overall_count_closed_form() {
        assert_eq!(expected_exceptional_count(2), 2);
        assert_eq!(expected_exceptional_count(3), 10);
        assert_eq!(expected_exceptional_count(5), 11);
        assert_eq!(expected_exceptional_count(7), 13);
    }

    #[test]
    fn psi_map_qzeta_example() {
        // zeta = 1, (j, k, m) = (1, 1, 1) at p = 5, witness y:
        // matrix [[0, 1], [1, 1]], det = -1 = 4
        let fp = FamilyParams::qzeta(5, 1, 1, 1, 1).unwrap();
        let pres = build_candidate(&fp).unwrap();
        let y = pres.generator(2);
        let psi = psi_map(&pres, &y).unwrap();
        assert_eq!(psi.matrix, [[0, 1], [1, 1]]);
        assert_eq!(psi.scale_class, 1);
        assert_eq!(psi.det(5), 4);
    }

    #[test]
    fn psi_map_q_characteristic_polynomial() {
        // P9-shaped parameters (1, 0, k, l) with witness z: the
        // characteristic polynomial is X^2 - kX - l, i.e. trace k, det -l.
        for (k, l) in [(1u32, 2u32), (3, 4), (2, 2)] {
            let fp = FamilyParams::q(5, 1, 0, k, l).unwrap();
            let pres = build_candidate(&fp).unwrap();
            let z = pres.generator(0);
            let psi = psi_map(&pres, &z).unwrap();
            assert_eq!(psi.trace(5), k % 5);
            assert_eq!(psi.det(5), (5 - l % 5) % 5);
        }
    }

    #[test]
    fn psi_map_witness_classes() {
        // every valid witness yields a scalar multiple of the default
        // matrix, and the scalar-class data never changes
        let fp = FamilyParams::qzeta(5, 1, 1, 1, 1).unwrap();
        let pres = build_candidate(&fp).unwrap();
        let base = psi_map(&pres, &pres.generator(2)).unwrap();
        let p = 5u32;
        let mut valid = 0;
        for w in pres.elements() {
            let Ok(psi) = psi_map(&pres, &w) else {
                continue;
            };
            valid += 1;
            let s = psi.scale_class as u64;
            for r in 0..2 {
                for c in 0..2 {
                    assert_eq!(
                        psi.matrix[r][c] as u64,
                        s * base.matrix[r][c] as u64 % p as u64
                    );
                }
            }
            assert_eq!(
                legendre(psi.det(p) as i64, p),
                legendre(base.det(p) as i64, p)
            );
            assert_eq!(
                legendre(psi.discriminant(p) as i64, p),
                legendre(base.discriminant(p) as i64, p)
            );
        }
        assert!(valid > 0);
    }

    #[test]
    fn psi_map_undefined_cases() {
        // family Q with i = 0: p-th powers do not span <u, n>
        let fp = FamilyParams::q(5, 0, 0, 1, 1).unwrap();
        let pres = build_candidate(&fp).unwrap();
        assert!(psi_map(&pres, &pres.generator(0)).is_err());
        // family Qzeta with j = 0 likewise
        let fp = FamilyParams::qzeta(5, 1, 0, 1, 0).unwrap();
        let pres = build_candidate(&fp).unwrap();
        assert!(psi_map(&pres, &pres.generator(2)).is_err());
    }

    #[test]
    fn abelian_invariants_helper() {
        // C_9 x C_3: orders (1,3,9) with multiplicities (1,8,18)
        let mut orders = vec![1u64];
        orders.extend(std::iter::repeat(3).take(8));
        orders.extend(std::iter::repeat(9).take(18));
        assert_eq!(abelian_invariants_from_orders(3, &orders), vec![9, 3]);
        // elementary abelian of order 8
        let mut orders = vec![1u64];
        orders.extend(std::iter::repeat(2).take(7));
        assert_eq!(abelian_invariants_from_orders(2, &orders), vec![2, 2, 2]);
    }

    #[test]
    fn fingerprint_separates_p8_labels() {
        // lambda = 1 vs lambda = alpha at p = 5: discriminant classes differ
        let alpha = least_nonresidue(5);
        let f1 = fingerprint(&build_candidate(&FamilyParams::q(5, 1, 0, 0, 1).unwrap()).unwrap());
        let fa =
            fingerprint(&build_candidate(&FamilyParams::q(5, 1, 0, 0, alpha).unwrap()).unwrap());
        assert_ne!(f1, fa);
        assert_eq!(f1.psi.unwrap().disc_class, 1);
        assert_eq!(fa.psi.unwrap().disc_class, -1);
    }

    #[test]
    fn fingerprint_separates_p9_lambdas() {
        // trace^2/det = -1/lambda distinguishes all lambda at p = 5
        let mut seen = std::collections::HashSet::new();
        for lambda in 1..5u32 {
            let f =
                fingerprint(&build_candidate(&FamilyParams::q(5, 1, 0, 1, lambda).unwrap()).unwrap());
            let psi = f.psi.unwrap();
            let expected = (5 - inv_mod(lambda, 5)) % 5;
            assert_eq!(psi.trace_ratio, Some(expected));
            assert!(seen.insert(psi.trace_ratio));
        }
    }

    #[test]
    fn fingerprint_equal_for_isomorphic_pair() {
        // the zeta = 1 and zeta = alpha groups with parameters (0, 1, 0)
        // are isomorphic, so their fingerprints agree
        let alpha = least_nonresidue(5);
        let f1 =
            fingerprint(&build_candidate(&FamilyParams::qzeta(5, 1, 0, 1, 0).unwrap()).unwrap());
        let fa = fingerprint(
            &build_candidate(&FamilyParams::qzeta(5, alpha, 0, 1, 0).unwrap()).unwrap(),
        );
        assert_eq!(f1, fa);
    }

    #[test]
    fn fingerprint_of_abelian_group_differs_from_candidates() {
        use std::collections::HashMap;
        // abelian group C_{25} x C_{125}: trivial derived subgroup
        let mut power = HashMap::new();
        power.insert(0usize, vec![0, 1, 0, 0, 0]); // a^5 = b
        power.insert(2usize, vec![0, 0, 0, 1, 0]); // c^5 = d
        power.insert(3usize, vec![0, 0, 0, 0, 1]); // d^5 = e
        let pres = crate::pc::PcPresentation::new(
            5,
            5,
            vec!["a", "b", "c", "d", "e"]
                .into_iter()
                .map(String::from)
                .collect(),
            power,
            HashMap::new(),
        )
        .unwrap();
        let f = fingerprint(&pres);
        assert_eq!(f.derived_order, 1);
        assert_eq!(f.order, 3125);
        let cand =
            fingerprint(&build_candidate(&FamilyParams::q(5, 1, 0, 1, 1).unwrap()).unwrap());
        assert_ne!(f, cand);
        assert!(cand.derived_order > 1);
    }

    #[test]
    fn fingerprint_matches_known_structure() {
        // Q(5): x is central with x^5 = u, so the center is cyclic of
        // order 25 and the derived subgroup is <u> of order 5
        let pres = crate::families::build_quotient(crate::families::QuotientName::Q, 5).unwrap();
        let f = fingerprint(&pres);
        assert_eq!(f.order, 625);
        assert_eq!(f.center_invariants, vec![25]);
        assert_eq!(f.derived_order, 5);
    }

    #[test]
    fn predicted_exceptional_dispatch() {
        let fp = FamilyParams::q(5, 2, 3, 1, 4).unwrap();
        // canonicalizes to P9(3); 1 + 12 = 13 = 3 mod 5, a non-residue
        assert!(!predicted_exceptional(&fp).unwrap());
        let fp = FamilyParams::q(5, 1, 0, 1, 1).unwrap();
        // P9(1): 1 + 4 = 5 = 0, not a nonzero residue
        assert!(!predicted_exceptional(&fp).unwrap());
        let fp = FamilyParams::q(5, 1, 0, 1, 2).unwrap();
        // P9(2): 1 + 8 = 9 = 4, a residue
        assert!(predicted_exceptional(&fp).unwrap());
        let fp = FamilyParams::qzeta(5, 1, 1, 1, 2).unwrap();
        assert!(predicted_exceptional(&fp).unwrap());
    }
}
