//! Isomorphism machinery: a backtracking isomorphism search over dense
//! group tables, structural predicates used to rule quotients out as
//! distinguished, and collection-based verifiers for the explicit
//! cross-family isomorphism constructions.

use crate::families::{build_candidate, FamilyError, FamilyParams};
use crate::invariants::{inv_mod, least_nonresidue};
use crate::pc::{GroupElement, PcError, PcPresentation};
use crate::table::{Bitset, GroupTable, TableError};
use std::collections::{HashMap, HashSet};

#[derive(Debug, thiserror::Error)]
pub enum IsoError {
    #[error("construction failed: {0}")]
    Construction(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Pc(#[from] PcError),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Outcome of the backtracking search. Budget exhaustion is reported
/// distinctly from a definite negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsoResult {
    /// Images of the first presentation's pc generators in the second.
    Iso(Vec<GroupElement>),
    NotIso,
    BudgetExceeded,
}

/// Per-element invariant signature used to prune image candidates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Signature {
    order: u32,
    central: bool,
    in_derived: bool,
    has_p_th_root: bool,
    centralizer: usize,
}

fn signatures(t: &GroupTable) -> Vec<Signature> {
    let order = t.order();
    let center = t.center();
    let derived = t.derived_subgroup();
    let p = t.prime();
    let mut has_root = vec![false; order];
    for x in 0..order {
        has_root[t.pow(x, p)] = true;
    }
    (0..order)
        .map(|x| {
            let centralizer = (0..order).filter(|&g| t.mul(x, g) == t.mul(g, x)).count();
            Signature {
                order: t.element_order(x),
                central: center.contains(x),
                in_derived: derived.contains(x),
                has_p_th_root: has_root[x],
                centralizer,
            }
        })
        .collect()
}

/// Backtracking isomorphism test between two pc presentations of the same
/// dense-table scale. Generators of `a` are assigned images in `b` from
/// the last pc generator upwards, so every relation becomes checkable the
/// moment its highest generator is assigned. The first isomorphism found
/// in canonical candidate order is returned, making the result
/// deterministic (lexicographically least in the assignment order).
pub fn are_isomorphic(
    a: &PcPresentation,
    b: &PcPresentation,
    budget: u64,
) -> Result<IsoResult, IsoError> {
    if a.order() != b.order() || a.prime() != b.prime() {
        return Ok(IsoResult::NotIso);
    }
    let ta = GroupTable::from_presentation(a)?;
    let tb = GroupTable::from_presentation(b)?;
    let sig_a = signatures(&ta);
    let sig_b = signatures(&tb);
    let mut by_sig: HashMap<&Signature, Vec<usize>> = HashMap::new();
    for (x, s) in sig_b.iter().enumerate() {
        by_sig.entry(s).or_default().push(x);
    }
    let n = a.ngens();
    let p = a.prime() as usize;
    let gen_ids_a = ta.generator_ids();

    // candidate image lists per generator, in ascending element order
    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        match by_sig.get(&sig_a[gen_ids_a[i]]) {
            Some(c) => candidates.push(c.clone()),
            None => return Ok(IsoResult::NotIso),
        }
    }

    struct Ctx<'x> {
        a: &'x PcPresentation,
        tb: &'x GroupTable,
        candidates: &'x [Vec<usize>],
        n: usize,
        p: usize,
        nodes: u64,
        budget: u64,
    }

    // image ids indexed by generator, filled from index n-1 downwards
    fn assign(
        ctx: &mut Ctx,
        i: usize,
        images: &mut Vec<usize>,
        generated: &Bitset,
    ) -> Option<Option<Vec<usize>>> {
        // Some(Some(images)) = found; Some(None) = exhausted; None = budget
        if ctx.nodes >= ctx.budget {
            return None;
        }
        ctx.nodes += 1;
        let idx = ctx.n - 1 - i; // generator being assigned
        for &img in &ctx.candidates[idx] {
            if generated.contains(img) {
                continue; // would collapse the subgroup chain
            }
            images[idx] = img;
            // check the power relation of idx and all commutator relations
            // (j, idx) for j > idx: their right-hand sides only involve
            // generators already assigned
            if !relation_holds_for(ctx.a, ctx.tb, images, idx) {
                continue;
            }
            let next_gen = ctx.tb.extend_closure(generated, img);
            if next_gen.count() != generated.count() * ctx.p {
                continue;
            }
            if i + 1 == ctx.n {
                return Some(Some(images.clone()));
            }
            match assign(ctx, i + 1, images, &next_gen) {
                Some(Some(found)) => return Some(Some(found)),
                Some(None) => {}
                None => return None,
            }
        }
        Some(None)
    }

    fn eval_word(tb: &GroupTable, images: &[usize], word: &[u32], from: usize) -> usize {
        // product of images[t]^word[t] for t >= from
        let mut acc = 0usize;
        for (t, &e) in word.iter().enumerate().skip(from) {
            for _ in 0..e {
                acc = tb.mul(acc, images[t]);
            }
        }
        acc
    }

    fn relation_holds_for(
        a: &PcPresentation,
        tb: &GroupTable,
        images: &[usize],
        idx: usize,
    ) -> bool {
        let p = a.prime();
        // g_idx^p = power word (supported on generators > idx)
        let lhs = tb.pow(images[idx], p);
        let rhs = eval_word(tb, images, a.power_relation(idx), idx + 1);
        if lhs != rhs {
            return false;
        }
        for j in idx + 1..a.ngens() {
            let lhs = tb.commutator(images[j], images[idx]);
            let rhs = match a.comm_relation(j, idx) {
                Some(w) => eval_word(tb, images, w, j + 1),
                None => 0,
            };
            if lhs != rhs {
                return false;
            }
        }
        true
    }

    let mut ctx = Ctx {
        a,
        tb: &tb,
        candidates: &candidates,
        n,
        p,
        nodes: 0,
        budget,
    };
    let mut images = vec![0usize; n];
    let mut triv = Bitset::new(tb.order());
    triv.insert(0);
    match assign(&mut ctx, 0, &mut images, &triv) {
        None => Ok(IsoResult::BudgetExceeded),
        Some(None) => Ok(IsoResult::NotIso),
        Some(Some(images)) => {
            let out = images.iter().map(|&x| b.decode(x as u64)).collect();
            Ok(IsoResult::Iso(out))
        }
    }
}

// ---- structural predicates ----

pub fn is_cyclic(t: &GroupTable) -> bool {
    (0..t.order()).any(|x| t.element_order(x) as usize == t.order())
}

pub fn is_elementary_abelian(t: &GroupTable) -> bool {
    let p = t.prime();
    t.center().count() == t.order() && (0..t.order()).all(|x| t.element_order(x) <= p)
}

/// Whether the group has a cyclic subgroup of index p (a maximal cyclic
/// subgroup in the sense of index-p maximality).
pub fn has_maximal_cyclic_subgroup(t: &GroupTable) -> bool {
    let target = t.order() / t.prime() as usize;
    (0..t.order()).any(|x| t.element_order(x) as usize == target || t.element_order(x) as usize == t.order())
}

/// Whether some subgroup of `big` is isomorphic to `small`'s group.
pub fn embeds_in(
    small: &PcPresentation,
    big: &PcPresentation,
    budget: u64,
) -> Result<bool, IsoError> {
    let tb = GroupTable::from_presentation(big)?;
    let target = small.order() as usize;
    if tb.order() % target != 0 {
        return Ok(false);
    }
    if tb.order() == target {
        return Ok(matches!(
            are_isomorphic(small, big, budget)?,
            IsoResult::Iso(_)
        ));
    }
    for sub in crate::subgroup::subgroups_of_order(&tb, target) {
        // present the subgroup concretely, then compare
        let gens: Vec<usize> = sub.element_ids();
        let local: HashMap<usize, usize> = gens.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mul = |a: usize, b: usize| local[&tb.mul(gens[a], gens[b])];
        let q = crate::table::present_abstract_group(big.prime(), gens.len(), &mul)?;
        if matches!(are_isomorphic(small, &q.pres, budget)?, IsoResult::Iso(_)) {
            return Ok(true);
        }
    }
    Ok(false)
}

// ---- collection-based helpers for the explicit constructions ----

fn word(pres: &PcPresentation, parts: &[(&str, i64)]) -> GroupElement {
    pres.element_from_word(parts).expect("labels exist")
}

/// Least element (by id) whose p-th power is `target`, if any.
fn pth_root(pres: &PcPresentation, target: &GroupElement) -> Option<GroupElement> {
    let p = pres.prime() as u64;
    pres.elements().find(|e| pres.pow(e, p) == *target)
}

/// Whether the subgroup generated by the given elements is the whole group
/// (breadth-first closure on normal-form ids).
fn generates(pres: &PcPresentation, gens: &[GroupElement]) -> bool {
    let mut seen: HashSet<u64> = HashSet::new();
    seen.insert(pres.encode(&pres.identity()));
    let mut work = vec![pres.identity()];
    while let Some(e) = work.pop() {
        for g in gens {
            let f = pres.multiply(&e, g);
            if seen.insert(pres.encode(&f)) {
                work.push(f);
            }
        }
    }
    seen.len() as u64 == pres.order()
}

/// The named explicit-isomorphism constructions between extensions of
/// Q_alpha and extensions of Q_1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExplicitCase {
    /// Inside the Q_alpha extension with parameters (0,1,0): new
    /// generators x, y, x^(1-alpha) z, x^((alpha-1)p) n satisfy the
    /// Q_1-extension relations with parameters (0,1,0).
    P2AlphaToQ1,
    /// Inside the Q_alpha extension with parameters (0,1,1): generators
    /// x^a z^b, [x,z], x^c z^d, x^(pb) n^(d-b) (with t^2 - b^2 = 4 alpha
    /// and derived a, c, d) satisfy the Q_1 relations with (0,1,alpha).
    P4AlphaToQ1,
    /// The shared normal form for j = 1: in both the Q_alpha extension
    /// (1,k,m) and the Q_1 extension (1,k,alpha*m), elements s, t, w with
    /// s^(p^2)=t^(p^2)=w^p=1, [s,t]=w, [w,s]=s^(p*gamma), [w,t]=t^(p*delta)
    /// are constructed from the eigenvectors of psi_w; equal eigenvalue
    /// pairs certify the isomorphism.
    J1NormalForm,
}

/// Runs an explicit construction at prime p (> 3) and checks every
/// claimed relation by collection. Returns the parameters of the
/// resulting Q_1-extension presentation for the first two cases.
pub fn verify_explicit_isomorphism(case: ExplicitCase, p: u32) -> Result<bool, IsoError> {
    match case {
        ExplicitCase::P2AlphaToQ1 => verify_p2_case(p),
        ExplicitCase::P4AlphaToQ1 => verify_p4_case(p),
        ExplicitCase::J1NormalForm => {
            // representative parameters: P5 = (1,1,0) and a valid P6/P7 pair
            let alpha = least_nonresidue(p);
            let mut checked = 0;
            for (k, m) in [(1u32, 0u32), (0, 1), (1, 1), (2, alpha)] {
                let ga = FamilyParams::qzeta(p, alpha, 1, k, m)?;
                let g1 = FamilyParams::qzeta(p, 1, 1, k, (alpha as u64 * m as u64 % p as u64) as u32)?;
                match certify_j1_pair(&ga, &g1)? {
                    Some(_) => checked += 1,
                    None => {
                        // non-diagonalizable psi (non-residue discriminant):
                        // not an exceptional group, skip
                    }
                }
            }
            Ok(checked > 0)
        }
    }
}

fn verify_p2_case(p: u32) -> Result<bool, IsoError> {
    let alpha = least_nonresidue(p) as i64;
    let g = build_candidate(&FamilyParams::qzeta(p, least_nonresidue(p), 0, 1, 0)?)?;
    let x = word(&g, &[("x", 1)]);
    let y = word(&g, &[("y", 1)]);
    let zt = word(&g, &[("x", 1 - alpha), ("z", 1)]);
    let nt = word(&g, &[("u", alpha - 1), ("n", 1)]);
    let u = word(&g, &[("u", 1)]);
    verify_q1_extension_relations(&g, &x, &y, &zt, &nt, &u, 0, 1, 0)
}

fn verify_p4_case(p: u32) -> Result<bool, IsoError> {
    let alpha = least_nonresidue(p);
    let g = build_candidate(&FamilyParams::qzeta(p, alpha, 0, 1, 1)?)?;
    let p64 = p as u64;
    let inv2 = inv_mod(2, p) as u64;
    for t in 0..p as u64 {
        for b in 1..p as u64 {
            if (t * t) % p64 != (b * b + 4 * alpha as u64) % p64 {
                continue; // need t^2 - b^2 = 4 alpha
            }
            if t == b {
                continue;
            }
            let a = (t + p64 - (2 * alpha as u64 + 1) * b % p64) % p64 * inv2 % p64;
            let c = (p64 - (alpha as u64 + 1) * b % p64) % p64;
            let d = (t + (2 * alpha as u64 + 1) * b) % p64
                * inv_mod((2 * alpha) % p, p) as u64
                % p64;
            // sanity: a + alpha b = c + alpha d and ad - bc = 1
            let lhs = (a + alpha as u64 * b) % p64;
            let rhs = (c + alpha as u64 * d) % p64;
            if lhs != rhs || (a * d + p64 * p64 - b * c) % p64 != 1 {
                continue;
            }
            let xt = word(&g, &[("x", a as i64), ("z", b as i64)]);
            let zt = word(&g, &[("x", c as i64), ("z", d as i64)]);
            let yt = g.commutator(&xt, &zt);
            let nt = word(&g, &[("u", b as i64), ("n", d as i64 - b as i64)]);
            let xtp = g.pow(&xt, p as u64);
            if g.element_order(&xt) != (p as u64) * p as u64 {
                continue;
            }
            if verify_q1_extension_relations(&g, &xt, &yt, &zt, &nt, &xtp, 0, 1, alpha)? {
                return Ok(true);
            }
        }
    }
    Err(IsoError::Construction(
        "no (t, b) pair satisfied the construction".into(),
    ))
}

/// Checks that the given elements of `g` satisfy the defining relations of
/// the Q_1-extension with parameters (j, k, m) (zeta = 1) and generate g:
/// n' central of order p, x'^(p^2) = y'^p = 1, z'^p = u' n'^j,
/// [x',z'] = y', [x',y'] = n'^-m, [y',z'] = u' n'^(m+k), where u' = x'^p.
#[allow(clippy::too_many_arguments)]
fn verify_q1_extension_relations(
    g: &PcPresentation,
    x: &GroupElement,
    y: &GroupElement,
    z: &GroupElement,
    n: &GroupElement,
    u: &GroupElement,
    j: u32,
    k: u32,
    m: u32,
) -> Result<bool, IsoError> {
    let p = g.prime() as u64;
    let ok = |b: bool, what: &str| {
        if b {
            Ok(true)
        } else {
            Err(IsoError::Construction(format!("relation failed: {what}")))
        }
    };
    ok(g.pow(x, p) == *u, "x^p = u")?;
    ok(g.pow(u, p).is_identity(), "x^(p^2) = 1")?;
    ok(g.pow(y, p).is_identity(), "y^p = 1")?;
    ok(g.pow(n, p).is_identity(), "n^p = 1")?;
    let znj = g.multiply(u, &g.pow(n, j as u64));
    ok(g.pow(z, p) == znj, "z^p = u n^j")?;
    ok(g.commutator(x, z) == *y, "[x,z] = y")?;
    let n_neg_m = g.pow(&g.inverse(n), m as u64);
    ok(g.commutator(x, y) == n_neg_m, "[x,y] = n^-m")?;
    let yz = g.multiply(u, &g.pow(n, ((m + k) % g.prime()) as u64));
    ok(g.commutator(y, z) == yz, "[y,z] = u n^(m+k)")?;
    for gen in [x, y, z] {
        ok(g.commutator(gen, n).is_identity(), "n central")?;
    }
    ok(generates(g, &[x.clone(), z.clone()]), "generation")?;
    Ok(true)
}

/// Eigenvalue data of the shared j = 1 normal form for one group, plus the
/// verified (s, t, w) presentation: returns the eigenvalue pair (ascending)
/// if psi_w is diagonalizable with distinct eigenvalues and every normal
/// form relation checks out.
pub fn j1_normal_form_data(fp: &FamilyParams) -> Result<Option<(u32, u32)>, IsoError> {
    let p = fp.prime;
    let g = build_candidate(fp)?;
    let w = word(&g, &[("y", 1)]);
    let _u_gen = word(&g, &[("u", 1)]);
    let n_gen = word(&g, &[("n", 1)]);

    // matrix of psi_w in basis (u, n): psi(h^p) = [w, h]
    let x = word(&g, &[("x", 1)]);
    let h_n = pth_root(&g, &n_gen)
        .ok_or_else(|| IsoError::Construction("n has no p-th root".into()))?;
    let col1 = decompose_in_un(&g, &g.commutator(&w, &x))?;
    let col2 = decompose_in_un(&g, &g.commutator(&w, &h_n))?;
    let mat = [[col1.0, col2.0], [col1.1, col2.1]];

    // eigenvalues: roots of X^2 - tr X + det
    let tr = (mat[0][0] + mat[1][1]) % p;
    let det = ((mat[0][0] as u64 * mat[1][1] as u64 + (p as u64) * (p as u64)
        - mat[0][1] as u64 * mat[1][0] as u64)
        % p as u64) as u32;
    let roots: Vec<u32> = (0..p)
        .filter(|&r| {
            ((r as u64 * r as u64 + det as u64) % p as u64)
                == (tr as u64 * r as u64) % p as u64
        })
        .collect();
    if roots.len() != 2 {
        return Ok(None); // not diagonalizable with distinct eigenvalues
    }
    let (r1, r2) = (roots[0], roots[1]);

    // eigenvector (a, b) for root r: (mat - r I)(a,b) = 0
    let eigvec = |r: u32| -> (i64, i64) {
        let m00 = (mat[0][0] + p - r) % p;
        let m11 = (mat[1][1] + p - r) % p;
        if m00 != 0 || mat[0][1] != 0 {
            // row (m00, mat01): vector (mat01, -m00)
            (mat[0][1] as i64, -(m00 as i64))
        } else {
            (m11 as i64, -(mat[1][0] as i64))
        }
    };
    let (a1, b1) = eigvec(r1);
    let (a2, b2) = eigvec(r2);
    let u_el = word(&g, &[("u", a1), ("n", b1)]);
    let v_el = word(&g, &[("u", a2), ("n", b2)]);

    let s0 = pth_root(&g, &u_el)
        .ok_or_else(|| IsoError::Construction("eigenvector has no p-th root".into()))?;
    let t0 = pth_root(&g, &v_el)
        .ok_or_else(|| IsoError::Construction("eigenvector has no p-th root".into()))?;

    // [s0, t0] lies in w^i Z(G) for some i coprime to p
    let c = g.commutator(&s0, &t0);
    let in_center = |e: &GroupElement| e.exponents[0] == 0 && e.exponents[1] == 0 && e.exponents[2] == 0;
    let mut i_found = None;
    for i in 1..p {
        let probe = g.multiply(&c, &g.pow(&g.inverse(&w), i as u64));
        if in_center(&probe) {
            i_found = Some(i);
            break;
        }
    }
    let i = i_found.ok_or_else(|| IsoError::Construction("[s,t] not in wZ(G)".into()))?;
    let s = g.pow(&s0, inv_mod(i, p) as u64);
    let w2 = g.commutator(&s, &t0);
    let t = t0;

    // verify the normal form relations
    let p2 = p as u64 * p as u64;
    let check = |b: bool, what: &str| -> Result<(), IsoError> {
        if b {
            Ok(())
        } else {
            Err(IsoError::Construction(format!("normal form: {what}")))
        }
    };
    check(g.pow(&s, p2).is_identity(), "s^(p^2) = 1")?;
    check(g.pow(&t, p2).is_identity(), "t^(p^2) = 1")?;
    check(g.pow(&w2, p as u64).is_identity(), "w^p = 1")?;
    check(g.commutator(&s, &t) == w2, "[s,t] = w")?;
    let sp = g.pow(&s, p as u64);
    let tp = g.pow(&t, p as u64);
    // [w,s] = s^(p gamma), [w,t] = t^(p delta)
    let mut gamma = None;
    let mut delta = None;
    for e in 0..p {
        if g.commutator(&w2, &s) == g.pow(&sp, e as u64) {
            gamma = Some(e);
        }
        if g.commutator(&w2, &t) == g.pow(&tp, e as u64) {
            delta = Some(e);
        }
    }
    let gamma = gamma.ok_or_else(|| IsoError::Construction("[w,s] not a power of s^p".into()))?;
    let delta = delta.ok_or_else(|| IsoError::Construction("[w,t] not a power of t^p".into()))?;
    check(generates(&g, &[s.clone(), t.clone()]), "s, t generate")?;

    // the normal form presentation must itself be consistent of order p^5,
    // so both groups affording it with equal (gamma, delta) are isomorphic
    let nf = normal_form_presentation(p, gamma, delta)?;
    check(nf.order() == (p as u64).pow(5), "normal form order")?;
    check(nf.check_consistency(500).consistent, "normal form consistency")?;
    Ok(Some((gamma, delta)))
}

/// Pc presentation of the j = 1 normal form with the given eigenvalues:
/// sequence (t, s, w, a, b) with a = s^p, b = t^p.
fn normal_form_presentation(p: u32, gamma: u32, delta: u32) -> Result<PcPresentation, PcError> {
    let mut power = HashMap::new();
    power.insert(0usize, vec![0, 0, 0, 0, 1]); // t^p = b
    power.insert(1usize, vec![0, 0, 0, 1, 0]); // s^p = a
    let mut comm = HashMap::new();
    comm.insert((1usize, 0usize), vec![0, 0, 1, 0, 0]); // [s,t] = w
    if delta != 0 {
        comm.insert((2usize, 0usize), vec![0, 0, 0, 0, delta]); // [w,t] = b^delta
    }
    if gamma != 0 {
        comm.insert((2usize, 1usize), vec![0, 0, 0, gamma, 0]); // [w,s] = a^gamma
    }
    PcPresentation::new(
        p,
        5,
        vec!["t".into(), "s".into(), "w".into(), "a".into(), "b".into()],
        power,
        comm,
    )
}

/// Certifies that two j = 1 extensions (one of Q_alpha, one of Q_1) are
/// isomorphic by extracting the shared normal form from each and requiring
/// identical eigenvalue pairs. Returns the pair on success, None if psi_w
/// is not diagonalizable (the construction does not apply).
pub fn certify_j1_pair(
    a: &FamilyParams,
    b: &FamilyParams,
) -> Result<Option<(u32, u32)>, IsoError> {
    let da = j1_normal_form_data(a)?;
    let db = j1_normal_form_data(b)?;
    match (da, db) {
        (Some(x), Some(y)) if x == y => Ok(Some(x)),
        _ => Ok(None),
    }
}

/// Writes an element of <u, n> as (exponent of u, exponent of n).
fn decompose_in_un(g: &PcPresentation, e: &GroupElement) -> Result<(u32, u32), IsoError> {
    let iu = g.label_index("u").unwrap();
    let in_ = g.label_index("n").unwrap();
    for (i, &ex) in e.exponents.iter().enumerate() {
        if ex != 0 && i != iu && i != in_ {
            return Err(IsoError::Construction(
                "element not in the designated central subgroup".into(),
            ));
        }
    }
    Ok((e.exponents[iu], e.exponents[in_]))
}
