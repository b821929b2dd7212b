//! Exact minimal faithful permutation degrees.
//!
//! A permutation representation of G is a list of point stabilizers, one
//! per orbit; it is faithful iff the cores of the stabilizers intersect
//! trivially, and its degree is the sum of the stabilizer indices. The
//! minimal degree mu(G) is found by branch-and-bound over distinct core
//! values: for each core (a normal subgroup) only the largest subgroup
//! realising it can appear in a minimal representation, and every chosen
//! stabilizer must strictly shrink the running core intersection.

use crate::pc::PcPresentation;
use crate::subgroup::{self, Subgroup};
use crate::table::{Bitset, GroupTable, TableError};

#[derive(Debug, thiserror::Error)]
pub enum MinDegError {
    #[error("group does not satisfy the witness precondition: {0}")]
    Precondition(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Search strategy for `minimal_degree`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// No cap on the number of orbits (beyond the structural bound that
    /// each stabilizer strictly shrinks the core intersection).
    Exhaustive,
    /// Caps the orbit count at d = rank of the center (for p odd a minimal
    /// representation has exactly d orbits; for p = 2 between d/2 and d).
    Johnson,
}

/// A permutation representation given by its point stabilizers.
#[derive(Debug, Clone)]
pub struct PermutationRep {
    pub stabilizers: Vec<Subgroup>,
    pub degree: usize,
}

/// Faithfulness check: the cores of the stabilizers intersect trivially.
pub fn is_faithful(table: &GroupTable, rep: &PermutationRep) -> bool {
    let mut inter = full_set(table.order());
    for h in &rep.stabilizers {
        inter.intersect_with(&subgroup::core(table, &h.elements));
    }
    inter.is_trivial()
}

fn full_set(order: usize) -> Bitset {
    let mut b = Bitset::new(order);
    for i in 0..order {
        b.insert(i);
    }
    b
}

/// Rank (minimal generator count) of the center.
pub fn center_rank(table: &GroupTable) -> usize {
    let z = table.center();
    table.abelian_invariants(&z).len()
}

/// Minimal faithful permutation degree with a faithful witness.
pub fn minimal_degree(table: &GroupTable, strategy: Strategy) -> (usize, PermutationRep) {
    minimal_degree_with_lattice(table, strategy, &subgroup::all_subgroups(table))
}

/// As `minimal_degree` but reusing an already-computed subgroup lattice.
pub fn minimal_degree_with_lattice(
    table: &GroupTable,
    strategy: Strategy,
    layers: &[Vec<Subgroup>],
) -> (usize, PermutationRep) {
    let order = table.order();
    if order == 1 {
        return (
            0,
            PermutationRep {
                stabilizers: Vec::new(),
                degree: 0,
            },
        );
    }

    // one candidate stabilizer per distinct core: the largest subgroup
    // realising that core (smallest index)
    let mut best_for_core: std::collections::HashMap<Bitset, Subgroup> =
        std::collections::HashMap::new();
    for layer in layers {
        for h in layer {
            let c = subgroup::core(table, &h.elements);
            match best_for_core.get(&c) {
                Some(cur) if cur.order() >= h.order() => {}
                _ => {
                    best_for_core.insert(c, h.clone());
                }
            }
        }
    }
    let mut candidates: Vec<(Bitset, Subgroup, usize)> = best_for_core
        .into_iter()
        .map(|(c, h)| {
            let index = order / h.order();
            (c, h, index)
        })
        .collect();
    // small indices first; ties broken canonically for determinism
    candidates.sort_by(|a, b| a.2.cmp(&b.2).then_with(|| a.0.cmp(&b.0)));

    let max_orbits = match strategy {
        Strategy::Exhaustive => usize::MAX,
        Strategy::Johnson => center_rank(table),
    };

    struct Search<'a> {
        candidates: &'a [(Bitset, Subgroup, usize)],
        max_orbits: usize,
        best_degree: usize,
        best_choice: Vec<usize>,
    }

    impl Search<'_> {
        fn dfs(&mut self, i: usize, degree: usize, inter: &Bitset, chosen: &mut Vec<usize>) {
            if inter.is_trivial() {
                if degree < self.best_degree {
                    self.best_degree = degree;
                    self.best_choice = chosen.clone();
                }
                return;
            }
            if i == self.candidates.len() || chosen.len() == self.max_orbits {
                return;
            }
            // at least one more stabilizer is needed, of index >= index_i
            if degree + self.candidates[i].2 >= self.best_degree {
                return;
            }
            let (core_i, _, index_i) = &self.candidates[i];
            let mut next = inter.clone();
            next.intersect_with(core_i);
            if next.count() < inter.count() {
                chosen.push(i);
                self.dfs(i + 1, degree + index_i, &next, chosen);
                chosen.pop();
            }
            self.dfs(i + 1, degree, inter, chosen);
        }
    }

    let mut search = Search {
        candidates: &candidates,
        max_orbits,
        // regular representation as the initial upper bound
        best_degree: order + 1,
        best_choice: Vec::new(),
    };
    let start = full_set(order);
    search.dfs(0, 0, &start, &mut Vec::new());
    debug_assert!(search.best_degree <= order);

    let stabilizers: Vec<Subgroup> = search
        .best_choice
        .iter()
        .map(|&i| candidates[i].1.clone())
        .collect();
    let rep = PermutationRep {
        degree: search.best_degree,
        stabilizers,
    };
    debug_assert!(is_faithful(table, &rep));
    (search.best_degree, rep)
}

/// All nontrivial normal subgroups N with mu(G/N) > mu(G), with both
/// degrees. A non-empty result means G is exceptional.
pub fn distinguished_quotients(
    pres: &PcPresentation,
) -> Result<Vec<(Subgroup, usize, usize)>, MinDegError> {
    let table = GroupTable::from_presentation(pres)?;
    let (mu_g, _) = minimal_degree(&table, Strategy::Johnson);
    let mut out = Vec::new();
    for (n, _central) in subgroup::normal_subgroups(&table) {
        if n.order() == 1 || n.order() == table.order() {
            continue;
        }
        let q = crate::table::quotient(&table, &n.elements)?;
        let qt = GroupTable::from_presentation(&q.pres)?;
        let (mu_q, _) = minimal_degree(&qt, Strategy::Johnson);
        if mu_q > mu_g {
            out.push((n, mu_g, mu_q));
        }
    }
    Ok(out)
}

/// For an order-p^5 group with center of rank 2: a pair of order-p^3
/// subgroups whose intersection has order p and is non-central, if any.
/// For the candidate extensions such a pair exists iff mu(G) < p^3.
pub fn exceptional_pair_witness(
    pres: &PcPresentation,
) -> Result<Option<(Subgroup, Subgroup)>, MinDegError> {
    let p = pres.prime();
    if pres.order() != (p as u64).pow(5) {
        return Err(MinDegError::Precondition(format!(
            "expected order {}^5, got {}",
            p,
            pres.order()
        )));
    }
    let table = GroupTable::from_presentation(pres)?;
    let center = table.center();
    if center_rank(&table) != 2 {
        return Err(MinDegError::Precondition("center must have rank 2".into()));
    }
    let cubes = subgroup::subgroups_of_order(&table, (p as usize).pow(3));
    for (a, k1) in cubes.iter().enumerate() {
        for k2 in &cubes[a + 1..] {
            let inter = subgroup::intersection(k1, k2);
            if inter.count() == p as usize && !inter.is_subset(&center) {
                return Ok(Some((k1.clone(), k2.clone())));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{
        build_candidate, build_named_group, build_quotient, FamilyParams, NamedGroup, QuotientName,
    };
    use crate::pc::PcPresentation;
    use std::collections::HashMap;

    fn table_of(pres: &PcPresentation) -> GroupTable {
        GroupTable::from_presentation(pres).unwrap()
    }

    fn extraspecial_exponent_p(p: u32) -> PcPresentation {
        // (y, x, c) with [x, y] = c
        let mut comm = HashMap::new();
        comm.insert((1usize, 0usize), vec![0, 0, 1]);
        PcPresentation::new(
            p,
            3,
            vec!["y".into(), "x".into(), "c".into()],
            HashMap::new(),
            comm,
        )
        .unwrap()
    }

    fn quaternion8() -> PcPresentation {
        let mut power = HashMap::new();
        power.insert(0usize, vec![0, 0, 1]); // y^2 = v
        power.insert(1usize, vec![0, 0, 1]); // x^2 = v
        let mut comm = HashMap::new();
        comm.insert((1usize, 0usize), vec![0, 0, 1]); // [x, y] = v
        PcPresentation::new(
            2,
            3,
            vec!["y".into(), "x".into(), "v".into()],
            power,
            comm,
        )
        .unwrap()
    }

    #[test]
    fn mu_of_q_is_p_cubed() {
        for p in [3u32, 5] {
            let q = build_quotient(QuotientName::Q, p).unwrap();
            let t = table_of(&q);
            let (mu, rep) = minimal_degree(&t, Strategy::Johnson);
            assert_eq!(mu, (p as usize).pow(3));
            assert!(is_faithful(&t, &rep));
        }
    }

    #[test]
    fn mu_of_extraspecial_is_p_squared() {
        for p in [3u32, 5] {
            let e = extraspecial_exponent_p(p);
            let t = table_of(&e);
            let (mu, _) = minimal_degree(&t, Strategy::Johnson);
            assert_eq!(mu, (p as usize).pow(2));
        }
    }

    #[test]
    fn mu_of_quaternion_groups() {
        let q8 = quaternion8();
        let t = table_of(&q8);
        let (mu, _) = minimal_degree(&t, Strategy::Exhaustive);
        assert_eq!(mu, 8);
        let q16 = build_quotient(QuotientName::Q16, 2).unwrap();
        let t = table_of(&q16);
        let (mu, _) = minimal_degree(&t, Strategy::Exhaustive);
        assert_eq!(mu, 16);
    }

    #[test]
    fn mu_of_exceptional_candidate_is_2p_squared() {
        for p in [3u32, 5] {
            let e1 = build_named_group(&NamedGroup::E(1), p).unwrap();
            let t = table_of(&e1);
            let (mu, rep) = minimal_degree(&t, Strategy::Johnson);
            assert_eq!(mu, 2 * (p as usize).pow(2));
            // odd p: exactly rank(Z) orbits in the witness
            assert_eq!(rep.stabilizers.len(), center_rank(&t));
        }
    }

    #[test]
    fn strategies_agree() {
        let groups = [
            build_quotient(QuotientName::Q, 3).unwrap(),
            build_quotient(QuotientName::Q81, 3).unwrap(),
            build_quotient(QuotientName::Q1, 3).unwrap(),
            build_quotient(QuotientName::Q16, 2).unwrap(),
            build_candidate(&FamilyParams::q(3, 1, 0, 1, 2).unwrap()).unwrap(),
            build_candidate(&FamilyParams::q(3, 0, 0, 1, 1).unwrap()).unwrap(),
            extraspecial_exponent_p(5),
        ];
        for g in &groups {
            let t = table_of(g);
            let lattice = subgroup::all_subgroups(&t);
            let (a, _) = minimal_degree_with_lattice(&t, Strategy::Exhaustive, &lattice);
            let (b, _) = minimal_degree_with_lattice(&t, Strategy::Johnson, &lattice);
            assert_eq!(a, b, "strategy mismatch for {}", g.content_hash());
        }
    }

    #[test]
    fn single_stabilizer_faithfulness_on_q5() {
        let q = build_quotient(QuotientName::Q, 5).unwrap();
        let t = table_of(&q);
        // <x> contains the socle <x^5>, so it is not a faithful stabilizer
        let x = q.encode(&q.generator(2)) as usize;
        let rep = PermutationRep {
            stabilizers: vec![subgroup::closure(&t, &[x])],
            degree: 0,
        };
        assert!(!is_faithful(&t, &rep));
        // <y> has order 5 and avoids <x^5>: faithful, degree 125
        let y = q.encode(&q.generator(1)) as usize;
        let h = subgroup::closure(&t, &[y]);
        assert_eq!(h.order(), 5);
        let degree = t.order() / h.order();
        assert_eq!(degree, 125);
        let rep = PermutationRep {
            stabilizers: vec![h],
            degree,
        };
        assert!(is_faithful(&t, &rep));
        // the trivial stabilizer (regular representation) is always faithful
        let rep = PermutationRep {
            stabilizers: vec![subgroup::trivial(&t)],
            degree: t.order(),
        };
        assert!(is_faithful(&t, &rep));
    }

    #[test]
    fn distinguished_quotients_of_e1() {
        let p = 3u32;
        let e1 = build_named_group(&NamedGroup::E(1), p).unwrap();
        let dq = distinguished_quotients(&e1).unwrap();
        assert!(!dq.is_empty());
        // the central <n> must appear with mu values (2p^2, p^3)
        let g = &e1;
        let t = table_of(g);
        let n_id = g.encode(&g.generator(4)) as usize;
        let n_set = t.closure(&[n_id]);
        let hit = dq.iter().find(|(n, _, _)| n.elements == n_set);
        let (_, mu_g, mu_q) = hit.expect("<n> should be a distinguished kernel");
        assert_eq!(*mu_g, 2 * (p as usize).pow(2));
        assert_eq!(*mu_q, (p as usize).pow(3));
    }

    #[test]
    fn non_exceptional_candidates_have_no_distinguished_quotient() {
        // P0 = Q x C_p and abelian groups are never exceptional
        let p0 = build_candidate(&FamilyParams::q(3, 0, 0, 0, 0).unwrap()).unwrap();
        assert!(distinguished_quotients(&p0).unwrap().is_empty());
        let ab = PcPresentation::new(
            3,
            4,
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            HashMap::new(),
            HashMap::new(),
        )
        .unwrap();
        assert!(distinguished_quotients(&ab).unwrap().is_empty());
    }

    #[test]
    fn pair_witness_matches_exceptionality_at_p3() {
        // P5 candidate (0,0,1,1): witness exists; P3 (1,0,0,0): none
        let p5 = build_candidate(&FamilyParams::q(3, 0, 0, 1, 1).unwrap()).unwrap();
        let w = exceptional_pair_witness(&p5).unwrap();
        let (k1, k2) = w.expect("P5 candidate must have a witness pair");
        let t = table_of(&p5);
        let inter = subgroup::intersection(&k1, &k2);
        assert_eq!(inter.count(), 3);
        assert!(!inter.is_subset(&t.center()));

        let p3 = build_candidate(&FamilyParams::q(3, 1, 0, 0, 0).unwrap()).unwrap();
        assert!(exceptional_pair_witness(&p3).unwrap().is_none());
    }

    #[test]
    fn pair_witness_precondition() {
        let q = build_quotient(QuotientName::Q, 3).unwrap();
        assert!(matches!(
            exceptional_pair_witness(&q),
            Err(MinDegError::Precondition(_))
        ));
    }
}
