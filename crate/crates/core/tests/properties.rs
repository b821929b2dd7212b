//! Randomized structural properties of the candidate extensions and the
//! canonicalization machinery.

use proptest::prelude::*;
use proptest::test_runner::Config;

use pquintic::families::{
    apply_generator_map, build_candidate, build_quotient, canonical_params, Family, FamilyParams,
    GeneratorMap, QuotientName,
};
use pquintic::invariants::{fingerprint, least_nonresidue};
use pquintic::iso::{are_isomorphic, IsoResult};
use pquintic::pc::PcPresentation;
use pquintic::table::{quotient, GroupTable};

fn q_params(p: u32) -> impl Strategy<Value = FamilyParams> {
    (0..p, 0..p, 0..p, 0..p)
        .prop_map(move |(i, j, k, l)| FamilyParams::q(p, i, j, k, l).unwrap())
}

fn qzeta_params(p: u32) -> impl Strategy<Value = FamilyParams> {
    let alpha = least_nonresidue(p);
    (prop_oneof![Just(1u32), Just(alpha)], 0..p, 0..p, 0..p)
        .prop_map(move |(zeta, j, k, m)| FamilyParams::qzeta(p, zeta, j, k, m).unwrap())
}

fn any_params(p: u32) -> BoxedStrategy<FamilyParams> {
    if p > 3 {
        prop_oneof![q_params(p), qzeta_params(p)].boxed()
    } else {
        q_params(p).boxed()
    }
}

fn random_element(pres: &PcPresentation, id: u64) -> pquintic::pc::GroupElement {
    pres.decode(id % pres.order())
}

/// Generator maps valid for the given parameters, paired with random units.
fn valid_map(fp: &FamilyParams, selector: u32, unit: u32) -> Option<GeneratorMap> {
    let p = fp.prime;
    let lambda = 1 + unit % (p - 1);
    match fp.family {
        Family::Q => match selector % 5 {
            0 => Some(GeneratorMap::A(lambda)),
            1 => Some(GeneratorMap::B(lambda)),
            2 => Some(GeneratorMap::C(lambda)),
            3 if fp.params[0] != 0 => Some(GeneratorMap::D),
            4 if fp.params[3] == 0 => Some(GeneratorMap::E),
            _ => None,
        },
        Family::Qzeta => match selector % 2 {
            0 => Some(GeneratorMap::A(lambda)),
            _ => Some(GeneratorMap::B(lambda)),
        },
    }
}

proptest! {
    #![proptest_config(Config { cases: 64, ..Config::default() })]

    /// Collection is consistent: associativity spot-checks and the defining
    /// relations hold for every randomly chosen candidate.
    #[test]
    fn candidates_are_consistent(fp in prop_oneof![any_params(5), any_params(7), any_params(3)]) {
        let pres = build_candidate(&fp).unwrap();
        prop_assert!(pres.check_consistency(128).consistent);
    }

    /// For p > 3 the p-th power map of every candidate is an endomorphism.
    #[test]
    fn ppower_map_is_an_endomorphism(
        fp in prop_oneof![any_params(5), any_params(7)],
        ia in any::<u64>(),
        ib in any::<u64>(),
    ) {
        let p = fp.prime as u64;
        let pres = build_candidate(&fp).unwrap();
        let a = random_element(&pres, ia);
        let b = random_element(&pres, ib);
        let lhs = pres.pow(&pres.multiply(&a, &b), p);
        let rhs = pres.multiply(&pres.pow(&a, p), &pres.pow(&b, p));
        prop_assert_eq!(lhs, rhs);
    }

    /// The commutator expansion [x, yz] = [x, z] * [x, y]^z holds under
    /// collection (with [a, b] = a^-1 b^-1 a b).
    #[test]
    fn commutator_expansion_identity(
        fp in prop_oneof![any_params(3), any_params(5)],
        ix in any::<u64>(),
        iy in any::<u64>(),
        iz in any::<u64>(),
    ) {
        let pres = build_candidate(&fp).unwrap();
        let x = random_element(&pres, ix);
        let y = random_element(&pres, iy);
        let z = random_element(&pres, iz);
        let lhs = pres.commutator(&x, &pres.multiply(&y, &z));
        let rhs = pres.multiply(&pres.commutator(&x, &z), &pres.conjugate(&pres.commutator(&x, &y), &z));
        prop_assert_eq!(lhs, rhs);
    }

    /// Canonical labels are invariant along generator-map orbits.
    #[test]
    fn canonical_label_is_orbit_invariant(
        fp in prop_oneof![any_params(5), any_params(7), any_params(11)],
        selectors in proptest::collection::vec((any::<u32>(), any::<u32>()), 1..5),
    ) {
        let (label, _, _) = canonical_params(&fp).unwrap();
        let mut cur = fp;
        for (sel, unit) in selectors {
            if let Some(gm) = valid_map(&cur, sel, unit) {
                cur = apply_generator_map(&cur, &gm).unwrap();
            }
        }
        let (label2, _, _) = canonical_params(&cur).unwrap();
        prop_assert_eq!(label, label2);
    }

    /// Canonicalization is idempotent and the trail replays to the canonical
    /// parameters.
    #[test]
    fn canonicalization_is_idempotent(fp in prop_oneof![any_params(5), any_params(7)]) {
        let (label, canonical, trail) = canonical_params(&fp).unwrap();
        let mut replay = fp.clone();
        for gm in &trail {
            replay = apply_generator_map(&replay, gm).unwrap();
        }
        prop_assert_eq!(&replay, &canonical);
        let (label2, canonical2, trail2) = canonical_params(&canonical).unwrap();
        prop_assert_eq!(label, label2);
        prop_assert_eq!(canonical, canonical2);
        prop_assert!(trail2.is_empty());
    }

    /// Parameters with equal canonical labels present isomorphic groups, and
    /// isomorphic groups have equal fingerprints.
    #[test]
    fn same_label_means_isomorphic_and_equal_fingerprints(
        a in q_params(5),
        b in q_params(5),
    ) {
        let (la, _, _) = canonical_params(&a).unwrap();
        let (lb, _, _) = canonical_params(&b).unwrap();
        prop_assume!(la == lb);
        let pa = build_candidate(&a).unwrap();
        let pb = build_candidate(&b).unwrap();
        let res = are_isomorphic(&pa, &pb, 50_000_000).unwrap();
        prop_assert!(matches!(res, IsoResult::Iso(_)));
        prop_assert_eq!(fingerprint(&pa), fingerprint(&pb));
    }
}

#[test]
fn quotient_by_last_generator_recovers_the_base_group() {
    for p in [3u32, 5] {
        let base_name = QuotientName::Q;
        let base = build_quotient(base_name, p).unwrap();
        for fp in [
            FamilyParams::q(p, 1, 0, 1, 1).unwrap(),
            FamilyParams::q(p, 0, 1, 2 % p, 0).unwrap(),
        ] {
            let pres = build_candidate(&fp).unwrap();
            let table = GroupTable::from_presentation(&pres).unwrap();
            let last = table.generator_ids()[pres.ngens() - 1];
            let n_sub = table.closure(&[last]);
            let q = quotient(&table, &n_sub).unwrap();
            let res = are_isomorphic(&q.pres, &base, 50_000_000).unwrap();
            assert!(
                matches!(res, IsoResult::Iso(_)),
                "quotient of {fp} is not the expected base group at p = {p}"
            );
        }
    }
}
