//! Subgroup machinery over a dense `GroupTable`: closures, cores,
//! intersections, full enumeration by cyclic extension, and an advisory
//! on-disk lattice cache.

use crate::table::{Bitset, GroupTable};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::Path;

/// A subgroup, identified canonically by its element-id set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    pub elements: Bitset,
    /// A generating set found during construction (not canonical).
    pub generators: Vec<usize>,
}

impl Subgroup {
    pub fn order(&self) -> usize {
        self.elements.count()
    }

    /// Ascending list of member element ids.
    pub fn element_ids(&self) -> Vec<usize> {
        self.elements.iter().collect()
    }
}

/// Smallest subgroup containing the given element ids.
pub fn closure(table: &GroupTable, gens: &[usize]) -> Subgroup {
    let elements = table.closure(gens);
    Subgroup {
        elements,
        generators: gens.to_vec(),
    }
}

/// The trivial subgroup.
pub fn trivial(table: &GroupTable) -> Subgroup {
    closure(table, &[])
}

/// Largest normal subgroup of the whole group contained in `h`: the
/// intersection of the conjugates of `h`. Iterating conjugation by the
/// pc generators until stable reaches the full conjugate intersection.
pub fn core(table: &GroupTable, h: &Bitset) -> Bitset {
    let gens = table.generator_ids();
    let mut cur = h.clone();
    loop {
        let mut next = cur.clone();
        for &g in &gens {
            let mut conj = Bitset::new(cur.universe());
            for x in cur.iter() {
                conj.insert(table.conjugate(x, g));
            }
            next.intersect_with(&conj);
        }
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// Set intersection of two subgroups of the same group.
pub fn intersection(a: &Subgroup, b: &Subgroup) -> Bitset {
    let mut out = a.elements.clone();
    out.intersect_with(&b.elements);
    out
}

/// All subgroups, grouped by order: `result[k]` holds the subgroups of
/// order p^k. Built by cyclic extension: each subgroup of order p^(k+1)
/// arises from a maximal subgroup extended by a normalizing element whose
/// p-th power it contains.
pub fn all_subgroups(table: &GroupTable) -> Vec<Vec<Subgroup>> {
    let p = table.prime();
    let order = table.order();
    let mut layers: Vec<Vec<Subgroup>> = vec![vec![trivial(table)]];
    let mut total = order;
    let mut nlayers = 0;
    while total > 1 {
        total /= p as usize;
        nlayers += 1;
    }
    for _k in 0..nlayers {
        let prev = layers.last().unwrap();
        let mut seen: HashSet<Bitset> = HashSet::new();
        let mut next: Vec<Subgroup> = Vec::new();
        for h in prev {
            for g in 1..order {
                if h.elements.contains(g) {
                    continue;
                }
                if !h.elements.contains(table.pow(g, p)) {
                    continue;
                }
                if !h
                    .generators
                    .iter()
                    .all(|&x| h.elements.contains(table.conjugate(x, g)))
                {
                    continue;
                }
                // union of the cosets h * g^e
                let mut set = h.elements.clone();
                let mut ge = 0usize;
                for _ in 1..p {
                    ge = table.mul(ge, g);
                    for x in h.elements.iter() {
                        set.insert(table.mul(x, ge));
                    }
                }
                debug_assert_eq!(set.count(), h.order() * p as usize);
                if seen.insert(set.clone()) {
                    let mut gens = h.generators.clone();
                    gens.push(g);
                    next.push(Subgroup {
                        elements: set,
                        generators: gens,
                    });
                }
            }
        }
        next.sort_by(|a, b| a.elements.cmp(&b.elements));
        layers.push(next);
    }
    layers
}

/// All subgroups of exactly the given order.
pub fn subgroups_of_order(table: &GroupTable, target: usize) -> Vec<Subgroup> {
    let p = table.prime() as usize;
    let mut k = 0usize;
    let mut t = target;
    while t > 1 {
        if t % p != 0 {
            return Vec::new();
        }
        t /= p;
        k += 1;
    }
    let layers = all_subgroups(table);
    if k < layers.len() {
        layers[k].clone()
    } else {
        Vec::new()
    }
}

/// All normal subgroups, each flagged with whether it is central.
pub fn normal_subgroups(table: &GroupTable) -> Vec<(Subgroup, bool)> {
    let center = table.center();
    all_subgroups(table)
        .into_iter()
        .flatten()
        .filter(|h| table.is_normal(&h.elements))
        .map(|h| {
            let central = h.elements.is_subset(&center);
            (h, central)
        })
        .collect()
}

// ---- advisory lattice cache ----

#[derive(Serialize, Deserialize)]
struct CacheRecord {
    order: usize,
    gens: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    group_order: usize,
    subgroups: Vec<CacheRecord>,
}

/// Environment variable overriding the lattice cache directory.
pub const CACHE_DIR_ENV: &str = "PQUINTIC_CACHE_DIR";

fn cache_path(dir: &Path, hash: &str) -> std::path::PathBuf {
    dir.join(format!("lattice-{hash}.json"))
}

/// Loads a cached lattice, revalidating every record by recomputing the
/// closure of its stored generators. Any mismatch discards the cache.
pub fn load_cached_lattice(
    table: &GroupTable,
    dir: &Path,
) -> Option<Vec<Vec<Subgroup>>> {
    let hash = table.presentation().content_hash();
    let text = std::fs::read_to_string(cache_path(dir, &hash)).ok()?;
    let file: CacheFile = serde_json::from_str(&text).ok()?;
    if file.group_order != table.order() {
        return None;
    }
    let p = table.prime() as usize;
    let mut nlayers = 0;
    let mut t = table.order();
    while t > 1 {
        t /= p;
        nlayers += 1;
    }
    let mut layers: Vec<Vec<Subgroup>> = vec![Vec::new(); nlayers + 1];
    for rec in &file.subgroups {
        let gens: Vec<usize> = rec.gens.iter().map(|&g| g as usize).collect();
        if gens.iter().any(|&g| g >= table.order()) {
            return None;
        }
        let sub = closure(table, &gens);
        if sub.order() != rec.order {
            return None;
        }
        let mut k = 0;
        let mut t = rec.order;
        while t > 1 {
            if t % p != 0 {
                return None;
            }
            t /= p;
            k += 1;
        }
        layers[k].push(sub);
    }
    // sanity: unique trivial subgroup, unique whole group
    if layers[0].len() != 1 || layers[nlayers].len() != 1 {
        return None;
    }
    for layer in layers.iter_mut() {
        layer.sort_by(|a, b| a.elements.cmp(&b.elements));
        layer.dedup_by(|a, b| a.elements == b.elements);
    }
    Some(layers)
}

/// Writes the lattice cache file for this group.
pub fn store_cached_lattice(
    table: &GroupTable,
    dir: &Path,
    layers: &[Vec<Subgroup>],
) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let hash = table.presentation().content_hash();
    let file = CacheFile {
        group_order: table.order(),
        subgroups: layers
            .iter()
            .flatten()
            .map(|s| CacheRecord {
                order: s.order(),
                gens: s.generators.iter().map(|&g| g as u64).collect(),
            })
            .collect(),
    };
    std::fs::write(cache_path(dir, &hash), serde_json::to_string(&file).unwrap())
}

/// Lattice with cache: loads if valid, otherwise computes and stores.
pub fn all_subgroups_cached(table: &GroupTable, dir: Option<&Path>) -> Vec<Vec<Subgroup>> {
    if let Some(d) = dir {
        if let Some(layers) = load_cached_lattice(table, d) {
            return layers;
        }
    }
    let layers = all_subgroups(table);
    if let Some(d) = dir {
        let _ = store_cached_lattice(table, d, &layers);
    }
    layers
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{build_candidate, build_quotient, FamilyParams, QuotientName};
    use crate::pc::PcPresentation;
    use std::collections::HashMap;

    fn table_of(pres: &PcPresentation) -> GroupTable {
        GroupTable::from_presentation(pres).unwrap()
    }

    /// Independent oracle: generate-and-dedup. Every subgroup arises by
    /// adding one generator at a time to a smaller one, so a worklist
    /// closure over (known subgroup, extra element) pairs finds them all,
    /// with no appeal to normalizers or p-th-power membership.
    fn oracle_subgroups(table: &GroupTable) -> HashSet<Bitset> {
        let n = table.order();
        let mut seen: HashSet<Bitset> = HashSet::new();
        let triv = table.closure(&[]);
        seen.insert(triv.clone());
        let mut work = vec![triv];
        while let Some(s) = work.pop() {
            if s.count() == n {
                continue;
            }
            for c in 0..n {
                if s.contains(c) {
                    continue;
                }
                let bigger = table.extend_closure(&s, c);
                if seen.insert(bigger.clone()) {
                    work.push(bigger);
                }
            }
        }
        seen
    }

    #[test]
    fn cp_cross_cp_has_p_plus_one_lines() {
        for p in [2u32, 3, 5] {
            let pres = PcPresentation::new(
                p,
                2,
                vec!["a".into(), "b".into()],
                HashMap::new(),
                HashMap::new(),
            )
            .unwrap();
            let t = table_of(&pres);
            let subs = subgroups_of_order(&t, p as usize);
            assert_eq!(subs.len(), p as usize + 1);
        }
    }

    #[test]
    fn enumeration_matches_oracle_q3_and_q16() {
        for pres in [
            build_quotient(QuotientName::Q, 3).unwrap(),
            build_quotient(QuotientName::Q81, 3).unwrap(),
            build_quotient(QuotientName::Q16, 2).unwrap(),
            build_quotient(QuotientName::Q1, 3).unwrap(),
        ] {
            let t = table_of(&pres);
            let oracle = oracle_subgroups(&t);
            let layers = all_subgroups(&t);
            let total: usize = layers.iter().map(|l| l.len()).sum();
            assert_eq!(total, oracle.len(), "count mismatch for {}", pres.content_hash());
            for layer in &layers {
                for s in layer {
                    assert!(oracle.contains(&s.elements));
                }
            }
        }
    }

    #[test]
    fn enumeration_matches_oracle_order_625() {
        for name in [QuotientName::Q, QuotientName::Q1, QuotientName::Qalpha] {
            let pres = build_quotient(name, 5).unwrap();
            let t = table_of(&pres);
            let oracle = oracle_subgroups(&t);
            let total: usize = all_subgroups(&t).iter().map(|l| l.len()).sum();
            assert_eq!(total, oracle.len(), "count mismatch for {name:?}");
        }
    }

    #[test]
    fn enumeration_matches_oracle_order_p5_at_p3() {
        let fp = FamilyParams::q(3, 0, 0, 1, 1).unwrap();
        let g = build_candidate(&fp).unwrap();
        let t = table_of(&g);
        let oracle = oracle_subgroups(&t);
        let total: usize = all_subgroups(&t).iter().map(|l| l.len()).sum();
        assert_eq!(total, oracle.len());
    }

    #[test]
    fn core_properties() {
        let fp = FamilyParams::q(3, 0, 0, 1, 1).unwrap();
        let g = build_candidate(&fp).unwrap();
        let t = table_of(&g);
        for layer in all_subgroups(&t) {
            for h in layer {
                let c = core(&t, &h.elements);
                assert!(c.is_subset(&h.elements));
                let csub = Subgroup {
                    elements: c.clone(),
                    generators: c.iter().collect(),
                };
                assert!(t.is_subgroup(&csub.elements));
                assert!(t.is_normal(&c));
                assert_eq!(core(&t, &c), c);
            }
        }
    }

    #[test]
    fn normal_subgroup_flags() {
        // every minimal normal subgroup of a p-group is central
        let fp = FamilyParams::q(3, 1, 0, 1, 2).unwrap();
        let g = build_candidate(&fp).unwrap();
        let t = table_of(&g);
        let normals = normal_subgroups(&t);
        // trivial and whole group always present
        assert!(normals.iter().any(|(h, _)| h.order() == 1));
        assert!(normals.iter().any(|(h, _)| h.order() == t.order()));
        for (h, central) in &normals {
            if h.order() == 3 {
                assert!(central, "order-p normal subgroups are central");
            }
        }
        // <n> is normal
        let n_id = g.encode(&g.generator(4)) as usize;
        let n_sub = t.closure(&[n_id]);
        assert!(normals.iter().any(|(h, _)| h.elements == n_sub));
    }

    #[test]
    fn cache_roundtrip_and_revalidation() {
        let q = build_quotient(QuotientName::Q81, 3).unwrap();
        let t = table_of(&q);
        let dir = tempfile::tempdir().unwrap();
        let layers = all_subgroups_cached(&t, Some(dir.path()));
        let reloaded = load_cached_lattice(&t, dir.path()).expect("cache should exist");
        assert_eq!(layers.len(), reloaded.len());
        for (a, b) in layers.iter().zip(&reloaded) {
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.elements, y.elements);
            }
        }
        // corrupt the cache: loader must reject it
        let hash = q.content_hash();
        let path = dir.path().join(format!("lattice-{hash}.json"));
        std::fs::write(&path, "{\"group_order\": 81, \"subgroups\": []}").unwrap();
        assert!(load_cached_lattice(&t, dir.path()).is_none());
    }
}
