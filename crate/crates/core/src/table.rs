//! Dense multiplication tables for small groups, bitset element sets,
//! quotient construction, and recovery of a polycyclic presentation from
//! a concrete group.
//!
//! Element ids are the mixed-radix encodings from `PcPresentation`. The
//! table build is recursive: with `y = g_i * y'` (`g_i` the leading
//! generator of `y`'s normal form, so `id(y') < id(y)`), the product
//! `x * y` is `(x * g_i) * y'`, and only the `x * g_i` columns need
//! collection.

use crate::pc::{GroupElement, PcError, PcPresentation};

/// Orders above this would overflow the u16 table entries; in practice the
/// largest group handled densely is 5^5 = 3125.
pub const MAX_TABLE_ORDER: u64 = 16384;

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("group order {0} exceeds dense-table limit {MAX_TABLE_ORDER}")]
    TooLarge(u64),
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("element set is not closed under multiplication")]
    NotClosed,
    #[error("extracted presentation failed validation: {0}")]
    Extraction(String),
    #[error(transparent)]
    Pc(#[from] PcError),
}

/// Set of element ids, packed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitset {
    words: Vec<u64>,
    len: usize,
}

impl Bitset {
    pub fn new(universe: usize) -> Self {
        Bitset {
            words: vec![0; universe.div_ceil(64)],
            len: universe,
        }
    }

    pub fn insert(&mut self, i: usize) -> bool {
        let (w, b) = (i / 64, i % 64);
        let had = self.words[w] >> b & 1 == 1;
        self.words[w] |= 1 << b;
        !had
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn intersect_with(&mut self, other: &Bitset) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn union_with(&mut self, other: &Bitset) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn is_subset(&self, other: &Bitset) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    /// Only the identity bit is set.
    pub fn is_trivial(&self) -> bool {
        self.count() == 1 && self.contains(0)
    }
}

/// A group of order at most `MAX_TABLE_ORDER` with full multiplication,
/// inverse, and element-order tables.
pub struct GroupTable {
    prime: u32,
    order: usize,
    mul: Vec<u16>,
    inv: Vec<u16>,
    elem_order: Vec<u32>,
    pres: PcPresentation,
}

impl GroupTable {
    pub fn from_presentation(pres: &PcPresentation) -> Result<Self, TableError> {
        let order64 = pres.order();
        if order64 > MAX_TABLE_ORDER {
            return Err(TableError::TooLarge(order64));
        }
        let order = order64 as usize;
        let n = pres.ngens();
        let p = pres.prime();

        // times_gen[x * n + i] = id(x * g_i), the only products needing
        // collection
        let mut times_gen = vec![0u16; order * n];
        for x in 0..order {
            let ex = pres.decode(x as u64);
            for i in 0..n {
                let prod = pres.multiply(&ex, &pres.generator(i));
                times_gen[x * n + i] = pres.encode(&prod) as u16;
            }
        }

        // leading generator and predecessor id of every non-identity y
        let mut radix = vec![1u64; n];
        for i in (0..n - 1).rev() {
            radix[i] = radix[i + 1] * p as u64;
        }
        let mut mul = vec![0u16; order * order];
        for x in 0..order {
            mul[x * order] = x as u16; // y = identity
        }
        for y in 1..order {
            let ey = pres.decode(y as u64);
            let lead = ey.exponents.iter().position(|&e| e > 0).unwrap();
            let y_rest = y as u64 - radix[lead];
            debug_assert!((y_rest as usize) < y);
            for x in 0..order {
                let xg = times_gen[x * n + lead] as usize;
                mul[x * order + y] = mul[xg * order + y_rest as usize];
            }
        }

        let mut inv = vec![0u16; order];
        for x in 0..order {
            let y = (0..order)
                .find(|&y| mul[x * order + y] == 0)
                .expect("every element has an inverse");
            inv[x] = y as u16;
        }

        let mut elem_order = vec![0u32; order];
        elem_order[0] = 1;
        for x in 1..order {
            let mut k = 1u32;
            let mut acc = x;
            while acc != 0 {
                acc = mul[acc * order + x] as usize;
                k += 1;
            }
            elem_order[x] = k;
        }

        Ok(GroupTable {
            prime: p,
            order,
            mul,
            inv,
            elem_order,
            pres: pres.clone(),
        })
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn presentation(&self) -> &PcPresentation {
        &self.pres
    }

    #[inline]
    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.mul[x * self.order + y] as usize
    }

    #[inline]
    pub fn inv(&self, x: usize) -> usize {
        self.inv[x] as usize
    }

    pub fn element_order(&self, x: usize) -> u32 {
        self.elem_order[x]
    }

    pub fn pow(&self, x: usize, e: u32) -> usize {
        let mut acc = 0usize;
        for _ in 0..e {
            acc = self.mul(acc, x);
        }
        acc
    }

    pub fn conjugate(&self, x: usize, g: usize) -> usize {
        self.mul(self.mul(self.inv(g), x), g)
    }

    pub fn commutator(&self, x: usize, y: usize) -> usize {
        self.mul(
            self.mul(self.inv(x), self.inv(y)),
            self.mul(x, y),
        )
    }

    /// Ids of the pc generators.
    pub fn generator_ids(&self) -> Vec<usize> {
        (0..self.pres.ngens())
            .map(|i| self.pres.encode(&self.pres.generator(i)) as usize)
            .collect()
    }

    /// Subgroup generated by the given element ids.
    pub fn closure(&self, gens: &[usize]) -> Bitset {
        let mut set = Bitset::new(self.order);
        set.insert(0);
        let mut frontier = vec![0usize];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        set
    }

    /// Extends a subgroup (given as a bitset) by one further generator.
    pub fn extend_closure(&self, base: &Bitset, g: usize) -> Bitset {
        let mut set = base.clone();
        let mut frontier: Vec<usize> = base.iter().collect();
        while let Some(x) = frontier.pop() {
            let y = self.mul(x, g);
            if set.insert(y) {
                frontier.push(y);
            }
        }
        // close under the original subgroup too: multiply new elements by
        // base generators until stable
        let base_elems: Vec<usize> = base.iter().collect();
        let mut frontier: Vec<usize> = set.iter().collect();
        while let Some(x) = frontier.pop() {
            for &b in &base_elems {
                let y = self.mul(x, b);
                if set.insert(y) {
                    frontier.push(y);
                }
            }
            let y = self.mul(x, g);
            if set.insert(y) {
                frontier.push(y);
            }
        }
        set
    }

    /// Center of the group.
    pub fn center(&self) -> Bitset {
        let gens = self.generator_ids();
        let mut set = Bitset::new(self.order);
        for x in 0..self.order {
            if gens.iter().all(|&g| self.mul(x, g) == self.mul(g, x)) {
                set.insert(x);
            }
        }
        set
    }

    /// Derived subgroup.
    pub fn derived_subgroup(&self) -> Bitset {
        let gens = self.generator_ids();
        let mut comms = Vec::new();
        for &a in &gens {
            for &b in &gens {
                let c = self.commutator(a, b);
                if c != 0 {
                    comms.push(c);
                }
            }
        }
        // normal closure: commutator subgroup of the generators is already
        // normal in a group generated by them once closed under conjugation
        let mut set = self.closure(&comms);
        loop {
            let mut extra = Vec::new();
            for x in set.iter() {
                for &g in &gens {
                    let y = self.conjugate(x, g);
                    if !set.contains(y) {
                        extra.push(y);
                    }
                }
            }
            if extra.is_empty() {
                break;
            }
            let all: Vec<usize> = set.iter().chain(extra.into_iter()).collect();
            set = self.closure(&all);
        }
        set
    }

    /// Image of the p-th power map as a subgroup (closure of all x^p).
    pub fn power_subgroup(&self) -> Bitset {
        let powers: Vec<usize> = (0..self.order)
            .map(|x| self.pow(x, self.prime))
            .filter(|&y| y != 0)
            .collect();
        self.closure(&powers)
    }

    /// Whether the id set is closed under multiplication and inversion.
    pub fn is_subgroup(&self, set: &Bitset) -> bool {
        if !set.contains(0) {
            return false;
        }
        let elems: Vec<usize> = set.iter().collect();
        elems
            .iter()
            .all(|&x| elems.iter().all(|&y| set.contains(self.mul(x, y))))
    }

    /// Whether the subgroup is normal.
    pub fn is_normal(&self, set: &Bitset) -> bool {
        let gens = self.generator_ids();
        set.iter()
            .all(|x| gens.iter().all(|&g| set.contains(self.conjugate(x, g))))
    }

    /// Exponent of the group.
    pub fn exponent(&self) -> u32 {
        (0..self.order).map(|x| self.elem_order[x]).max().unwrap_or(1)
    }

    /// Abelian invariants (cyclic factor orders, descending) of an abelian
    /// subgroup given by a bitset; derived from the counts of elements of
    /// order dividing p^k.
    pub fn abelian_invariants(&self, set: &Bitset) -> Vec<u32> {
        let p = self.prime as u64;
        let size = set.count() as u64;
        // s_k = number of elements with x^(p^k) = 1
        let mut s = vec![1u64];
        let mut k = 1u32;
        loop {
            let pk = p.pow(k) as u32;
            let count = set.iter().filter(|&x| pk % self.elem_order[x] == 0).count() as u64;
            s.push(count);
            if count == size {
                break;
            }
            k += 1;
        }
        // rank at layer k: log_p(s_{k+1}/s_k) counts factors of order > p^k
        let mut invs = Vec::new();
        for k in 0..s.len() - 1 {
            let ratio = s[k + 1] / s[k];
            let mut r = 0u32;
            let mut t = ratio;
            while t > 1 {
                t /= p;
                r += 1;
            }
            // r = number of cyclic factors of order > p^k
            invs.push(r);
        }
        // invs[k] = #factors with order >= p^(k+1); convert to factor list
        let mut out = Vec::new();
        for k in (0..invs.len()).rev() {
            let here = invs[k] - if k + 1 < invs.len() { invs[k + 1] } else { 0 };
            for _ in 0..here {
                out.push(p.pow(k as u32 + 1) as u32);
            }
        }
        out
    }
}

/// A quotient G/N realised concretely: a presentation for the quotient and
/// the images of the original pc generators in it.
pub struct Quotient {
    pub pres: PcPresentation,
    /// Image of original generator i as an element of `pres`.
    pub generator_images: Vec<GroupElement>,
}

/// Quotient of `table`'s group by the normal subgroup `n`.
pub fn quotient(table: &GroupTable, n: &Bitset) -> Result<Quotient, TableError> {
    if !table.is_subgroup(n) {
        return Err(TableError::NotClosed);
    }
    if !table.is_normal(n) {
        return Err(TableError::NotNormal);
    }
    let order = table.order();
    let nsize = n.count();
    let qorder = order / nsize;

    // coset index per element; reps are minimal ids, discovered ascending
    let mut coset = vec![usize::MAX; order];
    let mut reps = Vec::with_capacity(qorder);
    for x in 0..order {
        if coset[x] != usize::MAX {
            continue;
        }
        let c = reps.len();
        reps.push(x);
        for k in n.iter() {
            coset[table.mul(x, k)] = c;
        }
    }
    debug_assert_eq!(reps.len(), qorder);

    let qmul = |a: usize, b: usize| coset[table.mul(reps[a], reps[b])];
    extract_presentation_with_images(
        table.prime(),
        qorder,
        &qmul,
        &table
            .generator_ids()
            .iter()
            .map(|&g| coset[g])
            .collect::<Vec<_>>(),
    )
}

/// Polycyclic presentation for a p-group given abstractly by element ids
/// 0..order (0 = identity) and a multiplication function.
pub fn present_abstract_group(
    p: u32,
    order: usize,
    mul: &dyn Fn(usize, usize) -> usize,
) -> Result<Quotient, TableError> {
    extract_presentation_with_images(p, order, mul, &[])
}

/// Builds a polycyclic presentation for a p-group given abstractly by a
/// multiplication function, together with the images of a designated list
/// of elements. Generators are chosen along an ascending central series,
/// so each relation is supported on strictly later pc generators.
fn extract_presentation_with_images(
    p: u32,
    order: usize,
    mul: &dyn Fn(usize, usize) -> usize,
    marked: &[usize],
) -> Result<Quotient, TableError> {
    // helper tables for the quotient group
    let mut inv = vec![0usize; order];
    for x in 0..order {
        inv[x] = (0..order).find(|&y| mul(x, y) == 0).unwrap();
    }
    let conj = |x: usize, g: usize| mul(mul(inv[g], x), g);
    let powp = |x: usize| {
        let mut acc = 0usize;
        for _ in 0..p {
            acc = mul(acc, x);
        }
        acc
    };

    // ascending central series, picking minimal-id elements that are
    // central modulo the current subgroup and whose p-th power lies in it
    let mut chain: Vec<Bitset> = vec![{
        let mut b = Bitset::new(order);
        b.insert(0);
        b
    }];
    let mut picks: Vec<usize> = Vec::new(); // deepest first
    while chain.last().unwrap().count() < order {
        let cur = chain.last().unwrap();
        let z = (1..order)
            .find(|&z| {
                !cur.contains(z)
                    && cur.contains(powp(z))
                    && (0..order).all(|g| cur.contains(mul(mul(inv[z], inv[g]), mul(z, g))))
            })
            .ok_or_else(|| TableError::Extraction("no central extension element".into()))?;
        // next subgroup = union of cosets z^e * cur
        let mut next = cur.clone();
        let mut ze = 0usize;
        for _ in 1..p {
            ze = mul(ze, z);
            for c in cur.iter() {
                next.insert(mul(ze, c));
            }
        }
        picks.push(z);
        chain.push(next);
    }
    let _ = conj;

    // pc sequence: last pick is g_1 (top of the series)
    let gens: Vec<usize> = picks.iter().rev().copied().collect();
    let n = gens.len();
    debug_assert_eq!(p.pow(n as u32) as usize, order);

    // subgroup bitsets H_i = <g_i, ..., g_n> = chain[n - i] by construction
    let tail = |i: usize| &chain[n - i];

    // normal form of an arbitrary element
    let normal_form = |mut x: usize| -> Vec<u32> {
        let mut exps = vec![0u32; n];
        for i in 0..n {
            if tail(i + 1).contains(x) {
                continue;
            }
            let gi_inv = inv[gens[i]];
            let mut e = 0u32;
            while !tail(i + 1).contains(x) {
                x = mul(gi_inv, x);
                e += 1;
                if e > p {
                    unreachable!("membership walk failed");
                }
            }
            exps[i] = e;
        }
        debug_assert_eq!(x, 0);
        exps
    };

    let mut power = std::collections::HashMap::new();
    let mut comm = std::collections::HashMap::new();
    for i in 0..n {
        let ppow = powp(gens[i]);
        if ppow != 0 {
            power.insert(i, normal_form(ppow));
        }
        for j in i + 1..n {
            // [g_j, g_i]
            let c = mul(mul(inv[gens[j]], inv[gens[i]]), mul(gens[j], gens[i]));
            if c != 0 {
                comm.insert((j, i), normal_form(c));
            }
        }
    }
    let labels: Vec<String> = (1..=n).map(|i| format!("q{i}")).collect();
    let pres = PcPresentation::new(p, n, labels, power, comm)?;
    let generator_images = marked
        .iter()
        .map(|&x| GroupElement {
            exponents: normal_form(x),
        })
        .collect();
    Ok(Quotient {
        pres,
        generator_images,
    })
}
