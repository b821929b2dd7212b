//! Exact computation with finite p-groups of order at most p^5:
//! polycyclic presentations, subgroup lattices, minimal faithful
//! permutation degrees, and the classification of the groups of order
//! p^5 whose minimal degree is smaller than that of some quotient.

pub mod families;
pub mod classify;
pub mod groupspec;
pub mod invariants;
pub mod iso;
pub mod mindeg;
pub mod pc;
pub mod subgroup;
pub mod table;
