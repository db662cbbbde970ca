//! Exhaustive enumeration of small labeled structures on `{1, ..., k}`.

use crate::classes::ClassId;
use crate::structure::SStructure;
use crate::vset::{VSet, Vertex};

/// Every structure on exactly `{1, ..., k}`, in order of the edge-set mask.
pub fn all_structures(arity: usize, k: usize) -> impl Iterator<Item = SStructure> {
    let u = VSet::range(1, k);
    let slots: Vec<VSet> = u.k_subsets(arity).collect();
    assert!(slots.len() < 32, "too many edge sets to enumerate");
    (0..1u64 << slots.len()).map(move |mask| {
        let edges = (0..slots.len()).filter(|&i| mask >> i & 1 == 1).map(|i| slots[i]);
        SStructure::new(arity, u, edges).expect("valid edges")
    })
}

/// Every member of a class closed under substructures on `{1, ..., j}` for
/// `j = 0, ..., k`, built vertex by vertex from members on fewer vertices.
pub fn hereditary_members(class: ClassId, arity: usize, k: usize) -> Vec<SStructure> {
    let mut level = vec![SStructure::empty(arity)];
    let mut out = level.clone();
    for j in 1..=k {
        let v = j as Vertex;
        let u = VSet::range(1, j);
        let mut next = Vec::new();
        for a in &level {
            let stubs: Vec<VSet> = a.universe().k_subsets(arity - 1).map(|t| t.with(v)).collect();
            for mask in 0..1u64 << stubs.len() {
                let chosen = (0..stubs.len()).filter(|&i| mask >> i & 1 == 1).map(|i| stubs[i]);
                let d = SStructure::new(arity, u, a.edges().iter().copied().chain(chosen)).expect("valid edges");
                if d.class_member(class) {
                    next.push(d);
                }
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

/// Every family of subsets of `{1, ..., k}` of size at least `arity` that
/// meet pairwise in at most `arity - 2` points, as the structure whose
/// maximal cliques are the family.
///
/// Maximal cliques of a geometric structure meet in at most `n - 2` points,
/// so filtering this family by `GEO` enumerates the geometric structures on
/// `{1, ..., k}`.
pub fn linear_families(arity: usize, k: usize) -> Vec<SStructure> {
    let u = VSet::range(1, k);
    let mut blocks: Vec<VSet> = (arity..=k).flat_map(|t| u.k_subsets(t)).collect();
    blocks.sort_unstable();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    families_rec(arity, u, &blocks, 0, &mut chosen, &mut out);
    out
}

fn families_rec(arity: usize, u: VSet, blocks: &[VSet], from: usize, chosen: &mut Vec<VSet>, out: &mut Vec<SStructure>) {
    out.push(SStructure::from_cliques(arity, u, chosen.iter().copied()).expect("valid blocks"));
    for i in from..blocks.len() {
        let b = blocks[i];
        if chosen.iter().all(|c| c.intersection(b).len() + 2 <= arity) {
            chosen.push(b);
            families_rec(arity, u, blocks, i + 1, chosen, out);
            chosen.pop();
        }
    }
}

/// Geometric structures on `{1, ..., j}` for `j = 0, ..., k`.
pub fn geometric_structures(arity: usize, k: usize) -> Vec<SStructure> {
    (0..=k)
        .flat_map(|j| linear_families(arity, j))
        .filter(|a| a.class_member(ClassId::Geo))
        .collect()
}
