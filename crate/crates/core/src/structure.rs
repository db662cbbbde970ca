//! Finite structures carrying one symmetric irreflexive `n`-ary relation.
//!
//! The relation is stored as a set of `n`-element vertex subsets ("edges");
//! the tuple relation is the orbit of each edge under all `n!` permutations
//! and is never materialized.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vset::{VSet, Vertex};

/// Largest universe any structure may have. Subset tables are `2^|A|` long.
pub const MAX_VERTICES: usize = 16;

/// `max(0, m - (n - 1))`.
pub fn card_star(m: usize, n: usize) -> usize {
    (m + 1).saturating_sub(n)
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "Repr", into = "Repr")]
pub struct SStructure {
    arity: usize,
    universe: VSet,
    edges: Vec<VSet>,
    cliques: Vec<VSet>,
    clq0: bool,
}

impl SStructure {
    /// Builds a structure after validating arity, edge sizes and containment.
    pub fn new<I: IntoIterator<Item = VSet>>(arity: usize, universe: VSet, edges: I) -> Result<Self> {
        if arity < 2 {
            return Err(Error::invalid(format!("arity must be at least 2, got {arity}")));
        }
        if universe.len() > MAX_VERTICES {
            return Err(Error::ResourceLimit(format!(
                "universe of {} vertices exceeds the cap of {MAX_VERTICES}",
                universe.len()
            )));
        }
        let mut edges: Vec<VSet> = edges.into_iter().collect();
        for &e in &edges {
            if e.len() != arity {
                return Err(Error::invalid_with(
                    format!("edge must have exactly {arity} distinct vertices"),
                    e,
                ));
            }
            if !e.is_subset(universe) {
                return Err(Error::invalid_with("edge is not inside the universe", e));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self::from_sorted_edges(arity, universe, edges))
    }

    pub(crate) fn from_sorted_edges(arity: usize, universe: VSet, edges: Vec<VSet>) -> Self {
        let cliques = compute_maximal_cliques(arity, &edges);
        let clq0 = pairwise_small(&cliques, arity);
        SStructure {
            arity,
            universe,
            edges,
            cliques,
            clq0,
        }
    }

    /// Convenience constructor from vertex and edge lists.
    pub fn from_lists(arity: usize, vertices: &[Vertex], edges: &[&[Vertex]]) -> Result<Self> {
        let universe = checked_set(vertices)?;
        let mut es = Vec::with_capacity(edges.len());
        for e in edges {
            let s = checked_set(e)?;
            if s.len() != e.len() {
                return Err(Error::invalid_with("edge repeats a vertex", s));
            }
            es.push(s);
        }
        Self::new(arity, universe, es)
    }

    pub fn empty(arity: usize) -> Self {
        Self::from_sorted_edges(arity.max(2), VSet::EMPTY, Vec::new())
    }

    pub fn edgeless(arity: usize, universe: VSet) -> Result<Self> {
        Self::new(arity, universe, [])
    }

    /// The structure on `universe` whose edges are all `n`-subsets of the given sets.
    pub fn from_cliques<I: IntoIterator<Item = VSet>>(arity: usize, universe: VSet, family: I) -> Result<Self> {
        let mut edges = Vec::new();
        for k in family {
            edges.extend(k.k_subsets(arity));
        }
        Self::new(arity, universe, edges)
    }

    /// A single clique on `vertices`.
    pub fn clique(arity: usize, vertices: &[Vertex]) -> Result<Self> {
        let u = checked_set(vertices)?;
        Self::from_cliques(arity, u, [u])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn universe(&self) -> VSet {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.universe.len()
    }

    pub fn is_empty(&self) -> bool {
        self.universe.is_empty()
    }

    /// Edges in canonical subset order.
    pub fn edges(&self) -> &[VSet] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, e: VSet) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// The maximal cliques, sorted in canonical subset order.
    pub fn maximal_cliques(&self) -> &[VSet] {
        &self.cliques
    }

    /// True when distinct maximal cliques meet in fewer than `n` vertices.
    pub fn has_small_clique_overlaps(&self) -> bool {
        self.clq0
    }

    /// Whether `k` is a clique: `|k| >= n` and every `n`-subset is an edge.
    pub fn is_clique(&self, k: VSet) -> Result<bool> {
        self.check_subset(k)?;
        if k.len() < self.arity {
            return Err(Error::invalid_with(
                format!("a clique candidate needs at least {} vertices", self.arity),
                k,
            ));
        }
        Ok(k.k_subsets(self.arity).all(|e| self.has_edge(e)))
    }

    pub fn s_value(&self) -> usize {
        self.cliques
            .iter()
            .map(|k| card_star(k.len(), self.arity))
            .sum()
    }

    pub fn predim(&self) -> i64 {
        self.len() as i64 - self.s_value() as i64
    }

    /// Predimension of the substructure induced on `x`.
    pub fn predim_of(&self, x: VSet) -> Result<i64> {
        self.check_subset(x)?;
        Ok(self.predim_of_unchecked(x))
    }

    pub(crate) fn predim_of_unchecked(&self, x: VSet) -> i64 {
        let n = self.arity;
        if self.clq0 {
            let s: usize = self
                .cliques
                .iter()
                .map(|k| card_star(k.intersection(x).len(), n))
                .sum();
            return x.len() as i64 - s as i64;
        }
        let mut parts: Vec<VSet> = self
            .cliques
            .iter()
            .map(|k| k.intersection(x))
            .filter(|k| k.len() >= n)
            .collect();
        parts.sort_unstable_by_key(|k| std::cmp::Reverse(k.len()));
        let mut kept: Vec<VSet> = Vec::with_capacity(parts.len());
        for p in parts {
            if !kept.iter().any(|q| p.is_subset(*q)) {
                kept.push(p);
            }
        }
        let s: usize = kept.iter().map(|k| card_star(k.len(), n)).sum();
        x.len() as i64 - s as i64
    }

    /// `predim(A) - predim(B)` for the induced substructure on `b`.
    pub fn predim_rel(&self, b: VSet) -> Result<i64> {
        self.check_subset(b)?;
        Ok(self.predim() - self.predim_of_unchecked(b))
    }

    /// Whether `b` is strong (self-sufficient) in `self`.
    pub fn is_strong(&self, b: VSet) -> Result<bool> {
        Ok(self.strong_witness(b)?.is_none())
    }

    /// A superset `x` of `b` with `predim(x) < predim(b)`, if one exists.
    ///
    /// The search is exhaustive over the supersets of `b`, smallest first, so
    /// the reported witness is inclusion-minimal.
    pub fn strong_witness(&self, b: VSet) -> Result<Option<VSet>> {
        self.check_subset(b)?;
        let base = self.predim_of_unchecked(b);
        let rest = self.universe.difference(b);
        for t in 1..=rest.len() {
            for s in rest.k_subsets(t) {
                let x = b.union(s);
                if self.predim_of_unchecked(x) < base {
                    return Ok(Some(x));
                }
            }
        }
        Ok(None)
    }

    /// The smallest strong superset of `x`.
    ///
    /// Built by repeatedly absorbing an inclusion-minimal superset with
    /// negative relative predimension. For structures with small clique
    /// overlaps the result is checked against the least minimizer of the
    /// predimension over supersets of `x`, which is unique by submodularity.
    pub fn self_sufficient_closure(&self, x: VSet) -> Result<VSet> {
        self.check_subset(x)?;
        let mut y = x;
        while let Some(z) = self.strong_witness(y)? {
            y = z;
        }
        if self.clq0 {
            let least = self.least_minimizer(x);
            if least != y {
                return Err(Error::Invariant(format!(
                    "closure of {x} by absorption is {y} but the least minimizer is {least}"
                )));
            }
        }
        Ok(y)
    }

    fn least_minimizer(&self, x: VSet) -> VSet {
        let rest = self.universe.difference(x);
        let mut best = i64::MAX;
        let mut inter = self.universe;
        for s in rest.subsets() {
            let y = x.union(s);
            let d = self.predim_of_unchecked(y);
            match d.cmp(&best) {
                Ordering::Less => {
                    best = d;
                    inter = y;
                }
                Ordering::Equal => inter = inter.intersection(y),
                Ordering::Greater => {}
            }
        }
        inter
    }

    /// The substructure induced on `x`.
    pub fn induced(&self, x: VSet) -> Result<SStructure> {
        self.check_subset(x)?;
        Ok(self.induced_unchecked(x))
    }

    pub(crate) fn induced_unchecked(&self, x: VSet) -> SStructure {
        let edges: Vec<VSet> = self.edges.iter().copied().filter(|e| e.is_subset(x)).collect();
        Self::from_sorted_edges(self.arity, x, edges)
    }

    /// Renames vertices through an injective map.
    pub fn relabel<F: Fn(Vertex) -> Vertex>(&self, f: F) -> Result<SStructure> {
        let map = |s: VSet| -> Result<VSet> {
            VSet::try_from_iter(s.iter().map(&f)).ok_or_else(|| Error::invalid("relabel target out of range"))
        };
        let universe = map(self.universe)?;
        if universe.len() != self.universe.len() {
            return Err(Error::invalid("relabeling is not injective"));
        }
        let edges = self.edges.iter().map(|&e| map(e)).collect::<Result<Vec<_>>>()?;
        Self::new(self.arity, universe, edges)
    }

    /// Same universe, edges replaced.
    pub fn with_edges<I: IntoIterator<Item = VSet>>(&self, edges: I) -> Result<SStructure> {
        Self::new(self.arity, self.universe, edges)
    }

    pub(crate) fn check_subset(&self, x: VSet) -> Result<()> {
        if x.is_subset(self.universe) {
            Ok(())
        } else {
            Err(Error::invalid_with(
                "set is not contained in the universe",
                x.difference(self.universe),
            ))
        }
    }

    /// Predimension of every subset, indexed by masks local to the universe.
    pub(crate) fn predim_table(&self) -> Vec<i32> {
        let u = self.universe;
        let k = u.len();
        let n = self.arity;
        let local: Vec<u32> = self.cliques.iter().map(|c| c.compress(u)).collect();
        let mut out = vec![0i32; 1 << k];
        if self.clq0 {
            for (mask, slot) in out.iter_mut().enumerate() {
                let m = mask as u32;
                let s: usize = local
                    .iter()
                    .map(|&c| card_star((c & m).count_ones() as usize, n))
                    .sum();
                *slot = m.count_ones() as i32 - s as i32;
            }
        } else {
            for (mask, slot) in out.iter_mut().enumerate() {
                *slot = self.predim_of_unchecked(VSet::expand(mask as u32, u)) as i32;
            }
        }
        out
    }

    /// `min { predim(Y) : X ⊆ Y ⊆ A }` for every `X`, local masks.
    pub(crate) fn dimension_table(&self) -> Vec<i32> {
        let mut t = self.predim_table();
        superset_min(&mut t, self.universe.len());
        t
    }
}

/// For every local mask `X`, the least minimizer of the predimension over
/// supersets of `X`, i.e. the self-sufficient closure for `CLQ0` structures.
pub(crate) fn closure_table(predim: &[i32], k: usize) -> Vec<u32> {
    let mut best: Vec<(i32, u32)> = predim.iter().enumerate().map(|(m, &d)| (d, m as u32)).collect();
    for i in 0..k {
        let bit = 1usize << i;
        for mask in 0..best.len() {
            if mask & bit == 0 {
                let (d_up, c_up) = best[mask | bit];
                let (d, c) = best[mask];
                if d_up < d {
                    best[mask] = (d_up, c_up);
                } else if d_up == d {
                    best[mask] = (d, c & c_up);
                }
            }
        }
    }
    best.into_iter().map(|(_, c)| c).collect()
}

/// In-place `t[X] = min over supersets Y of X of t[Y]`.
pub(crate) fn superset_min(t: &mut [i32], k: usize) {
    for i in 0..k {
        let bit = 1usize << i;
        for mask in 0..t.len() {
            if mask & bit == 0 {
                let up = t[mask | bit];
                if up < t[mask] {
                    t[mask] = up;
                }
            }
        }
    }
}

/// Whether `table[Y] >= table[b]` for every local superset `Y` of `b`.
pub(crate) fn strong_in_table(table: &[i32], b: u32) -> bool {
    let full = (table.len() - 1) as u32;
    let base = table[b as usize];
    let mut y = b;
    loop {
        if table[y as usize] < base {
            return false;
        }
        if y == full {
            return true;
        }
        y = (y + 1) | b;
    }
}

fn checked_set(vs: &[Vertex]) -> Result<VSet> {
    VSet::try_from_iter(vs.iter().copied())
        .ok_or_else(|| Error::invalid(format!("vertex identifiers must be below {}", crate::vset::VERTEX_LIMIT)))
}

fn pairwise_small(cliques: &[VSet], n: usize) -> bool {
    for (i, a) in cliques.iter().enumerate() {
        for b in &cliques[i + 1..] {
            if a.intersection(*b).len() >= n {
                return false;
            }
        }
    }
    true
}

/// Bron–Kerbosch over the down-closed family of sets all of whose `n`-subsets
/// are edges. `link[T]` holds the vertices `w` with `T ∪ {w}` an edge.
fn compute_maximal_cliques(n: usize, edges: &[VSet]) -> Vec<VSet> {
    if edges.is_empty() {
        return Vec::new();
    }
    let mut link: HashMap<u64, u64> = HashMap::new();
    let mut touched = VSet::EMPTY;
    for &e in edges {
        touched = touched.union(e);
        for v in e {
            *link.entry(e.without(v).bits()).or_default() |= 1u64 << v;
        }
    }
    let mut out = Vec::new();
    expand(n, &link, VSet::EMPTY, touched, VSet::EMPTY, &mut out);
    out.sort_unstable();
    out
}

fn expand(n: usize, link: &HashMap<u64, u64>, r: VSet, mut p: VSet, mut x: VSet, out: &mut Vec<VSet>) {
    if p.is_empty() {
        if x.is_empty() && r.len() >= n {
            out.push(r);
        }
        return;
    }
    for v in p {
        let mut allowed = !0u64;
        for t in r.k_subsets(n - 2) {
            allowed &= link.get(&t.with(v).bits()).copied().unwrap_or(0);
        }
        let allowed = VSet(allowed);
        expand(
            n,
            link,
            r.with(v),
            p.intersection(allowed).without(v),
            x.intersection(allowed),
            out,
        );
        p.remove(v);
        x.insert(v);
    }
}

/// Serialized form: sorted vertices and sorted edges.
#[derive(Serialize, Deserialize)]
struct Repr {
    arity: usize,
    vertices: Vec<Vertex>,
    edges: Vec<Vec<Vertex>>,
}

impl From<SStructure> for Repr {
    fn from(a: SStructure) -> Self {
        Repr {
            arity: a.arity,
            vertices: a.universe.to_vec(),
            edges: a.edges.iter().map(|e| e.to_vec()).collect(),
        }
    }
}

impl TryFrom<Repr> for SStructure {
    type Error = Error;

    fn try_from(r: Repr) -> Result<Self> {
        let edges: Vec<&[Vertex]> = r.edges.iter().map(|e| e.as_slice()).collect();
        SStructure::from_lists(r.arity, &r.vertices, &edges)
    }
}

impl PartialEq for SStructure {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.universe == other.universe && self.edges == other.edges
    }
}

impl Eq for SStructure {}

impl Hash for SStructure {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.arity.hash(state);
        self.universe.hash(state);
        self.edges.hash(state);
    }
}

impl Ord for SStructure {
    fn cmp(&self, other: &Self) -> Ordering {
        self.arity
            .cmp(&other.arity)
            .then(self.len().cmp(&other.len()))
            .then(self.universe.cmp(&other.universe))
            .then(self.edges.len().cmp(&other.edges.len()))
            .then_with(|| self.edges.cmp(&other.edges))
    }
}

impl PartialOrd for SStructure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for SStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}{} [", self.arity, self.universe)?;
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("]")
    }
}
