//! Finite (pre)geometries given by a materialized rank table.
//!
//! The geometry associated with a structure has rank
//! `rank(X) = min { predim(Y) : X ⊆ Y ⊆ A }`. From a geometry we can read off
//! its flats, its purity, the structure of dependent `n`-sets, and the `geo`
//! structure whose maximal cliques are the nontrivial closures of
//! `(n-1)`-sets.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{SStructure, MAX_VERTICES};
use crate::vset::VSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeometryKind {
    /// Every singleton and the empty set are closed.
    Geometry,
    Pregeometry,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Geometry {
    universe: VSet,
    rank: Vec<u8>,
    kind: GeometryKind,
}

/// A family of closed sets in an order compatible with inclusion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatFamily {
    pub flats: Vec<VSet>,
}

/// Result of checking the flatness inequality over bounded families of flats.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatnessReport {
    pub families_checked: u64,
    /// First family whose signed sum is positive, with that sum.
    pub violation: Option<(Vec<VSet>, i64)>,
}

impl FlatnessReport {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

impl Geometry {
    /// Builds a geometry from a rank function, validating the rank axioms.
    pub fn from_rank_fn<F: Fn(VSet) -> usize>(universe: VSet, f: F) -> Result<Self> {
        if universe.len() > MAX_VERTICES {
            return Err(Error::ResourceLimit(format!(
                "rank tables are limited to {MAX_VERTICES} points"
            )));
        }
        let rank: Vec<u8> = (0..1u32 << universe.len())
            .map(|m| f(VSet::expand(m, universe)) as u8)
            .collect();
        let g = Self::from_table(universe, rank);
        if let Some((x, why)) = g.axiom_violation() {
            return Err(Error::invalid_with(format!("not a rank function: {why}"), x));
        }
        Ok(g)
    }

    /// The free geometry: every set is independent.
    pub fn free(universe: VSet) -> Result<Self> {
        Self::from_rank_fn(universe, |x| x.len())
    }

    pub(crate) fn from_table(universe: VSet, rank: Vec<u8>) -> Self {
        let k = universe.len();
        let mut kind = GeometryKind::Geometry;
        'outer: for i in 0..k {
            if rank[1 << i] != 1 {
                kind = GeometryKind::Pregeometry;
                break;
            }
            for j in i + 1..k {
                if rank[1 << i | 1 << j] != 2 {
                    kind = GeometryKind::Pregeometry;
                    break 'outer;
                }
            }
        }
        Geometry { universe, rank, kind }
    }

    pub fn universe(&self) -> VSet {
        self.universe
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn is_geometry(&self) -> bool {
        self.kind == GeometryKind::Geometry
    }

    pub fn rank(&self, x: VSet) -> Result<usize> {
        self.check_subset(x)?;
        Ok(self.rank_local(x.compress(self.universe)))
    }

    pub(crate) fn rank_local(&self, m: u32) -> usize {
        self.rank[m as usize] as usize
    }

    /// `{ a : rank(X ∪ {a}) = rank(X) }`.
    pub fn closure(&self, x: VSet) -> Result<VSet> {
        self.check_subset(x)?;
        Ok(VSet::expand(self.closure_local(x.compress(self.universe)), self.universe))
    }

    pub(crate) fn closure_local(&self, m: u32) -> u32 {
        let r = self.rank[m as usize];
        let mut out = m;
        for i in 0..self.universe.len() {
            let b = 1u32 << i;
            if m & b == 0 && self.rank[(m | b) as usize] == r {
                out |= b;
            }
        }
        out
    }

    /// Every closed set, ordered by size and then canonically.
    pub fn flats(&self) -> FlatFamily {
        let mut flats: Vec<VSet> = (0..self.rank.len() as u32)
            .filter(|&m| self.closure_local(m) == m)
            .map(|m| VSet::expand(m, self.universe))
            .collect();
        flats.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        FlatFamily { flats }
    }

    /// The largest `m` (at most the number of points) such that every
    /// `m`-subset is independent.
    pub fn purity(&self) -> usize {
        let k = self.universe.len();
        let mut m = 0;
        while m < k {
            let next = m + 1;
            let all = (0..self.rank.len() as u32)
                .filter(|x| x.count_ones() as usize == next)
                .all(|x| self.rank[x as usize] as usize == next);
            if !all {
                break;
            }
            m = next;
        }
        m
    }

    /// Checks `Σ_{s ⊆ [k]} (-1)^{|s|} rank(E_s) ≤ 0` for every family of
    /// `k ≤ k_max` distinct flats, where `E_∅` is the closure of the union
    /// and `E_s` the intersection of the flats indexed by `s`.
    pub fn flatness_check(&self, k_max: usize) -> FlatnessReport {
        let flats: Vec<u32> = self
            .flats()
            .flats
            .iter()
            .map(|f| f.compress(self.universe))
            .collect();
        let mut checked = 0u64;
        let mut family: Vec<u32> = Vec::with_capacity(k_max);
        let violation = self.flat_families(&flats, 0, k_max, &mut family, &mut checked);
        FlatnessReport {
            families_checked: checked,
            violation: violation.map(|(fam, sum)| {
                (fam.into_iter().map(|m| VSet::expand(m, self.universe)).collect(), sum)
            }),
        }
    }

    fn flat_families(
        &self,
        flats: &[u32],
        from: usize,
        k_max: usize,
        family: &mut Vec<u32>,
        checked: &mut u64,
    ) -> Option<(Vec<u32>, i64)> {
        if !family.is_empty() {
            *checked += 1;
            let sum = self.signed_sum(family);
            if sum > 0 {
                return Some((family.clone(), sum));
            }
        }
        if family.len() == k_max {
            return None;
        }
        for i in from..flats.len() {
            family.push(flats[i]);
            let hit = self.flat_families(flats, i + 1, k_max, family, checked);
            family.pop();
            if hit.is_some() {
                return hit;
            }
        }
        None
    }

    fn signed_sum(&self, family: &[u32]) -> i64 {
        let k = family.len();
        let union = family.iter().fold(0u32, |a, &b| a | b);
        let mut sum = self.rank_local(self.closure_local(union)) as i64;
        for s in 1u32..1 << k {
            let inter = (0..k)
                .filter(|&i| s >> i & 1 == 1)
                .fold(u32::MAX, |a, i| a & family[i]);
            let r = self.rank_local(inter) as i64;
            if s.count_ones() % 2 == 1 {
                sum -= r;
            } else {
                sum += r;
            }
        }
        sum
    }

    /// The structure on the same points whose edges are the dependent `n`-sets.
    pub fn dependent_n_structure(&self, n: usize) -> Result<SStructure> {
        let edges: Vec<VSet> = self
            .universe
            .k_subsets(n)
            .filter(|x| self.rank_local(x.compress(self.universe)) < n)
            .collect();
        let s = SStructure::new(n, self.universe, edges)?;
        if !s.has_small_clique_overlaps() {
            return Err(Error::Invariant(format!(
                "dependent {n}-set structure has maximal cliques meeting in {n} or more points"
            )));
        }
        Ok(s)
    }

    /// The structure whose maximal cliques are the closures of `(n-1)`-sets
    /// that are not themselves closed.
    ///
    /// Requires a geometry with purity at least `n - 1`. Flatness is not
    /// checked here (see [`Geometry::geo_operator_checked`]); the declared
    /// clique family is always compared against the maximal cliques of the
    /// result.
    pub fn geo_operator(&self, n: usize) -> Result<SStructure> {
        if n < 3 {
            return Err(Error::invalid(format!("the geo operator needs arity at least 3, got {n}")));
        }
        if !self.is_geometry() {
            return Err(Error::invalid("the geo operator is defined on geometries, got a pregeometry"));
        }
        let purity = self.purity();
        if purity < n - 1 && purity < self.universe.len() {
            let w = self
                .universe
                .k_subsets(purity + 1)
                .find(|x| self.rank_local(x.compress(self.universe)) <= purity)
                .unwrap_or(self.universe);
            return Err(Error::invalid_with(
                format!("geometry is only {purity}-pure, need {}", n - 1),
                w,
            ));
        }
        let mut family: Vec<VSet> = self
            .universe
            .k_subsets(n - 1)
            .filter_map(|b| {
                let c = VSet::expand(self.closure_local(b.compress(self.universe)), self.universe);
                (c != b).then_some(c)
            })
            .collect();
        family.sort_unstable();
        family.dedup();
        let out = SStructure::from_cliques(n, self.universe, family.iter().copied())?;
        if out.maximal_cliques() != family.as_slice() {
            return Err(Error::Invariant(format!(
                "declared cliques {family:?} differ from maximal cliques {:?}",
                out.maximal_cliques()
            )));
        }
        Ok(out)
    }

    /// [`Geometry::geo_operator`] preceded by a flatness check up to `k_max`.
    pub fn geo_operator_checked(&self, n: usize, k_max: usize) -> Result<SStructure> {
        let report = self.flatness_check(k_max);
        if let Some((fam, sum)) = report.violation {
            let union = fam.iter().fold(VSet::EMPTY, |a, &b| a.union(b));
            return Err(Error::invalid_with(
                format!("geometry is not flat: family {fam:?} has signed sum {sum}"),
                union,
            ));
        }
        self.geo_operator(n)
    }

    /// The subgeometry on `sub`.
    pub fn restrict(&self, sub: VSet) -> Result<Geometry> {
        self.check_subset(sub)?;
        let rank: Vec<u8> = (0..1u32 << sub.len())
            .map(|m| self.rank[VSet::expand(m, sub).compress(self.universe) as usize])
            .collect();
        Ok(Self::from_table(sub, rank))
    }

    /// Equality of rank tables.
    pub fn equals(&self, other: &Geometry) -> Result<bool> {
        if self.universe != other.universe {
            return Err(Error::invalid_with(
                "geometries live on different universes",
                self.universe.union(other.universe).difference(self.universe.intersection(other.universe)),
            ));
        }
        Ok(self.rank == other.rank)
    }

    /// First subset where the two rank tables disagree.
    pub fn first_difference(&self, other: &Geometry) -> Result<Option<VSet>> {
        self.equals(other)?;
        Ok((0..self.rank.len())
            .find(|&m| self.rank[m] != other.rank[m])
            .map(|m| VSet::expand(m as u32, self.universe)))
    }

    /// Checks normalization, unit increase and submodularity exhaustively.
    pub fn axiom_violation(&self) -> Option<(VSet, &'static str)> {
        let k = self.universe.len();
        let full = (1u32 << k) - 1;
        let r = |m: u32| self.rank[m as usize] as i32;
        if r(0) != 0 {
            return Some((VSet::EMPTY, "rank of the empty set is not 0"));
        }
        for m in 0..=full {
            for i in 0..k {
                let b = 1u32 << i;
                if m & b == 0 {
                    let d = r(m | b) - r(m);
                    if !(0..=1).contains(&d) {
                        return Some((VSet::expand(m | b, self.universe), "rank does not grow by 0 or 1"));
                    }
                }
            }
        }
        // Local submodularity r(X+a) + r(X+b) >= r(X+a+b) + r(X) implies the
        // global inequality for functions with unit increase.
        for m in 0..=full {
            for i in 0..k {
                for j in i + 1..k {
                    let (a, b) = (1u32 << i, 1u32 << j);
                    if m & (a | b) != 0 {
                        continue;
                    }
                    if r(m | a) + r(m | b) < r(m | a | b) + r(m) {
                        return Some((VSet::expand(m | a | b, self.universe), "rank is not submodular"));
                    }
                }
            }
        }
        None
    }

    fn check_subset(&self, x: VSet) -> Result<()> {
        if x.is_subset(self.universe) {
            Ok(())
        } else {
            Err(Error::invalid_with(
                "set is not contained in the geometry",
                x.difference(self.universe),
            ))
        }
    }
}

impl fmt::Debug for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Geometry({}, {:?}, rank {})", self.universe, self.kind, self.rank.last().copied().unwrap_or(0))
    }
}

/// The geometry associated with `a`.
///
/// Requires arity at least 3 and every singleton strong. The result is
/// flagged as a pregeometry when some pair has rank 1.
pub fn geometry_of(a: &SStructure) -> Result<Geometry> {
    if a.arity() < 3 {
        return Err(Error::invalid(format!(
            "associated geometries are only extracted for arity at least 3, got {}",
            a.arity()
        )));
    }
    let dims = a.dimension_table();
    let u = a.universe();
    for v in u {
        if dims[VSet::singleton(v).compress(u) as usize] < 1 {
            return Err(Error::invalid_with("singleton is not strong", VSet::singleton(v)));
        }
    }
    let rank = dims.into_iter().map(|d| d as u8).collect();
    Ok(Geometry::from_table(u, rank))
}

/// Rank-table equality of two geometries on the same universe.
pub fn geometries_equal(g1: &Geometry, g2: &Geometry) -> Result<bool> {
    g1.equals(g2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vset::Vertex;

    fn s(v: &[Vertex]) -> VSet {
        v.iter().collect()
    }

    fn k4() -> SStructure {
        SStructure::clique(3, &[1, 2, 3, 4]).unwrap()
    }

    #[test]
    fn edgeless_gives_free_geometry() {
        let a = SStructure::edgeless(3, s(&[1, 2, 3, 4, 5])).unwrap();
        let g = geometry_of(&a).unwrap();
        for x in a.universe().subsets() {
            assert_eq!(g.rank(x).unwrap(), x.len());
        }
        assert!(g.equals(&Geometry::free(a.universe()).unwrap()).unwrap());
        assert_eq!(g.purity(), 5);
        assert_eq!(g.closure(s(&[1, 3])).unwrap(), s(&[1, 3]));
    }

    #[test]
    fn clique_geometry_ranks() {
        let g = geometry_of(&k4()).unwrap();
        assert!(g.is_geometry());
        for x in k4().universe().subsets() {
            let expected = x.len().min(2);
            assert_eq!(g.rank(x).unwrap(), expected, "{x}");
        }
        assert_eq!(g.closure(s(&[1, 2])).unwrap(), s(&[1, 2, 3, 4]));
        assert_eq!(g.closure(VSet::EMPTY).unwrap(), VSet::EMPTY);
        assert_eq!(g.purity(), 2);
        let flats = g.flats().flats;
        assert_eq!(
            flats,
            vec![VSet::EMPTY, s(&[1]), s(&[2]), s(&[3]), s(&[4]), s(&[1, 2, 3, 4])]
        );
    }

    #[test]
    fn two_triples_geometry() {
        let a = SStructure::from_lists(3, &[1, 2, 3, 4], &[&[1, 2, 3], &[1, 2, 4]]).unwrap();
        let g = geometry_of(&a).unwrap();
        assert_eq!(g.rank(s(&[1, 2])).unwrap(), 2);
        assert_eq!(g.rank(s(&[3, 4])).unwrap(), 2);
        assert_eq!(g.rank(s(&[1, 2, 3, 4])).unwrap(), 2);
        assert!(g.equals(&geometry_of(&k4()).unwrap()).unwrap());
    }

    #[test]
    fn rejects_bad_inputs() {
        let pairs = SStructure::from_lists(2, &[1, 2], &[&[1, 2]]).unwrap();
        assert!(geometry_of(&pairs).is_err());
        let zero = SStructure::from_lists(
            3,
            &[1, 2, 3, 4, 5],
            &[&[1, 2, 3], &[1, 4, 5], &[2, 4, 5], &[3, 4, 5], &[1, 2, 5]],
        )
        .unwrap();
        assert!(matches!(
            geometry_of(&zero),
            Err(Error::InvalidArgument { witness: Some(_), .. })
        ));
        let g = Geometry::free(s(&[1, 2])).unwrap();
        assert!(g.closure(s(&[3])).is_err());
        assert!(Geometry::from_rank_fn(s(&[1, 2]), |x| if x.len() == 2 { 3 } else { x.len() }).is_err());
    }

    #[test]
    fn pregeometry_is_flagged() {
        let a = SStructure::from_lists(3, &[1, 2, 3, 4], &[&[1, 2, 3], &[1, 2, 4], &[1, 3, 4]]).unwrap();
        let g = geometry_of(&a).unwrap();
        assert_eq!(g.kind(), GeometryKind::Pregeometry);
        assert_eq!(g.rank(s(&[1, 2])).unwrap(), 1);
        assert!(g.geo_operator(3).is_err());
    }

    #[test]
    fn empty_universe() {
        let g = Geometry::free(VSet::EMPTY).unwrap();
        assert_eq!(g.flats().flats, vec![VSet::EMPTY]);
        assert_eq!(g.purity(), 0);
        assert!(g.flatness_check(3).holds());
    }

    #[test]
    fn flatness_examples() {
        let g = geometry_of(&k4()).unwrap();
        let r = g.flatness_check(1);
        assert!(r.holds());
        assert_eq!(r.families_checked, 6);
        // E1 = {1}, E2 = {2}: 2 - 1 - 1 + 0.
        let fam = [s(&[1]).compress(g.universe()), s(&[2]).compress(g.universe())];
        assert_eq!(g.signed_sum(&fam), 0);
        assert!(g.flatness_check(3).holds());
    }

    #[test]
    fn free_geometry_sums_vanish() {
        let g = Geometry::free(s(&[1, 2, 3])).unwrap();
        let flats: Vec<u32> = g.flats().flats.iter().map(|f| f.compress(g.universe())).collect();
        assert_eq!(flats.len(), 8);
        for a in 0..8 {
            for b in a + 1..8 {
                for c in b + 1..8 {
                    assert_eq!(g.signed_sum(&[flats[a], flats[b], flats[c]]), 0);
                }
            }
        }
    }

    #[test]
    fn non_flat_geometry_is_detected() {
        // The Fano plane is not flat, but only families of four lines show it.
        let lines: [[Vertex; 3]; 7] = [[1, 2, 3], [1, 4, 5], [1, 6, 7], [2, 4, 6], [2, 5, 7], [3, 4, 7], [3, 5, 6]];
        let u = s(&[1, 2, 3, 4, 5, 6, 7]);
        let g = Geometry::from_rank_fn(u, |x| {
            if x.len() <= 2 {
                x.len()
            } else if x.len() == 3 && lines.iter().any(|l| s(l) == x) {
                2
            } else {
                3
            }
        })
        .unwrap();
        assert!(g.flatness_check(3).holds());
        // Four lines in general position give a positive sum.
        let (fam, sum) = g.flatness_check(4).violation.unwrap();
        assert_eq!(fam.len(), 4);
        assert_eq!(sum, 1);
        assert!(g.geo_operator_checked(3, 4).is_err());
    }

    #[test]
    fn dependent_sets_and_geo_operator() {
        let g = geometry_of(&k4()).unwrap();
        let d = g.dependent_n_structure(3).unwrap();
        assert_eq!(d, k4());
        assert_eq!(g.geo_operator(3).unwrap(), k4());
        let free = Geometry::free(s(&[1, 2, 3, 4])).unwrap();
        assert_eq!(free.dependent_n_structure(3).unwrap().edge_count(), 0);
        assert_eq!(free.geo_operator(3).unwrap().edge_count(), 0);
    }

    #[test]
    fn geo_operator_is_monotone_under_restriction() {
        let a = SStructure::from_lists(3, &[1, 2, 3, 4, 5, 6], &[&[1, 2, 3], &[3, 4, 5], &[1, 5, 6]]).unwrap();
        let g = geometry_of(&a).unwrap();
        let big = g.geo_operator(3).unwrap();
        let sub = s(&[1, 2, 3, 4]);
        let small = g.restrict(sub).unwrap().geo_operator(3).unwrap();
        assert!(small.edges().iter().all(|e| big.has_edge(*e)));
    }

    #[test]
    fn universe_mismatch_is_an_error() {
        let g1 = Geometry::free(s(&[1, 2])).unwrap();
        let g2 = Geometry::free(s(&[1, 3])).unwrap();
        assert!(geometries_equal(&g1, &g2).is_err());
        assert!(!geometries_equal(&Geometry::free(s(&[1, 2, 3, 4])).unwrap(), &geometry_of(&k4()).unwrap()).unwrap());
    }
}
