//! Finite approximations of generic structures.
//!
//! A chain `M_0 ≤ M_1 ≤ ...` starts from the empty structure. At each stage
//! the requirements are the pairs `(A, D)` with `A ≤ M_i` small and `D` a
//! small strong extension of `A` in the class; one unsatisfied requirement is
//! picked by a seeded round-robin cursor and satisfied by amalgamating `M_i`
//! and `D` over `A`.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amalgam::{AmalgamKind, AmalgamProblem};
use crate::canon::{canonical_form, canonical_order, relative_canonical_form, MAX_CANON_VERTICES};
use crate::classes::ClassId;
use crate::error::{Error, Result};
use crate::geometry::{geometry_of, Geometry};
use crate::random::{amalgam_kind_for, rng_from_seed};
use crate::structure::{closure_table, strong_in_table, SStructure};
use crate::vset::{VSet, Vertex};

/// Largest number of candidate edge sets tried when adding one vertex.
const MAX_NEW_VERTEX_OPTIONS: usize = 24;

/// All strong extensions `A ≤ D` in `class` with `|D| ≤ d_cap`, one per
/// isomorphism type over `A`.
///
/// New vertices are named `max(A) + 1, ..` (or `1, ..` when `A` is empty).
/// The output is sorted by size and then canonically, and starts with `A`.
pub fn enumerate_strong_extensions(a: &SStructure, class: ClassId, d_cap: usize) -> Result<Vec<SStructure>> {
    let check = a.class_check(class);
    if !check.member {
        return Err(Error::InvalidArgument {
            message: format!("structure is not in {class}"),
            witness: check.witness,
        });
    }
    if d_cap > MAX_CANON_VERTICES {
        return Err(Error::ResourceLimit(format!(
            "extensions are limited to {MAX_CANON_VERTICES} vertices, got a cap of {d_cap}"
        )));
    }
    if a.len() > d_cap {
        return Ok(Vec::new());
    }
    let n = a.arity();
    let base = a.universe();
    let start = base.max().map_or(1, |m| m + 1);
    let mut out = vec![a.clone()];
    let mut level = vec![a.clone()];
    while !level.is_empty() && level[0].len() < d_cap {
        let v = start + (level[0].len() - a.len()) as Vertex;
        let width = crate::vset::binomial(level[0].len(), n - 1) as usize;
        if width > MAX_NEW_VERTEX_OPTIONS {
            return Err(Error::ResourceLimit(format!(
                "adding a vertex to {} vertices has 2^{width} edge choices",
                level[0].len()
            )));
        }
        let found: Vec<SStructure> = level
            .par_iter()
            .flat_map_iter(|d| {
                let stubs: Vec<VSet> = d.universe().k_subsets(n - 1).map(|t| t.with(v)).collect();
                let u = d.universe().with(v);
                (0..1u32 << stubs.len()).filter_map(move |mask| {
                    let chosen = (0..stubs.len()).filter(|&i| mask >> i & 1 == 1).map(|i| stubs[i]);
                    let e = SStructure::new(n, u, d.edges().iter().copied().chain(chosen)).ok()?;
                    if !e.class_member(class) || !strong_in_table(&e.predim_table(), base.compress(u)) {
                        return None;
                    }
                    relative_canonical_form(&e, base).ok()
                })
            })
            .collect();
        let uniq: BTreeSet<SStructure> = found.into_iter().collect();
        level = uniq.into_iter().collect();
        out.extend(level.iter().cloned());
    }
    Ok(out)
}

/// Embeds `d` into `m` fixing `base` pointwise so that the image is strong,
/// given the predimension table of `m`. Returns the images of the vertices
/// of `d` outside the base, in increasing order of those vertices.
pub fn find_strong_embedding(m: &SStructure, m_predim: &[i32], d: &SStructure, base: VSet) -> Option<Vec<Vertex>> {
    let n = m.arity();
    let new: Vec<Vertex> = d.universe().difference(base).to_vec();
    let targets: Vec<Vertex> = m.universe().difference(base).to_vec();
    if new.len() > targets.len() {
        return None;
    }
    let mut image: Vec<Vertex> = Vec::with_capacity(new.len());
    let mut used = VSet::EMPTY;
    embed_rec(m, m_predim, d, base, n, &new, &targets, &mut image, &mut used)
        .then_some(image)
}

#[allow(clippy::too_many_arguments)]
fn embed_rec(
    m: &SStructure,
    m_predim: &[i32],
    d: &SStructure,
    base: VSet,
    n: usize,
    new: &[Vertex],
    targets: &[Vertex],
    image: &mut Vec<Vertex>,
    used: &mut VSet,
) -> bool {
    let j = image.len();
    if j == new.len() {
        let img = base.union(*used);
        return strong_in_table(m_predim, img.compress(m.universe()));
    }
    let v = new[j];
    let dom = base.union(new[..j].iter().collect());
    for &t in targets {
        if used.contains(t) {
            continue;
        }
        let map = |x: Vertex| -> Vertex {
            if base.contains(x) {
                x
            } else {
                let i = new.iter().position(|&y| y == x).expect("new vertex");
                if i == j {
                    t
                } else {
                    image[i]
                }
            }
        };
        let ok = dom.k_subsets(n - 1).all(|s| {
            let e = s.with(v);
            let img: VSet = e.iter().map(map).collect();
            d.has_edge(e) == m.has_edge(img)
        });
        if !ok {
            continue;
        }
        image.push(t);
        used.insert(t);
        if embed_rec(m, m_predim, d, base, n, new, targets, image, used) {
            return true;
        }
        used.remove(t);
        image.pop();
    }
    false
}

/// `(G(A))^geo`.
///
/// Requires `A` in `CLQ` with `(n-1)`-pure geometry. For `A` in `C` the
/// identity `predim(hat(A)) = rank(A)` is asserted.
pub fn hat(a: &SStructure) -> Result<SStructure> {
    let check = a.class_check(ClassId::Clq);
    if !check.member {
        return Err(Error::InvalidArgument {
            message: "hat needs a structure in CLQ".into(),
            witness: check.witness,
        });
    }
    let g = geometry_of(a)?;
    let h = g.geo_operator(a.arity())?;
    if a.class_member(ClassId::C) {
        let r = g.rank(a.universe())? as i64;
        if h.predim() != r {
            return Err(Error::Invariant(format!(
                "predim of the hat is {} but the rank of the universe is {r}",
                h.predim()
            )));
        }
    }
    Ok(h)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub class: ClassId,
    pub arity: usize,
    pub steps: usize,
    /// Largest number of vertices in a stage.
    pub stage_cap: usize,
    pub a_cap: usize,
    pub d_cap: usize,
    pub seed: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            class: ClassId::C,
            arity: 3,
            steps: 30,
            stage_cap: 12,
            a_cap: 4,
            d_cap: 6,
            seed: 0,
        }
    }
}

/// A pair `(A, D)`: `A` strong in some stage and `D` a strong extension of
/// the structure induced on `A`. New vertices of `D` are named from
/// `max(A) + 1` on and may clash with stage vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requirement {
    pub id: usize,
    pub first_seen: usize,
    pub base: VSet,
    pub extension: SStructure,
    /// First stage with a strong embedding of the extension over the base.
    pub satisfied_at: Option<usize>,
    /// Stage created by amalgamating along this requirement.
    pub applied_at: Option<usize>,
    /// First stage at which satisfying it would exceed the stage cap.
    pub blocked_at: Option<usize>,
}

impl Requirement {
    pub fn new_vertices(&self) -> usize {
        self.extension.len() - self.base.len()
    }

    pub fn satisfied_by(&self, stage: usize) -> bool {
        self.satisfied_at.is_some_and(|s| s <= stage)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    StepsDone,
    /// Every unsatisfied requirement would exceed the stage cap.
    Exhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainApproximation {
    pub config: ChainConfig,
    pub stages: Vec<SStructure>,
    pub requirements: Vec<Requirement>,
    pub stop: StopReason,
}

impl ChainApproximation {
    pub fn last(&self) -> &SStructure {
        self.stages.last().expect("a chain has at least one stage")
    }

    /// Requirements first seen at or before `seen_by` and still unsatisfied
    /// at `stage`.
    pub fn unsatisfied(&self, stage: usize, seen_by: usize) -> usize {
        self.requirements
            .iter()
            .filter(|r| r.first_seen <= seen_by.min(stage) && !r.satisfied_by(stage))
            .count()
    }
}

/// Builds a chain for `CLQ`, `SYM`, `GEO` or `C`.
pub fn build_generic(config: &ChainConfig) -> Result<ChainApproximation> {
    if config.class == ClassId::Clq0 {
        return Err(Error::invalid("generic chains are built for CLQ, SYM, GEO and C"));
    }
    if config.stage_cap > MAX_CANON_VERTICES.max(crate::structure::MAX_VERTICES) {
        return Err(Error::ResourceLimit(format!("stage cap {} is too large", config.stage_cap)));
    }
    let kind = amalgam_kind_for(config.class);
    let mut b = Builder {
        config,
        rng: rng_from_seed(config.seed),
        stages: vec![SStructure::empty(config.arity)],
        requirements: Vec::new(),
        index: HashMap::new(),
        seen_bases: HashSet::new(),
        extensions: HashMap::new(),
        cursor: 0,
    };
    b.refresh()?;
    let mut stop = StopReason::StepsDone;
    for _ in 0..config.steps {
        let Some(id) = b.pick() else {
            stop = StopReason::Exhausted;
            break;
        };
        b.apply(id, kind)?;
        b.refresh()?;
        let i = b.stages.len() - 1;
        if !b.requirements[id].satisfied_by(i) {
            return Err(Error::Invariant(format!(
                "requirement {id} is not satisfied by the amalgam built for it"
            )));
        }
    }
    Ok(ChainApproximation {
        config: config.clone(),
        stages: b.stages,
        requirements: b.requirements,
        stop,
    })
}

struct Builder<'a> {
    config: &'a ChainConfig,
    rng: crate::random::Rng64,
    stages: Vec<SStructure>,
    requirements: Vec<Requirement>,
    index: HashMap<(VSet, SStructure), usize>,
    seen_bases: HashSet<VSet>,
    extensions: HashMap<SStructure, Vec<SStructure>>,
    cursor: usize,
}

impl Builder<'_> {
    fn refresh(&mut self) -> Result<()> {
        let i = self.stages.len() - 1;
        let m = self.stages[i].clone();
        let table = m.predim_table();

        let pending: Vec<usize> = (0..self.requirements.len())
            .filter(|&r| self.requirements[r].satisfied_at.is_none())
            .collect();
        let hits: Vec<bool> = pending
            .par_iter()
            .map(|&r| {
                let req = &self.requirements[r];
                find_strong_embedding(&m, &table, &req.extension, req.base).is_some()
            })
            .collect();
        for (&r, hit) in pending.iter().zip(hits) {
            if hit {
                self.requirements[r].satisfied_at = Some(i);
            }
        }

        let mut fresh: Vec<(VSet, SStructure)> = Vec::new();
        let u = m.universe();
        for k in 0..=self.config.a_cap.min(m.len()) {
            for x in u.k_subsets(k) {
                if self.seen_bases.contains(&x) || !strong_in_table(&table, x.compress(u)) {
                    continue;
                }
                self.seen_bases.insert(x);
                for d in self.extensions_over(&m.induced_unchecked(x))? {
                    fresh.push((x, d));
                }
            }
        }
        fresh.shuffle(&mut self.rng);
        let found: Vec<bool> = fresh
            .par_iter()
            .map(|(x, d)| find_strong_embedding(&m, &table, d, *x).is_some())
            .collect();
        for ((x, d), hit) in fresh.into_iter().zip(found) {
            if self.index.contains_key(&(x, d.clone())) {
                continue;
            }
            let id = self.requirements.len();
            self.index.insert((x, d.clone()), id);
            self.requirements.push(Requirement {
                id,
                first_seen: i,
                base: x,
                extension: d,
                satisfied_at: hit.then_some(i),
                applied_at: None,
                blocked_at: None,
            });
        }
        Ok(())
    }

    /// Proper strong extensions of `a`, expressed over the vertices of `a`.
    fn extensions_over(&mut self, a: &SStructure) -> Result<Vec<SStructure>> {
        let cf = canonical_form(a)?;
        if !self.extensions.contains_key(&cf) {
            let ext = enumerate_strong_extensions(&cf, self.config.class, self.config.d_cap)?;
            self.extensions.insert(cf.clone(), ext);
        }
        let order = canonical_order(a, VSet::EMPTY)?;
        let k = a.len();
        let start = a.universe().max().map_or(1, |m| m + 1);
        let mut out = Vec::new();
        for e in &self.extensions[&cf] {
            if e.len() == k {
                continue;
            }
            let mapped = e.relabel(|l| {
                let l = l as usize;
                if l <= k {
                    order[l - 1]
                } else {
                    start + (l - k - 1) as Vertex
                }
            })?;
            out.push(mapped);
        }
        Ok(out)
    }

    fn pick(&mut self) -> Option<usize> {
        let i = self.stages.len() - 1;
        let size = self.stages[i].len();
        let total = self.requirements.len();
        for step in 0..total {
            let r = (self.cursor + step) % total;
            let req = &mut self.requirements[r];
            if req.satisfied_at.is_some() {
                continue;
            }
            if size + req.new_vertices() > self.config.stage_cap {
                req.blocked_at.get_or_insert(i);
                continue;
            }
            self.cursor = r + 1;
            return Some(r);
        }
        None
    }

    fn apply(&mut self, id: usize, kind: AmalgamKind) -> Result<()> {
        let m = self.stages.last().expect("stage").clone();
        let req = &self.requirements[id];
        let p = AmalgamProblem::new(m.clone(), req.extension.clone(), req.base)?;
        let next = p.solve(kind)?;
        let check = next.class_check(self.config.class);
        if !check.member {
            return Err(Error::Invariant(format!(
                "stage left {}: {}",
                self.config.class,
                check.reason.unwrap_or_default()
            )));
        }
        if let Some(w) = next.strong_witness(m.universe())? {
            return Err(Error::Invariant(format!("previous stage is not strong in the next, witness {w}")));
        }
        self.stages.push(next);
        self.requirements[id].applied_at = Some(self.stages.len() - 1);
        Ok(())
    }
}

/// Agreement of `G(M_k)` and `G(hat(M_k))` at one stage.
///
/// Subsets of the previous stage are stabilized when their self-sufficient
/// closure is the same in both stages and unstabilized otherwise; subsets
/// meeting the new vertices have no earlier closure and are counted as
/// fresh.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTheoremCheck {
    pub stage: usize,
    pub stabilized: u64,
    pub unstabilized: u64,
    pub fresh: u64,
    pub stabilized_mismatches: Vec<VSet>,
    pub unstabilized_mismatches: Vec<VSet>,
    pub fresh_mismatches: Vec<VSet>,
}

/// Compares the geometry of each stage with the geometry of its hat.
pub fn theorem_geometry_check(chain: &ChainApproximation) -> Result<Vec<StageTheoremCheck>> {
    let mut out = Vec::new();
    for k in 1..chain.stages.len() {
        let (prev, cur) = (&chain.stages[k - 1], &chain.stages[k]);
        let g = geometry_of(cur)?;
        let gh = geometry_of(&hat(cur)?)?;
        let (up, uc) = (prev.universe(), cur.universe());
        let scl_prev = closure_table(&prev.predim_table(), up.len());
        let scl_cur = closure_table(&cur.predim_table(), uc.len());
        let mut check = StageTheoremCheck {
            stage: k,
            stabilized: 0,
            unstabilized: 0,
            fresh: 0,
            stabilized_mismatches: Vec::new(),
            unstabilized_mismatches: Vec::new(),
            fresh_mismatches: Vec::new(),
        };
        for m in 0..1u32 << uc.len() {
            let x = VSet::expand(m, uc);
            let agree = g.rank_local(m) == gh.rank_local(m);
            let (count, mismatches) = if !x.is_subset(up) {
                (&mut check.fresh, &mut check.fresh_mismatches)
            } else if VSet::expand(scl_prev[x.compress(up) as usize], up) == VSet::expand(scl_cur[m as usize], uc) {
                (&mut check.stabilized, &mut check.stabilized_mismatches)
            } else {
                (&mut check.unstabilized, &mut check.unstabilized_mismatches)
            };
            *count += 1;
            if !agree {
                mismatches.push(x);
            }
        }
        out.push(check);
    }
    Ok(out)
}

/// For every strong `A ≤ M` with `|A| ≤ a_cap` and every strong extension
/// `D` of `A` with `|D| ≤ d_cap`, whether `D` embeds strongly into `M` over
/// `A`. Returns the failing pairs, ordered by base and then extension.
pub fn missing_extensions(m: &SStructure, class: ClassId, a_cap: usize, d_cap: usize) -> Result<(u64, Vec<(VSet, SStructure)>)> {
    let check = m.class_check(class);
    if !check.member {
        return Err(Error::InvalidArgument {
            message: format!("structure is not in {class}"),
            witness: check.witness,
        });
    }
    let table = m.predim_table();
    let u = m.universe();
    let mut cache: HashMap<SStructure, Vec<SStructure>> = HashMap::new();
    let mut pairs = Vec::new();
    for k in 0..=a_cap.min(m.len()) {
        for x in u.k_subsets(k) {
            if !strong_in_table(&table, x.compress(u)) {
                continue;
            }
            let a = m.induced_unchecked(x);
            let cf = canonical_form(&a)?;
            if !cache.contains_key(&cf) {
                cache.insert(cf.clone(), enumerate_strong_extensions(&cf, class, d_cap)?);
            }
            let order = canonical_order(&a, VSet::EMPTY)?;
            let start = x.max().map_or(1, |v| v + 1);
            for e in &cache[&cf] {
                let d = e.relabel(|l| {
                    let l = l as usize;
                    if l <= k {
                        order[l - 1]
                    } else {
                        start + (l - k - 1) as Vertex
                    }
                })?;
                pairs.push((x, d));
            }
        }
    }
    let total = pairs.len() as u64;
    let hits: Vec<bool> = pairs
        .par_iter()
        .map(|(x, d)| find_strong_embedding(m, &table, d, *x).is_some())
        .collect();
    let missing = pairs
        .into_iter()
        .zip(hits)
        .filter_map(|(p, hit)| (!hit).then_some(p))
        .collect();
    Ok((total, missing))
}

/// Whether the closed sets of rank `n - 1` with more than `n - 1` points are
/// exactly the maximal cliques.
pub fn large_rank_n_minus_one_flats(g: &Geometry, n: usize) -> Vec<VSet> {
    let mut out: Vec<VSet> = g
        .flats()
        .flats
        .into_iter()
        .filter(|f| f.len() >= n && g.rank(*f).is_ok_and(|r| r + 1 == n))
        .collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[Vertex]) -> VSet {
        v.iter().collect()
    }

    #[test]
    fn extensions_at_the_cap_are_trivial() {
        let a = SStructure::clique(3, &[1, 2, 3]).unwrap();
        assert_eq!(enumerate_strong_extensions(&a, ClassId::Sym, 3).unwrap(), vec![a]);
    }

    #[test]
    fn extensions_of_the_empty_structure() {
        let e = SStructure::empty(3);
        let got = enumerate_strong_extensions(&e, ClassId::Sym, 3).unwrap();
        let expected = vec![
            e.clone(),
            SStructure::edgeless(3, s(&[1])).unwrap(),
            SStructure::edgeless(3, s(&[1, 2])).unwrap(),
            SStructure::edgeless(3, s(&[1, 2, 3])).unwrap(),
            SStructure::clique(3, &[1, 2, 3]).unwrap(),
        ];
        assert_eq!(got, expected);
    }

    #[test]
    fn extensions_require_membership() {
        let a = SStructure::clique(3, &[1, 2, 3, 4]).unwrap();
        assert!(matches!(
            enumerate_strong_extensions(&a, ClassId::Sym, 5),
            Err(Error::InvalidArgument { .. })
        ));
    }

    #[test]
    fn extensions_over_a_point_fix_it() {
        // Over {1}: one new vertex (free), two new vertices (free), or a
        // triple through 1 (predimension 1 = predim({1}), still strong).
        let a = SStructure::edgeless(3, s(&[1])).unwrap();
        let got = enumerate_strong_extensions(&a, ClassId::Sym, 3).unwrap();
        assert_eq!(got.len(), 4);
        assert!(got.contains(&SStructure::clique(3, &[1, 2, 3]).unwrap()));
    }

    #[test]
    fn embedding_respects_strongness() {
        let m = SStructure::from_lists(3, &[1, 2, 3, 4], &[&[1, 2, 3]]).unwrap();
        let t = m.predim_table();
        let d = SStructure::clique(3, &[1, 5, 6]).unwrap();
        let img = find_strong_embedding(&m, &t, &d, s(&[1])).unwrap();
        assert_eq!(img, vec![2, 3]);
        let free = SStructure::edgeless(3, s(&[1, 5])).unwrap();
        assert!(find_strong_embedding(&m, &t, &free, s(&[1])).is_some());
        // Two new vertices without an edge cannot both go into the triple.
        let pair = SStructure::edgeless(3, s(&[1, 5, 6])).unwrap();
        let img = find_strong_embedding(&m, &t, &pair, s(&[1])).unwrap();
        assert!(img.contains(&4));
    }

    #[test]
    fn hat_examples() {
        let e = SStructure::edgeless(3, s(&[1, 2, 3])).unwrap();
        assert_eq!(hat(&e).unwrap(), e);
        let a = SStructure::from_lists(3, &[1, 2, 3, 4], &[&[1, 2, 3], &[1, 2, 4]]).unwrap();
        let h = hat(&a).unwrap();
        assert_eq!(h, SStructure::clique(3, &[1, 2, 3, 4]).unwrap());
        assert_eq!(h.predim(), 2);
        let g = SStructure::from_lists(3, &[1, 2, 3, 4, 5], &[&[1, 2, 3], &[3, 4, 5]]).unwrap();
        assert_eq!(hat(&g).unwrap(), g);
    }

    #[test]
    fn zero_steps_is_a_single_empty_stage() {
        let c = ChainConfig {
            steps: 0,
            ..ChainConfig::default()
        };
        let chain = build_generic(&c).unwrap();
        assert_eq!(chain.stages, vec![SStructure::empty(3)]);
    }

    #[test]
    fn small_chain_is_deterministic_and_strong() {
        let c = ChainConfig {
            class: ClassId::Sym,
            steps: 6,
            stage_cap: 9,
            a_cap: 2,
            d_cap: 4,
            seed: 3,
            ..ChainConfig::default()
        };
        let chain = build_generic(&c).unwrap();
        assert_eq!(chain, build_generic(&c).unwrap());
        for w in chain.stages.windows(2) {
            assert!(w[1].is_strong(w[0].universe()).unwrap());
            assert!(w[1].class_member(ClassId::Sym));
        }
        let last = chain.last();
        let t = last.predim_table();
        for r in &chain.requirements {
            if r.satisfied_at.is_some() {
                assert!(find_strong_embedding(last, &t, &r.extension, r.base).is_some());
            }
        }
    }

    #[test]
    fn theorem_check_on_a_short_chain() {
        let c = ChainConfig {
            steps: 4,
            stage_cap: 8,
            a_cap: 2,
            d_cap: 4,
            seed: 1,
            ..ChainConfig::default()
        };
        let chain = build_generic(&c).unwrap();
        for st in theorem_geometry_check(&chain).unwrap() {
            assert!(st.stabilized_mismatches.is_empty());
            assert!(st.unstabilized_mismatches.is_empty());
            assert!(st.fresh_mismatches.is_empty());
            assert_eq!(st.unstabilized, 0);
        }
    }
}
