//! Standard and geometric amalgams, the changing-lemma surgery, and the
//! bounded search for mixed extensions.
//!
//! Amalgams are built from their declared maximal-clique families and then
//! validated: the declared family must be exactly the maximal cliques of the
//! result, and the class-level claims are re-checked on every output.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classes::ClassId;
use crate::error::{Error, Result};
use crate::geometry::geometry_of;
use crate::structure::SStructure;
use crate::vset::{VSet, Vertex, VERTEX_LIMIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmalgamKind {
    Standard,
    Geometric,
}

/// Two structures over a common induced substructure on `base`.
///
/// Vertices of `a2` outside the base that collide with vertices of `a1` are
/// renamed to the smallest unused identifiers, so that
/// `universe(a1) ∩ universe(a2) = base` always holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgamProblem {
    pub a1: SStructure,
    pub a2: SStructure,
    pub base: VSet,
}

impl AmalgamProblem {
    pub fn new(a1: SStructure, a2: SStructure, base: VSet) -> Result<Self> {
        if a1.arity() != a2.arity() {
            return Err(Error::invalid(format!(
                "arities differ: {} and {}",
                a1.arity(),
                a2.arity()
            )));
        }
        a1.check_subset(base)?;
        a2.check_subset(base)?;
        let clash = a1.universe().intersection(a2.universe()).difference(base);
        let a2 = if clash.is_empty() {
            a2
        } else {
            let used = a1.universe().union(a2.universe());
            let mut fresh = (0..VERTEX_LIMIT).filter(|v| !used.contains(*v));
            let mut map = [0 as Vertex; VERTEX_LIMIT as usize];
            for v in 0..VERTEX_LIMIT {
                map[v as usize] = v;
            }
            for v in clash {
                map[v as usize] = fresh
                    .next()
                    .ok_or_else(|| Error::ResourceLimit("ran out of vertex identifiers".into()))?;
            }
            a2.relabel(|v| map[v as usize])?
        };
        let b1 = a1.induced_unchecked(base);
        let b2 = a2.induced_unchecked(base);
        if b1 != b2 {
            let diff: VSet = b1
                .edges()
                .iter()
                .filter(|e| !b2.has_edge(**e))
                .chain(b2.edges().iter().filter(|e| !b1.has_edge(**e)))
                .fold(VSet::EMPTY, |acc, e| acc.union(*e));
            return Err(Error::invalid_with(
                "the base does not induce the same substructure on both sides",
                diff,
            ));
        }
        Ok(AmalgamProblem { a1, a2, base })
    }

    /// The problem over the full intersection of the two universes.
    pub fn over_common(a1: SStructure, a2: SStructure) -> Result<Self> {
        let base = a1.universe().intersection(a2.universe());
        Self::new(a1, a2, base)
    }

    pub fn arity(&self) -> usize {
        self.a1.arity()
    }

    pub fn solve(&self, kind: AmalgamKind) -> Result<SStructure> {
        match kind {
            AmalgamKind::Standard => standard_amalgam(self),
            AmalgamKind::Geometric => geometric_amalgam(self),
        }
    }
}

fn require_class(a: &SStructure, c: ClassId, what: &str) -> Result<()> {
    let check = a.class_check(c);
    if check.member {
        return Ok(());
    }
    Err(Error::InvalidArgument {
        message: format!(
            "{what} is not in {c}: {}",
            check.reason.unwrap_or_default()
        ),
        witness: check.witness,
    })
}

fn build_declared(p: &AmalgamProblem, mut family: Vec<VSet>) -> Result<SStructure> {
    family.sort_unstable();
    family.dedup();
    let u = p.a1.universe().union(p.a2.universe());
    let d = SStructure::from_cliques(p.arity(), u, family.iter().copied())?;
    if d.maximal_cliques() != family.as_slice() {
        return Err(Error::Invariant(format!(
            "declared clique family {family:?} differs from the maximal cliques {:?} of the amalgam",
            d.maximal_cliques()
        )));
    }
    for (side, a) in [("first", &p.a1), ("second", &p.a2)] {
        if d.induced_unchecked(a.universe()) != *a {
            return Err(Error::Invariant(format!(
                "the {side} structure is not an induced substructure of the amalgam"
            )));
        }
    }
    Ok(d)
}

/// Merges maximal cliques that overlap in at least `n` points.
///
/// Asserts `predim(D/A1) = predim(A2/B)`, and membership of `D` in `CLQ`
/// when both sides are in `CLQ` and the base is strong in both.
pub fn standard_amalgam(p: &AmalgamProblem) -> Result<SStructure> {
    let n = p.arity();
    require_class(&p.a1, ClassId::Clq0, "first structure")?;
    require_class(&p.a2, ClassId::Clq0, "second structure")?;
    let (m1, m2) = (p.a1.maximal_cliques(), p.a2.maximal_cliques());
    let mut family: Vec<VSet> = m1
        .iter()
        .chain(m2)
        .copied()
        .filter(|k| k.intersection(p.base).len() < n)
        .collect();
    for k1 in m1 {
        for k2 in m2 {
            if k1.intersection(*k2).len() >= n {
                family.push(k1.union(*k2));
            }
        }
    }
    let d = build_declared(p, family)?;

    let lhs = d.predim() - p.a1.predim();
    let rhs = p.a2.predim() - p.a2.predim_of_unchecked(p.base);
    if lhs != rhs {
        return Err(Error::Invariant(format!(
            "predim(D/A1) = {lhs} but predim(A2/B) = {rhs}"
        )));
    }
    if p.a1.class_member(ClassId::Clq)
        && p.a2.class_member(ClassId::Clq)
        && p.a1.is_strong(p.base)?
        && p.a2.is_strong(p.base)?
    {
        let check = d.class_check(ClassId::Clq);
        if !check.member {
            return Err(Error::Invariant(format!(
                "standard amalgam of CLQ structures over a strong base left CLQ: {}",
                check.reason.unwrap_or_default()
            )));
        }
    }
    Ok(d)
}

/// Merges maximal cliques that overlap in at least `n - 1` points.
///
/// When the base is strong in the first structure the result is asserted to
/// be geometric (and hence in `CLQ`).
pub fn geometric_amalgam(p: &AmalgamProblem) -> Result<SStructure> {
    let n = p.arity();
    require_class(&p.a1, ClassId::Geo, "first structure")?;
    require_class(&p.a2, ClassId::Geo, "second structure")?;
    let (m1, m2) = (p.a1.maximal_cliques(), p.a2.maximal_cliques());
    let mut family = Vec::new();
    for k1 in m1 {
        for k2 in m2 {
            if k1.intersection(*k2).len() + 1 >= n {
                family.push(k1.union(*k2));
            }
        }
    }
    let lonely = |k: &VSet, others: &[VSet]| others.iter().all(|l| k.intersection(*l).len() + 1 < n);
    family.extend(m1.iter().filter(|k| lonely(k, m2)));
    family.extend(m2.iter().filter(|k| lonely(k, m1)));
    let d = build_declared(p, family)?;

    if p.a1.is_strong(p.base)? {
        let check = d.class_check(ClassId::Geo);
        if !check.member {
            return Err(Error::Invariant(format!(
                "geometric amalgam over a base strong in the first structure is not geometric: {}",
                check.reason.unwrap_or_default()
            )));
        }
    }
    Ok(d)
}

/// Replaces the copy of `a` inside `d` by `b`, which carries the same
/// geometry: the edges of `d` inside `universe(a)` are swapped for those of `b`.
///
/// Asserts that `b` is strong in the result and that the geometry of the
/// result equals the geometry of `d`.
pub fn surgery(d: &SStructure, a: &SStructure, b: &SStructure) -> Result<SStructure> {
    if d.arity() != a.arity() || a.arity() != b.arity() {
        return Err(Error::invalid("arities differ"));
    }
    require_class(d, ClassId::Sym, "ambient structure")?;
    require_class(a, ClassId::Sym, "replaced structure")?;
    require_class(b, ClassId::Clq, "replacement")?;
    let ua = a.universe();
    d.check_subset(ua)?;
    if d.induced_unchecked(ua) != *a {
        return Err(Error::invalid_with(
            "replaced structure is not induced in the ambient structure",
            ua,
        ));
    }
    if let Some(w) = d.strong_witness(ua)? {
        return Err(Error::invalid_with("replaced structure is not strong in the ambient structure", w));
    }
    if b.universe() != ua {
        return Err(Error::invalid_with(
            "replacement lives on a different universe",
            b.universe().union(ua).difference(b.universe().intersection(ua)),
        ));
    }
    let ga = geometry_of(a)?;
    if let Some(w) = geometry_of(b)?.first_difference(&ga)? {
        return Err(Error::invalid_with("replacement has a different geometry", w));
    }

    let edges = d
        .edges()
        .iter()
        .copied()
        .filter(|e| !e.is_subset(ua))
        .chain(b.edges().iter().copied());
    let out = d.with_edges(edges)?;
    if let Some(w) = out.strong_witness(ua)? {
        return Err(Error::Invariant(format!(
            "replacement is not strong after surgery, witness {w}"
        )));
    }
    let g_out = geometry_of(&out).map_err(|e| Error::Invariant(format!("surgery result has no geometry: {e}")))?;
    if let Some(w) = g_out.first_difference(&geometry_of(d)?)? {
        return Err(Error::Invariant(format!("surgery changed the rank of {w}")));
    }
    Ok(out)
}

/// Searches for `B` in `CLQ` on the universe of `hat_b` with `A ≤ B`,
/// `G(B)` `(n-1)`-pure and `G(B)^geo = hat_b`.
///
/// Candidates are the edge sets extending the edges of `a` by `n`-sets that
/// leave `universe(a)`, ordered by number of added edges and then
/// lexicographically. `budget` bounds the number of candidates.
pub fn mixed_extension_search(a: &SStructure, hat_b: &SStructure, budget: u64) -> Result<Option<SStructure>> {
    let n = a.arity();
    if hat_b.arity() != n {
        return Err(Error::invalid("arities differ"));
    }
    if n < 3 {
        return Err(Error::invalid("mixed extensions need arity at least 3"));
    }
    require_class(a, ClassId::Clq, "base structure")?;
    require_class(hat_b, ClassId::Geo, "target structure")?;
    let ua = a.universe();
    hat_b.check_subset(ua)?;
    let ga = geometry_of(a)?;
    let a_geo = ga.geo_operator(n)?;
    if hat_b.induced_unchecked(ua) != a_geo {
        return Err(Error::invalid_with(
            "the geo structure of the base is not induced in the target",
            ua,
        ));
    }
    if let Some(w) = hat_b.strong_witness(ua)? {
        return Err(Error::invalid_with(
            "the geo structure of the base is not strong in the target",
            w,
        ));
    }

    let free: Vec<VSet> = hat_b
        .universe()
        .k_subsets(n)
        .filter(|e| !e.is_subset(ua))
        .collect();
    let f = free.len();
    if f >= 64 || (1u64 << f) > budget {
        return Err(Error::ResourceLimit(format!(
            "{f} free {n}-sets give 2^{f} candidates, over the budget of {budget}"
        )));
    }
    let ub = hat_b.universe();
    let accept = |chosen: &[usize]| -> Option<SStructure> {
        let b = SStructure::new(n, ub, a.edges().iter().copied().chain(chosen.iter().map(|&i| free[i]))).ok()?;
        if !b.class_member(ClassId::Clq) || !b.is_strong(ua).ok()? {
            return None;
        }
        let g = geometry_of(&b).ok()?;
        (g.purity() + 1 >= n && g.geo_operator(n).ok()? == *hat_b).then_some(b)
    };
    for t in 0..=f {
        let combos: Vec<Vec<usize>> = combinations(f, t).collect();
        if let Some(b) = combos.par_iter().find_map_first(|c| accept(c)) {
            return Ok(Some(b));
        }
    }
    Ok(None)
}

/// `t`-subsets of `0..f` in lexicographic order.
fn combinations(f: usize, t: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = (t <= f).then(|| (0..t).collect());
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let c = cur.as_mut().unwrap();
        let mut i = t;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if c[i] < f - t + i {
                c[i] += 1;
                for j in i + 1..t {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}
