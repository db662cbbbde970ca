//! Seeded generators for structures, amalgam problems and surgery triples.
//!
//! Generation is by rejection: candidate cliques are proposed in a seeded
//! order and kept only if the structure stays in the requested class, so
//! every intermediate structure is a member and the output always is.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amalgam::{AmalgamKind, AmalgamProblem};
use crate::classes::ClassId;
use crate::error::{Error, Result};
use crate::geometry::geometry_of;
use crate::structure::{SStructure, MAX_VERTICES};
use crate::vset::{VSet, Vertex};

pub type Rng64 = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A member of `class` on vertices `1..=size`.
///
/// Every `n`-subset is proposed once, in seeded order, with probability
/// `density`. For classes that allow large cliques a proposal may grow by up
/// to two extra vertices; the proposed clique is kept iff the result stays
/// in `class`.
pub fn random_structure(class: ClassId, arity: usize, size: usize, density: f64, seed: u64) -> Result<SStructure> {
    let mut rng = rng_from_seed(seed);
    random_structure_with(&mut rng, class, arity, size, density)
}

pub fn random_structure_with(
    rng: &mut Rng64,
    class: ClassId,
    arity: usize,
    size: usize,
    density: f64,
) -> Result<SStructure> {
    if size > MAX_VERTICES {
        return Err(Error::ResourceLimit(format!(
            "size {size} exceeds the cap of {MAX_VERTICES}"
        )));
    }
    let start = SStructure::edgeless(arity, VSet::range(1, size))?;
    grow(rng, start, VSet::EMPTY, class, density, false)
}

/// Adds cliques meeting `universe(a) \ fixed` to `a` while staying in
/// `class`. With `keep_strong`, `fixed` must also stay strong.
fn grow(
    rng: &mut Rng64,
    a: SStructure,
    fixed: VSet,
    class: ClassId,
    density: f64,
    keep_strong: bool,
) -> Result<SStructure> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::invalid(format!("density must lie in [0, 1], got {density}")));
    }
    let n = a.arity();
    let u = a.universe();
    let mut proposals: Vec<VSet> = u.k_subsets(n).filter(|e| !e.is_subset(fixed)).collect();
    proposals.shuffle(rng);
    let big_cliques = !matches!(class, ClassId::Sym | ClassId::C);
    let mut cur = a;
    for e in proposals {
        if !rng.gen_bool(density) || cur.has_edge(e) {
            continue;
        }
        let mut block = e;
        if big_cliques {
            let extra = rng.gen_range(0..=2usize);
            let mut outside: Vec<Vertex> = u.difference(e).to_vec();
            outside.shuffle(rng);
            for &v in outside.iter().take(extra) {
                block.insert(v);
            }
        }
        if block.k_subsets(n).any(|x| x.is_subset(fixed) && !cur.has_edge(x)) {
            continue;
        }
        let next = cur.with_edges(cur.edges().iter().copied().chain(block.k_subsets(n)))?;
        if next.class_member(class) && (!keep_strong || next.is_strong(fixed)?) {
            cur = next;
        }
    }
    if !cur.class_member(class) {
        return Err(Error::Invariant(format!("generator left {class}")));
    }
    Ok(cur)
}

/// A random strong subset of `a`: the self-sufficient closure of a random
/// subset of at most `max_size` vertices, if that closure is small enough.
pub fn random_strong_subset(rng: &mut Rng64, a: &SStructure, max_size: usize) -> Result<VSet> {
    let mut verts = a.universe().to_vec();
    for _ in 0..16 {
        verts.shuffle(rng);
        let k = rng.gen_range(0..=max_size.min(verts.len()));
        let x: VSet = verts[..k].iter().collect();
        let c = a.self_sufficient_closure(x)?;
        if c.len() <= max_size {
            return Ok(c);
        }
    }
    Ok(VSet::EMPTY)
}

/// Requirements on generated amalgam problems.
#[derive(Clone, Copy, Debug)]
pub struct AmalgamSpec {
    pub class: ClassId,
    pub arity: usize,
    pub max_side: usize,
    pub density: f64,
    /// Keep the base strong in the first structure.
    pub strong_in_first: bool,
    /// Keep the base strong in the second structure.
    pub strong_in_second: bool,
}

/// A valid amalgam problem: `a1` is random in the class, the base is a
/// subset of `a1`, and `a2` grows the base by fresh vertices.
pub fn random_amalgam_problem(rng: &mut Rng64, spec: &AmalgamSpec) -> Result<AmalgamProblem> {
    let n = spec.arity;
    let s1 = rng.gen_range(n.min(spec.max_side)..=spec.max_side);
    let a1 = random_structure_with(rng, spec.class, n, s1, spec.density)?;
    let base = if spec.strong_in_first {
        random_strong_subset(rng, &a1, s1)?
    } else {
        let mut verts = a1.universe().to_vec();
        verts.shuffle(rng);
        let k = rng.gen_range(0..=verts.len());
        verts[..k].iter().collect()
    };
    let extra = rng.gen_range(0..=spec.max_side - base.len());
    let top = a1.universe().max().unwrap_or(0);
    let fresh = VSet::range(top + 1, extra);
    let b = a1.induced(base)?;
    let start = SStructure::new(n, base.union(fresh), b.edges().iter().copied())?;
    let a2 = grow(rng, start, base, spec.class, spec.density, spec.strong_in_second)?;
    AmalgamProblem::new(a1, a2, base)
}

/// The amalgam a class is closed under when building generic structures.
pub fn amalgam_kind_for(class: ClassId) -> AmalgamKind {
    match class {
        ClassId::Geo => AmalgamKind::Geometric,
        _ => AmalgamKind::Standard,
    }
}

/// An admissible surgery triple `(D, A, B)`: `D` in `SYM`, `A` strong in `D`,
/// and `B` in `CLQ` on the universe of `A` with the same geometry.
///
/// `B` is obtained from `A` by filling in some closed sets of rank `n - 1`
/// as cliques and dropping some edges, keeping only changes that preserve
/// the geometry and `CLQ`.
pub fn random_surgery_triple(
    rng: &mut Rng64,
    arity: usize,
    max_size: usize,
    density: f64,
) -> Result<(SStructure, SStructure, SStructure)> {
    let n = arity;
    let size = rng.gen_range(n.min(max_size)..=max_size);
    let d = random_structure_with(rng, ClassId::Sym, n, size, density)?;
    let ua = random_strong_subset(rng, &d, size)?;
    let a = d.induced(ua)?;
    let ga = geometry_of(&a)?;
    let mut b = a.clone();
    let mut flats: Vec<VSet> = ga
        .flats()
        .flats
        .into_iter()
        .filter(|f| f.len() >= n && ga.rank(*f).map(|r| r + 1 == n).unwrap_or(false))
        .collect();
    flats.shuffle(rng);
    for f in flats {
        if rng.gen_bool(0.5) {
            continue;
        }
        let next = b.with_edges(b.edges().iter().copied().chain(f.k_subsets(n)))?;
        if next.class_member(ClassId::Clq) && geometry_of(&next)?.equals(&ga)? {
            b = next;
        }
    }
    let mut edges = b.edges().to_vec();
    edges.shuffle(rng);
    for e in edges {
        if rng.gen_bool(0.7) {
            continue;
        }
        let next = b.with_edges(b.edges().iter().copied().filter(|x| *x != e))?;
        if next.class_member(ClassId::Clq) && geometry_of(&next)?.equals(&ga)? {
            b = next;
        }
    }
    Ok((d, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_density_is_edgeless() {
        for c in ClassId::ALL {
            let a = random_structure(c, 3, 6, 0.0, 7).unwrap();
            assert_eq!(a.edge_count(), 0);
            assert_eq!(a.universe(), VSet::range(1, 6));
        }
    }

    #[test]
    fn generation_is_deterministic_and_in_class() {
        for c in ClassId::ALL {
            for seed in 0..5 {
                let a = random_structure(c, 3, 7, 0.5, seed).unwrap();
                assert_eq!(a, random_structure(c, 3, 7, 0.5, seed).unwrap());
                assert!(a.class_member(c), "{c} {a:?}");
            }
        }
        let g = random_structure(ClassId::Geo, 3, 6, 0.6, 3).unwrap();
        assert!(g.class_member(ClassId::Geo));
    }

    #[test]
    fn bad_parameters() {
        assert!(matches!(random_structure(ClassId::Clq, 3, 17, 0.5, 1), Err(Error::ResourceLimit(_))));
        assert!(random_structure(ClassId::Clq, 3, 4, 1.5, 1).is_err());
    }

    #[test]
    fn amalgam_problems_respect_the_spec() {
        let mut rng = rng_from_seed(11);
        let spec = AmalgamSpec {
            class: ClassId::Geo,
            arity: 3,
            max_side: 7,
            density: 0.4,
            strong_in_first: true,
            strong_in_second: false,
        };
        for _ in 0..20 {
            let p = random_amalgam_problem(&mut rng, &spec).unwrap();
            assert!(p.a1.is_strong(p.base).unwrap());
            assert!(p.a2.class_member(ClassId::Geo));
            assert_eq!(p.a1.universe().intersection(p.a2.universe()), p.base);
            assert!(p.a2.len() <= 7);
        }
    }

    #[test]
    fn surgery_triples_are_admissible() {
        let mut rng = rng_from_seed(5);
        for _ in 0..10 {
            let (d, a, b) = random_surgery_triple(&mut rng, 3, 7, 0.4).unwrap();
            assert!(d.is_strong(a.universe()).unwrap());
            assert_eq!(a.universe(), b.universe());
            assert!(geometry_of(&a).unwrap().equals(&geometry_of(&b).unwrap()).unwrap());
        }
    }
}
