//! Library results against naive re-implementations that work directly from
//! the definitions, with no bitmask tables.

use std::collections::{BTreeSet, HashMap};

use abinitio::enumerate::all_structures;
use abinitio::random::random_structure;
use abinitio::{card_star, geometry_of, ClassId, SStructure, VSet};

type Set = BTreeSet<u8>;

struct Naive {
    n: usize,
    points: Set,
    edges: BTreeSet<Set>,
}

fn subsets(s: &Set) -> Vec<Set> {
    let v: Vec<u8> = s.iter().copied().collect();
    (0..1u32 << v.len())
        .map(|m| (0..v.len()).filter(|i| m >> i & 1 == 1).map(|i| v[i]).collect())
        .collect()
}

fn k_subsets(s: &Set, k: usize) -> Vec<Set> {
    subsets(s).into_iter().filter(|x| x.len() == k).collect()
}

impl Naive {
    fn of(a: &SStructure) -> Self {
        Naive {
            n: a.arity(),
            points: a.universe().iter().collect(),
            edges: a.edges().iter().map(|e| e.iter().collect()).collect(),
        }
    }

    fn restrict(&self, x: &Set) -> Naive {
        Naive {
            n: self.n,
            points: x.clone(),
            edges: self.edges.iter().filter(|e| e.is_subset(x)).cloned().collect(),
        }
    }

    fn is_clique(&self, k: &Set) -> bool {
        k.len() >= self.n && k_subsets(k, self.n).iter().all(|e| self.edges.contains(e))
    }

    fn maximal_cliques(&self) -> Vec<Set> {
        let cliques: Vec<Set> = subsets(&self.points).into_iter().filter(|k| self.is_clique(k)).collect();
        cliques
            .iter()
            .filter(|k| !cliques.iter().any(|l| l.len() > k.len() && k.is_subset(l)))
            .cloned()
            .collect()
    }

    fn s_value(&self) -> i64 {
        self.maximal_cliques()
            .iter()
            .map(|k| (k.len() as i64 - (self.n as i64 - 1)).max(0))
            .sum()
    }

    fn predim(&self) -> i64 {
        self.points.len() as i64 - self.s_value()
    }

    fn predim_of(&self, x: &Set) -> i64 {
        self.restrict(x).predim()
    }

    fn is_strong(&self, b: &Set) -> bool {
        let pb = self.predim_of(b);
        subsets(&self.points)
            .iter()
            .filter(|x| b.is_subset(x))
            .all(|x| self.predim_of(x) >= pb)
    }

    fn rank(&self, x: &Set) -> i64 {
        subsets(&self.points)
            .iter()
            .filter(|y| x.is_subset(y))
            .map(|y| self.predim_of(y))
            .min()
            .unwrap()
    }

    fn in_clq0(&self) -> bool {
        let ks = self.maximal_cliques();
        ks.iter()
            .enumerate()
            .all(|(i, a)| ks[i + 1..].iter().all(|b| a.intersection(b).count() < self.n))
    }

    fn in_clq(&self) -> bool {
        self.in_clq0() && self.points.iter().all(|&v| self.is_strong(&Set::from([v])))
    }

    fn in_sym(&self) -> bool {
        self.in_clq() && self.maximal_cliques().iter().all(|k| k.len() == self.n)
    }

    fn in_geo(&self) -> bool {
        let ks = self.maximal_cliques();
        subsets(&self.points)
            .iter()
            .filter(|x| x.len() >= self.n && self.predim_of(x) < self.n as i64)
            .all(|x| ks.iter().filter(|k| x.is_subset(k)).count() == 1)
    }

    /// `SYM` and every set of `n - 1` points independent, unless there are
    /// fewer than `n - 1` points.
    fn in_c(&self) -> bool {
        self.in_sym()
            && k_subsets(&self.points, self.n - 1)
                .iter()
                .all(|x| self.rank(x) == self.n as i64 - 1)
    }
}

fn vset(s: &Set) -> VSet {
    s.iter().collect()
}

fn small_structures() -> impl Iterator<Item = SStructure> {
    (0..=5).flat_map(|k| all_structures(3, k))
}

#[test]
fn card_star_matches_its_definition() {
    for n in 2..7 {
        for m in 0..20 {
            assert_eq!(card_star(m, n) as i64, (m as i64 - (n as i64 - 1)).max(0), "m={m} n={n}");
        }
    }
}

#[test]
fn cliques_and_predimension_on_every_small_structure() {
    let mut count = 0;
    for a in small_structures() {
        let o = Naive::of(&a);
        let ks: Vec<VSet> = o.maximal_cliques().iter().map(vset).collect();
        let mut lib = a.maximal_cliques().to_vec();
        let mut naive = ks.clone();
        lib.sort();
        naive.sort();
        assert_eq!(lib, naive, "{a:?}");
        assert_eq!(a.s_value() as i64, o.s_value(), "{a:?}");
        assert_eq!(a.predim(), o.predim(), "{a:?}");
        for x in subsets(&o.points) {
            assert_eq!(a.predim_of(vset(&x)).unwrap(), o.predim_of(&x), "{a:?} {x:?}");
            match a.is_clique(vset(&x)) {
                Ok(k) => assert_eq!(k, o.is_clique(&x), "{a:?} {x:?}"),
                Err(_) => assert!(x.len() < 3, "{a:?} {x:?}"),
            }
        }
        count += 1;
    }
    assert_eq!(count, 1 + 1 + 1 + 2 + 16 + 1024);
}

#[test]
fn strongness_on_every_small_structure() {
    for a in small_structures() {
        let o = Naive::of(&a);
        for x in subsets(&o.points) {
            assert_eq!(a.is_strong(vset(&x)).unwrap(), o.is_strong(&x), "{a:?} {x:?}");
        }
    }
}

#[test]
fn class_membership_on_every_small_structure() {
    for a in small_structures() {
        let o = Naive::of(&a);
        assert_eq!(a.class_member(ClassId::Clq0), o.in_clq0(), "{a:?}");
        assert_eq!(a.class_member(ClassId::Clq), o.in_clq(), "{a:?}");
        assert_eq!(a.class_member(ClassId::Sym), o.in_sym(), "{a:?}");
        assert_eq!(a.class_member(ClassId::Geo), o.in_geo(), "{a:?}");
        assert_eq!(a.class_member(ClassId::C), o.in_c(), "{a:?}");
        if o.in_geo() {
            assert!(o.in_clq(), "geometric structure outside CLQ: {a:?}");
        }
    }
}

#[test]
fn geometry_rank_is_the_least_superset_predimension() {
    for a in small_structures().filter(|a| a.class_member(ClassId::Clq)) {
        let o = Naive::of(&a);
        let g = geometry_of(&a).unwrap();
        for x in subsets(&o.points) {
            assert_eq!(g.rank(vset(&x)).unwrap() as i64, o.rank(&x), "{a:?} {x:?}");
        }
    }
}

/// The closure is the unique smallest strong superset.
fn check_closure(a: &SStructure) {
    let o = Naive::of(a);
    let all = subsets(&o.points);
    let predim: HashMap<&Set, i64> = all.iter().map(|x| (x, o.predim_of(x))).collect();
    let strong: Vec<&Set> = all
        .iter()
        .filter(|b| all.iter().filter(|x| b.is_subset(x)).all(|x| predim[x] >= predim[b]))
        .collect();
    for x in &all {
        let over: Vec<&Set> = strong.iter().copied().filter(|y| x.is_subset(y)).collect();
        let least: Vec<&Set> = over
            .iter()
            .copied()
            .filter(|y| over.iter().all(|z| y.is_subset(z)))
            .collect();
        assert_eq!(least.len(), 1, "no unique least strong superset of {x:?} in {a:?}");
        assert_eq!(a.self_sufficient_closure(vset(x)).unwrap(), vset(least[0]), "{a:?} {x:?}");
    }
}

#[test]
fn closure_is_the_least_strong_superset() {
    for a in small_structures().filter(|a| a.class_member(ClassId::Clq0)) {
        check_closure(&a);
    }
    for seed in 0..40 {
        for c in [ClassId::Clq0, ClassId::Sym] {
            let size = 6 + (seed % 3) as usize;
            let a = random_structure(c, 3, size, 0.4, seed).unwrap();
            check_closure(&a);
        }
    }
}

#[test]
fn spec_examples() {
    let a = SStructure::from_lists(3, &[1, 2, 3, 4], &[&[1, 2, 3], &[1, 2, 4]]).unwrap();
    assert_eq!(a.s_value(), 2);
    let k4 = SStructure::clique(3, &[1, 2, 3, 4]).unwrap();
    assert_eq!(k4.s_value(), 2);
    let b = SStructure::from_lists(3, &[1, 2, 3, 4], &[&[1, 2, 3], &[1, 2, 4], &[1, 3, 4]]).unwrap();
    assert_eq!(b.predim(), 1);
    assert!(k4.class_member(ClassId::Geo));
}
