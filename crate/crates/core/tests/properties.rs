use abinitio::chain::{build_generic, find_strong_embedding, ChainConfig};
use abinitio::random::{random_amalgam_problem, random_structure, rng_from_seed, AmalgamSpec};
use abinitio::{
    canonical_form, geometry_of, parse_structure, serialize_structure, standard_amalgam, ClassId, SStructure, VSet, Vertex,
};
use proptest::prelude::*;

/// Arbitrary structures of arity 3 or 4 on at most 7 vertices.
fn structure() -> impl Strategy<Value = SStructure> {
    (3usize..=4, 0usize..=7).prop_flat_map(|(n, k)| {
        let slots: Vec<VSet> = VSet::range(1, k).k_subsets(n).collect();
        proptest::collection::vec(any::<bool>(), slots.len()).prop_map(move |picks| {
            let edges = slots.iter().zip(&picks).filter(|(_, p)| **p).map(|(e, _)| *e);
            SStructure::new(n, VSet::range(1, k), edges).unwrap()
        })
    })
}

fn member(class: ClassId) -> impl Strategy<Value = SStructure> {
    (0usize..=8, 0.0f64..1.0, any::<u64>())
        .prop_map(move |(k, d, seed)| random_structure(class, 3, k, d, seed).unwrap())
}

fn subset_of(a: &SStructure, mask: u64) -> VSet {
    a.universe().iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, v)| v).collect()
}

fn permuted(a: &SStructure, seed: u64) -> SStructure {
    let mut verts: Vec<Vertex> = a.universe().to_vec();
    let mut rng = rng_from_seed(seed);
    use rand::seq::SliceRandom;
    let orig = verts.clone();
    verts.shuffle(&mut rng);
    a.relabel(|v| verts[orig.iter().position(|&w| w == v).unwrap()] + 10).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn documents_round_trip(a in structure()) {
        let text = serialize_structure(&a);
        let b = parse_structure(&text).unwrap();
        prop_assert_eq!(&b, &a);
        prop_assert_eq!(serialize_structure(&b), text);
    }

    #[test]
    fn predimension_depends_only_on_the_induced_structure(a in structure(), mask in any::<u64>()) {
        let x = subset_of(&a, mask);
        prop_assert_eq!(a.induced(x).unwrap().predim(), a.predim_of(x).unwrap());
    }

    #[test]
    fn canonical_form_ignores_labels(a in structure(), seed in any::<u64>()) {
        let b = permuted(&a, seed);
        prop_assert_eq!(canonical_form(&a).unwrap(), canonical_form(&b).unwrap());
        for c in ClassId::ALL {
            prop_assert_eq!(a.class_member(c), b.class_member(c));
        }
    }

    #[test]
    fn closure_is_a_strong_idempotent_superset(a in member(ClassId::Clq0), mask in any::<u64>()) {
        let x = subset_of(&a, mask);
        let c = a.self_sufficient_closure(x).unwrap();
        prop_assert!(x.is_subset(c));
        prop_assert!(a.is_strong(c).unwrap());
        prop_assert_eq!(a.self_sufficient_closure(c).unwrap(), c);
    }

    #[test]
    fn membership_is_hereditary(a in member(ClassId::C), mask in any::<u64>()) {
        let x = subset_of(&a, mask);
        let b = a.induced(x).unwrap();
        for c in ClassId::ALL {
            if a.class_member(c) {
                prop_assert!(b.class_member(c), "{} {:?}", c, b);
            }
        }
    }

    #[test]
    fn strong_subsets_keep_their_geometry(a in member(ClassId::Clq), mask in any::<u64>()) {
        let x = a.self_sufficient_closure(subset_of(&a, mask)).unwrap();
        let g = geometry_of(&a).unwrap();
        let gx = geometry_of(&a.induced(x).unwrap()).unwrap();
        prop_assert!(g.restrict(x).unwrap().equals(&gx).unwrap());
    }

    #[test]
    fn standard_amalgam_predimension(seed in any::<u64>(), strong in any::<bool>()) {
        let mut rng = rng_from_seed(seed);
        let spec = AmalgamSpec {
            class: ClassId::Clq,
            arity: 3,
            max_side: 7,
            density: 0.4,
            strong_in_first: strong,
            strong_in_second: false,
        };
        let p = random_amalgam_problem(&mut rng, &spec).unwrap();
        let d = standard_amalgam(&p).unwrap();
        prop_assert_eq!(
            d.predim() - d.predim_of(p.a1.universe()).unwrap(),
            p.a2.predim() - p.a2.predim_of(p.base).unwrap()
        );
        prop_assert_eq!(d.induced(p.a1.universe()).unwrap(), p.a1.clone());
        prop_assert_eq!(d.induced(p.a2.universe()).unwrap(), p.a2.clone());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn chains_are_strong_and_satisfied_requirements_embed(seed in any::<u64>(), class in prop::sample::select(vec![ClassId::Sym, ClassId::Geo, ClassId::C])) {
        let config = ChainConfig { class, steps: 6, stage_cap: 9, a_cap: 2, d_cap: 4, seed, ..ChainConfig::default() };
        let chain = build_generic(&config).unwrap();
        for w in chain.stages.windows(2) {
            prop_assert!(w[1].is_strong(w[0].universe()).unwrap());
            prop_assert_eq!(w[1].induced(w[0].universe()).unwrap(), w[0].clone());
        }
        let m = chain.last();
        for s in &chain.stages {
            prop_assert!(s.class_member(class));
        }
        for r in chain.requirements.iter().filter(|r| r.satisfied_at.is_some()) {
            let image = find_strong_embedding_in(m, &r.extension, r.base);
            prop_assert!(image, "requirement {} does not embed in the last stage", r.id);
        }
    }
}

fn find_strong_embedding_in(m: &SStructure, d: &SStructure, base: VSet) -> bool {
    // Strongness of the image is judged by brute force, not by the table the
    // search uses.
    let Some(image) = find_strong_embedding(m, &predim_table(m), d, base) else {
        return false;
    };
    let new = d.universe().difference(base).to_vec();
    let mapped = d
        .relabel(|v| new.iter().position(|&w| w == v).map_or(v, |i| image[i]))
        .unwrap();
    let img = base.union(image.iter().collect());
    m.induced(img).unwrap() == mapped && m.is_strong(img).unwrap()
}

fn predim_table(m: &SStructure) -> Vec<i32> {
    (0..1u64 << m.len())
        .map(|mask| m.predim_of(subset_of(m, mask)).unwrap() as i32)
        .collect()
}
