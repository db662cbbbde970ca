//! Executable checks of the properties of the construction over exhaustive
//! small instances and seeded random instances.
//!
//! Every property runs independently of the assertions inside the library:
//! a library call that fails an internal assertion counts as a violation,
//! and the property itself is re-checked from rank and predimension tables.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amalgam::{geometric_amalgam, standard_amalgam, surgery, AmalgamProblem};
use crate::chain::{build_generic, hat, large_rank_n_minus_one_flats, missing_extensions, theorem_geometry_check, ChainConfig};
use crate::classes::ClassId;
use crate::document::StructureDocument;
use crate::enumerate::{geometric_structures, hereditary_members};
use crate::error::{Error, Result};
use crate::geometry::geometry_of;
use crate::random::{random_amalgam_problem, random_structure_with, random_surgery_triple, rng_from_seed, AmalgamSpec, Rng64};
use crate::structure::{strong_in_table, SStructure};
use crate::vset::VSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropertyId {
    Submodularity,
    StrongTransitive,
    AmalgamPredim,
    GeoAmalgamClosed,
    LargeDependentClique,
    DeltaGeqD,
    PureClqIsGeo,
    ChangingLemma,
    PredimClosedEqDim,
    HatStrong,
    TheoremGeometryEquality,
    ReductRemark,
    GenericGeoClosedSets,
    GeoIdempotent,
}

impl PropertyId {
    pub const ALL: [PropertyId; 14] = [
        PropertyId::Submodularity,
        PropertyId::StrongTransitive,
        PropertyId::AmalgamPredim,
        PropertyId::GeoAmalgamClosed,
        PropertyId::LargeDependentClique,
        PropertyId::DeltaGeqD,
        PropertyId::PureClqIsGeo,
        PropertyId::ChangingLemma,
        PropertyId::PredimClosedEqDim,
        PropertyId::HatStrong,
        PropertyId::TheoremGeometryEquality,
        PropertyId::ReductRemark,
        PropertyId::GenericGeoClosedSets,
        PropertyId::GeoIdempotent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PropertyId::Submodularity => "SUBMODULARITY",
            PropertyId::StrongTransitive => "STRONG_TRANSITIVE",
            PropertyId::AmalgamPredim => "AMALGAM_PREDIM",
            PropertyId::GeoAmalgamClosed => "GEO_AMALGAM_CLOSED",
            PropertyId::LargeDependentClique => "LARGE_DEPENDENT_CLIQUE",
            PropertyId::DeltaGeqD => "DELTA_GEQ_D",
            PropertyId::PureClqIsGeo => "PURE_CLQ_IS_GEO",
            PropertyId::ChangingLemma => "CHANGING_LEMMA",
            PropertyId::PredimClosedEqDim => "PREDIM_CLOSED_EQ_DIM",
            PropertyId::HatStrong => "HAT_STRONG",
            PropertyId::TheoremGeometryEquality => "THEOREM_GEOMETRY_EQUALITY",
            PropertyId::ReductRemark => "REDUCT_REMARK",
            PropertyId::GenericGeoClosedSets => "GENERIC_GEO_CLOSED_SETS",
            PropertyId::GeoIdempotent => "GEO_IDEMPOTENT",
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PropertyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase().replace('-', "_");
        PropertyId::ALL
            .into_iter()
            .find(|p| p.name() == up)
            .ok_or_else(|| Error::UnknownProperty(s.to_string()))
    }
}

/// Sizes and seeds for a verification run. Missing fields in a config file
/// take the defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub arity: usize,
    pub seed: u64,
    /// Exhaustive bound for `CLQ0` and `CLQ` structures.
    pub small_size: usize,
    /// Exhaustive bound for structures in `C`.
    pub c_size: usize,
    /// Exhaustive bound for geometric structures.
    pub geo_size: usize,
    pub random_instances: usize,
    pub random_size: usize,
    /// Arities cycled through by the random instances.
    pub random_arities: Vec<usize>,
    /// Random amalgam problems and random class members per property.
    pub problem_instances: usize,
    pub side_size: usize,
    pub geometries: usize,
    pub subsets_per_geometry: usize,
    pub surgery_instances: usize,
    pub surgery_size: usize,
    pub k_max: usize,
    pub chain: ChainConfig,
    pub max_counterexamples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            arity: 3,
            seed: 42,
            small_size: 5,
            c_size: 6,
            geo_size: 7,
            random_instances: 10_000,
            random_size: 8,
            random_arities: vec![3, 4],
            problem_instances: 1000,
            side_size: 8,
            geometries: 100,
            subsets_per_geometry: 10,
            surgery_instances: 200,
            surgery_size: 7,
            k_max: 3,
            chain: ChainConfig {
                a_cap: 3,
                d_cap: 5,
                seed: 42,
                ..ChainConfig::default()
            },
            max_counterexamples: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Counterexample {
    /// Structure documents, replayable as fixtures.
    pub structures: Vec<String>,
    pub detail: String,
}

impl Counterexample {
    fn new(structures: &[&SStructure], detail: impl Into<String>) -> Self {
        Counterexample {
            structures: structures.iter().map(|a| StructureDocument::new((*a).clone()).to_text()).collect(),
            detail: detail.into(),
        }
    }

    fn key(&self) -> (usize, &[String], &str) {
        (self.structures.iter().map(|s| s.len()).sum(), &self.structures, &self.detail)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub property: String,
    pub config: VerifyConfig,
    pub instances: u64,
    /// Instances whose preconditions failed.
    pub skipped: u64,
    pub violation_count: u64,
    /// The smallest violations, at most `max_counterexamples` of them.
    pub violations: Vec<Counterexample>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub runtime: Duration,
}

impl PartialEq for VerificationReport {
    fn eq(&self, o: &Self) -> bool {
        self.property == o.property
            && self.config == o.config
            && self.instances == o.instances
            && self.skipped == o.skipped
            && self.violation_count == o.violation_count
            && self.violations == o.violations
            && self.notes == o.notes
    }
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {}: {} instances, {} skipped, {} violations ({:.2?})\n",
            if self.passed() { "PASS" } else { "FAIL" },
            self.property,
            self.instances,
            self.skipped,
            self.violation_count,
            self.runtime
        );
        for n in &self.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        for v in &self.violations {
            out.push_str(&format!("  violation: {}\n", v.detail));
            for s in &v.structures {
                for line in s.lines() {
                    out.push_str(&format!("    {line}\n"));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Outcome of checking one instance.
#[derive(Clone)]
enum Outcome {
    Ok,
    Skip,
    Bad(Counterexample),
}

#[derive(Default)]
struct Tally {
    instances: u64,
    skipped: u64,
    bad: Vec<Counterexample>,
    notes: Vec<String>,
}

impl Tally {
    fn add_all(&mut self, outcomes: Vec<Outcome>) {
        for o in outcomes {
            self.instances += 1;
            match o {
                Outcome::Ok => {}
                Outcome::Skip => self.skipped += 1,
                Outcome::Bad(c) => self.bad.push(c),
            }
        }
    }

    fn finish(mut self, p: PropertyId, config: &VerifyConfig, start: Instant) -> VerificationReport {
        self.bad.sort_by(|a, b| a.key().cmp(&b.key()));
        let count = self.bad.len() as u64;
        self.bad.truncate(config.max_counterexamples);
        VerificationReport {
            property: p.name().to_string(),
            config: config.clone(),
            instances: self.instances,
            skipped: self.skipped,
            violation_count: count,
            violations: self.bad,
            notes: self.notes,
            runtime: start.elapsed(),
        }
    }
}

/// Runs one property, or every property for `"all"`.
pub fn verify_suite(selector: &str, config: &VerifyConfig) -> Result<Vec<VerificationReport>> {
    if selector.trim().eq_ignore_ascii_case("all") {
        PropertyId::ALL.into_iter().map(|p| verify_property(p, config)).collect()
    } else {
        Ok(vec![verify_property(selector.parse()?, config)?])
    }
}

pub fn verify_property(p: PropertyId, config: &VerifyConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut t = Tally::default();
    match p {
        PropertyId::Submodularity => {
            t.add_all(on_clq0_instances(config, submodularity)?);
        }
        PropertyId::StrongTransitive => {
            t.add_all(on_clq0_instances(config, strong_transitive)?);
        }
        PropertyId::AmalgamPredim => amalgam_predim(config, &mut t)?,
        PropertyId::GeoAmalgamClosed => geo_amalgam_closed(config, &mut t)?,
        PropertyId::LargeDependentClique => {
            let n = config.arity;
            let mut all = geometric_structures(n, config.geo_size);
            all.extend(random_members(config, ClassId::Geo, 1)?);
            t.add_all(all.par_iter().map(large_dependent_clique).collect());
        }
        PropertyId::DeltaGeqD => delta_geq_d(config, &mut t)?,
        PropertyId::PureClqIsGeo => {
            let mut all = hereditary_members(ClassId::Clq, config.arity, config.small_size);
            all.extend(random_members(config, ClassId::Clq, 2)?);
            t.add_all(all.par_iter().map(pure_clq_is_geo).collect());
        }
        PropertyId::ChangingLemma => changing_lemma(config, &mut t)?,
        PropertyId::PredimClosedEqDim => {
            let all = hereditary_members(ClassId::C, config.arity, config.c_size);
            t.add_all(all.par_iter().map(predim_closed_eq_dim).collect());
        }
        PropertyId::HatStrong => hat_strong(config, &mut t)?,
        PropertyId::TheoremGeometryEquality => theorem_geometry_equality(config, &mut t)?,
        PropertyId::ReductRemark => {
            let all = geometric_structures(config.arity, config.geo_size);
            t.add_all(all.par_iter().map(reduct_remark).collect());
        }
        PropertyId::GenericGeoClosedSets => generic_geo_closed_sets(config, &mut t)?,
        PropertyId::GeoIdempotent => {
            let all = geometric_structures(config.arity, config.geo_size);
            t.add_all(all.par_iter().map(geo_idempotent).collect());
        }
    }
    Ok(t.finish(p, config, start))
}

/// Whether every strong extension of every small strong substructure of `m`
/// embeds strongly into `m`.
pub fn extension_property_report(
    m: &SStructure,
    class: ClassId,
    a_cap: usize,
    d_cap: usize,
    config: &VerifyConfig,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let (total, missing) = missing_extensions(m, class, a_cap, d_cap)?;
    let mut t = Tally {
        instances: total,
        ..Tally::default()
    };
    t.notes.push(format!("class {class}, a_cap {a_cap}, d_cap {d_cap}"));
    for (base, d) in missing {
        t.bad.push(Counterexample::new(
            &[&d],
            format!("no strong embedding over {base}"),
        ));
    }
    let mut r = t.finish(PropertyId::Submodularity, config, start);
    r.property = "EXTENSION_PROPERTY".into();
    Ok(r)
}

/// An independent generator stream per instance, so instances can be
/// produced in parallel and in any order.
fn instance_rng(seed: u64, stream: u64) -> Rng64 {
    let mut rng = rng_from_seed(seed);
    rng.set_stream(stream);
    rng
}

/// Stream offsets keep the random instances of different properties apart.
const STREAM_STRIDE: u64 = 1 << 32;

fn random_members(config: &VerifyConfig, class: ClassId, salt: u64) -> Result<Vec<SStructure>> {
    (0..config.problem_instances as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(config.seed, salt * STREAM_STRIDE + i);
            let size = rng.gen_range(0..=config.random_size);
            let density = rng.gen_range(0.1..0.9);
            random_structure_with(&mut rng, class, config.arity, size, density)
        })
        .collect()
}

/// Exhaustive `CLQ0` structures at the configured arity followed by random
/// ones cycling through the configured arities.
fn on_clq0_instances(config: &VerifyConfig, check: fn(&SStructure) -> Outcome) -> Result<Vec<Outcome>> {
    let mut out: Vec<Outcome> = hereditary_members(ClassId::Clq0, config.arity, config.small_size)
        .par_iter()
        .map(check)
        .collect();
    if config.random_instances > 0 && config.random_arities.is_empty() {
        return Err(Error::invalid("random instances need at least one arity"));
    }
    let random: Result<Vec<Outcome>> = (0..config.random_instances as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(config.seed, i);
            let n = config.random_arities[i as usize % config.random_arities.len()];
            let size = rng.gen_range(0..=config.random_size);
            let density = rng.gen_range(0.1..0.9);
            let a = random_structure_with(&mut rng, ClassId::Clq0, n, size, density)?;
            Ok(check(&a))
        })
        .collect();
    out.extend(random?);
    Ok(out)
}

fn submodularity(a: &SStructure) -> Outcome {
    let t = a.predim_table();
    let full = t.len() as u32;
    for x in 0..full {
        for y in x + 1..full {
            let lhs = t[(x | y) as usize] + t[(x & y) as usize];
            let rhs = t[x as usize] + t[y as usize];
            if lhs > rhs {
                let u = a.universe();
                return Outcome::Bad(Counterexample::new(
                    &[a],
                    format!(
                        "X = {}, Y = {}: predim(X ∪ Y) + predim(X ∩ Y) = {lhs} > {rhs}",
                        VSet::expand(x, u),
                        VSet::expand(y, u)
                    ),
                ));
            }
        }
    }
    Outcome::Ok
}

/// For every `B ≤ A` and `C ⊆ B` with `C` strong in the structure induced
/// on `B`, checks that `C ≤ A`.
fn strong_transitive(a: &SStructure) -> Outcome {
    let t = a.predim_table();
    let mut within = vec![0i32; t.len()];
    for b in 0..t.len() as u32 {
        if !strong_in_table(&t, b) {
            continue;
        }
        // within[c] = min predim over c ⊆ y ⊆ b
        let mut c = b;
        loop {
            within[c as usize] = t[c as usize];
            if c == 0 {
                break;
            }
            c = (c - 1) & b;
        }
        for i in 0..32 {
            let bit = 1u32 << i;
            if b & bit == 0 {
                continue;
            }
            let mut c = b & !bit;
            loop {
                let up = within[(c | bit) as usize];
                if up < within[c as usize] {
                    within[c as usize] = up;
                }
                if c == 0 {
                    break;
                }
                c = (c - 1) & b & !bit;
            }
        }
        let mut c = b;
        loop {
            if within[c as usize] == t[c as usize] && !strong_in_table(&t, c) {
                let u = a.universe();
                return Outcome::Bad(Counterexample::new(
                    &[a],
                    format!(
                        "{} ≤ {} ≤ A but {} is not strong in A",
                        VSet::expand(c, u),
                        VSet::expand(b, u),
                        VSet::expand(c, u)
                    ),
                ));
            }
            if c == 0 {
                break;
            }
            c = (c - 1) & b;
        }
    }
    Outcome::Ok
}

fn amalgam_spec(config: &VerifyConfig, class: ClassId, rng: &mut Rng64) -> AmalgamSpec {
    AmalgamSpec {
        class,
        arity: config.arity,
        max_side: config.side_size,
        density: rng.gen_range(0.1..0.7),
        strong_in_first: rng.gen_bool(0.5),
        strong_in_second: rng.gen_bool(0.5),
    }
}

fn problem_docs(p: &AmalgamProblem) -> Vec<String> {
    let b = p.a1.induced(p.base).expect("base is a subset");
    [&p.a1, &p.a2, &b]
        .iter()
        .map(|a| StructureDocument::new((*a).clone()).to_text())
        .collect()
}

fn problem_counterexample(p: &AmalgamProblem, detail: String) -> Counterexample {
    Counterexample {
        structures: problem_docs(p),
        detail,
    }
}

fn amalgam_predim(config: &VerifyConfig, t: &mut Tally) -> Result<()> {
    const CLASSES: [ClassId; 4] = [ClassId::Clq0, ClassId::Clq, ClassId::Sym, ClassId::C];
    let outcomes: Result<Vec<Outcome>> = (0..config.problem_instances as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(config.seed, 3 * STREAM_STRIDE + i);
            let class = CLASSES[i as usize % CLASSES.len()];
            let spec = amalgam_spec(config, class, &mut rng);
            let p = random_amalgam_problem(&mut rng, &spec)?;
            let d = match standard_amalgam(&p) {
                Ok(d) => d,
                Err(e) => return Ok(Outcome::Bad(problem_counterexample(&p, format!("{class}: {e}")))),
            };
            let left = d.predim() - d.predim_of(p.a1.universe())?;
            let right = p.a2.predim() - p.a2.predim_of(p.base)?;
            if left != right {
                return Ok(Outcome::Bad(problem_counterexample(
                    &p,
                    format!("{class}: predim(D/A1) = {left} but predim(A2/B) = {right}"),
                )));
            }
            if matches!(class, ClassId::Sym | ClassId::C) {
                let mut free: Vec<VSet> = p.a1.edges().iter().chain(p.a2.edges()).copied().collect();
                free.sort_unstable();
                free.dedup();
                if d.edges() != free.as_slice() {
                    return Ok(Outcome::Bad(problem_counterexample(
                        &p,
                        format!("{class}: standard amalgam is not the free amalgam"),
                    )));
                }
            }
            Ok(Outcome::Ok)
        })
        .collect();
    t.add_all(outcomes?);
    t.notes.push("input classes cycle through CLQ0, CLQ, SYM, C; SYM and C amalgams are also compared with the free amalgam".into());
    Ok(())
}

fn geo_amalgam_closed(config: &VerifyConfig, t: &mut Tally) -> Result<()> {
    let outcomes: Result<Vec<Outcome>> = (0..config.problem_instances as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(config.seed, 4 * STREAM_STRIDE + i);
            let mut spec = amalgam_spec(config, ClassId::Geo, &mut rng);
            spec.strong_in_first = true;
            let p = random_amalgam_problem(&mut rng, &spec)?;
            let d = match geometric_amalgam(&p) {
                Ok(d) => d,
                Err(e) => return Ok(Outcome::Bad(problem_counterexample(&p, e.to_string()))),
            };
            let check = d.class_check(ClassId::Geo);
            if !check.member {
                return Ok(Outcome::Bad(problem_counterexample(
                    &p,
                    format!("amalgam is not geometric: {}", check.reason.unwrap_or_default()),
                )));
            }
            Ok(Outcome::Ok)
        })
        .collect();
    t.add_all(outcomes?);
    Ok(())
}

fn large_dependent_clique(a: &SStructure) -> Outcome {
    let n = a.arity();
    let u = a.universe();
    let t = a.predim_table();
    for m in 0..t.len() as u32 {
        let x = VSet::expand(m, u);
        let p = t[m as usize] as i64;
        if x.len() >= n && p < n as i64 {
            if !a.is_clique(x).unwrap_or(false) || p != n as i64 - 1 {
                return Outcome::Bad(Counterexample::new(
                    &[a],
                    format!("{x} has predim {p} < {n} but is not a clique of predim {}", n - 1),
                ));
            }
        } else if x.len() < n && !strong_in_table(&t, m) {
            return Outcome::Bad(Counterexample::new(&[a], format!("{x} has fewer than {n} points but is not strong")));
        }
    }
    Outcome::Ok
}

/// Draws per sampled geometry before giving up.
const MAX_DRAWS: u32 = 64;

fn delta_geq_d(config: &VerifyConfig, t: &mut Tally) -> Result<()> {
    let n = config.arity;
    let k_max = config.k_max;
    let per = config.subsets_per_geometry;
    let outcomes: Result<Vec<(Vec<Outcome>, u32)>> = (0..config.geometries as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(config.seed, 5 * STREAM_STRIDE + i);
            // Draw members of CLQ until the geometry is pure and flat.
            let mut found = None;
            for attempt in 1..=MAX_DRAWS {
                let size = rng.gen_range(0..=config.random_size);
                let density = rng.gen_range(0.1..0.9);
                let s = random_structure_with(&mut rng, ClassId::Clq, n, size, density)?;
                let g = geometry_of(&s)?;
                let pure = g.is_geometry() && (g.purity() + 1 >= n || g.purity() == s.len());
                if pure && g.flatness_check(k_max).holds() {
                    found = Some((s, g, attempt));
                    break;
                }
            }
            let Some((s, g, draws)) = found else {
                return Ok((vec![Outcome::Skip; per], MAX_DRAWS + 1));
            };
            let u = s.universe().to_vec();
            let mut out = Vec::with_capacity(per);
            for _ in 0..per {
                let sub: VSet = u.iter().filter(|_| rng.gen_bool(0.5)).collect();
                let h = match g.restrict(sub).and_then(|ga| ga.geo_operator(n)) {
                    Ok(h) => h,
                    Err(e) => {
                        out.push(Outcome::Bad(Counterexample::new(&[&s], format!("A = {sub}: {e}"))));
                        continue;
                    }
                };
                let d = g.rank(sub)? as i64;
                out.push(if h.predim() >= d {
                    Outcome::Ok
                } else {
                    Outcome::Bad(Counterexample::new(
                        &[&s, &h],
                        format!("A = {sub}: predim(A^geo) = {} < rank {d}", h.predim()),
                    ))
                });
            }
            Ok((out, draws))
        })
        .collect();
    let outcomes = outcomes?;
    let draws: u32 = outcomes.iter().map(|(_, d)| *d).sum();
    t.notes.push(format!(
        "{draws} members of CLQ drawn to find {} geometries that are {}-pure and pass the flatness check up to {k_max} flats",
        outcomes.len(),
        n - 1
    ));
    for (o, _) in outcomes {
        t.add_all(o);
    }
    Ok(())
}

fn pure_clq_is_geo(a: &SStructure) -> Outcome {
    let n = a.arity();
    let Ok(g) = geometry_of(a) else {
        return Outcome::Skip;
    };
    if !g.is_geometry() || (g.purity() < n - 1 && g.purity() < a.len()) {
        return Outcome::Skip;
    }
    match g.geo_operator(n) {
        Ok(h) => {
            let check = h.class_check(ClassId::Geo);
            if check.member {
                Outcome::Ok
            } else {
                Outcome::Bad(Counterexample::new(
                    &[a, &h],
                    format!("A^geo is not geometric: {}", check.reason.unwrap_or_default()),
                ))
            }
        }
        Err(e) => Outcome::Bad(Counterexample::new(&[a], e.to_string())),
    }
}

fn changing_lemma(config: &VerifyConfig, t: &mut Tally) -> Result<()> {
    let outcomes: Result<Vec<Outcome>> = (0..config.surgery_instances as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(config.seed, 6 * STREAM_STRIDE + i);
            let density = rng.gen_range(0.1..0.7);
            let (d, a, b) = random_surgery_triple(&mut rng, config.arity, config.surgery_size, density)?;
            let out = match surgery(&d, &a, &b) {
                Ok(out) => out,
                Err(e) => return Ok(Outcome::Bad(Counterexample::new(&[&d, &a, &b], e.to_string()))),
            };
            let ua = a.universe();
            let expected = d.with_edges(
                d.edges()
                    .iter()
                    .copied()
                    .filter(|e| !e.is_subset(ua))
                    .chain(b.edges().iter().copied()),
            )?;
            let detail = if out != expected {
                Some("surgery result differs from the swapped edge set".to_string())
            } else if !out.is_strong(ua)? {
                Some(format!("B = {ua} is not strong in D'"))
            } else if !geometry_of(&out)?.equals(&geometry_of(&d)?)? {
                Some("G(D') differs from G(D)".to_string())
            } else {
                None
            };
            Ok(match detail {
                Some(m) => Outcome::Bad(Counterexample::new(&[&d, &a, &b], m)),
                None => Outcome::Ok,
            })
        })
        .collect();
    t.add_all(outcomes?);
    Ok(())
}

fn predim_closed_eq_dim(a: &SStructure) -> Outcome {
    let g = match geometry_of(a) {
        Ok(g) => g,
        Err(e) => return Outcome::Bad(Counterexample::new(&[a], e.to_string())),
    };
    let h = match g.geo_operator(a.arity()) {
        Ok(h) => h,
        Err(e) => return Outcome::Bad(Counterexample::new(&[a], e.to_string())),
    };
    let r = g.rank(a.universe()).expect("universe") as i64;
    if h.predim() == r {
        Outcome::Ok
    } else {
        Outcome::Bad(Counterexample::new(
            &[a, &h],
            format!("predim(hat(A)) = {} but the rank of A is {r}", h.predim()),
        ))
    }
}

fn hat_strong(config: &VerifyConfig, t: &mut Tally) -> Result<()> {
    let chain = build_generic(&config.chain)?;
    for m in &chain.stages {
        let hm = hat(m)?;
        let table = m.predim_table();
        let u = m.universe();
        let outcomes: Vec<Outcome> = (0..table.len() as u32)
            .into_par_iter()
            .filter(|&x| strong_in_table(&table, x))
            .map(|x| {
                let ux = VSet::expand(x, u);
                let a = m.induced_unchecked(ux);
                let ha = match hat(&a) {
                    Ok(h) => h,
                    Err(e) => return Outcome::Bad(Counterexample::new(&[m, &a], e.to_string())),
                };
                let detail = if ha.predim() != a.predim() {
                    Some(format!("A = {ux}: predim(A) = {} but predim(hat(A)) = {}", a.predim(), ha.predim()))
                } else if hm.induced_unchecked(ux) != ha {
                    Some(format!("A = {ux}: hat(A) is not the substructure of hat(M) on A"))
                } else if !hm.is_strong(ux).expect("subset") {
                    Some(format!("A = {ux}: hat(A) is not strong in hat(M)"))
                } else {
                    None
                };
                match detail {
                    Some(d) => Outcome::Bad(Counterexample::new(&[m, &a], d)),
                    None => Outcome::Ok,
                }
            })
            .collect();
        t.add_all(outcomes);
    }
    t.notes.push(chain_note(&chain));
    Ok(())
}

fn chain_note(chain: &crate::chain::ChainApproximation) -> String {
    let sizes: Vec<String> = chain.stages.iter().map(|s| s.len().to_string()).collect();
    format!(
        "{} chain with seed {}: {} stages of sizes [{}], stopped: {:?}",
        chain.config.class,
        chain.config.seed,
        chain.stages.len(),
        sizes.join(", "),
        chain.stop
    )
}

fn theorem_geometry_equality(config: &VerifyConfig, t: &mut Tally) -> Result<()> {
    let chain = build_generic(&config.chain)?;
    let checks = theorem_geometry_check(&chain)?;
    t.notes.push(chain_note(&chain));
    for c in &checks {
        let m = &chain.stages[c.stage];
        t.instances += c.stabilized;
        for x in &c.stabilized_mismatches {
            t.bad.push(Counterexample::new(
                &[m],
                format!("stage {}: ranks of {x} differ in G(M) and G(hat(M))", c.stage),
            ));
        }
        t.notes.push(format!(
            "stage {}: {} stabilized, {} unstabilized ({} mismatches), {} fresh ({} mismatches)",
            c.stage,
            c.stabilized,
            c.unstabilized,
            c.unstabilized_mismatches.len(),
            c.fresh,
            c.fresh_mismatches.len()
        ));
    }
    let tail = &checks[checks.len().saturating_sub(5)..];
    for w in tail.windows(2) {
        if w[1].unstabilized > w[0].unstabilized {
            t.bad.push(Counterexample::new(
                &[&chain.stages[w[1].stage]],
                format!(
                    "unstabilized count rose from {} at stage {} to {} at stage {}",
                    w[0].unstabilized, w[0].stage, w[1].unstabilized, w[1].stage
                ),
            ));
        }
    }
    Ok(())
}

fn reduct_remark(a: &SStructure) -> Outcome {
    let r = geometry_of(a).and_then(|g| g.dependent_n_structure(a.arity()));
    match r {
        Ok(d) if d.edges() == a.edges() => Outcome::Ok,
        Ok(d) => Outcome::Bad(Counterexample::new(&[a, &d], "edges differ from the dependent n-sets")),
        Err(e) => Outcome::Bad(Counterexample::new(&[a], e.to_string())),
    }
}

fn geo_idempotent(a: &SStructure) -> Outcome {
    match geometry_of(a).and_then(|g| g.geo_operator(a.arity())) {
        Ok(h) if h == *a => Outcome::Ok,
        Ok(h) => Outcome::Bad(Counterexample::new(&[a, &h], "G(A)^geo differs from A")),
        Err(e) => Outcome::Bad(Counterexample::new(&[a], e.to_string())),
    }
}

fn closed_sets_are_cliques(a: &SStructure) -> Outcome {
    let g = match geometry_of(a) {
        Ok(g) => g,
        Err(e) => return Outcome::Bad(Counterexample::new(&[a], e.to_string())),
    };
    let flats = large_rank_n_minus_one_flats(&g, a.arity());
    if flats.as_slice() == a.maximal_cliques() {
        Outcome::Ok
    } else {
        Outcome::Bad(Counterexample::new(
            &[a],
            format!("large flats of rank n-1 {flats:?} differ from the maximal cliques {:?}", a.maximal_cliques()),
        ))
    }
}

fn generic_geo_closed_sets(config: &VerifyConfig, t: &mut Tally) -> Result<()> {
    let chain = build_generic(&ChainConfig {
        class: ClassId::Geo,
        ..config.chain.clone()
    })?;
    t.add_all(chain.stages.par_iter().map(closed_sets_are_cliques).collect());
    t.notes.push(chain_note(&chain));
    let all = geometric_structures(config.arity, config.geo_size);
    t.add_all(all.par_iter().map(closed_sets_are_cliques).collect());
    t.notes.push(format!("also checked on all {} geometric structures with at most {} vertices", all.len(), config.geo_size));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> VerifyConfig {
        VerifyConfig {
            small_size: 4,
            c_size: 5,
            geo_size: 5,
            random_instances: 50,
            random_size: 6,
            problem_instances: 30,
            side_size: 6,
            geometries: 10,
            subsets_per_geometry: 3,
            surgery_instances: 10,
            surgery_size: 6,
            chain: ChainConfig {
                steps: 3,
                stage_cap: 8,
                a_cap: 2,
                d_cap: 4,
                ..VerifyConfig::default().chain
            },
            ..VerifyConfig::default()
        }
    }

    #[test]
    fn property_names_parse() {
        for p in PropertyId::ALL {
            assert_eq!(p.name().parse::<PropertyId>().unwrap(), p);
        }
        assert_eq!("delta-geq-d".parse::<PropertyId>().unwrap(), PropertyId::DeltaGeqD);
        assert_eq!(verify_suite("NOPE", &tiny()), Err(Error::UnknownProperty("NOPE".into())));
    }

    #[test]
    fn every_property_passes_on_a_tiny_config() {
        let reports = verify_suite("all", &tiny()).unwrap();
        assert_eq!(reports.len(), PropertyId::ALL.len());
        for r in &reports {
            assert!(r.passed(), "{}", r.to_text());
            assert!(r.instances > 0, "{}", r.property);
        }
    }

    #[test]
    fn submodularity_on_small_clq0_is_exhaustive() {
        let config = VerifyConfig {
            random_instances: 0,
            ..tiny()
        };
        let r = verify_property(PropertyId::Submodularity, &config).unwrap();
        let expected = (0..=4).flat_map(|j| crate::enumerate::all_structures(3, j)).filter(|a| a.class_member(ClassId::Clq0)).count();
        assert_eq!(r.instances, expected as u64);
        assert!(r.passed());
    }

    #[test]
    fn delta_geq_d_free_geometry_is_equality() {
        let a = SStructure::edgeless(3, VSet::range(1, 5)).unwrap();
        let g = geometry_of(&a).unwrap();
        let h = g.geo_operator(3).unwrap();
        assert_eq!(h.predim(), g.rank(a.universe()).unwrap() as i64);
    }

    #[test]
    fn predim_closed_eq_dim_example() {
        let a = SStructure::from_lists(3, &[1, 2, 3, 4], &[&[1, 2, 3], &[1, 2, 4]]).unwrap();
        let g = geometry_of(&a).unwrap();
        assert_eq!(g.rank(a.universe()).unwrap(), 2);
        assert_eq!(g.geo_operator(3).unwrap().predim(), 2);
        assert!(matches!(predim_closed_eq_dim(&a), Outcome::Ok));
    }

    #[test]
    fn reports_are_deterministic() {
        let c = tiny();
        let a = verify_property(PropertyId::AmalgamPredim, &c).unwrap();
        let b = verify_property(PropertyId::AmalgamPredim, &c).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }
}
