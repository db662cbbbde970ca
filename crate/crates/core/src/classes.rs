//! Membership in the five structure classes, with violation witnesses.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::structure::SStructure;
use crate::vset::VSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassId {
    /// Distinct maximal cliques meet in fewer than `n` points.
    #[serde(rename = "CLQ0")]
    Clq0,
    /// `Clq0` with every singleton strong.
    #[serde(rename = "CLQ")]
    Clq,
    /// `Clq` with every maximal clique of size exactly `n`.
    #[serde(rename = "SYM")]
    Sym,
    /// Geometric structures: every set of at least `n` points with
    /// predimension below `n` lies in exactly one maximal clique.
    #[serde(rename = "GEO")]
    Geo,
    /// `Sym` with every `(n-1)`-subset independent in the associated geometry.
    #[serde(rename = "C")]
    C,
}

impl ClassId {
    pub const ALL: [ClassId; 5] = [ClassId::Clq0, ClassId::Clq, ClassId::Sym, ClassId::Geo, ClassId::C];

    pub fn tag(self) -> &'static str {
        match self {
            ClassId::Clq0 => "CLQ0",
            ClassId::Clq => "CLQ",
            ClassId::Sym => "SYM",
            ClassId::Geo => "GEO",
            ClassId::C => "C",
        }
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ClassId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_uppercase().as_str() {
            "CLQ0" => Ok(ClassId::Clq0),
            "CLQ" => Ok(ClassId::Clq),
            "SYM" => Ok(ClassId::Sym),
            "GEO" => Ok(ClassId::Geo),
            "C" => Ok(ClassId::C),
            other => Err(Error::invalid(format!("unknown class `{other}`"))),
        }
    }
}

/// Outcome of a membership check. A failed check carries the violating set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCheck {
    pub class: ClassId,
    pub member: bool,
    pub witness: Option<VSet>,
    pub reason: Option<String>,
}

impl ClassCheck {
    fn pass(class: ClassId) -> Self {
        ClassCheck {
            class,
            member: true,
            witness: None,
            reason: None,
        }
    }

    fn fail(class: ClassId, witness: VSet, reason: impl Into<String>) -> Self {
        ClassCheck {
            class,
            member: false,
            witness: Some(witness),
            reason: Some(reason.into()),
        }
    }
}

impl SStructure {
    pub fn class_member(&self, c: ClassId) -> bool {
        self.class_check(c).member
    }

    pub fn class_check(&self, c: ClassId) -> ClassCheck {
        match c {
            ClassId::Clq0 => self.check_clq0(),
            ClassId::Clq => self.check_clq(&self.dimension_table()),
            ClassId::Sym => self.check_sym(&self.dimension_table()),
            ClassId::Geo => self.check_geo(),
            ClassId::C => self.check_c(),
        }
    }

    fn check_clq0(&self) -> ClassCheck {
        let n = self.arity();
        let ks = self.maximal_cliques();
        for (i, a) in ks.iter().enumerate() {
            for b in &ks[i + 1..] {
                let meet = a.intersection(*b);
                if meet.len() >= n {
                    return ClassCheck::fail(
                        ClassId::Clq0,
                        meet,
                        format!("maximal cliques {a} and {b} share {} vertices", meet.len()),
                    );
                }
            }
        }
        ClassCheck::pass(ClassId::Clq0)
    }

    fn check_clq(&self, dims: &[i32]) -> ClassCheck {
        let base = self.check_clq0();
        if !base.member {
            return ClassCheck { class: ClassId::Clq, ..base };
        }
        let u = self.universe();
        for v in u {
            let local = VSet::singleton(v).compress(u) as usize;
            if dims[local] < 1 {
                let w = self
                    .strong_witness(VSet::singleton(v))
                    .ok()
                    .flatten()
                    .unwrap_or(u);
                return ClassCheck::fail(
                    ClassId::Clq,
                    w,
                    format!("singleton {{{v}}} is not strong: a superset has predimension {}", dims[local]),
                );
            }
        }
        ClassCheck::pass(ClassId::Clq)
    }

    fn check_sym(&self, dims: &[i32]) -> ClassCheck {
        let base = self.check_clq(dims);
        if !base.member {
            return ClassCheck { class: ClassId::Sym, ..base };
        }
        if let Some(k) = self.maximal_cliques().iter().find(|k| k.len() != self.arity()) {
            return ClassCheck::fail(ClassId::Sym, *k, format!("maximal clique of size {}", k.len()));
        }
        ClassCheck::pass(ClassId::Sym)
    }

    fn check_geo(&self) -> ClassCheck {
        let n = self.arity();
        let u = self.universe();
        let table = self.predim_table();
        for (mask, &d) in table.iter().enumerate() {
            let m = mask as u32;
            if (m.count_ones() as usize) < n || d >= n as i32 {
                continue;
            }
            let x = VSet::expand(m, u);
            let holders = self.maximal_cliques().iter().filter(|k| x.is_subset(**k)).count();
            if holders != 1 {
                return ClassCheck::fail(
                    ClassId::Geo,
                    x,
                    format!("set with predimension {d} lies in {holders} maximal cliques"),
                );
            }
        }
        ClassCheck::pass(ClassId::Geo)
    }

    fn check_c(&self) -> ClassCheck {
        let dims = self.dimension_table();
        let base = self.check_sym(&dims);
        if !base.member {
            return ClassCheck { class: ClassId::C, ..base };
        }
        let n = self.arity();
        let u = self.universe();
        for x in u.k_subsets(n - 1) {
            let r = dims[x.compress(u) as usize];
            if r < (n - 1) as i32 {
                return ClassCheck::fail(
                    ClassId::C,
                    x,
                    format!("{}-subset has rank {r} in the associated geometry", n - 1),
                );
            }
        }
        ClassCheck::pass(ClassId::C)
    }
}
