//! Canonical labelings for small structures.
//!
//! Vertices are colored by iterated refinement, cells are ordered by color,
//! and every labeling compatible with the cell order is searched for the
//! lexicographically least edge certificate. Vertices related by a
//! transposition automorphism are tried only once per branch.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::structure::SStructure;
use crate::vset::{VSet, Vertex};

/// Largest universe accepted by the brute-force search.
pub const MAX_CANON_VERTICES: usize = 12;

/// Relabels `a` onto `1..=|a|` so that isomorphic structures coincide.
pub fn canonical_form(a: &SStructure) -> Result<SStructure> {
    let order = canonical_order(a, VSet::EMPTY)?;
    relabel_by_order(a, &order, |p| p as Vertex + 1)
}

/// Canonical form over a base that is fixed pointwise.
///
/// Base vertices keep their identifiers; the remaining vertices are renamed to
/// `max(base) + 1, max(base) + 2, ..` (starting at 1 when the base is empty).
/// Two extensions of the same base receive the same form iff they are
/// isomorphic by a map fixing the base pointwise.
pub fn relative_canonical_form(d: &SStructure, base: VSet) -> Result<SStructure> {
    d.check_subset(base)?;
    let order = canonical_order(d, base)?;
    let b = base.len();
    let start = base.max().map_or(1, |m| m + 1);
    relabel_by_order(d, &order, |p| {
        if p < b {
            order[p]
        } else {
            start + (p - b) as Vertex
        }
    })
}

/// Vertex sequence `order` such that vertex `order[p]` receives label `p`.
pub fn canonical_order(a: &SStructure, fixed: VSet) -> Result<Vec<Vertex>> {
    let k = a.len();
    if k > MAX_CANON_VERTICES {
        return Err(Error::ResourceLimit(format!(
            "canonical form search is limited to {MAX_CANON_VERTICES} vertices, got {k}"
        )));
    }
    let verts = a.universe().to_vec();
    if k == 0 {
        return Ok(Vec::new());
    }
    let idx = |v: Vertex| verts.iter().position(|&w| w == v).expect("vertex in universe");
    let edges: Vec<Vec<usize>> = a
        .edges()
        .iter()
        .map(|e| e.iter().map(idx).collect())
        .collect();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, e) in edges.iter().enumerate() {
        for &v in e {
            incident[v].push(i);
        }
    }
    let fixed_idx: Vec<usize> = fixed.iter().map(idx).collect();
    let colors = refine(k, &edges, &incident, &fixed_idx);
    let twin_class = twin_classes(a, &verts, fixed);

    // Cells in color order; fixed vertices come first as singleton cells.
    let mut cells: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (v, &c) in colors.iter().enumerate() {
        cells.entry(c).or_default().push(v);
    }
    let slots: Vec<usize> = cells
        .iter()
        .flat_map(|(&c, members)| std::iter::repeat_n(c, members.len()))
        .collect();

    let mut search = Search {
        edges: &edges,
        incident: &incident,
        colors: &colors,
        twin_class: &twin_class,
        slots: &slots,
        label: vec![usize::MAX; k],
        order: Vec::with_capacity(k),
        cert: Vec::with_capacity(k),
        best: None,
    };
    search.run();
    let best = search.best.expect("at least one labeling");
    Ok(best.0.into_iter().map(|i| verts[i]).collect())
}

fn relabel_by_order<F: Fn(usize) -> Vertex>(a: &SStructure, order: &[Vertex], f: F) -> Result<SStructure> {
    let mut map = [0 as Vertex; 64];
    for (p, &v) in order.iter().enumerate() {
        map[v as usize] = f(p);
    }
    a.relabel(|v| map[v as usize])
}

/// Colors are isomorphism invariant and fixed vertices get their own colors
/// `0..fixed.len()` in identifier order.
fn refine(k: usize, edges: &[Vec<usize>], incident: &[Vec<usize>], fixed: &[usize]) -> Vec<usize> {
    let nf = fixed.len();
    let mut colors = vec![nf; k];
    for (i, &v) in fixed.iter().enumerate() {
        colors[v] = i;
    }
    let mut distinct = count_distinct(&colors);
    loop {
        let sigs: Vec<(usize, Vec<Vec<usize>>)> = (0..k)
            .map(|v| {
                let mut around: Vec<Vec<usize>> = incident[v]
                    .iter()
                    .map(|&e| {
                        let mut cs: Vec<usize> = edges[e].iter().filter(|&&w| w != v).map(|&w| colors[w]).collect();
                        cs.sort_unstable();
                        cs
                    })
                    .collect();
                around.sort_unstable();
                (colors[v], around)
            })
            .collect();
        let mut uniq: Vec<&(usize, Vec<Vec<usize>>)> = sigs.iter().collect();
        uniq.sort();
        uniq.dedup();
        let next: Vec<usize> = sigs
            .iter()
            .map(|s| uniq.binary_search(&s).expect("present"))
            .collect();
        let nd = count_distinct(&next);
        colors = next;
        if nd == distinct {
            break;
        }
        distinct = nd;
    }
    colors
}

fn count_distinct(c: &[usize]) -> usize {
    let mut v = c.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// `class[i] == class[j]` iff swapping vertices `i` and `j` is an automorphism.
fn twin_classes(a: &SStructure, verts: &[Vertex], fixed: VSet) -> Vec<usize> {
    let k = verts.len();
    let mut class: Vec<usize> = (0..k).collect();
    for i in 0..k {
        if class[i] != i || fixed.contains(verts[i]) {
            continue;
        }
        for j in i + 1..k {
            if class[j] != j || fixed.contains(verts[j]) {
                continue;
            }
            if swap_is_automorphism(a, verts[i], verts[j]) {
                class[j] = i;
            }
        }
    }
    class
}

fn swap_is_automorphism(a: &SStructure, x: Vertex, y: Vertex) -> bool {
    a.edges().iter().all(|&e| {
        let (hx, hy) = (e.contains(x), e.contains(y));
        if hx == hy {
            return true;
        }
        let swapped = if hx { e.without(x).with(y) } else { e.without(y).with(x) };
        a.has_edge(swapped)
    })
}

struct Search<'a> {
    edges: &'a [Vec<usize>],
    incident: &'a [Vec<usize>],
    colors: &'a [usize],
    twin_class: &'a [usize],
    slots: &'a [usize],
    label: Vec<usize>,
    order: Vec<usize>,
    cert: Vec<Vec<u64>>,
    best: Option<(Vec<usize>, Vec<Vec<u64>>)>,
}

impl Search<'_> {
    fn run(&mut self) {
        let p = self.order.len();
        if p == self.slots.len() {
            let better = match &self.best {
                None => true,
                Some((_, best)) => self.cert < *best,
            };
            if better {
                self.best = Some((self.order.clone(), self.cert.clone()));
            }
            return;
        }
        let color = self.slots[p];
        let mut tried: Vec<usize> = Vec::new();
        for v in 0..self.label.len() {
            if self.label[v] != usize::MAX || self.colors[v] != color {
                continue;
            }
            let tc = self.twin_class[v];
            if tried.contains(&tc) {
                continue;
            }
            tried.push(tc);

            self.label[v] = p;
            self.order.push(v);
            let code = self.code_at(v);
            self.cert.push(code);
            let prune = match &self.best {
                Some((_, best)) => self.cert[..] > best[..=p],
                None => false,
            };
            if !prune {
                self.run();
            }
            self.cert.pop();
            self.order.pop();
            self.label[v] = usize::MAX;
        }
    }

    /// Label masks of the edges completed by labeling `v`.
    fn code_at(&self, v: usize) -> Vec<u64> {
        let mut code: Vec<u64> = self.incident[v]
            .iter()
            .filter_map(|&e| {
                let mut m = 0u64;
                for &w in &self.edges[e] {
                    let l = self.label[w];
                    if l == usize::MAX {
                        return None;
                    }
                    m |= 1 << l;
                }
                Some(m)
            })
            .collect();
        code.sort_unstable();
        code
    }
}
