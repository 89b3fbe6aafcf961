//! The cube of resolutions over a link diagram and the chain complexes it
//! spans, one per Frobenius structure. Vertices are bit-strings over the
//! crossings (bit k = smoothing choice at crossing k), edges flip one bit
//! from 0 to 1 and either merge two circles or split one.
//!
//! A vertex of height k (number of 1-bits) sits in homological degree
//! r = k - c- and a generator labelled with ±1 per circle has
//! qdeg = (sum of labels) + r + c+ - c-. The absolute offset is calibrated
//! so a 0-crossing unknot gives q + q^-1 and curls change nothing; with
//! this normalization no extra writhe-dependent term is needed.

use std::collections::BTreeMap;

use crate::complex::{ChainComplex, Cx, GenLabel, GradedModule, Generator};
use crate::diagram::{Diagram, Resolution};
use crate::embed::circle_geometry;
use crate::error::Result;
use crate::frobenius::{Functor, VMINUS, VPLUS};
use crate::laurent::Laurent;
use crate::matrix::SparseMat;
use crate::ring::Dyadic;

/// What an edge does to the source circles; all indices are positions in
/// the respective `Resolution::circles`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    /// Source circles (a, b) fuse into target circle c.
    Merge(usize, usize, usize),
    /// Source circle c tears into target circles (a, b).
    Split(usize, usize, usize),
}

#[derive(Clone, Debug)]
pub struct CubeEdge {
    pub from: u64,
    pub to: u64,
    pub sign: i64,
    pub kind: EdgeKind,
}

#[derive(Clone, Debug)]
pub struct Cube {
    pub diagram: Diagram,
    pub c_plus: i64,
    pub c_minus: i64,
    /// Indexed by the vertex bit-string.
    pub resolutions: Vec<Resolution>,
    /// Grouped by from-vertex height, ascending vertex then ascending bit.
    pub edges: Vec<CubeEdge>,
}

/// Generator offsets: vertices of equal height share a chain degree, laid
/// out by ascending bit-string, then labelings in binary order (v+ = 0 bit,
/// circle 0 most significant).
pub struct CubeLayout {
    pub by_height: Vec<Vec<u64>>,
    pub base: BTreeMap<u64, usize>,
    pub rank_at_height: Vec<usize>,
}

pub fn cube(d: &Diagram) -> Cube {
    let c = d.n_crossings();
    assert!(c < 26, "resolution cube over {c} crossings will not fit in memory");
    let mut resolutions = Vec::with_capacity(1 << c);
    let mut choice = vec![0u8; c];
    for v in 0..1u64 << c {
        for (k, ch) in choice.iter_mut().enumerate() {
            *ch = (v >> k & 1) as u8;
        }
        resolutions.push(d.resolve(&choice));
    }
    let mut edges = Vec::new();
    let mut by_height: Vec<Vec<u64>> = vec![Vec::new(); c + 1];
    for v in 0..1u64 << c {
        by_height[v.count_ones() as usize].push(v);
    }
    for level in &by_height[..c.max(1).min(c + 1)] {
        for &v in level {
            for b in 0..c {
                if v >> b & 1 == 1 {
                    continue;
                }
                let to = v | 1 << b;
                let below = (v & ((1u64 << b) - 1)).count_ones();
                let sign = if below % 2 == 0 { 1 } else { -1 };
                let kind = edge_kind(&resolutions[v as usize], &resolutions[to as usize]);
                edges.push(CubeEdge { from: v, to, sign, kind });
            }
        }
    }
    Cube {
        diagram: d.clone(),
        c_plus: d.positive_crossings() as i64,
        c_minus: d.negative_crossings() as i64,
        resolutions,
        edges,
    }
}

fn edge_kind(src: &Resolution, tgt: &Resolution) -> EdgeKind {
    if src.len() == tgt.len() + 1 {
        let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, circ) in src.circles.iter().enumerate() {
            let t = tgt.circle_of[&circ[0]];
            if let Some(&j) = seen.get(&t) {
                return EdgeKind::Merge(j, i, t);
            }
            seen.insert(t, i);
        }
        unreachable!("merge edge without a fused pair");
    }
    if src.len() + 1 == tgt.len() {
        for (i, circ) in src.circles.iter().enumerate() {
            let t0 = tgt.circle_of[&circ[0]];
            if let Some(&e) = circ.iter().find(|e| tgt.circle_of[e] != t0) {
                let t1 = tgt.circle_of[&e];
                return EdgeKind::Split(i, t0.min(t1), t0.max(t1));
            }
        }
        unreachable!("split edge without a torn circle");
    }
    unreachable!("adjacent smoothings always change the circle count by one");
}

impl Cube {
    pub fn n_crossings(&self) -> usize {
        self.diagram.n_crossings()
    }

    pub fn choice_of(&self, v: u64) -> Vec<u8> {
        (0..self.n_crossings()).map(|k| (v >> k & 1) as u8).collect()
    }

    pub fn height(&self, v: u64) -> usize {
        v.count_ones() as usize
    }

    pub fn r_of(&self, v: u64) -> i64 {
        self.height(v) as i64 - self.c_minus
    }

    /// Nesting depth of each circle of the given resolution in the plane.
    pub fn nesting(&self, v: u64) -> Result<Vec<usize>> {
        let choice = self.choice_of(v);
        let reversed = vec![false; self.diagram.n_components()];
        let geo = circle_geometry(&self.diagram, &choice, &self.resolutions[v as usize], &reversed)?;
        Ok(geo.depth)
    }

    pub fn layout(&self) -> CubeLayout {
        let c = self.n_crossings();
        let mut by_height: Vec<Vec<u64>> = vec![Vec::new(); c + 1];
        for v in 0..1u64 << c {
            by_height[v.count_ones() as usize].push(v);
        }
        let mut base = BTreeMap::new();
        let mut rank_at_height = Vec::with_capacity(c + 1);
        for level in &by_height {
            let mut offset = 0usize;
            for &v in level {
                base.insert(v, offset);
                offset += 1usize << self.resolutions[v as usize].len();
            }
            rank_at_height.push(offset);
        }
        CubeLayout { by_height, base, rank_at_height }
    }
}

/// Labeling `idx` over `n` circles, most significant bit = circle 0,
/// set bit = v-.
pub fn labels_of_index(n: usize, idx: usize) -> Vec<i8> {
    (0..n)
        .map(|i| if idx >> (n - 1 - i) & 1 == 1 { VMINUS } else { VPLUS })
        .collect()
}

pub fn index_of_labels(labels: &[i8]) -> usize {
    labels
        .iter()
        .fold(0, |acc, &l| acc << 1 | usize::from(l == VMINUS))
}

pub fn complex(d: &Diagram, functor: Functor) -> Result<Cx> {
    let cb = cube(d);
    complex_of_cube(&cb, functor)
}

pub fn complex_of_cube(cb: &Cube, functor: Functor) -> Result<Cx> {
    let c = cb.n_crossings();
    let lay = cb.layout();
    let global = cb.c_plus - cb.c_minus;

    let mut modules = Vec::with_capacity(c + 1);
    for (k, level) in lay.by_height.iter().enumerate() {
        let r = k as i64 - cb.c_minus;
        let mut gens = Vec::with_capacity(lay.rank_at_height[k]);
        for &v in level {
            let n = cb.resolutions[v as usize].len();
            for idx in 0..1usize << n {
                let labels = labels_of_index(n, idx);
                let sum: i64 = labels.iter().map(|&l| l as i64).sum();
                gens.push(Generator {
                    label: GenLabel::Cube { vertex: v, labels },
                    qdeg: sum + r + global,
                });
            }
        }
        modules.push(GradedModule { gens });
    }

    let mut diffs: Vec<SparseMat> = (0..c)
        .map(|k| SparseMat::new(lay.rank_at_height[k + 1], lay.rank_at_height[k]))
        .collect();
    for e in &cb.edges {
        let k = cb.height(e.from);
        let src = &cb.resolutions[e.from as usize];
        let tgt = &cb.resolutions[e.to as usize];
        let (ns, nt) = (src.len(), tgt.len());
        let fwd: Vec<usize> = src
            .circles
            .iter()
            .map(|circ| tgt.circle_of[&circ[0]])
            .collect();
        let sbase = lay.base[&e.from];
        let tbase = lay.base[&e.to];
        let dm = &mut diffs[k];
        let mut labels = vec![0i8; ns];
        let mut tl = vec![0i8; nt];
        for idx in 0..1usize << ns {
            for (i, l) in labels.iter_mut().enumerate() {
                *l = if idx >> (ns - 1 - i) & 1 == 1 { VMINUS } else { VPLUS };
            }
            match e.kind {
                EdgeKind::Merge(a, b, t) => {
                    for i in 0..ns {
                        if i != a && i != b {
                            tl[fwd[i]] = labels[i];
                        }
                    }
                    for (z, coeff) in functor.multiply(labels[a], labels[b]) {
                        tl[t] = z;
                        dm.add_to(
                            tbase + index_of_labels(&tl),
                            sbase + idx,
                            Dyadic::from_int(e.sign * coeff),
                        );
                    }
                }
                EdgeKind::Split(s, t0, t1) => {
                    for i in 0..ns {
                        if i != s {
                            tl[fwd[i]] = labels[i];
                        }
                    }
                    for ((u, w), coeff) in functor.comultiply(labels[s]) {
                        tl[t0] = u;
                        tl[t1] = w;
                        dm.add_to(
                            tbase + index_of_labels(&tl),
                            sbase + idx,
                            Dyadic::from_int(e.sign * coeff),
                        );
                    }
                }
            }
        }
    }

    ChainComplex::new(-cb.c_minus, modules, diffs)
}

pub fn jones(d: &Diagram) -> Result<Laurent> {
    Ok(complex(d, Functor::Kh)?.graded_euler_characteristic())
}
