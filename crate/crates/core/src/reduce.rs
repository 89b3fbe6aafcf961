//! Homotopy-preserving reduction of chain complexes by Gaussian elimination.
//!
//! A differential entry φ can be cancelled when it is a unit of Z[1/2] (±2^k)
//! and connects generators of equal qdeg; the second condition keeps the
//! produced inclusion/projection maps filtered of degree 0, so Lee filtration
//! degrees transport through them exactly. Cancelling (a ∈ C_r, b ∈ C_{r+1})
//! rewrites d_r by the usual rank-one correction ε − γφ⁻¹δ, drops row a of
//! d_{r-1} and column b of d_{r+1}, and (when witnesses are tracked) updates
//!
//!   incl[w] -= φ⁻¹·d(b,w)·incl[a]      w ≠ a in C_r
//!   proj[x] -= d(x,a)·φ⁻¹·proj[b]      x ≠ b in C_{r+1}
//!   H       += (−φ⁻¹)·incl[a]⊗proj[b]
//!
//! which maintains proj∘incl = id and incl∘proj − id = dH + Hd throughout.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use crate::complex::{ChainComplex, ChainMap, Cx, GradedModule};
use crate::matrix::{vec_add_scaled, SparseMat, SparseVec};
use crate::ring::Dyadic;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessLevel {
    /// Only the reduced complex (fastest, for homology of big cubes).
    None,
    /// Also incl/proj chain maps (for transporting maps and classes).
    Maps,
    /// Also the homotopy H with incl∘proj − id = dH + Hd.
    Full,
}

pub struct Reduction {
    pub reduced: Cx,
    pub incl: Option<ChainMap>,
    pub proj: Option<ChainMap>,
    pub homotopy: Option<ChainMap>,
}

pub fn reduce(cx: &Cx) -> Reduction {
    reduce_with(cx, WitnessLevel::Full, None)
}

pub type KeepFn<'a> = dyn Fn(i64, usize) -> bool + 'a;

/// `keep(r, original index)` = true protects a generator from cancellation;
/// reduce_with never removes protected generators, which is how R-move maps
/// retract a complex onto a chosen layer.
pub fn reduce_with(cx: &Cx, level: WitnessLevel, keep: Option<&KeepFn>) -> Reduction {
    let n = cx.total_degrees();
    let min_r = cx.min_r();
    let witnesses = level != WitnessLevel::None;
    let full = level == WitnessLevel::Full;

    // live generators and the working differential, column-major + row index
    let mut live: Vec<BTreeSet<usize>> =
        (0..n).map(|i| (0..cx.rank(min_r + i as i64)).collect()).collect();
    let mut cols: Vec<BTreeMap<usize, SparseVec>> = vec![BTreeMap::new(); n];
    let mut rowidx: Vec<BTreeMap<usize, BTreeSet<usize>>> = vec![BTreeMap::new(); n];
    for i in 0..n {
        if let Some(d) = cx.d_ref(min_r + i as i64) {
            for j in 0..d.cols() {
                let col = d.col(j);
                if col.is_empty() {
                    continue;
                }
                for row in col.keys() {
                    rowidx[i].entry(*row).or_default().insert(j);
                }
                cols[i].insert(j, col.clone());
            }
        }
    }
    let mut incl: Vec<BTreeMap<usize, SparseVec>> = Vec::new();
    let mut proj: Vec<BTreeMap<usize, SparseVec>> = Vec::new();
    let mut hom: Vec<BTreeMap<usize, SparseVec>> = Vec::new();
    if witnesses {
        incl = (0..n)
            .map(|i| live[i].iter().map(|&g| (g, SparseVec::from([(g, Dyadic::one())]))).collect())
            .collect();
        proj = incl.clone();
    }
    if full {
        hom = vec![BTreeMap::new(); n];
    }

    let qdeg = |i: usize, g: usize| cx.module(min_r + i as i64).qdeg(g);
    let kept = |i: usize, g: usize| keep.is_some_and(|k| k(min_r + i as i64, g));
    let admissible = |i: usize, col: usize, row: usize, v: &Dyadic| {
        v.is_unit() && qdeg(i, col) == qdeg(i + 1, row) && !kept(i, col) && !kept(i + 1, row)
    };

    let mut heap: BinaryHeap<Reverse<(usize, usize, usize, usize)>> = BinaryHeap::new();
    let cost = |cols: &[BTreeMap<usize, SparseVec>],
                rowidx: &[BTreeMap<usize, BTreeSet<usize>>],
                i: usize,
                col: usize,
                row: usize| {
        (cols[i][&col].len() - 1) * (rowidx[i][&row].len() - 1)
    };
    for i in 0..n {
        for (col, colvec) in &cols[i] {
            for (row, v) in colvec {
                if admissible(i, *col, *row, v) {
                    let c = (colvec.len() - 1) * (rowidx[i][row].len() - 1);
                    heap.push(Reverse((c, i, *col, *row)));
                }
            }
        }
    }

    while let Some(Reverse((c, i, a, b))) = heap.pop() {
        if !live[i].contains(&a) || !live[i + 1].contains(&b) {
            continue;
        }
        let phi = match cols[i].get(&a).and_then(|col| col.get(&b)) {
            Some(v) if admissible(i, a, b, v) => v.clone(),
            _ => continue,
        };
        let cur = cost(&cols, &rowidx, i, a, b);
        if cur > c {
            heap.push(Reverse((cur, i, a, b)));
            continue;
        }
        let phi_inv = phi.inv();

        // snapshot the pivot column (γ over rows) and pivot row (δ over cols)
        let col_a: SparseVec = cols[i].remove(&a).unwrap();
        let row_b: Vec<(usize, Dyadic)> = rowidx[i]
            .get(&b)
            .map(|set| {
                set.iter()
                    .filter(|&&w| w != a)
                    .map(|&w| (w, cols[i][&w][&b].clone()))
                    .collect()
            })
            .unwrap_or_default();
        for row in col_a.keys() {
            rowidx[i].get_mut(row).unwrap().remove(&a);
        }

        // rank-one correction ε -= γ φ⁻¹ δ
        for (w, delta) in &row_b {
            let scale = -(&phi_inv * delta);
            let col_w = cols[i].get_mut(w).unwrap();
            for (y, gamma) in &col_a {
                if *y == b {
                    continue;
                }
                let add = &scale * gamma;
                let entry = col_w.entry(*y).or_insert_with(Dyadic::zero);
                *entry += &add;
                let val = entry.clone();
                if val.is_zero() {
                    col_w.remove(y);
                    rowidx[i].get_mut(y).unwrap().remove(w);
                } else {
                    rowidx[i].entry(*y).or_default().insert(*w);
                    if admissible(i, *w, *y, &val) {
                        let cc = (col_w.len() - 1) * (rowidx[i][y].len() - 1);
                        heap.push(Reverse((cc, i, *w, *y)));
                    }
                }
            }
            // the pivot row entry in column w dies with row b
            let col_w = cols[i].get_mut(w).unwrap();
            col_w.remove(&b);
            if col_w.is_empty() {
                cols[i].remove(w);
            }
        }
        rowidx[i].remove(&b);

        // witness updates with the pre-cancellation snapshots
        if witnesses {
            let i_a = incl[i].remove(&a).unwrap();
            let p_b = proj[i + 1].remove(&b).unwrap();
            // the partner entries die with their generators, no correction
            proj[i].remove(&a);
            incl[i + 1].remove(&b);
            for (w, delta) in &row_b {
                let cvec = -(&phi_inv * delta);
                vec_add_scaled(incl[i].get_mut(w).unwrap(), &i_a, &cvec);
            }
            for (x, gamma) in &col_a {
                if *x == b {
                    continue;
                }
                let cvec = -(gamma * &phi_inv);
                vec_add_scaled(proj[i + 1].get_mut(x).unwrap(), &p_b, &cvec);
            }
            if full {
                let minus = -&phi_inv;
                for (orig, pv) in &p_b {
                    let c = &minus * pv;
                    let slot = hom[i + 1].entry(*orig).or_default();
                    vec_add_scaled(slot, &i_a, &c);
                    let now_empty = slot.is_empty();
                    if now_empty {
                        hom[i + 1].remove(orig);
                    }
                }
            }
        }

        // row a of d_{r-1} and column b of d_{r+1} are dropped outright
        if i > 0 {
            if let Some(colset) = rowidx[i - 1].remove(&a) {
                for w in colset {
                    let col_w = cols[i - 1].get_mut(&w).unwrap();
                    col_w.remove(&a);
                    if col_w.is_empty() {
                        cols[i - 1].remove(&w);
                    }
                }
            }
        }
        if i + 1 < n {
            if let Some(col_b) = cols[i + 1].remove(&b) {
                for row in col_b.keys() {
                    rowidx[i + 1].get_mut(row).unwrap().remove(&b);
                }
            }
        }
        live[i].remove(&a);
        live[i + 1].remove(&b);
    }

    // assemble the reduced complex in original generator order
    let mut modules = Vec::with_capacity(n);
    let mut remap: Vec<BTreeMap<usize, usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let gens = live[i]
            .iter()
            .map(|&g| cx.module(min_r + i as i64).gens[g].clone())
            .collect();
        modules.push(GradedModule { gens });
        remap.push(live[i].iter().enumerate().map(|(new, &old)| (old, new)).collect());
    }
    let mut diffs = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n.saturating_sub(1) {
        let mut d = SparseMat::new(modules[i + 1].rank(), modules[i].rank());
        for (col, colvec) in &cols[i] {
            for (row, v) in colvec {
                d.set(remap[i + 1][row], remap[i][col], v.clone());
            }
        }
        diffs.push(d);
    }
    let reduced = ChainComplex::new(min_r, modules, diffs).expect("reduction broke d∘d = 0");

    if !witnesses {
        return Reduction { reduced, incl: None, proj: None, homotopy: None };
    }

    let q_graded = cx.differential_shifts().iter().all(|&s| s == 0);
    let make = |cx_from: &Cx, cx_to: &Cx, comps: BTreeMap<i64, SparseMat>| {
        if q_graded {
            ChainMap::graded(cx_from.clone(), cx_to.clone(), 0, comps)
        } else {
            ChainMap::filtered(cx_from.clone(), cx_to.clone(), 0, comps)
        }
        .expect("reduction witnesses must be chain maps")
    };
    let mut incl_comps = BTreeMap::new();
    let mut proj_comps = BTreeMap::new();
    for i in 0..n {
        let r = min_r + i as i64;
        let mut im = SparseMat::new(cx.rank(r), reduced.rank(r));
        for (g, col) in &incl[i] {
            for (orig, v) in col {
                im.set(*orig, remap[i][g], v.clone());
            }
        }
        if !im.is_zero() {
            incl_comps.insert(r, im);
        }
        let mut pm = SparseMat::new(reduced.rank(r), cx.rank(r));
        for (g, rowv) in &proj[i] {
            for (orig, v) in rowv {
                pm.set(remap[i][g], *orig, v.clone());
            }
        }
        if !pm.is_zero() {
            proj_comps.insert(r, pm);
        }
    }
    let incl_map = make(&reduced, cx, incl_comps);
    let proj_map = make(cx, &reduced, proj_comps);
    debug_assert!(proj_map.compose(&incl_map).eq_on_the_nose(&ChainMap::identity(&reduced)));

    let homotopy = full.then(|| {
        let mut comps = BTreeMap::new();
        for i in 1..n {
            let r = min_r + i as i64;
            let mut hm = SparseMat::new(cx.rank(r - 1), cx.rank(r));
            for (orig, col) in &hom[i] {
                for (row, v) in col {
                    hm.set(*row, *orig, v.clone());
                }
            }
            if !hm.is_zero() {
                comps.insert(r, hm);
            }
        }
        let h = ChainMap::homotopy(cx.clone(), cx.clone(), comps)
            .expect("homotopy witness has valid shapes");
        debug_assert!(homotopy_equation_holds(cx, &incl_map, &proj_map, &h));
        h
    });

    Reduction { reduced, incl: Some(incl_map), proj: Some(proj_map), homotopy }
}

/// incl∘proj − id = dH + Hd, checked exactly.
pub fn homotopy_equation_holds(cx: &Cx, incl: &ChainMap, proj: &ChainMap, h: &ChainMap) -> bool {
    let ip = incl.compose(proj);
    let id = ChainMap::identity(cx);
    for r in cx.degrees() {
        let lhs = ip.comp(r).sub(&id.comp(r));
        let rhs = h.comp(r + 1).compose(&cx.d(r)).add(&cx.d(r - 1).compose(&h.comp(r)));
        if lhs != rhs {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::GradedModule;
    use crate::homology::homology;

    fn cx_from(min_r: i64, qdegs: Vec<Vec<i64>>, diffs: Vec<SparseMat>) -> Cx {
        let modules = qdegs.into_iter().map(GradedModule::from_qdegs).collect();
        ChainComplex::new(min_r, modules, diffs).unwrap()
    }

    #[test]
    fn acyclic_unit_pair_reduces_to_zero() {
        let cx = cx_from(
            0,
            vec![vec![3], vec![3]],
            vec![SparseMat::from_int_entries(1, 1, [(0, 0, 1)])],
        );
        let red = reduce(&cx);
        assert!(red.reduced.is_zero_complex());
        assert!(red.incl.unwrap().is_zero());
        // incl∘proj - id = dH + Hd pins H = φ⁻¹ on the single slot
        let h = red.homotopy.unwrap();
        assert_eq!(h.comp(1).get(0, 0), Dyadic::from_int(-1));
    }

    #[test]
    fn zero_differential_is_untouched() {
        let cx = cx_from(2, vec![vec![1, -1]], vec![]);
        let red = reduce(&cx);
        assert_eq!(*red.reduced, *cx);
        assert!(red.proj.unwrap().eq_on_the_nose(&ChainMap::identity(&cx)));
    }

    #[test]
    fn qdeg_mismatched_units_are_not_pivots() {
        // unit entry but qdeg 0 -> 4: must survive (Lee-style safety)
        let cx = cx_from(
            0,
            vec![vec![0], vec![4]],
            vec![SparseMat::from_int_entries(1, 1, [(0, 0, 1)])],
        );
        let red = reduce(&cx);
        assert_eq!(red.reduced.total_rank(), 2);
    }

    #[test]
    fn keep_predicate_protects_generators() {
        let cx = cx_from(
            0,
            vec![vec![0], vec![0]],
            vec![SparseMat::from_int_entries(1, 1, [(0, 0, 1)])],
        );
        let red = reduce_with(&cx, WitnessLevel::Maps, Some(&|r, _| r == 0));
        assert_eq!(red.reduced.total_rank(), 2);
    }

    #[test]
    fn homology_is_preserved_on_random_complexes() {
        // deterministic xorshift; three-term complexes with d∘d = 0 built as
        // d1 = A, d0 = B with A·B = 0 via B = (kernel-ish) trick: take B
        // arbitrary, then A built from relations... simpler: block complexes
        // assembled from known pieces glued diagonally.
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for trial in 0..30 {
            // start from a random complex with zero differential, then
            // perturb by change of basis: homology is the starting one
            let n0 = (next() % 4) as usize;
            let n1 = (next() % 4 + 1) as usize;
            let n2 = (next() % 4) as usize;
            let mut d0 = SparseMat::new(n1, n0);
            let mut d1 = SparseMat::new(n2, n1);
            // insert an acyclic pair: generator j in C0 mapped isomorphically
            // to generator j in C1 on a diagonal block
            let k = (next() % (n0.min(n1) as u64 + 1)) as usize;
            for j in 0..k {
                d0.set(j, j, Dyadic::from_int(1 + (next() % 3) as i64));
            }
            // rows of d1 only touch C1 generators beyond the image block
            for i in 0..n2 {
                for j in k..n1 {
                    if next() % 3 == 0 {
                        d1.set(i, j, Dyadic::from_int((next() % 5) as i64 - 2));
                    }
                }
            }
            if !d1.compose(&d0).is_zero() {
                continue;
            }
            let cx = cx_from(
                0,
                vec![vec![0; n0], vec![0; n1], vec![0; n2]],
                vec![d0, d1],
            );
            let red = reduce(&cx);
            let (h1, h2) = (homology(&cx), homology(&red.reduced));
            let ranks = |h: &BTreeMap<i64, crate::homology::DegreeHomology>| {
                (0..3).map(|r| h.get(&r).map_or(0, |x| x.free_rank)).collect::<Vec<_>>()
            };
            assert_eq!(ranks(&h1), ranks(&h2), "trial {trial}");
            assert!(
                red.reduced.total_rank() <= cx.total_rank(),
                "reduction may not grow"
            );
            // euler characteristic is another reduce invariant
            assert_eq!(
                cx.graded_euler_characteristic(),
                red.reduced.graded_euler_characteristic()
            );
        }
    }
}
