//! Homology of chain complexes over Z[1/2]: free ranks, odd torsion, and the
//! q-degree decomposition of the free part when the differential is graded.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::complex::ChainComplex;
use crate::matrix::SparseMat;
use crate::snf;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DegreeHomology {
    pub free_rank: usize,
    /// Odd prime power orders, ascending; powers of 2 are units in Z[1/2].
    pub odd_torsion: Vec<BigInt>,
    /// qdeg -> free rank, present only when every differential entry
    /// preserves qdeg (then the complex splits as a direct sum over q).
    pub free_qdegs: Option<BTreeMap<i64, usize>>,
}

/// d∘d = 0 is enforced by `ChainComplex::new`, so inputs here are always
/// honest complexes.
pub fn homology(cx: &ChainComplex) -> BTreeMap<i64, DegreeHomology> {
    let q_graded = cx.differential_shifts().iter().all(|&s| s == 0);
    let mut rank_in: BTreeMap<i64, usize> = BTreeMap::new();
    let mut rank_in_q: BTreeMap<i64, BTreeMap<i64, usize>> = BTreeMap::new();
    let mut out: BTreeMap<i64, DegreeHomology> = BTreeMap::new();

    for r in cx.degrees() {
        let mut h = DegreeHomology::default();
        let blocks = differential_blocks(cx, r, q_graded);
        let mut rank_out_total = 0;
        let mut rank_out_q: BTreeMap<i64, usize> = BTreeMap::new();
        for (q, m) in &blocks {
            let (rank, invariants) = snf::rank_and_invariants(m);
            rank_out_total += rank;
            *rank_out_q.entry(*q).or_default() += rank;
            // torsion produced by this differential lives in degree r+1
            let tors = &mut out.entry(r + 1).or_default().odd_torsion;
            for d in &invariants {
                tors.extend(snf::odd_prime_power_factors(d));
            }
        }

        h.free_rank = cx.rank(r) - rank_out_total - rank_in.get(&r).copied().unwrap_or(0);
        if q_graded {
            let mut per_q: BTreeMap<i64, usize> = BTreeMap::new();
            for g in &cx.module(r).gens {
                *per_q.entry(g.qdeg).or_default() += 1;
            }
            let incoming = rank_in_q.remove(&r).unwrap_or_default();
            for (q, n) in per_q {
                let used = rank_out_q.get(&q).copied().unwrap_or(0)
                    + incoming.get(&q).copied().unwrap_or(0);
                let free = n - used;
                if free > 0 {
                    h.free_qdegs.get_or_insert_with(BTreeMap::new).insert(q, free);
                }
            }
            if h.free_qdegs.is_none() {
                h.free_qdegs = Some(BTreeMap::new());
            }
        }
        rank_in.insert(r + 1, rank_out_total);
        rank_in_q.insert(r + 1, rank_out_q);

        let slot = out.entry(r).or_default();
        slot.free_rank = h.free_rank;
        slot.free_qdegs = h.free_qdegs;
    }

    for h in out.values_mut() {
        h.odd_torsion.sort();
    }
    out
}

/// The differential out of degree r, split into q-blocks when the complex is
/// q-graded (rank and torsion then come block by block, which is much faster
/// on big cubes), or as a single block otherwise.
fn differential_blocks(cx: &ChainComplex, r: i64, q_graded: bool) -> Vec<(i64, SparseMat)> {
    let d = match cx.d_ref(r) {
        Some(d) => d,
        None => return Vec::new(),
    };
    if !q_graded {
        return vec![(0, d.clone())];
    }
    let (src, tgt) = (cx.module(r), cx.module(r + 1));
    let mut src_q: BTreeMap<i64, BTreeMap<usize, usize>> = BTreeMap::new();
    for (i, g) in src.gens.iter().enumerate() {
        let m = src_q.entry(g.qdeg).or_default();
        let n = m.len();
        m.insert(i, n);
    }
    let mut tgt_q: BTreeMap<i64, BTreeMap<usize, usize>> = BTreeMap::new();
    for (i, g) in tgt.gens.iter().enumerate() {
        let m = tgt_q.entry(g.qdeg).or_default();
        let n = m.len();
        m.insert(i, n);
    }
    src_q
        .into_iter()
        .map(|(q, cols)| {
            let rows = tgt_q.get(&q).cloned().unwrap_or_default();
            let block = d.submatrix(rows.len(), cols.len(), &rows, &cols);
            (q, block)
        })
        .collect()
}

pub fn total_free_rank(h: &BTreeMap<i64, DegreeHomology>) -> usize {
    h.values().map(|x| x.free_rank).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{ChainComplex, GradedModule};
    use crate::matrix::SparseMat;

    #[test]
    fn zero_differential_reports_module_ranks() {
        let cx =
            ChainComplex::new(0, vec![GradedModule::from_qdegs([1, -1])], vec![]).unwrap();
        let h = homology(&cx);
        assert_eq!(h[&0].free_rank, 2);
        assert_eq!(h[&0].free_qdegs.as_ref().unwrap(), &BTreeMap::from([(-1, 1), (1, 1)]));
        assert!(h[&0].odd_torsion.is_empty());
    }

    #[test]
    fn multiplication_by_two_is_acyclic_over_z_half() {
        let cx = ChainComplex::new(
            0,
            vec![GradedModule::from_qdegs([0]), GradedModule::from_qdegs([0])],
            vec![SparseMat::from_int_entries(1, 1, [(0, 0, 2)])],
        )
        .unwrap();
        let h = homology(&cx);
        assert!(h.values().all(|x| x.free_rank == 0 && x.odd_torsion.is_empty()));
    }

    #[test]
    fn multiplication_by_three_leaves_torsion() {
        let cx = ChainComplex::new(
            0,
            vec![GradedModule::from_qdegs([0]), GradedModule::from_qdegs([0])],
            vec![SparseMat::from_int_entries(1, 1, [(0, 0, 3)])],
        )
        .unwrap();
        let h = homology(&cx);
        assert_eq!(h[&0].free_rank, 0);
        assert_eq!(h[&1].free_rank, 0);
        assert_eq!(h[&1].odd_torsion, vec![BigInt::from(3)]);
    }

    #[test]
    fn q_blocks_match_whole_matrix_ranks() {
        // two independent q-blocks: q=0 has an iso, q=2 has a zero map
        let m0 = GradedModule::from_qdegs([0, 2]);
        let m1 = GradedModule::from_qdegs([0, 2]);
        let d = SparseMat::from_int_entries(2, 2, [(0, 0, 5)]);
        let cx = ChainComplex::new(0, vec![m0, m1], vec![d]).unwrap();
        let h = homology(&cx);
        assert_eq!(h[&0].free_rank, 1);
        assert_eq!(h[&0].free_qdegs.as_ref().unwrap(), &BTreeMap::from([(2, 1)]));
        assert_eq!(h[&1].free_rank, 1);
        assert_eq!(h[&1].odd_torsion, vec![BigInt::from(5)]);
    }
}
