//! Deciding equality in the homotopy category: given a chain map f, find h
//! with dh + hd = f, or certify that none exists over Z[1/2].
//!
//! Both endpoint complexes are reduced first (with full witnesses), the small
//! system is solved exactly, and the answer is pulled back through
//!
//!   h = i_D h' p_C + H_D f + i_D p_D f H_C
//!
//! which satisfies dh + hd = f whenever d'h' + h'd' = p_D f i_C. A solution
//! exists on the originals iff one exists on the reductions (conjugating by
//! incl/proj in either direction), so "absent" is an exact verdict.

use std::collections::BTreeMap;

use crate::complex::ChainMap;
use crate::matrix::SparseMat;
use crate::reduce::reduce;
use crate::snf;

pub fn null_homotopy(f: &ChainMap) -> Option<ChainMap> {
    assert_eq!(f.r_shift, 0, "null_homotopy expects a chain map");
    let (src, tgt) = (f.source().clone(), f.target().clone());
    if f.is_zero() {
        return Some(ChainMap::homotopy(src, tgt, BTreeMap::new()).unwrap());
    }

    let rc = reduce(&src);
    let rd = reduce(&tgt);
    let (ic, pc) = (rc.incl.unwrap(), rc.proj.unwrap());
    let (id_, pd) = (rd.incl.unwrap(), rd.proj.unwrap());
    let (hc, hd) = (rc.homotopy.unwrap(), rd.homotopy.unwrap());
    let f_red = pd.compose(f).compose(&ic);
    let (c, d) = (rc.reduced, rd.reduced);

    // unknowns: entries of h'_r : C_r -> D_{r-1}; one equation per position
    // of each degree-r component of d'h' + h'd' = f'
    let mut var_of: BTreeMap<(i64, usize, usize), usize> = BTreeMap::new();
    for r in c.degrees() {
        for p in 0..d.rank(r - 1) {
            for q in 0..c.rank(r) {
                let n = var_of.len();
                var_of.insert((r, p, q), n);
            }
        }
    }
    let mut eq_of: BTreeMap<(i64, usize, usize), usize> = BTreeMap::new();
    for r in c.degrees() {
        for i in 0..d.rank(r) {
            for j in 0..c.rank(r) {
                let n = eq_of.len();
                eq_of.insert((r, i, j), n);
            }
        }
    }

    let mut m = SparseMat::new(eq_of.len(), var_of.len());
    let mut rhs = SparseMat::new(eq_of.len(), 1);
    for (&(r, i, j), &eq) in &eq_of {
        // d^D_{r-1}[i,p] * h_r[p,j]
        if let Some(dd) = d.d_ref(r - 1) {
            for p in 0..d.rank(r - 1) {
                let v = dd.get(i, p);
                if !v.is_zero() {
                    m.add_to(eq, var_of[&(r, p, j)], v);
                }
            }
        }
        // h_{r+1}[i,q] * d^C_r[q,j]
        if let Some(dc) = c.d_ref(r) {
            for (q, v) in dc.col(j) {
                if let Some(&var) = var_of.get(&(r + 1, i, *q)) {
                    m.add_to(eq, var, v.clone());
                }
            }
        }
        let fv = f_red.comp(r).get(i, j);
        if !fv.is_zero() {
            rhs.set(eq, 0, fv);
        }
    }

    let x = snf::solve(&m, &rhs)?;
    let mut comps: BTreeMap<i64, SparseMat> = BTreeMap::new();
    for (&(r, p, q), &var) in &var_of {
        let v = x.get(var, 0);
        if v.is_zero() {
            continue;
        }
        comps
            .entry(r)
            .or_insert_with(|| SparseMat::new(d.rank(r - 1), c.rank(r)))
            .set(p, q, v);
    }
    let h_red = ChainMap::homotopy(c, d, comps).unwrap();

    // reduce hands back dH + Hd = incl proj - id, hence the minus signs
    let h = id_
        .compose(&h_red)
        .compose(&pc)
        .sub(&hd.compose(f))
        .sub(&id_.compose(&pd).compose(f).compose(&hc));
    debug_assert!(is_null_homotopy(f, &h));
    Some(h)
}

/// dh + hd = f, checked exactly.
pub fn is_null_homotopy(f: &ChainMap, h: &ChainMap) -> bool {
    assert_eq!(h.r_shift, -1);
    let (src, tgt) = (f.source(), f.target());
    let lo = src.min_r().min(tgt.min_r());
    let hi = src.max_r().max(tgt.max_r());
    for r in lo..=hi {
        let dh = tgt.d(r - 1).compose(&h.comp(r));
        let hd = h.comp(r + 1).compose(&src.d(r));
        if dh.add(&hd) != f.comp(r) {
            return false;
        }
    }
    true
}

/// Homotopy between f and g, when one exists.
pub fn homotopy_between(f: &ChainMap, g: &ChainMap) -> Option<ChainMap> {
    null_homotopy(&f.sub(g))
}

/// Fast path for "equal in the homotopy category": exact equality first,
/// the solver as the authority.
pub fn homotopic(f: &ChainMap, g: &ChainMap) -> bool {
    f.eq_on_the_nose(g) || homotopy_between(f, g).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{ChainComplex, Cx, GradedModule};
    use crate::matrix::SparseMat;
    use crate::ring::Dyadic;

    fn two_term(entry: i64) -> Cx {
        ChainComplex::new(
            0,
            vec![GradedModule::from_qdegs([0]), GradedModule::from_qdegs([0])],
            vec![SparseMat::from_int_entries(1, 1, [(0, 0, entry)])],
        )
        .unwrap()
    }

    #[test]
    fn zero_map_has_zero_homotopy() {
        let a = two_term(3);
        let z = ChainMap::zero(a.clone(), a.clone(), 0, crate::complex::MapGrading::Graded);
        let h = null_homotopy(&z).unwrap();
        assert!(h.is_zero());
    }

    #[test]
    fn identity_on_contractible_complex_is_null_homotopic() {
        // d = 2 is an iso over Z[1/2], so the complex is contractible
        let a = two_term(2);
        let id = ChainMap::identity(&a);
        let h = null_homotopy(&id).unwrap();
        assert!(is_null_homotopy(&id, &h));
        // h must be the inverse 1/2 up to the homotopy equation
        assert_eq!(h.comp(1).get(0, 0), Dyadic::new(1, 1));
    }

    #[test]
    fn identity_detects_nonzero_homology() {
        // d = 3 leaves homology (torsion Z/3), identity is not null-homotopic
        let a = two_term(3);
        assert!(null_homotopy(&ChainMap::identity(&a)).is_none());
        // and a complex with free homology
        let b = ChainComplex::new(0, vec![GradedModule::from_qdegs([0])], vec![]).unwrap();
        assert!(null_homotopy(&ChainMap::identity(&b)).is_none());
    }

    #[test]
    fn reconstruction_handles_nontrivial_reductions() {
        // 0 -> Z^2 -> Z^2 -> 0 with d = [[1,0],[0,3]]; f = 3*id is
        // null-homotopic (h picks out the unit block and solves the rest).
        let d = SparseMat::from_int_entries(2, 2, [(0, 0, 1), (1, 1, 3)]);
        let a = ChainComplex::new(
            0,
            vec![GradedModule::from_qdegs([0, 0]), GradedModule::from_qdegs([0, 0])],
            vec![d],
        )
        .unwrap();
        let f = ChainMap::identity(&a).scale(&Dyadic::from_int(3));
        let h = null_homotopy(&f).expect("3*id is null-homotopic when coker is Z/3");
        assert!(is_null_homotopy(&f, &h));
        assert!(null_homotopy(&ChainMap::identity(&a)).is_none());
    }
}
