//! Smith normal form of sparse integer matrices, with optional unimodular
//! transforms, and exact linear solving over Z[1/2] built on top of it.
//!
//! The elimination runs in two phases: a sparse phase that cancels ±1 entries
//! (chosen by a Markowitz-style fill heuristic, which is what makes large
//! cube differentials tractable), then the textbook gcd phase on whatever
//! small remainder survives.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::matrix::{SparseMat, SparseVec};
use crate::ring::Dyadic;

type IntVec = BTreeMap<usize, BigInt>;

#[derive(Debug)]
pub struct Snf {
    /// Nonzero invariant factors, positive, each dividing the next.
    pub diag: Vec<BigInt>,
    /// Row transform U (row-major) with `S = U * M * V`, if requested.
    pub left: Option<Vec<IntVec>>,
    /// Column transform V (column-major), if requested.
    pub right: Option<Vec<IntVec>>,
    /// Row/column of the original matrix that landed on diagonal slot k:
    /// `S[pivots[k]] = diag[k]` and S vanishes everywhere else. Rows and
    /// columns are never physically permuted.
    pub pivots: Vec<(usize, usize)>,
}

impl Snf {
    pub fn rank(&self) -> usize {
        self.diag.len()
    }
}

struct Work {
    m: Vec<IntVec>,
    colidx: Vec<BTreeSet<usize>>,
    u: Option<Vec<IntVec>>,
    v: Option<Vec<IntVec>>,
}

impl Work {
    fn entry(&self, i: usize, j: usize) -> Option<&BigInt> {
        self.m[i].get(&j)
    }

    fn set_entry(&mut self, i: usize, j: usize, val: BigInt) {
        if val.is_zero() {
            self.m[i].remove(&j);
            self.colidx[j].remove(&i);
        } else {
            self.m[i].insert(j, val);
            self.colidx[j].insert(i);
        }
    }

    /// row_i += c * row_k; returns the columns whose entries changed.
    fn row_add(&mut self, i: usize, k: usize, c: &BigInt) -> Vec<usize> {
        debug_assert!(i != k);
        if c.is_zero() {
            return Vec::new();
        }
        let src: Vec<(usize, BigInt)> = self.m[k].iter().map(|(j, v)| (*j, v.clone())).collect();
        let mut touched = Vec::with_capacity(src.len());
        for (j, v) in src {
            let cur = self.m[i].get(&j).cloned().unwrap_or_else(BigInt::zero);
            self.set_entry(i, j, cur + c * v);
            touched.push(j);
        }
        if let Some(u) = &mut self.u {
            let src: Vec<(usize, BigInt)> = u[k].iter().map(|(j, v)| (*j, v.clone())).collect();
            for (j, v) in src {
                let cur = u[i].entry(j).or_insert_with(BigInt::zero);
                *cur += c * v;
                if cur.is_zero() {
                    u[i].remove(&j);
                }
            }
        }
        touched
    }

    /// col_j += c * col_k; returns the rows whose entries changed.
    fn col_add(&mut self, j: usize, k: usize, c: &BigInt) -> Vec<usize> {
        debug_assert!(j != k);
        if c.is_zero() {
            return Vec::new();
        }
        let rows: Vec<usize> = self.colidx[k].iter().copied().collect();
        let mut touched = Vec::with_capacity(rows.len());
        for i in rows {
            let v = self.m[i].get(&k).cloned().unwrap();
            let cur = self.m[i].get(&j).cloned().unwrap_or_else(BigInt::zero);
            self.set_entry(i, j, cur + c * &v);
            touched.push(i);
        }
        if let Some(v) = &mut self.v {
            let src: Vec<(usize, BigInt)> = v[k].iter().map(|(r, x)| (*r, x.clone())).collect();
            for (r, x) in src {
                let cur = v[j].entry(r).or_insert_with(BigInt::zero);
                *cur += c * x;
                if cur.is_zero() {
                    v[j].remove(&r);
                }
            }
        }
        touched
    }

    fn negate_row(&mut self, i: usize) {
        for (_, val) in self.m[i].iter_mut() {
            *val = -&*val;
        }
        if let Some(u) = &mut self.u {
            for (_, val) in u[i].iter_mut() {
                *val = -&*val;
            }
        }
    }

    fn row_len(&self, i: usize) -> usize {
        self.m[i].len()
    }

    fn col_len(&self, j: usize) -> usize {
        self.colidx[j].len()
    }
}

/// Division with remainder of minimal absolute value.
fn div_rounded(a: &BigInt, b: &BigInt) -> BigInt {
    let q = a / b;
    let r = a - &q * b;
    let two_r: BigInt = &r << 1;
    if two_r.magnitude() > b.magnitude() {
        if r.sign() == b.sign() {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

pub fn smith_normal_form(
    rows: usize,
    cols: usize,
    entries: impl IntoIterator<Item = (usize, usize, BigInt)>,
    with_transforms: bool,
) -> Snf {
    let mut w = Work {
        m: vec![IntVec::new(); rows],
        colidx: vec![BTreeSet::new(); cols],
        u: with_transforms.then(|| (0..rows).map(|i| IntVec::from([(i, BigInt::one())])).collect()),
        v: with_transforms.then(|| (0..cols).map(|j| IntVec::from([(j, BigInt::one())])).collect()),
    };
    for (i, j, val) in entries {
        if !val.is_zero() {
            assert!(i < rows && j < cols, "entry out of bounds");
            let cur = w.m[i].get(&j).cloned().unwrap_or_else(BigInt::zero);
            w.set_entry(i, j, cur + val);
        }
    }

    let mut diag: Vec<BigInt> = Vec::new();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut done_rows = vec![false; rows];
    let mut done_cols = vec![false; cols];

    // Phase 1: ±1 pivots, cheapest fill first. Heap entries go stale as the
    // matrix changes, so each pop is re-validated before use.
    let mut heap: BinaryHeap<Reverse<(usize, usize, usize)>> = BinaryHeap::new();
    for (i, row) in w.m.iter().enumerate() {
        for (j, val) in row {
            if val.magnitude().is_one() {
                let cost = (w.row_len(i) - 1) * (w.col_len(*j) - 1);
                heap.push(Reverse((cost, i, *j)));
            }
        }
    }
    while let Some(Reverse((cost, i, j))) = heap.pop() {
        if done_rows[i] || done_cols[j] {
            continue;
        }
        let val = match w.entry(i, j) {
            Some(v) if v.magnitude().is_one() => v.clone(),
            _ => continue,
        };
        let cur_cost = (w.row_len(i) - 1) * (w.col_len(j) - 1);
        if cur_cost > cost {
            heap.push(Reverse((cur_cost, i, j)));
            continue;
        }
        // clear column j (val is ±1, so 1/val = val), then row i
        let others: Vec<usize> = w.colidx[j].iter().copied().filter(|&r| r != i).collect();
        for r in others {
            let c = -(w.entry(r, j).unwrap() * &val);
            for jj in w.row_add(r, i, &c) {
                if let Some(x) = w.entry(r, jj) {
                    if x.magnitude().is_one() && !done_cols[jj] {
                        let cost = (w.row_len(r) - 1) * (w.col_len(jj) - 1);
                        heap.push(Reverse((cost, r, jj)));
                    }
                }
            }
        }
        let others: Vec<usize> = w.m[i].keys().copied().filter(|&c| c != j).collect();
        for c in others {
            let coeff = -(w.entry(i, c).unwrap() * &val);
            w.col_add(c, j, &coeff);
        }
        if val.sign() == num_bigint::Sign::Minus {
            w.negate_row(i);
        }
        diag.push(BigInt::one());
        pivots.push((i, j));
        done_rows[i] = true;
        done_cols[j] = true;
    }

    // Phase 2: classical gcd reduction on the remainder. Every pass either
    // finalizes the pivot or strictly shrinks the smallest magnitude present,
    // so this terminates.
    loop {
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in w.m.iter().enumerate() {
            if done_rows[i] {
                continue;
            }
            for (j, val) in row {
                if done_cols[*j] {
                    continue;
                }
                match best {
                    Some((bi, bj)) if w.entry(bi, bj).unwrap().magnitude() <= val.magnitude() => {}
                    _ => best = Some((i, *j)),
                }
            }
        }
        let (pi, pj) = match best {
            Some(p) => p,
            None => break,
        };
        let pval = w.entry(pi, pj).unwrap().clone();
        // reduce the pivot column; any surviving remainder is smaller than
        // the pivot and the next pass picks it up
        let others: Vec<usize> =
            w.colidx[pj].iter().copied().filter(|&r| r != pi && !done_rows[r]).collect();
        let mut retry = false;
        for r in others {
            let q = div_rounded(w.entry(r, pj).unwrap(), &pval);
            w.row_add(r, pi, &(-q));
            retry |= w.entry(r, pj).is_some();
        }
        if retry {
            continue;
        }
        let others: Vec<usize> =
            w.m[pi].keys().copied().filter(|&c| c != pj && !done_cols[c]).collect();
        for c in others {
            let q = div_rounded(w.entry(pi, c).unwrap(), &pval);
            w.col_add(c, pj, &(-q));
            retry |= w.entry(pi, c).is_some();
        }
        if retry {
            continue;
        }
        // pivot row and column are clear: enforce that the pivot divides
        // everything left, pulling an offending row in if not
        let mut offender: Option<usize> = None;
        'scan: for (i, row) in w.m.iter().enumerate() {
            if done_rows[i] || i == pi {
                continue;
            }
            for (j, val) in row {
                debug_assert!(!done_cols[*j]);
                if !(val % &pval).is_zero() {
                    offender = Some(i);
                    break 'scan;
                }
            }
        }
        if let Some(r) = offender {
            w.row_add(pi, r, &BigInt::one());
            continue;
        }
        if w.entry(pi, pj).unwrap().sign() == num_bigint::Sign::Minus {
            w.negate_row(pi);
        }
        diag.push(w.entry(pi, pj).unwrap().clone());
        pivots.push((pi, pj));
        done_rows[pi] = true;
        done_cols[pj] = true;
    }

    Snf { diag, left: w.u, right: w.v, pivots }
}

/// Rank and invariant factors of a dyadic matrix viewed over Z[1/2]:
/// denominators are cleared first (a unit rescaling), so the 2-parts of the
/// integer invariant factors are meaningless and callers that care about
/// torsion keep only the odd parts.
pub fn rank_and_invariants(m: &SparseMat) -> (usize, Vec<BigInt>) {
    let shift = m.denominator_exp();
    let entries = m
        .entries()
        .map(|(i, j, v)| (i, j, v.shifted(shift).to_integer().expect("cleared denominator")));
    let snf = smith_normal_form(m.rows(), m.cols(), entries, false);
    (snf.rank(), snf.diag)
}

/// Solve `M x = b` over Z[1/2], one column of `rhs` at a time.
/// Returns `None` exactly when some column has no Z[1/2] solution.
pub fn solve(m: &SparseMat, rhs: &SparseMat) -> Option<SparseMat> {
    assert_eq!(m.rows(), rhs.rows(), "solve dimension mismatch");
    let shift = m.denominator_exp().max(rhs.denominator_exp());
    let entries = m
        .entries()
        .map(|(i, j, v)| (i, j, v.shifted(shift).to_integer().expect("cleared denominator")));
    let snf = smith_normal_form(m.rows(), m.cols(), entries, true);
    let u = snf.left.as_ref().unwrap();
    let v = snf.right.as_ref().unwrap();
    let slot_of_row: BTreeMap<usize, usize> =
        snf.pivots.iter().enumerate().map(|(k, (pi, _))| (*pi, k)).collect();

    let mut out = SparseMat::new(m.cols(), rhs.cols());
    for bj in 0..rhs.cols() {
        let b: Vec<(usize, BigInt)> = rhs
            .col(bj)
            .iter()
            .map(|(i, val)| (*i, val.shifted(shift).to_integer().expect("cleared denominator")))
            .collect();
        // y = U b
        let mut y: IntVec = IntVec::new();
        for (r, urow) in u.iter().enumerate() {
            let mut acc = BigInt::zero();
            for (i, bv) in &b {
                if let Some(c) = urow.get(i) {
                    acc += c * bv;
                }
            }
            if !acc.is_zero() {
                y.insert(r, acc);
            }
        }
        // With x = V z the system becomes S z = y: on pivot slot k this reads
        // diag[k] * z[pivot_col_k] = y[pivot_row_k], and off the pivot rows y
        // must vanish. z lands in Z[1/2] iff the odd part of diag[k] divides
        // y there; the 2-part of diag[k] is a unit and just shifts exponents.
        let mut x = SparseVec::new();
        for (r, yv) in &y {
            let Some(&k) = slot_of_row.get(r) else { return None };
            let d = &snf.diag[k];
            let odd = odd_part(d);
            if !(yv % &odd).is_zero() {
                return None;
            }
            let two_exp = d.magnitude().trailing_zeros().unwrap_or(0) as i64;
            let zk = Dyadic::new(yv / &odd, two_exp);
            let (_, pcol) = snf.pivots[k];
            for (row, vv) in &v[pcol] {
                let add = &zk * &Dyadic::new(vv.clone(), 0);
                let entry = x.entry(*row).or_insert_with(Dyadic::zero);
                *entry += &add;
                if entry.is_zero() {
                    x.remove(row);
                }
            }
        }
        for (row, val) in x {
            out.set(row, bj, val);
        }
    }
    debug_assert_eq!(m.compose(&out), *rhs);
    Some(out)
}

pub fn odd_part(n: &BigInt) -> BigInt {
    if n.is_zero() {
        return BigInt::zero();
    }
    let tz = n.magnitude().trailing_zeros().unwrap_or(0);
    n.abs() >> tz
}

/// Odd prime power factors of an invariant factor, ascending.
pub fn odd_prime_power_factors(n: &BigInt) -> Vec<BigInt> {
    let mut m = odd_part(n);
    let mut out = Vec::new();
    if m <= BigInt::one() {
        return out;
    }
    let mut p = BigInt::from(3);
    while &p * &p <= m {
        if (&m % &p).is_zero() {
            let mut pk = BigInt::one();
            while (&m % &p).is_zero() {
                m /= &p;
                pk *= &p;
            }
            out.push(pk);
        }
        p += 2;
    }
    if m > BigInt::one() {
        out.push(m);
    }
    out.sort();
    out
}
