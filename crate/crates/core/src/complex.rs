//! Bounded chain complexes of free graded Z[1/2]-modules and the chain maps
//! between them.
//!
//! Gradings follow the quantum-degree convention in which the Khovanov
//! differential preserves qdeg and the Lee differential raises it by 0 or 4.
//! A map declared `Graded` shifts every entry's qdeg by exactly `qshift`; a
//! map declared `Filtered` shifts by at least `qshift` (it respects the
//! descending filtration by "qdeg >= j" and `qshift` is its filtered degree).

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::laurent::Laurent;
use crate::matrix::{SparseMat, SparseVec};
use crate::ring::Dyadic;

/// Identity of a basis generator. Cube generators remember their resolution
/// vertex and per-circle ±1 labels; generators of complexes embedded in a
/// larger one (mapping cones, colored cubes) are wrapped with a site index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GenLabel {
    Cube { vertex: u64, labels: Vec<i8> },
    At { site: usize, inner: Box<GenLabel> },
    Anon(usize),
}

impl GenLabel {
    pub fn at(site: usize, inner: GenLabel) -> GenLabel {
        GenLabel::At { site, inner: Box::new(inner) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    pub label: GenLabel,
    pub qdeg: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GradedModule {
    pub gens: Vec<Generator>,
}

static EMPTY_MODULE: GradedModule = GradedModule { gens: Vec::new() };

impl GradedModule {
    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn qdeg(&self, i: usize) -> i64 {
        self.gens[i].qdeg
    }

    /// Anonymous generators with the given q-degrees.
    pub fn from_qdegs(qdegs: impl IntoIterator<Item = i64>) -> Self {
        let gens = qdegs
            .into_iter()
            .enumerate()
            .map(|(i, qdeg)| Generator { label: GenLabel::Anon(i), qdeg })
            .collect();
        GradedModule { gens }
    }

    pub fn index_of(&self, label: &GenLabel) -> Option<usize> {
        self.gens.iter().position(|g| &g.label == label)
    }
}

/// Complexes are shared immutably; maps hold handles to their endpoints.
pub type Cx = Arc<ChainComplex>;

#[derive(Clone, Debug, PartialEq)]
pub struct ChainComplex {
    pub(crate) min_r: i64,
    pub(crate) modules: Vec<GradedModule>,
    /// diffs[i] maps modules[i] to modules[i+1]; length = modules.len() - 1.
    pub(crate) diffs: Vec<SparseMat>,
}

pub fn same_cx(a: &Cx, b: &Cx) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl ChainComplex {
    /// Validates shapes and d∘d = 0 exactly, trims empty end degrees.
    pub fn new(min_r: i64, modules: Vec<GradedModule>, diffs: Vec<SparseMat>) -> Result<Cx> {
        if !modules.is_empty() && diffs.len() + 1 != modules.len() {
            return Err(Error::Complex(format!(
                "{} modules need {} differentials, got {}",
                modules.len(),
                modules.len() - 1,
                diffs.len()
            )));
        }
        for (i, d) in diffs.iter().enumerate() {
            if d.cols() != modules[i].rank() || d.rows() != modules[i + 1].rank() {
                return Err(Error::Complex(format!(
                    "differential at degree {} has shape {}x{}, expected {}x{}",
                    min_r + i as i64,
                    d.rows(),
                    d.cols(),
                    modules[i + 1].rank(),
                    modules[i].rank()
                )));
            }
        }
        for i in 0..diffs.len().saturating_sub(1) {
            if !diffs[i + 1].compose(&diffs[i]).is_zero() {
                return Err(Error::Complex(format!(
                    "d∘d != 0 out of degree {}",
                    min_r + i as i64
                )));
            }
        }
        Ok(Arc::new(Self::trim(min_r, modules, diffs)))
    }

    fn trim(mut min_r: i64, mut modules: Vec<GradedModule>, mut diffs: Vec<SparseMat>) -> Self {
        while modules.first().is_some_and(|m| m.rank() == 0) {
            modules.remove(0);
            if !diffs.is_empty() {
                diffs.remove(0);
            }
            min_r += 1;
        }
        while modules.last().is_some_and(|m| m.rank() == 0) {
            modules.pop();
            diffs.pop();
        }
        if modules.is_empty() {
            min_r = 0;
            diffs.clear();
        }
        ChainComplex { min_r, modules, diffs }
    }

    pub fn zero() -> Cx {
        Arc::new(ChainComplex { min_r: 0, modules: Vec::new(), diffs: Vec::new() })
    }

    /// One generator in homological degree 0 (the complex of the empty
    /// diagram, or of one pairing-graph vertex whose cable is empty).
    pub fn unit(qdeg: i64) -> Cx {
        let gens = vec![Generator { label: GenLabel::Cube { vertex: 0, labels: Vec::new() }, qdeg }];
        Arc::new(ChainComplex {
            min_r: 0,
            modules: vec![GradedModule { gens }],
            diffs: Vec::new(),
        })
    }

    pub fn is_zero_complex(&self) -> bool {
        self.modules.is_empty()
    }

    pub fn min_r(&self) -> i64 {
        self.min_r
    }

    pub fn max_r(&self) -> i64 {
        self.min_r + self.modules.len() as i64 - 1
    }

    pub fn total_degrees(&self) -> usize {
        self.modules.len()
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> + '_ {
        self.min_r..=self.max_r()
    }

    fn idx(&self, r: i64) -> Option<usize> {
        let i = r - self.min_r;
        (0..self.modules.len() as i64).contains(&i).then_some(i as usize)
    }

    pub fn module(&self, r: i64) -> &GradedModule {
        self.idx(r).map_or(&EMPTY_MODULE, |i| &self.modules[i])
    }

    pub fn rank(&self, r: i64) -> usize {
        self.module(r).rank()
    }

    pub fn total_rank(&self) -> usize {
        self.modules.iter().map(|m| m.rank()).sum()
    }

    pub(crate) fn d_ref(&self, r: i64) -> Option<&SparseMat> {
        let i = self.idx(r)?;
        self.diffs.get(i)
    }

    /// Differential out of degree r, with zero-shaped fallback off the ends.
    pub fn d(&self, r: i64) -> SparseMat {
        self.d_ref(r)
            .cloned()
            .unwrap_or_else(|| SparseMat::new(self.rank(r + 1), self.rank(r)))
    }

    /// Distinct qdeg shifts among differential entries; {0} for a Khovanov
    /// complex, a subset of {0, 4} for Lee.
    pub fn differential_shifts(&self) -> std::collections::BTreeSet<i64> {
        let mut shifts = std::collections::BTreeSet::new();
        for (i, d) in self.diffs.iter().enumerate() {
            let (src, tgt) = (&self.modules[i], &self.modules[i + 1]);
            for (row, col, _) in d.entries() {
                shifts.insert(tgt.qdeg(row) - src.qdeg(col));
            }
        }
        shifts
    }

    pub fn is_q_nondecreasing(&self) -> bool {
        self.differential_shifts().iter().all(|&s| s >= 0)
    }

    pub fn graded_euler_characteristic(&self) -> Laurent {
        let mut out = Laurent::zero();
        for r in self.degrees() {
            let sign = if r.rem_euclid(2) == 0 { 1 } else { -1 };
            for g in &self.module(r).gens {
                out.add_term(g.qdeg, Dyadic::from_int(sign));
            }
        }
        out
    }

    /// Same complex with all homological degrees shifted by dr and all
    /// quantum degrees by dq.
    pub fn shifted(&self, dr: i64, dq: i64) -> Cx {
        let modules = self
            .modules
            .iter()
            .map(|m| GradedModule {
                gens: m
                    .gens
                    .iter()
                    .map(|g| Generator { label: g.label.clone(), qdeg: g.qdeg + dq })
                    .collect(),
            })
            .collect();
        Arc::new(ChainComplex { min_r: self.min_r + dr, modules, diffs: self.diffs.clone() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapGrading {
    Graded,
    Filtered,
}

#[derive(Clone, Debug)]
pub struct ChainMap {
    source: Cx,
    target: Cx,
    /// 0 for chain maps, -1 for homotopies.
    pub r_shift: i64,
    pub qshift: i64,
    pub grading: MapGrading,
    comps: BTreeMap<i64, SparseMat>,
}

impl ChainMap {
    fn build(
        source: Cx,
        target: Cx,
        r_shift: i64,
        qshift: i64,
        grading: MapGrading,
        comps: BTreeMap<i64, SparseMat>,
        check_chain: bool,
    ) -> Result<ChainMap> {
        let mut comps: BTreeMap<i64, SparseMat> =
            comps.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        for (&r, m) in &comps {
            let (rows, cols) = (target.rank(r + r_shift), source.rank(r));
            if m.rows() != rows || m.cols() != cols {
                return Err(Error::ChainMap(format!(
                    "component at degree {r} has shape {}x{}, expected {rows}x{cols}",
                    m.rows(),
                    m.cols()
                )));
            }
            let (src, tgt) = (source.module(r), target.module(r + r_shift));
            for (row, col, _) in m.entries() {
                let shift = tgt.qdeg(row) - src.qdeg(col);
                let ok = match grading {
                    MapGrading::Graded => shift == qshift,
                    MapGrading::Filtered => shift >= qshift,
                };
                if !ok {
                    return Err(Error::ChainMap(format!(
                        "entry ({row},{col}) at degree {r} shifts qdeg by {shift}, declared {grading:?} of degree {qshift}"
                    )));
                }
            }
        }
        comps.retain(|_, m| !m.is_zero());
        let f = ChainMap { source, target, r_shift, qshift, grading, comps };
        if check_chain {
            f.check_commutes()?;
        }
        Ok(f)
    }

    fn check_commutes(&self) -> Result<()> {
        debug_assert_eq!(self.r_shift, 0);
        if self.source.is_zero_complex() {
            return Ok(());
        }
        for r in self.source.min_r() - 1..=self.source.max_r() {
            let lhs = match (self.target.d_ref(r), self.comp_ref(r)) {
                (Some(d), Some(f)) => Some(d.compose(f)),
                _ => None,
            };
            let rhs = match (self.comp_ref(r + 1), self.source.d_ref(r)) {
                (Some(f), Some(d)) => Some(f.compose(d)),
                _ => None,
            };
            let ok = match (&lhs, &rhs) {
                (Some(a), Some(b)) => a == b,
                (Some(a), None) => a.is_zero(),
                (None, Some(b)) => b.is_zero(),
                (None, None) => true,
            };
            if !ok {
                return Err(Error::ChainMap(format!("does not commute with d at degree {r}")));
            }
        }
        Ok(())
    }

    pub fn graded(source: Cx, target: Cx, qshift: i64, comps: BTreeMap<i64, SparseMat>) -> Result<ChainMap> {
        Self::build(source, target, 0, qshift, MapGrading::Graded, comps, true)
    }

    pub fn filtered(source: Cx, target: Cx, qshift: i64, comps: BTreeMap<i64, SparseMat>) -> Result<ChainMap> {
        Self::build(source, target, 0, qshift, MapGrading::Filtered, comps, true)
    }

    /// A degree −1 map (no chain condition, no grading constraint).
    pub fn homotopy(source: Cx, target: Cx, comps: BTreeMap<i64, SparseMat>) -> Result<ChainMap> {
        Self::build(source, target, -1, i64::MIN / 2, MapGrading::Filtered, comps, false)
    }

    pub fn zero(source: Cx, target: Cx, qshift: i64, grading: MapGrading) -> ChainMap {
        ChainMap { source, target, r_shift: 0, qshift, grading, comps: BTreeMap::new() }
    }

    pub fn identity(cx: &Cx) -> ChainMap {
        let comps = cx
            .degrees()
            .map(|r| (r, SparseMat::identity(cx.rank(r))))
            .collect();
        ChainMap {
            source: cx.clone(),
            target: cx.clone(),
            r_shift: 0,
            qshift: 0,
            grading: MapGrading::Graded,
            comps,
        }
    }

    pub fn source(&self) -> &Cx {
        &self.source
    }

    pub fn target(&self) -> &Cx {
        &self.target
    }

    pub fn comp_ref(&self, r: i64) -> Option<&SparseMat> {
        self.comps.get(&r)
    }

    /// Component at degree r, materializing the correctly-shaped zero matrix
    /// off the recorded support.
    pub fn comp(&self, r: i64) -> SparseMat {
        self.comps
            .get(&r)
            .cloned()
            .unwrap_or_else(|| SparseMat::new(self.target.rank(r + self.r_shift), self.source.rank(r)))
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> + '_ {
        self.comps.keys().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// g.compose(f) = g∘f.
    pub fn compose(&self, f: &ChainMap) -> ChainMap {
        assert!(same_cx(&f.target, &self.source), "compose endpoint mismatch");
        let mut comps = BTreeMap::new();
        for (&r, fm) in &f.comps {
            if let Some(gm) = self.comp_ref(r + f.r_shift) {
                let m = gm.compose(fm);
                if !m.is_zero() {
                    comps.insert(r, m);
                }
            }
        }
        let grading = match (self.grading, f.grading) {
            (MapGrading::Graded, MapGrading::Graded) => MapGrading::Graded,
            _ => MapGrading::Filtered,
        };
        ChainMap {
            source: f.source.clone(),
            target: self.target.clone(),
            r_shift: self.r_shift + f.r_shift,
            qshift: self.qshift.saturating_add(f.qshift),
            grading,
            comps,
        }
    }

    pub fn add(&self, other: &ChainMap) -> ChainMap {
        assert!(same_cx(&self.source, &other.source) && same_cx(&self.target, &other.target));
        assert_eq!(self.r_shift, other.r_shift);
        let mut comps = self.comps.clone();
        for (&r, m) in &other.comps {
            let cur = comps
                .remove(&r)
                .unwrap_or_else(|| SparseMat::new(m.rows(), m.cols()));
            let sum = cur.add(m);
            if !sum.is_zero() {
                comps.insert(r, sum);
            }
        }
        let grading = if self.grading == MapGrading::Graded
            && other.grading == MapGrading::Graded
            && self.qshift == other.qshift
        {
            MapGrading::Graded
        } else {
            MapGrading::Filtered
        };
        ChainMap {
            source: self.source.clone(),
            target: self.target.clone(),
            r_shift: self.r_shift,
            qshift: self.qshift.min(other.qshift),
            grading,
            comps,
        }
    }

    pub fn sub(&self, other: &ChainMap) -> ChainMap {
        self.add(&other.scale(&Dyadic::from_int(-1)))
    }

    pub fn scale(&self, c: &Dyadic) -> ChainMap {
        let mut out = self.clone();
        if c.is_zero() {
            out.comps.clear();
        } else {
            out.comps = out.comps.into_iter().map(|(r, m)| (r, m.scale(c))).collect();
        }
        out
    }

    /// Image of a chain supported in source degree r.
    pub fn apply(&self, v: &SparseVec, r: i64) -> SparseVec {
        match self.comps.get(&r) {
            Some(m) => m.apply(v),
            None => SparseVec::new(),
        }
    }

    /// Re-runs every construction-time check (shapes, grading, chain rule).
    pub fn verify(&self) -> Result<()> {
        let f = Self::build(
            self.source.clone(),
            self.target.clone(),
            self.r_shift,
            self.qshift,
            self.grading,
            self.comps.clone(),
            self.r_shift == 0,
        )?;
        let _ = f;
        Ok(())
    }

    /// Exact equality of components (not homotopy equivalence).
    pub fn eq_on_the_nose(&self, other: &ChainMap) -> bool {
        if self.r_shift != other.r_shift {
            return false;
        }
        let mut keys: Vec<i64> = self.comps.keys().chain(other.comps.keys()).copied().collect();
        keys.dedup();
        keys.iter().all(|&r| self.comp(r) == other.comp(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SparseMat;

    fn two_term(entry: i64) -> Cx {
        // 0 -> Z[1/2] --(entry)--> Z[1/2] -> 0 in degrees 0, 1
        ChainComplex::new(
            0,
            vec![GradedModule::from_qdegs([0]), GradedModule::from_qdegs([0])],
            vec![SparseMat::from_int_entries(1, 1, [(0, 0, entry)])],
        )
        .unwrap()
    }

    #[test]
    fn rejects_nonsquaring_differential() {
        let m = GradedModule::from_qdegs([0]);
        let d = SparseMat::identity(1);
        let err = ChainComplex::new(0, vec![m.clone(), m.clone(), m], vec![d.clone(), d]);
        assert!(matches!(err, Err(Error::Complex(_))));
    }

    #[test]
    fn euler_characteristic_examples() {
        let single = ChainComplex::new(0, vec![GradedModule::from_qdegs([1])], vec![]).unwrap();
        assert_eq!(single.graded_euler_characteristic().to_string(), "q");
        let unknot = ChainComplex::new(0, vec![GradedModule::from_qdegs([1, -1])], vec![]).unwrap();
        assert_eq!(unknot.graded_euler_characteristic().to_string(), "q + q^-1");
        let cancel = ChainComplex::new(
            0,
            vec![GradedModule::from_qdegs([1]), GradedModule::from_qdegs([1])],
            vec![SparseMat::new(1, 1)],
        )
        .unwrap();
        assert!(cancel.graded_euler_characteristic().is_zero());
    }

    #[test]
    fn trims_empty_degrees() {
        let cx = ChainComplex::new(
            -2,
            vec![
                GradedModule::default(),
                GradedModule::from_qdegs([3]),
                GradedModule::default(),
            ],
            vec![SparseMat::new(1, 0), SparseMat::new(0, 1)],
        )
        .unwrap();
        assert_eq!((cx.min_r(), cx.max_r()), (-1, -1));
        assert_eq!(cx.rank(-1), 1);
        assert_eq!(cx.rank(7), 0);
    }

    #[test]
    fn chain_map_checks() {
        let a = two_term(2);
        // identity commutes
        let id = ChainMap::identity(&a);
        id.verify().unwrap();
        assert!(!id.is_zero());
        // a graded map with a bad degree shift is rejected
        let b = a.shifted(0, 3);
        let comps: BTreeMap<i64, SparseMat> =
            [(0, SparseMat::identity(1)), (1, SparseMat::identity(1))].into();
        assert!(ChainMap::graded(a.clone(), b.clone(), 0, comps.clone()).is_err());
        assert!(ChainMap::graded(a.clone(), b.clone(), 3, comps.clone()).is_ok());
        // filtered accepts any shift >= qshift
        assert!(ChainMap::filtered(a.clone(), b.clone(), 0, comps.clone()).is_ok());
        assert!(ChainMap::filtered(a.clone(), b, 4, comps).is_err());
        // non-commuting map rejected: f = (1, 0) against d = 2 fails 2*1 != 0*2
        let comps: BTreeMap<i64, SparseMat> = [(0, SparseMat::identity(1))].into();
        assert!(ChainMap::graded(a.clone(), a, 0, comps).is_err());
    }

    #[test]
    fn compose_and_algebra() {
        let a = two_term(2);
        let id = ChainMap::identity(&a);
        let twice = id.add(&id);
        assert_eq!(twice.comp(0).get(0, 0), Dyadic::from_int(2));
        let sq = twice.compose(&twice);
        assert_eq!(sq.comp(1).get(0, 0), Dyadic::from_int(4));
        assert!(id.sub(&id).is_zero());
        assert!(id.eq_on_the_nose(&twice.scale(&Dyadic::new(1, 1))));
    }
}
