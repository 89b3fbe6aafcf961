//! Canonical generators of the deformed (filtered) homology, their
//! filtration degrees, and the concordance invariant s with its
//! inequality and sliceness checks.
//!
//! Each orientation of the link singles out one resolution (the coherent
//! smoothing); labelling its circles with the elements a, b according to
//! the parity of nesting depth plus winding sense gives a cycle, and the
//! 2^#components cycles so produced are independent in homology. s is
//! built from the filtration degrees of s_o + s_obar and s_o - s_obar,
//! which always differ by two.

use std::collections::BTreeMap;

use crate::complex::Cx;
use crate::diagram::Diagram;
use crate::embed::circle_geometry;
use crate::error::{Error, Result};
use crate::filtration::filtered_class_degree;
use crate::frobenius::Functor;
use crate::khovanov::{cube, labels_of_index, Cube};
use crate::matrix::{vec_add_scaled, SparseMat, SparseVec};
use crate::movies::{surface_trace, Movie};
use crate::reduce::{reduce_with, WitnessLevel};
use crate::ring::Dyadic;
use crate::snf;

/// a = v+ + v-, b = v- - v+.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CanonLabel {
    A,
    B,
}

#[derive(Clone, Debug)]
pub struct LeeGenerator {
    /// which components are reversed relative to the diagram's orientation
    pub reversed: Vec<bool>,
    /// the coherent-smoothing vertex this orientation picks out
    pub vertex: u64,
    pub r: i64,
    /// one label per circle of that resolution
    pub labels: Vec<CanonLabel>,
    /// the labels expanded in the v± generator basis of the chain module
    pub chain: SparseVec,
}

fn build_generator(cb: &Cube, reversed: &[bool], flip: bool) -> Result<LeeGenerator> {
    let d = &cb.diagram;
    let choice = d.oriented_choice(reversed);
    let vertex = choice
        .iter()
        .enumerate()
        .fold(0u64, |v, (k, &c)| v | (c as u64) << k);
    let res = &cb.resolutions[vertex as usize];
    let geo = circle_geometry(d, &choice, res, reversed)?;
    let labels: Vec<CanonLabel> = (0..res.len())
        .map(|i| {
            let odd = (geo.depth[i] + geo.ccw[i] as usize) % 2 == 1;
            if odd != flip {
                CanonLabel::B
            } else {
                CanonLabel::A
            }
        })
        .collect();

    let base = cb.layout().base[&vertex];
    let n = res.len();
    let mut chain = SparseVec::new();
    for idx in 0..1usize << n {
        // a contributes +1 on both letters, b is +1 on v- and -1 on v+
        let lab = labels_of_index(n, idx);
        let mut coeff = 1i64;
        for (i, &l) in lab.iter().enumerate() {
            if labels[i] == CanonLabel::B && l == crate::frobenius::VPLUS {
                coeff = -coeff;
            }
        }
        chain.insert(base + idx, Dyadic::from_int(coeff));
    }
    Ok(LeeGenerator {
        reversed: reversed.to_vec(),
        vertex,
        r: cb.r_of(vertex),
        labels,
        chain,
    })
}

fn is_cycle(cx: &Cx, r: i64, z: &SparseVec) -> bool {
    let d = cx.d(r);
    let mut img = SparseVec::new();
    for (&j, c) in z {
        vec_add_scaled(&mut img, d.col(j), c);
    }
    img.is_empty()
}

/// All 2^#components canonical cycles of the filtered complex, one per
/// orientation. The labelling parity is calibrated once per diagram: if
/// the default convention fails the cycle check, the flipped one is tried;
/// failure of both signals a convention bug and is fatal.
pub fn lee_generators(d: &Diagram) -> Result<Vec<LeeGenerator>> {
    let (gens, cx) = generators_and_complex(d)?;
    verify_independent(&cx, &gens)?;
    Ok(gens)
}

fn generators_and_complex(d: &Diagram) -> Result<(Vec<LeeGenerator>, Cx)> {
    let n = d.n_components();
    assert!(n < 20, "too many components to enumerate orientations");
    let cb = cube(d);
    let cx = complex_of_cube_lee(&cb)?;
    'flip: for flip in [false, true] {
        let mut gens = Vec::with_capacity(1 << n);
        for bits in 0..1u32 << n {
            let reversed: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            let g = build_generator(&cb, &reversed, flip)?;
            if !is_cycle(&cx, g.r, &g.chain) {
                continue 'flip;
            }
            gens.push(g);
        }
        return Ok((gens, cx));
    }
    Err(Error::Check(
        "canonical generators are not cycles under either labelling parity".into(),
    ))
}

fn complex_of_cube_lee(cb: &Cube) -> Result<Cx> {
    crate::khovanov::complex_of_cube(cb, Functor::Lee)
}

/// The classes must be independent in homology: appending the image of the
/// previous differential to the chains must not lower the column count the
/// chains contribute to the rank.
fn verify_independent(cx: &Cx, gens: &[LeeGenerator]) -> Result<()> {
    let mut by_r: BTreeMap<i64, Vec<&LeeGenerator>> = BTreeMap::new();
    for g in gens {
        by_r.entry(g.r).or_default().push(g);
    }
    for (&r, group) in &by_r {
        let rows = cx.rank(r);
        let d_in = cx.d(r - 1);
        let mut entries: Vec<(usize, usize, Dyadic)> = Vec::new();
        for (j, g) in group.iter().enumerate() {
            for (&i, c) in &g.chain {
                entries.push((i, j, c.clone()));
            }
        }
        for (i, j, c) in d_in.entries() {
            entries.push((i, group.len() + j, c.clone()));
        }
        let stacked = SparseMat::from_entries(rows, group.len() + d_in.cols(), entries);
        let (rank_stacked, _) = snf::rank_and_invariants(&stacked);
        let (rank_img, _) = snf::rank_and_invariants(&d_in);
        if rank_stacked != group.len() + rank_img {
            return Err(Error::Check(format!(
                "canonical classes at degree {r} are dependent in homology"
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SInvariantReport {
    pub deg_plus: i64,
    pub deg_minus: i64,
    pub s: i64,
    /// present for knots only
    pub s_max: Option<i64>,
    pub s_min: Option<i64>,
}

/// s of the link with the given orientation (`reversed` relative to the
/// stored one). Degrees are computed on the reduced complex; the reduction
/// maps are filtered homotopy equivalences, so class degrees carry over.
pub fn s_invariant(d: &Diagram, reversed: &[bool]) -> Result<SInvariantReport> {
    let n = d.n_components();
    if n == 0 {
        return Err(Error::Diagram("s of the empty link is undefined".into()));
    }
    if reversed.len() != n {
        return Err(Error::Diagram(format!(
            "{} orientation flags for {} components",
            reversed.len(),
            n
        )));
    }
    let cb = cube(d);
    let cx = complex_of_cube_lee(&cb)?;
    let mut picked = None;
    for flip in [false, true] {
        let g_o = build_generator(&cb, reversed, flip)?;
        let bar: Vec<bool> = reversed.iter().map(|&b| !b).collect();
        let g_bar = build_generator(&cb, &bar, flip)?;
        if is_cycle(&cx, g_o.r, &g_o.chain) && is_cycle(&cx, g_bar.r, &g_bar.chain) {
            picked = Some((g_o, g_bar));
            break;
        }
    }
    let Some((g_o, g_bar)) = picked else {
        return Err(Error::Check(
            "canonical generators are not cycles under either labelling parity".into(),
        ));
    };
    debug_assert_eq!(g_o.vertex, g_bar.vertex);
    let r = g_o.r;

    let mut z_plus = g_o.chain.clone();
    vec_add_scaled(&mut z_plus, &g_bar.chain, &Dyadic::one());
    let mut z_minus = g_o.chain.clone();
    vec_add_scaled(&mut z_minus, &g_bar.chain, &Dyadic::from_int(-1));

    let red = reduce_with(&cx, WitnessLevel::Maps, None);
    let proj = red.proj.as_ref().expect("witnesses requested");
    let deg_plus = filtered_class_degree(&red.reduced, r, &proj.apply(&z_plus, r))?;
    let deg_minus = filtered_class_degree(&red.reduced, r, &proj.apply(&z_minus, r))?;

    if (deg_plus - deg_minus).abs() != 2 {
        return Err(Error::Check(format!(
            "filtration degrees {deg_plus} and {deg_minus} do not differ by two"
        )));
    }
    let s = (deg_plus + deg_minus) / 2;
    let (s_max, s_min) = if n == 1 {
        (Some(deg_plus.max(deg_minus)), Some(deg_plus.min(deg_minus)))
    } else {
        (None, None)
    };
    Ok(SInvariantReport { deg_plus, deg_minus, s, s_max, s_min })
}

fn s_default(d: &Diagram) -> Result<i64> {
    Ok(s_invariant(d, &vec![false; d.n_components()])?.s)
}

#[derive(Clone, Debug)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub detail: String,
    pub ok: bool,
}

/// The s inequalities: additivity-minus-one under disjoint union,
/// two-sided bounds under connected sum (when a sum diagram is supplied),
/// and the mirror window -2#L+2 <= s(L) + s(mirror L) <= 2, tight for
/// crossingless unlinks.
pub fn property_suite(
    l1: &Diagram,
    l2: &Diagram,
    sum12: Option<&Diagram>,
) -> Result<Vec<PropertyCheck>> {
    let s1 = s_default(l1)?;
    let s2 = s_default(l2)?;
    let mut out = Vec::new();

    let union = l1.disjoint_union(l2);
    let su = s_default(&union)?;
    out.push(PropertyCheck {
        name: "disjoint-union",
        detail: format!("s(L1 u L2) = {su}, s(L1)+s(L2)-1 = {}", s1 + s2 - 1),
        ok: su == s1 + s2 - 1,
    });

    if let Some(sum) = sum12 {
        let ss = s_default(sum)?;
        out.push(PropertyCheck {
            name: "connected-sum",
            detail: format!("{} <= s(L1#L2) = {ss} <= {}", s1 + s2 - 2, s1 + s2),
            ok: s1 + s2 - 2 <= ss && ss <= s1 + s2,
        });
    }

    for (name, l, s) in [("mirror-window-L1", l1, s1), ("mirror-window-L2", l2, s2)] {
        let comps = l.n_components() as i64;
        let sm = s_default(&l.mirror())?;
        let lo = -2 * comps + 2;
        let both = s + sm;
        let mut ok = lo <= both && both <= 2;
        let mut detail = format!("{lo} <= s(L)+s(mirror L) = {both} <= 2");
        if l.n_crossings() == 0 {
            // a crossingless diagram is an unlink, where the lower bound
            // is attained
            ok = ok && both == lo;
            detail.push_str(" (unlink: equality required)");
        }
        out.push(PropertyCheck { name, detail, ok });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CobordismEstimate {
    /// |s(end) - s(start)|
    pub lhs: i64,
    /// -chi of the traced surface
    pub rhs: i64,
    pub ok: bool,
}

/// Check the cobordism bound |s(L2) - s(L1)| <= -chi(S) along a movie. Only
/// valid when every component of the traced surface has boundary in the
/// starting link.
pub fn cobordism_estimate(
    d1: &Diagram,
    d2: &Diagram,
    movie: &Movie,
) -> Result<CobordismEstimate> {
    if movie.start != *d1 {
        return Err(Error::Movie("movie does not start at the first diagram".into()));
    }
    if movie.end()? != *d2 {
        return Err(Error::Movie("movie does not end at the second diagram".into()));
    }
    let trace = surface_trace(movie)?;
    if !trace.all_touch_start {
        return Err(Error::Movie(
            "a component of the surface has no boundary in the starting link".into(),
        ));
    }
    let lhs = (s_default(d2)? - s_default(d1)?).abs();
    let rhs = -trace.chi;
    Ok(CobordismEstimate { lhs, rhs, ok: lhs <= rhs })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceObstruction {
    pub bound: i64,
    pub value: i64,
    /// true means the link cannot bound disjoint discs in the 4-ball
    pub obstructed: bool,
}

/// Weak sliceness forces |s| <= #components - 1; exceeding the bound is an
/// obstruction.
pub fn slice_obstruction(d: &Diagram) -> Result<SliceObstruction> {
    let s = s_default(d)?;
    let bound = d.n_components() as i64 - 1;
    Ok(SliceObstruction {
        bound,
        value: s.abs(),
        obstructed: s.abs() > bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::from_braid;
    use crate::diagram::from_pd;
    use crate::homology::{homology, total_free_rank};
    use crate::khovanov::complex;

    fn right_trefoil() -> Diagram {
        from_braid("s1 s1 s1", 2).unwrap()
    }

    #[test]
    fn unknot_generators_are_a_and_b() {
        let gens = lee_generators(&Diagram::unknot()).unwrap();
        assert_eq!(gens.len(), 2);
        let a = SparseVec::from([(0, Dyadic::one()), (1, Dyadic::one())]);
        let b = SparseVec::from([(0, Dyadic::from_int(-1)), (1, Dyadic::one())]);
        let chains: Vec<&SparseVec> = gens.iter().map(|g| &g.chain).collect();
        assert!(chains.contains(&&a));
        assert!(chains.contains(&&b));
    }

    #[test]
    fn generator_counts_and_independence() {
        for (d, n) in [
            (right_trefoil(), 1usize),
            (from_pd("O(1)\nO(2)").unwrap(), 2),
            (from_braid("s1 s1", 2).unwrap(), 2),
        ] {
            let gens = lee_generators(&d).unwrap();
            assert_eq!(gens.len(), 1 << n);
            let rank = total_free_rank(&homology(&complex(&d, Functor::Lee).unwrap()));
            assert_eq!(rank, 1 << n);
        }
    }

    #[test]
    fn s_of_small_knots() {
        let u = s_invariant(&Diagram::unknot(), &[false]).unwrap();
        assert_eq!(u.s, 0);
        let mut degs = [u.deg_plus, u.deg_minus];
        degs.sort_unstable();
        assert_eq!(degs, [-1, 1]);

        let t = s_invariant(&right_trefoil(), &[false]).unwrap();
        assert_eq!(t.s, 2);
        assert_eq!(t.s_min, Some(1));
        assert_eq!(t.s_max, Some(3));

        let m = s_invariant(&right_trefoil().mirror(), &[false]).unwrap();
        assert_eq!(m.s, -2);

        let f8 = s_invariant(&from_braid("s1 s2^-1 s1 s2^-1", 3).unwrap(), &[false]).unwrap();
        assert_eq!(f8.s, 0);
    }

    #[test]
    fn s_of_unlinks_is_one_minus_n() {
        for n in 1..=4usize {
            let text: String = (1..=n).map(|e| format!("O({e})\n")).collect();
            let d = from_pd(&text).unwrap();
            assert_eq!(s_default(&d).unwrap(), 1 - n as i64, "{n}-unlink");
        }
        // same link drawn with an R2 overlap
        let r2 = from_braid("s1 s1^-1", 2).unwrap();
        assert_eq!(s_default(&r2).unwrap(), -1);
    }

    #[test]
    fn degrees_agree_with_the_unreduced_complex() {
        for d in [right_trefoil(), from_braid("s1 s1", 2).unwrap()] {
            let report = s_invariant(&d, &vec![false; d.n_components()]).unwrap();
            let cx = complex(&d, Functor::Lee).unwrap();
            let gens = lee_generators(&d).unwrap();
            let o = gens.iter().find(|g| g.reversed.iter().all(|&b| !b)).unwrap();
            let bar = gens.iter().find(|g| g.reversed.iter().all(|&b| b)).unwrap();
            let mut zp = o.chain.clone();
            vec_add_scaled(&mut zp, &bar.chain, &Dyadic::one());
            let mut zm = o.chain.clone();
            vec_add_scaled(&mut zm, &bar.chain, &Dyadic::from_int(-1));
            let dp = filtered_class_degree(&cx, o.r, &zp).unwrap();
            let dm = filtered_class_degree(&cx, o.r, &zm).unwrap();
            assert_eq!(
                [dp.min(dm), dp.max(dm)],
                [
                    report.deg_plus.min(report.deg_minus),
                    report.deg_plus.max(report.deg_minus)
                ]
            );
        }
    }

    #[test]
    fn inequality_suite_passes_on_small_examples() {
        // the granny knot is a sum of two right trefoils
        let t = right_trefoil();
        let granny = from_braid("s1 s1 s1 s2 s2 s2", 3).unwrap();
        let checks = property_suite(&t, &t, Some(&granny)).unwrap();
        for c in &checks {
            assert!(c.ok, "{}: {}", c.name, c.detail);
        }

        let checks = property_suite(&t, &Diagram::unknot(), None).unwrap();
        for c in &checks {
            assert!(c.ok, "{}: {}", c.name, c.detail);
        }

        let unlink2 = from_pd("O(1)\nO(2)").unwrap();
        let checks = property_suite(&unlink2, &unlink2, None).unwrap();
        for c in &checks {
            assert!(c.ok, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn granny_knot_sum_bounds_are_sharp_at_the_top() {
        // s is additive for this sum: 2 + 2
        let granny = from_braid("s1 s1 s1 s2 s2 s2", 3).unwrap();
        assert_eq!(s_default(&granny).unwrap(), 4);
    }

    #[test]
    fn sliceness_obstruction_reports() {
        let u = slice_obstruction(&Diagram::unknot()).unwrap();
        assert_eq!(u, SliceObstruction { bound: 0, value: 0, obstructed: false });

        let unlink3 = from_pd("O(1)\nO(2)\nO(3)").unwrap();
        let r = slice_obstruction(&unlink3).unwrap();
        assert_eq!(r, SliceObstruction { bound: 2, value: 2, obstructed: false });
    }

    #[test]
    fn cobordism_estimates_track_the_surface() {
        use crate::diagram::Side;
        use crate::movies::MovieStep;
        let u = Diagram::unknot();
        let idle = Movie::new(u.clone());
        let r = cobordism_estimate(&u, &u, &idle).unwrap();
        assert_eq!((r.lhs, r.rhs, r.ok), (0, 0, true));

        let unlink2 = from_pd("O(1)\nO(2)").unwrap();
        let m = Movie::new(unlink2.clone())
            .then(MovieStep::Saddle { a: 1, b: 2, side: None });
        let end = m.end().unwrap();
        let r = cobordism_estimate(&unlink2, &end, &m).unwrap();
        assert_eq!((r.lhs, r.rhs, r.ok), (1, 1, true));

        // pinch and re-merge: a genus-one tube from the unknot to itself
        let m = Movie::new(u.clone())
            .then(MovieStep::Saddle { a: 1, b: 1, side: Some(Side::L) })
            .then(MovieStep::Saddle { a: 1, b: 2, side: None });
        let end = m.end().unwrap();
        let r = cobordism_estimate(&u, &end, &m).unwrap();
        assert_eq!((r.lhs, r.rhs, r.ok), (0, 2, true));

        // a bare birth has no boundary upstream, so the bound does not apply
        let m = Movie::new(u.clone()).then(MovieStep::cup());
        let end = m.end().unwrap();
        assert!(cobordism_estimate(&u, &end, &m).is_err());
    }

    #[test]
    fn split_union_drops_s_by_one() {
        let t = right_trefoil();
        let both = t.disjoint_union(&Diagram::unknot());
        assert_eq!(s_default(&both).unwrap(), s_default(&t).unwrap() - 1);
    }

    #[test]
    fn empty_link_is_rejected() {
        assert!(s_invariant(&Diagram::empty(), &[]).is_err());
    }
}
