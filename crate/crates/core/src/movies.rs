//! Movies: finite sequences of elementary moves connecting two diagrams,
//! read bottom-up as cobordisms between the links the diagrams present.
//!
//! A step is one of
//!
//! * `Cup` / `Cap`: birth or death of a crossingless circle,
//! * `Saddle`: oriented band surgery between two arcs bounding a common
//!   region (pinching an arc against itself when the two arcs coincide),
//! * `R2Add` / `R2Remove`, `R3`, `R1PrimeAdd` / `R1PrimeRemove`: framed
//!   Reidemeister moves,
//! * `R1Add` / `R1Remove`: bare first Reidemeister moves, which change the
//!   framing and are flagged by [`framed_validate`],
//! * mark moves: create or cancel a `+-` pair, slide a mark past a
//!   crossing, trade a mark for a curl of the same sign and back,
//! * `Relabel`: rename edges; ambient isotopy bookkeeping only.
//!
//! Movies have a plain text form: the start diagram in its clause syntax,
//! a `---` separator, then one step per line (`SADDLE e3 e7`, `R2+ e1 e2`,
//! `CAP e5`, ...). Edges are written `eN`, crossings `xK` with `K` the
//! 0-based index into the current still's crossing list.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::One;

use crate::diagram::{parse_rational, Diagram, EdgeId, FreeLoop, Mark, Placement, Side};
use crate::embed::{region_map, RegionMap};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum MovieStep {
    /// Birth of a crossingless circle, counterclockwise unless `cw`, placed
    /// in the face on `side` of `host` (a root of the placement forest when
    /// absent).
    Cup {
        host: Option<(EdgeId, Side)>,
        cw: bool,
        color: u32,
    },
    /// Death of a crossingless circle.
    Cap { edge: EdgeId },
    /// Band surgery joining the arcs `a` and `b` through a region they both
    /// bound. With `a == b` the arc is pinched against itself; `side` picks
    /// the region (relative to the orientation of `a`).
    Saddle {
        a: EdgeId,
        b: EdgeId,
        side: Option<Side>,
    },
    /// Push `over` across `under` through a shared region, creating two
    /// crossings of opposite signs.
    R2Add {
        over: EdgeId,
        under: EdgeId,
        side: Option<Side>,
    },
    /// Undo an R2 pair; `mid_over` is the overpass segment of the bigon.
    R2Remove { mid_over: EdgeId },
    /// Slide a strand past a crossing of the other two; the three edges
    /// bound the vanishing triangle.
    R3 { edges: [EdgeId; 3] },
    /// A curl of the given sign on `edge`, its lobe on `side` of the
    /// direction of travel. Changes the framing: not a framed move.
    R1Add {
        edge: EdgeId,
        sign: i8,
        side: Side,
    },
    /// Remove the curl at the given crossing. Not a framed move.
    R1Remove { crossing: usize },
    /// Two opposite curls on `edge` (framing-preserving first Reidemeister
    /// move).
    R1PrimeAdd { edge: EdgeId },
    /// Cancel two opposite curls; `mid` is the segment between them.
    R1PrimeRemove { mid: EdgeId },
    /// Trade the first mark of the given sign on `edge` for a curl of the
    /// same sign at its position.
    MarkToCurl { edge: EdgeId, sign: i8 },
    /// Trade the curl at the given crossing for a mark of its sign.
    CurlToMark { crossing: usize },
    /// Create a cancelling pair of marks on `edge`: `+` at `pos_plus`, `-`
    /// at `pos_minus`.
    MarkCreatePair {
        edge: EdgeId,
        pos_plus: BigRational,
        pos_minus: BigRational,
    },
    /// Remove the first adjacent pair of opposite marks on `edge`.
    MarkAnnihilatePair { edge: EdgeId },
    /// Slide the mark nearest the head of `edge` past the crossing at its
    /// head (or nearest the tail, past the tail crossing).
    MarkSlide { edge: EdgeId, toward_head: bool },
    /// Rename edges, `from > to` pairwise; the underlying diagram is
    /// unchanged.
    Relabel { pairs: Vec<(EdgeId, EdgeId)> },
}

impl MovieStep {
    pub fn cup() -> MovieStep {
        MovieStep::Cup {
            host: None,
            cw: false,
            color: 1,
        }
    }

    /// Does the step change the framing of the link it acts on?
    pub fn breaks_framing(&self) -> bool {
        matches!(
            self,
            MovieStep::R1Add { .. } | MovieStep::R1Remove { .. }
        )
    }
}

/// Result of applying one step: the new still, the Euler characteristic
/// contribution of the elementary cobordism, and aliases `(old, new)`
/// tracking components whose every edge id changed.
pub struct StepOutcome {
    pub diagram: Diagram,
    pub chi: i64,
    pub aliases: Vec<(EdgeId, EdgeId)>,
}

// ---------------------------------------------------------------- surgery

pub(crate) fn max_edge(d: &Diagram) -> EdgeId {
    d.edge_ids().max().unwrap_or(0)
}

/// The mutable parts of a diagram, pulled out for surgery.
struct Parts {
    crossings: Vec<[EdgeId; 4]>,
    declared: Vec<Option<i8>>,
    loops: Vec<FreeLoop>,
    marks: Vec<Mark>,
    placements: Vec<Placement>,
    outer: Option<(EdgeId, Side)>,
}

impl Parts {
    fn of(d: &Diagram) -> Parts {
        Parts {
            crossings: d.crossings.clone(),
            declared: (0..d.n_crossings()).map(|k| d.declared_sign(k)).collect(),
            loops: d.loops.clone(),
            marks: d.marks.clone(),
            placements: d.placements.clone(),
            outer: d.outer,
        }
    }

    fn build(self, before: &Diagram, aliases: &[(EdgeId, EdgeId)]) -> Result<Diagram> {
        let built = Diagram::with_declared_signs(
            self.crossings,
            self.declared,
            self.loops,
            self.marks,
            BTreeMap::new(),
            self.placements,
            self.outer,
        )?;
        transfer_colors(before, built, aliases)
    }

    /// Build after a structural surgery: pin the face at infinity to an
    /// edge-side that survives, so the embedding is preserved, then drop
    /// the pin and any placements the default conventions already imply.
    fn build_embedded(
        mut self,
        before: &Diagram,
        aliases: &[(EdgeId, EdgeId)],
        rm: &RegionMap,
        avoid: &[EdgeId],
    ) -> Result<Diagram> {
        if self.outer.is_none() {
            let mut pin = None;
            for e in before.edge_ids() {
                if avoid.contains(&e) {
                    continue;
                }
                for s in [Side::L, Side::R] {
                    if rm.region(e, s) == Some(rm.outer) {
                        pin = Some((e, s));
                        break;
                    }
                }
                if pin.is_some() {
                    break;
                }
            }
            // fall back to a surgery edge; its tail portion survives with
            // its travel direction, so the side still names the same face
            if pin.is_none() {
                for &e in avoid {
                    if !self.survives(e) {
                        continue;
                    }
                    for s in [Side::L, Side::R] {
                        if rm.region(e, s) == Some(rm.outer) {
                            pin = Some((e, s));
                            break;
                        }
                    }
                    if pin.is_some() {
                        break;
                    }
                }
            }
            self.outer = pin;
        }
        normalize(self.build(before, aliases)?)
    }

    fn survives(&self, e: EdgeId) -> bool {
        self.loops.iter().any(|l| l.edge == e)
            || self.crossings.iter().any(|q| q.contains(&e))
    }
}

/// Canonical form after surgery: forget placements that just put a piece
/// in the outer face, and the outer pin when the default pick agrees.
fn normalize(built: Diagram) -> Result<Diagram> {
    let rm = region_map(&built)?;
    let mut p = Parts::of(&built);
    let before_len = p.placements.len();
    p.placements
        .retain(|pl| rm.region(pl.host, pl.side) != Some(rm.outer));
    let mut out = if p.placements.len() != before_len {
        p.build(&built, &[])?
    } else {
        built
    };
    if let Some((e, s)) = out.outer {
        let mut q = Parts::of(&out);
        q.outer = None;
        if let Ok(d2) = q.build(&out, &[]) {
            if let Ok(rm2) = region_map(&d2) {
                if rm2.region(e, s) == Some(rm2.outer) {
                    out = d2;
                }
            }
        }
    }
    Ok(out)
}

/// Carry colors across a step: each new component takes the color of the
/// old component it shares an edge (or an alias) with. Conflicts mean a
/// saddle tried to join differently colored components.
fn transfer_colors(
    before: &Diagram,
    built: Diagram,
    aliases: &[(EdgeId, EdgeId)],
) -> Result<Diagram> {
    let mut colors = vec![0u32; built.n_components()];
    let mut seen = vec![BTreeSet::new(); built.n_components()];
    for e in built.edge_ids().collect::<Vec<_>>() {
        if let Some(c_old) = before.component_of(e) {
            seen[built.component_of(e).unwrap()].insert(before.color(c_old));
        }
    }
    for &(old, new) in aliases {
        if let (Some(c_old), Some(c_new)) = (before.component_of(old), built.component_of(new)) {
            seen[c_new].insert(before.color(c_old));
        }
    }
    for (c, set) in seen.iter().enumerate() {
        colors[c] = match set.len() {
            0 => 1,
            1 => *set.iter().next().unwrap(),
            _ => {
                return Err(Error::Movie(
                    "step would join components of different colors".into(),
                ))
            }
        };
    }
    built.with_colors(&colors)
}

/// Drop placement entries that became internal after the pieces of `a` and
/// `b` fused, and keep at most one anchor for the fused piece.
fn prune_placements(d: &Diagram, placements: &mut Vec<Placement>, a: EdgeId, b: EdgeId) {
    let (pa, pb) = match (d.piece_of(a), d.piece_of(b)) {
        (Some(pa), Some(pb)) if pa != pb => (pa, pb),
        _ => return,
    };
    let fused = |p: Option<usize>| p == Some(pa) || p == Some(pb);
    let mut anchored = false;
    placements.retain(|pl| {
        let pe = d.piece_of(pl.edge);
        let ph = d.piece_of(pl.host);
        if fused(pe) && fused(ph) {
            return false;
        }
        if fused(pe) {
            if anchored {
                return false;
            }
            anchored = true;
        }
        true
    });
}

fn interior_side(ccw: bool) -> Side {
    if ccw {
        Side::L
    } else {
        Side::R
    }
}

fn apply_cup(
    d: &Diagram,
    host: Option<(EdgeId, Side)>,
    cw: bool,
    color: u32,
) -> Result<StepOutcome> {
    let f = max_edge(d) + 1;
    let mut p = Parts::of(d);
    p.loops.push(FreeLoop { edge: f, ccw: !cw });
    if let Some((h, s)) = host {
        if d.component_of(h).is_none() {
            return Err(Error::Movie(format!("cup host edge {h} does not exist")));
        }
        p.placements.push(Placement {
            edge: f,
            host: h,
            side: s,
        });
    }
    let mut out = p.build(d, &[])?;
    if color != 1 {
        let mut cols = out.coloring();
        cols[out.component_of(f).unwrap()] = color;
        out = out.with_colors(&cols)?;
    }
    Ok(StepOutcome {
        diagram: out,
        chi: 1,
        aliases: vec![],
    })
}

fn apply_cap(d: &Diagram, e: EdgeId) -> Result<StepOutcome> {
    if !d.loops.iter().any(|l| l.edge == e) {
        return Err(Error::Movie(format!(
            "cap needs a crossingless circle, and edge {e} is not one"
        )));
    }
    if d.marks.iter().any(|m| m.edge == e) {
        return Err(Error::Movie(format!(
            "cap would discard the marks on edge {e}"
        )));
    }
    let mut p = Parts::of(d);
    p.loops.retain(|l| l.edge != e);
    let own = p
        .placements
        .iter()
        .find(|pl| pl.edge == e)
        .map(|pl| (pl.host, pl.side));
    p.placements.retain(|pl| pl.edge != e);
    // circles that lived inside the dying one spill into its surrounding face
    let mut kept = Vec::new();
    for mut pl in p.placements.drain(..) {
        if pl.host == e {
            match own {
                Some((h, s)) => {
                    pl.host = h;
                    pl.side = s;
                    kept.push(pl);
                }
                None => {} // becomes a root
            }
        } else {
            kept.push(pl);
        }
    }
    p.placements = kept;
    if p.outer.map(|(oe, _)| oe) == Some(e) {
        p.outer = own;
    }
    let rm = region_map(d)?;
    let out = p.build_embedded(d, &[], &rm, &[e])?;
    Ok(StepOutcome {
        diagram: out,
        chi: 1,
        aliases: vec![],
    })
}

/// The sides of `a` and `b` facing a region both bound. `side` forces the
/// region to be the one on that side of `a`.
fn facing_sides(
    rm: &RegionMap,
    a: EdgeId,
    b: EdgeId,
    side: Option<Side>,
) -> Result<(Side, Side, usize)> {
    let (la, ra) = rm
        .side_regions(a)
        .ok_or_else(|| Error::Movie(format!("no edge {a}")))?;
    let (lb, rb) = rm
        .side_regions(b)
        .ok_or_else(|| Error::Movie(format!("no edge {b}")))?;
    let g = match side {
        Some(s) => {
            let g = if s == Side::L { la } else { ra };
            if g != lb && g != rb {
                return Err(Error::Movie(format!(
                    "edges {a} and {b} do not share the region on side {s:?} of {a}"
                )));
            }
            g
        }
        None => {
            let mut shared: Vec<usize> =
                [la, ra].into_iter().filter(|r| *r == lb || *r == rb).collect();
            shared.dedup();
            shared.into_iter().min().ok_or_else(|| {
                Error::Movie(format!("edges {a} and {b} do not bound a common region"))
            })?
        }
    };
    let sa = if la == g { Side::L } else { Side::R };
    let sb = if lb == g { Side::L } else { Side::R };
    Ok((sa, sb, g))
}

fn apply_saddle(d: &Diagram, a: EdgeId, b: EdgeId, side: Option<Side>) -> Result<StepOutcome> {
    if a == b {
        return apply_pinch(d, a, side.unwrap_or(Side::L));
    }
    let rm = region_map(d)?;
    let (sa, sb, _) = facing_sides(&rm, a, b, side)?;
    let loop_a = d.loops.iter().find(|l| l.edge == a).cloned();
    let loop_b = d.loops.iter().find(|l| l.edge == b).cloned();
    // two arcs must run the same way along the shared region boundary for
    // the band to respect the orientations; a free circle being absorbed
    // imposes nothing, since the band may attach anywhere along it
    if sa != sb && loop_a.is_some() == loop_b.is_some() {
        return Err(Error::Movie(format!(
            "saddle between {a} and {b} is incompatible with the orientations"
        )));
    }
    let mut p = Parts::of(d);
    let mut aliases = Vec::new();
    match (loop_a.as_ref(), loop_b.as_ref()) {
        (None, None) => {
            let ha = d.ends(a).unwrap().head;
            let hb = d.ends(b).unwrap().head;
            p.crossings[ha.0][ha.1] = b;
            p.crossings[hb.0][hb.1] = a;
            prune_placements(d, &mut p.placements, a, b);
        }
        (Some(_), None) | (None, Some(_)) => {
            // the circle is absorbed into the other strand
            let (l, _x) = if loop_a.is_some() { (a, b) } else { (b, a) };
            if d.marks.iter().any(|m| m.edge == l) {
                return Err(Error::Movie(format!(
                    "saddle would destroy marked circle {l}; slide its marks first"
                )));
            }
            if p.placements.iter().any(|pl| pl.host == l) {
                return Err(Error::Movie(format!(
                    "a piece is placed relative to circle {l}, which the saddle absorbs"
                )));
            }
            p.loops.retain(|lo| lo.edge != l);
            for pl in p.placements.iter_mut() {
                if pl.edge == l {
                    pl.edge = if l == a { b } else { a };
                }
            }
            prune_placements(d, &mut p.placements, a, b);
            aliases.push((l, if l == a { b } else { a }));
        }
        (Some(la), Some(lb)) => {
            if d.marks.iter().any(|m| m.edge == b) {
                return Err(Error::Movie(format!(
                    "saddle would destroy marked circle {b}; slide its marks first"
                )));
            }
            let pa = curve_parity(d, &rm, &BTreeSet::from([a]));
            let pb = curve_parity(d, &rm, &BTreeSet::from([b]));
            let int_reg =
                |e: EdgeId, ccw: bool| rm.region(e, interior_side(ccw)).unwrap();
            let a_in_b = pb[int_reg(a, la.ccw)] == 1;
            let b_in_a = pa[int_reg(b, lb.ccw)] == 1;
            // the merged circle's inside lies on a's interior side, except
            // when a sat inside b and the band ate through a's exterior
            let ccw = if a_in_b { !la.ccw } else { la.ccw };
            p.loops.retain(|lo| lo.edge != a && lo.edge != b);
            p.loops.push(FreeLoop { edge: a, ccw });
            for pl in p.placements.iter_mut() {
                if pl.edge == b {
                    pl.edge = a;
                }
                if pl.host == b {
                    // inside the merged circle iff it was inside b and the
                    // circles were not nested b-in-a, or vice versa
                    let inner = (pl.side == interior_side(lb.ccw)) != b_in_a;
                    pl.host = a;
                    pl.side = if inner {
                        interior_side(ccw)
                    } else {
                        interior_side(ccw).flip()
                    };
                }
            }
            if p.outer.map(|(oe, _)| oe) == Some(b) {
                let s = p.outer.unwrap().1;
                p.outer = Some((a, s));
            }
            prune_placements(d, &mut p.placements, a, b);
            aliases.push((b, a));
        }
    }
    let out = p.build_embedded(d, &aliases, &rm, &[a, b])?;
    Ok(StepOutcome {
        diagram: out,
        chi: -1,
        aliases,
    })
}

fn apply_pinch(d: &Diagram, e: EdgeId, side: Side) -> Result<StepOutcome> {
    let f = max_edge(d) + 1;
    let mut p = Parts::of(d);
    if let Some(l) = d.loops.iter().find(|l| l.edge == e).cloned() {
        let int = interior_side(l.ccw);
        if side == int {
            // two lobes side by side where the circle was
            p.loops.push(FreeLoop { edge: f, ccw: l.ccw });
            p.placements.push(Placement {
                edge: f,
                host: e,
                side: int.flip(),
            });
        } else {
            // outer lobe keeps the sense; inner lobe runs against it
            p.loops.push(FreeLoop { edge: f, ccw: !l.ccw });
            p.placements.push(Placement {
                edge: f,
                host: e,
                side: int,
            });
        }
    } else if d.ends(e).is_some() {
        // the middle of the arc closes into a circle beside it
        p.loops.push(FreeLoop {
            edge: f,
            ccw: side == Side::L,
        });
        p.placements.push(Placement {
            edge: f,
            host: e,
            side,
        });
    } else {
        return Err(Error::Movie(format!("no edge {e} to pinch")));
    }
    let rm = region_map(d)?;
    let out = p.build_embedded(d, &[(e, f)], &rm, &[e])?;
    Ok(StepOutcome {
        diagram: out,
        chi: -1,
        aliases: vec![(e, f)],
    })
}

fn apply_r2add(
    d: &Diagram,
    a: EdgeId,
    b: EdgeId,
    side: Option<Side>,
) -> Result<StepOutcome> {
    if a == b && d.ends(a).is_some() {
        return Err(Error::Movie(
            "pushing an arc across itself is only supported for a crossingless circle".into(),
        ));
    }
    let rm = region_map(d)?;
    let (sa, sb, _) = facing_sides(&rm, a, b, side)?;
    // whether each strand runs with the dart that keeps the region on its left
    let ea = sa == Side::L;
    let eb = sb == Side::L;
    let m = max_edge(d);
    let (p_id, q_id) = (m + 1, m + 2);
    let loop_a = d.ends(a).is_none();
    let loop_b = d.ends(b).is_none();
    let mut next = m + 3;
    let (first_a, last_a, first_b, last_b);
    if a == b {
        // the circle crosses itself: the two outer wraps share the fresh id
        first_a = a;
        last_a = next;
        first_b = next;
        last_b = a;
    } else {
        first_a = a;
        if loop_a {
            last_a = a;
        } else {
            last_a = next;
            next += 1;
        }
        first_b = b;
        if loop_b {
            last_b = b;
        } else {
            last_b = next;
        }
    }
    // passage schedule: which segment enters and leaves each new crossing
    let (oi_low, oo_low, oi_high, oo_high) = if ea {
        (first_a, p_id, p_id, last_a)
    } else {
        (p_id, last_a, first_a, p_id)
    };
    let (ui_low, uo_low, ui_high, uo_high) = if eb {
        (q_id, last_b, first_b, q_id)
    } else {
        (first_b, q_id, q_id, last_b)
    };
    // slots counterclockwise from the under-in compass point; the over
    // strand enters from the east at exactly one of the two crossings
    let quad = |u_in: EdgeId,
                u_out: EdgeId,
                under_from_north: bool,
                o_in: EdgeId,
                o_out: EdgeId,
                over_in_east: bool|
     -> ([EdgeId; 4], i8) {
        let mut q = [0usize; 4];
        q[0] = u_in;
        q[2] = u_out;
        let east = if under_from_north { 3 } else { 1 };
        let west = 4 - east;
        let (si, so) = if over_in_east { (east, west) } else { (west, east) };
        q[si] = o_in;
        q[so] = o_out;
        (q, if si == 3 { 1 } else { -1 })
    };
    let (q_low, s_low) = quad(ui_low, uo_low, eb, oi_low, oo_low, ea);
    let (q_high, s_high) = quad(ui_high, uo_high, eb, oi_high, oo_high, !ea);
    let mut p = Parts::of(d);
    if !loop_a && a != b {
        let ha = d.ends(a).unwrap().head;
        p.crossings[ha.0][ha.1] = last_a;
    }
    if !loop_b && a != b {
        let hb = d.ends(b).unwrap().head;
        p.crossings[hb.0][hb.1] = last_b;
    }
    p.crossings.push(q_low);
    p.declared.push(Some(s_low));
    p.crossings.push(q_high);
    p.declared.push(Some(s_high));
    p.loops.retain(|l| l.edge != a && l.edge != b);
    prune_placements(d, &mut p.placements, a, b);
    let out = p.build_embedded(d, &[], &rm, &[a, b])?;
    Ok(StepOutcome {
        diagram: out,
        chi: 0,
        aliases: vec![],
    })
}

/// Merge each chain of edges into its first member (or into a restored
/// circle when the chain closes up), rescaling mark positions and renaming
/// placement references. Crossings are not touched here.
fn splice_chains(
    d: &Diagram,
    p: &mut Parts,
    chains: &[Vec<EdgeId>],
    rm: &RegionMap,
) -> Result<Vec<EdgeId>> {
    let mut survivors = Vec::new();
    for chain in chains {
        let closed = chain.len() > 1 && chain.first() == chain.last();
        let members: Vec<EdgeId> = if closed {
            chain[..chain.len() - 1].to_vec()
        } else {
            chain.clone()
        };
        let keep = if closed {
            *members.iter().min().unwrap()
        } else {
            members[0]
        };
        // rotate a closed chain so the kept id comes first
        let ordered: Vec<EdgeId> = if closed {
            let at = members.iter().position(|&e| e == keep).unwrap();
            members[at..].iter().chain(&members[..at]).copied().collect()
        } else {
            members.clone()
        };
        let n = ordered.len() as i64;
        let mut marks = Vec::new();
        for mk in p.marks.drain(..) {
            if let Some(j) = ordered.iter().position(|&e| e == mk.edge) {
                marks.push(Mark {
                    edge: keep,
                    pos: (mk.pos + BigRational::from_integer((j as i64).into()))
                        / BigRational::from_integer(n.into()),
                    sign: mk.sign,
                });
            } else {
                marks.push(mk);
            }
        }
        p.marks = marks;
        for pl in p.placements.iter_mut() {
            if ordered.contains(&pl.edge) {
                pl.edge = keep;
            }
            if ordered.contains(&pl.host) {
                pl.host = keep;
            }
        }
        if let Some((oe, s)) = p.outer {
            if ordered.contains(&oe) {
                p.outer = Some((keep, s));
            }
        }
        if closed {
            // the restored circle keeps its travel direction: it runs
            // counterclockwise when its own inside is on the left
            let curve: BTreeSet<EdgeId> = members.iter().copied().collect();
            let parity = curve_parity(d, rm, &curve);
            let inside_left = parity[rm.region(keep, Side::L).unwrap()] == 1;
            p.loops.push(FreeLoop {
                edge: keep,
                ccw: inside_left,
            });
        } else {
            // reroute the head of the last member into the first
            let last = *ordered.last().unwrap();
            if last != keep {
                let h = d.ends(last).unwrap().head;
                p.crossings[h.0][h.1] = keep;
            }
        }
        survivors.push(keep);
    }
    Ok(survivors)
}

/// Locate the two crossings of an R2 bigon from its overpass segment:
/// returns `(k1, k2, q)` with `k1` the tail crossing of `p` and `q` the
/// underpass segment.
pub(crate) fn r2_bigon(d: &Diagram, p_edge: EdgeId) -> Result<(usize, usize, EdgeId)> {
    let pe = d
        .ends(p_edge)
        .ok_or_else(|| Error::Movie(format!("edge {p_edge} does not cross anything")))?;
    let (k1, k2) = (pe.tail.0, pe.head.0);
    if k1 == k2 {
        return Err(Error::Movie(format!("edge {p_edge} is a curl, not an R2 overpass")));
    }
    if pe.tail.1 % 2 == 0 || pe.head.1 % 2 == 0 {
        return Err(Error::Movie(format!(
            "edge {p_edge} is not the overpass of an R2 bigon"
        )));
    }
    let under = |k: usize| [d.crossings[k][0], d.crossings[k][2]];
    let q = under(k1)
        .into_iter()
        .filter(|&e| under(k2).contains(&e))
        .find(|&e| {
            d.ends(e).map_or(false, |en| {
                let ks = [en.tail.0, en.head.0];
                ks.contains(&k1) && ks.contains(&k2)
            })
        })
        .ok_or_else(|| {
            Error::Movie(format!("no underpass segment paired with {p_edge}"))
        })?;
    if d.sign(k1) != -d.sign(k2) {
        return Err(Error::Movie(
            "the two crossings of an R2 bigon must have opposite signs".into(),
        ));
    }
    Ok((k1, k2, q))
}

/// The face bounded by exactly the sides of `p` and `q`: the bigon itself.
fn bigon_face(d: &Diagram, rm: &RegionMap, p: EdgeId, q: EdgeId) -> Result<usize> {
    let (lp, rp) = rm.side_regions(p).unwrap();
    let (lq, rq) = rm.side_regions(q).unwrap();
    for f in [lp, rp] {
        if f != lq && f != rq {
            continue;
        }
        let mut sides = Vec::new();
        for e in d.edge_ids() {
            let (l, r) = rm.side_regions(e).unwrap();
            if l == f {
                sides.push(e);
            }
            if r == f {
                sides.push(e);
            }
        }
        sides.sort_unstable();
        let mut expect = [p, q];
        expect.sort_unstable();
        if sides == expect {
            return Ok(f);
        }
    }
    Err(Error::Movie(format!(
        "edges {p} and {q} do not bound a bigon face"
    )))
}

fn apply_r2remove(d: &Diagram, p_edge: EdgeId) -> Result<StepOutcome> {
    let (k1, k2, q_edge) = r2_bigon(d, p_edge)?;
    let rm = region_map(d)?;
    bigon_face(d, &rm, p_edge, q_edge)?;
    let pe = d.ends(p_edge).unwrap();
    let qe = d.ends(q_edge).unwrap();
    // outer segments of the two strands, in strand order
    let x_in = d.crossings[k1][4 - pe.tail.1];
    let x_out = d.crossings[k2][4 - pe.head.1];
    let u_in = d.crossings[qe.tail.0][(qe.tail.1 + 2) % 4];
    let u_out = d.crossings[qe.head.0][(qe.head.1 + 2) % 4];
    // chains of segments that fuse when the two crossings vanish; they may
    // link up or close into restored circles
    let over = vec![x_in, p_edge, x_out];
    let under = vec![u_in, q_edge, u_out];
    let chains: Vec<Vec<EdgeId>> = if x_out == u_in && u_out == x_in {
        vec![{
            let mut c = over.clone();
            c.extend([q_edge, u_out]);
            c
        }]
    } else if x_out == u_in {
        vec![{
            let mut c = over.clone();
            c.extend([q_edge, u_out]);
            c
        }]
    } else if u_out == x_in {
        vec![{
            let mut c = under.clone();
            c.extend([p_edge, x_out]);
            c
        }]
    } else {
        vec![over, under]
    };
    let mut p = Parts::of(d);
    let survivors = splice_chains(d, &mut p, &chains, &rm)?;
    // drop the bigon crossings
    let (ka, kb) = (k1.min(k2), k1.max(k2));
    p.crossings.remove(kb);
    p.crossings.remove(ka);
    p.declared.remove(kb);
    p.declared.remove(ka);
    // a restored circle next to a surviving strand needs a placement; two
    // restored circles need one relative to the other
    let restored: Vec<EdgeId> = p
        .loops
        .iter()
        .map(|l| l.edge)
        .filter(|e| !d.loops.iter().any(|l| l.edge == *e))
        .collect();
    if !restored.is_empty() {
        place_restored(d, &rm, &mut p, &chains, &restored, p_edge, q_edge)?;
    }
    let dead: Vec<EdgeId> = chains
        .iter()
        .flatten()
        .copied()
        .filter(|e| !survivors.contains(e))
        .collect();
    let out = p.build_embedded(d, &[], &rm, &dead)?;
    Ok(StepOutcome {
        diagram: out,
        chi: 0,
        aliases: vec![],
    })
}

/// Parity of each region with respect to the closed curve formed by the
/// given edges: regions inside the curve get parity 1.
fn curve_parity(d: &Diagram, rm: &RegionMap, curve: &BTreeSet<EdgeId>) -> Vec<u8> {
    let mut parity = vec![u8::MAX; rm.n_regions];
    parity[rm.outer] = 0;
    let mut queue = vec![rm.outer];
    while let Some(f) = queue.pop() {
        for e in d.edge_ids() {
            let (l, r) = rm.side_regions(e).unwrap();
            for (x, y) in [(l, r), (r, l)] {
                if x == f && parity[y] == u8::MAX {
                    parity[y] = parity[f] ^ u8::from(curve.contains(&e));
                    queue.push(y);
                }
            }
        }
    }
    parity
}

/// After an R2 removal, anchor restored circles: inside the other restored
/// circle, beside the surviving strand, or as a root in the outer face.
fn place_restored(
    d: &Diagram,
    rm: &RegionMap,
    p: &mut Parts,
    chains: &[Vec<EdgeId>],
    restored: &[EdgeId],
    p_edge: EdgeId,
    q_edge: EdgeId,
) -> Result<()> {
    let chain_with =
        |e: EdgeId| -> &Vec<EdgeId> { chains.iter().find(|c| c.contains(&e)).unwrap() };
    let curve_of = |e: EdgeId| -> BTreeSet<EdgeId> { chain_with(e).iter().copied().collect() };
    // a region strictly inside a restored circle, found at its keep edge
    let int_region = |keep: EdgeId, parity: &[u8]| -> usize {
        let (l, r) = rm.side_regions(keep).unwrap();
        if parity[l] == 1 {
            l
        } else {
            r
        }
    };
    if restored.len() == 2 {
        let (a, b) = (restored[0], restored[1]);
        let pa = curve_parity(d, rm, &curve_of(a));
        let pb = curve_parity(d, rm, &curve_of(b));
        let flag = |e: EdgeId, p: &Parts| p.loops.iter().find(|l| l.edge == e).unwrap().ccw;
        if pa[int_region(b, &pb)] == 1 {
            // b sits inside a
            let side = interior_side(flag(a, p));
            retarget_anchor(p, b, a);
            p.placements.push(Placement { edge: b, host: a, side });
        } else if pb[int_region(a, &pa)] == 1 {
            let side = interior_side(flag(b, p));
            retarget_anchor(p, a, b);
            p.placements.push(Placement { edge: a, host: b, side });
        } else if let Some(pl) = p
            .placements
            .iter()
            .find(|pl| pl.edge == a || pl.edge == b)
            .cloned()
        {
            // siblings share the face that anchored the fused piece
            let other = if pl.edge == a { b } else { a };
            p.placements.push(Placement {
                edge: other,
                host: pl.host,
                side: pl.side,
            });
        }
        return Ok(());
    }
    let lone = restored[0];
    let lone_chain = chain_with(lone);
    if lone_chain.contains(&p_edge) && lone_chain.contains(&q_edge) {
        // everything fused into the one restored circle
        return Ok(());
    }
    if p.placements.iter().any(|pl| pl.edge == lone) {
        return Ok(());
    }
    // the circle detached from the surviving strand into the face the
    // bigon opened into
    let other_chain = chains.iter().find(|c| !c.contains(&lone)).unwrap();
    let (host, mid) = (other_chain[0], other_chain[1]);
    let f = bigon_face(d, rm, p_edge, q_edge)?;
    let (lm, _) = rm.side_regions(mid).unwrap();
    let side = if lm == f { Side::L } else { Side::R };
    p.placements.push(Placement {
        edge: lone,
        host,
        side,
    });
    Ok(())
}

/// When a split leaves one restored circle inside the other, the fused
/// piece's anchor belongs to the outer one.
fn retarget_anchor(p: &mut Parts, inner: EdgeId, outer_keep: EdgeId) {
    for pl in p.placements.iter_mut() {
        if pl.edge == inner && pl.host != outer_keep {
            pl.edge = outer_keep;
        }
    }
}

/// Curl quadruples: the little loop `g1`, the incoming segment `e_in` and
/// the outgoing `e_out`, by sign and by the side of travel the lobe is on.
fn curl_quad(sign: i8, side: Side, g1: EdgeId, e_in: EdgeId, e_out: EdgeId) -> [EdgeId; 4] {
    match (sign > 0, side) {
        (true, Side::R) => [g1, g1, e_out, e_in],
        (true, Side::L) => [e_in, e_out, g1, g1],
        (false, Side::L) => [g1, e_in, e_out, g1],
        (false, Side::R) => [e_in, g1, g1, e_out],
    }
}

fn apply_r1add(d: &Diagram, e: EdgeId, sign: i8, side: Side) -> Result<StepOutcome> {
    if sign.abs() != 1 {
        return Err(Error::Movie(format!("curl sign {sign} is not ±1")));
    }
    let m = max_edge(d);
    let g1 = m + 1;
    let mut p = Parts::of(d);
    if let Some(ends) = d.ends(e) {
        let g2 = m + 2;
        p.crossings[ends.head.0][ends.head.1] = g2;
        p.crossings.push(curl_quad(sign, side, g1, e, g2));
        p.declared.push(Some(sign));
    } else if d.loops.iter().any(|l| l.edge == e) {
        p.loops.retain(|l| l.edge != e);
        p.crossings.push(curl_quad(sign, side, g1, e, e));
        p.declared.push(Some(sign));
    } else {
        return Err(Error::Movie(format!("no edge {e} to curl")));
    }
    let rm = region_map(d)?;
    let out = p.build_embedded(d, &[], &rm, &[e])?;
    Ok(StepOutcome {
        diagram: out,
        chi: 0,
        aliases: vec![],
    })
}

/// The little loop of a curl crossing: the edge occupying two cyclically
/// adjacent slots. Ties (a one-crossing kink) go to the larger id since
/// fresh curls always get the larger numbers.
pub(crate) fn curl_loop(d: &Diagram, k: usize) -> Result<EdgeId> {
    let q = d.crossings[k];
    let mut cands = Vec::new();
    for s in 0..4 {
        if q[s] == q[(s + 1) % 4] {
            cands.push(q[s]);
        }
    }
    cands.sort_unstable();
    cands.dedup();
    cands
        .last()
        .copied()
        .ok_or_else(|| Error::Movie(format!("crossing {k} is not a curl")))
}

fn apply_r1remove(d: &Diagram, k: usize) -> Result<StepOutcome> {
    if k >= d.n_crossings() {
        return Err(Error::Movie(format!("no crossing {k}")));
    }
    let little = curl_loop(d, k)?;
    let q = d.crossings[k];
    let (mut e_in, mut e_out) = (None, None);
    for s in 0..4 {
        if q[s] == little && d.crossings[k][(s + 1) % 4] == little {
            continue;
        }
    }
    for s in 0..4 {
        if q[s] != little {
            if d.points_in(k, s) {
                e_in = Some(q[s]);
            } else {
                e_out = Some(q[s]);
            }
        }
    }
    let (e_in, e_out) = match (e_in, e_out) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::Movie(format!(
                "crossing {k} is not a curl on a through strand"
            )))
        }
    };
    if d.marks.iter().any(|m| m.edge == little) {
        return Err(Error::Movie(format!(
            "slide the marks off curl loop {little} before removing it"
        )));
    }
    if d.placements.iter().any(|pl| pl.host == little) {
        return Err(Error::Movie(format!(
            "a piece is placed relative to curl loop {little}"
        )));
    }
    let rm = region_map(d)?;
    let mut p = Parts::of(d);
    let chain = if e_in == e_out {
        vec![e_in, little, e_in]
    } else {
        vec![e_in, little, e_out]
    };
    let survivors = splice_chains(d, &mut p, &[chain.clone()], &rm)?;
    p.crossings.remove(k);
    p.declared.remove(k);
    let dead: Vec<EdgeId> = chain
        .into_iter()
        .filter(|e| !survivors.contains(e))
        .collect();
    let out = p.build_embedded(d, &[], &rm, &dead)?;
    Ok(StepOutcome {
        diagram: out,
        chi: 0,
        aliases: vec![],
    })
}

fn apply_r1prime_add(d: &Diagram, e: EdgeId) -> Result<StepOutcome> {
    let first = apply_r1add(d, e, 1, Side::L)?;
    // the segment past the new curl carries the opposite one
    let cont = if d.ends(e).is_some() {
        max_edge(d) + 2
    } else {
        e
    };
    let second = apply_r1add(&first.diagram, cont, -1, Side::L)?;
    Ok(StepOutcome {
        diagram: second.diagram,
        chi: 0,
        aliases: vec![],
    })
}

fn apply_r1prime_remove(d: &Diagram, mid: EdgeId) -> Result<StepOutcome> {
    let ends = d
        .ends(mid)
        .ok_or_else(|| Error::Movie(format!("edge {mid} joins no curls")))?;
    let (k1, k2) = (ends.tail.0, ends.head.0);
    if k1 == k2 {
        return Err(Error::Movie(format!("edge {mid} is itself a curl loop")));
    }
    let (l1, l2) = (curl_loop(d, k1)?, curl_loop(d, k2)?);
    if l1 == mid || l2 == mid {
        return Err(Error::Movie(format!(
            "edge {mid} is a curl loop, not the segment between two curls"
        )));
    }
    if d.sign(k1) != -d.sign(k2) {
        return Err(Error::Movie(
            "the two curls must have opposite signs to cancel".into(),
        ));
    }
    // remove the tail-side curl first: its inflow edge is the older strand
    // segment, so the splice folds edge ids back down and the surviving
    // curl's little loop stays the fresher of its crossing's two loops
    let step1 = apply_r1remove(d, k1)?;
    let d1 = &step1.diagram;
    let k2_new = (0..d1.n_crossings())
        .find(|&k| curl_loop(d1, k).ok() == Some(l2))
        .ok_or_else(|| Error::Movie("lost track of the paired curl".into()))?;
    let step2 = apply_r1remove(d1, k2_new)?;
    Ok(StepOutcome {
        diagram: step2.diagram,
        chi: 0,
        aliases: vec![],
    })
}

fn apply_mark_to_curl(d: &Diagram, e: EdgeId, sign: i8) -> Result<StepOutcome> {
    let mk = d
        .marks
        .iter()
        .find(|m| m.edge == e && m.sign == sign)
        .cloned()
        .ok_or_else(|| Error::Movie(format!("no {} mark on edge {e}", sign_str(sign))))?;
    let stripped = {
        let mut p = Parts::of(d);
        let at = p.marks.iter().position(|m| *m == mk).unwrap();
        p.marks.remove(at);
        p.build(d, &[])?
    };
    let curled = apply_r1add(&stripped, e, sign, Side::L)?;
    // marks past the conversion point belong on the far segment
    let mut p = Parts::of(&curled.diagram);
    if d.ends(e).is_some() {
        let g2 = max_edge(d) + 2;
        let t = &mk.pos;
        for m in p.marks.iter_mut() {
            if m.edge == e && m.pos > *t {
                m.edge = g2;
                m.pos = (&m.pos - t) / (BigRational::one() - t);
            } else if m.edge == e {
                m.pos = &m.pos / t;
            }
        }
    }
    let out = p.build(&curled.diagram, &[])?;
    Ok(StepOutcome {
        diagram: out,
        chi: 0,
        aliases: vec![],
    })
}

fn apply_curl_to_mark(d: &Diagram, k: usize) -> Result<StepOutcome> {
    if k >= d.n_crossings() {
        return Err(Error::Movie(format!("no crossing {k}")));
    }
    let sign = d.sign(k);
    let little = curl_loop(d, k)?;
    let removed = apply_r1remove(d, k)?;
    // the merged edge keeps the incoming id; the junction sits a third (or
    // half, for a circle) of the way along
    let q = d.crossings[k];
    let mut e_in = None;
    for s in 0..4 {
        if q[s] != little && d.points_in(k, s) {
            e_in = Some(q[s]);
        }
    }
    let e_in = e_in.unwrap();
    let loop_case = !removed.diagram.ends(e_in).is_some()
        && removed.diagram.loops.iter().any(|l| l.edge == e_in);
    let pos = if loop_case {
        BigRational::new(1.into(), 2.into())
    } else {
        BigRational::new(1.into(), 3.into())
    };
    let mut p = Parts::of(&removed.diagram);
    p.marks.push(Mark {
        edge: e_in,
        pos,
        sign,
    });
    let out = p.build(&removed.diagram, &[])?;
    Ok(StepOutcome {
        diagram: out,
        chi: 0,
        aliases: vec![],
    })
}

fn apply_mark_pair(
    d: &Diagram,
    e: EdgeId,
    pos_plus: &BigRational,
    pos_minus: &BigRational,
) -> Result<StepOutcome> {
    if d.component_of(e).is_none() {
        return Err(Error::Movie(format!("no edge {e}")));
    }
    for pos in [pos_plus, pos_minus] {
        if *pos <= BigRational::from_integer(0.into()) || *pos >= BigRational::one() {
            return Err(Error::Movie("mark positions must lie strictly in (0,1)".into()));
        }
        if d.marks.iter().any(|m| m.edge == e && m.pos == *pos) {
            return Err(Error::Movie(format!("edge {e} already has a mark at {pos}")));
        }
    }
    if pos_plus == pos_minus {
        return Err(Error::Movie("the two marks need distinct positions".into()));
    }
    let mut p = Parts::of(d);
    p.marks.push(Mark {
        edge: e,
        pos: pos_plus.clone(),
        sign: 1,
    });
    p.marks.push(Mark {
        edge: e,
        pos: pos_minus.clone(),
        sign: -1,
    });
    let out = p.build(d, &[])?;
    Ok(StepOutcome {
        diagram: out,
        chi: 0,
        aliases: vec![],
    })
}

fn apply_mark_annihilate(d: &Diagram, e: EdgeId) -> Result<StepOutcome> {
    let on_e: Vec<Mark> = d.marks.iter().filter(|m| m.edge == e).cloned().collect();
    let at = on_e
        .windows(2)
        .position(|w| w[0].sign == -w[1].sign)
        .ok_or_else(|| {
            Error::Movie(format!("no adjacent pair of opposite marks on edge {e}"))
        })?;
    let (a, b) = (on_e[at].clone(), on_e[at + 1].clone());
    let mut p = Parts::of(d);
    p.marks.retain(|m| *m != a && *m != b);
    let out = p.build(d, &[])?;
    Ok(StepOutcome {
        diagram: out,
        chi: 0,
        aliases: vec![],
    })
}

fn apply_mark_slide(d: &Diagram, e: EdgeId, toward_head: bool) -> Result<StepOutcome> {
    let ends = d
        .ends(e)
        .ok_or_else(|| Error::Movie(format!("edge {e} has no crossing to slide past")))?;
    let on_e: Vec<Mark> = d.marks.iter().filter(|m| m.edge == e).cloned().collect();
    let mk = if toward_head {
        on_e.last().cloned()
    } else {
        on_e.first().cloned()
    }
    .ok_or_else(|| Error::Movie(format!("no mark on edge {e}")))?;
    let (k, slot) = if toward_head { ends.head } else { ends.tail };
    let cont = d.crossings[k][(slot + 2) % 4];
    let on_cont: Vec<&Mark> = d.marks.iter().filter(|m| m.edge == cont).collect();
    let pos = if toward_head {
        // land before everything on the far edge
        let lo = on_cont
            .first()
            .map(|m| m.pos.clone())
            .unwrap_or_else(BigRational::one);
        lo / BigRational::from_integer(2.into())
    } else {
        let hi = on_cont
            .last()
            .map(|m| m.pos.clone())
            .unwrap_or_else(|| BigRational::from_integer(0.into()));
        (hi + BigRational::one()) / BigRational::from_integer(2.into())
    };
    let mut p = Parts::of(d);
    let at = p.marks.iter().position(|m| *m == mk).unwrap();
    p.marks.remove(at);
    p.marks.push(Mark {
        edge: cont,
        pos,
        sign: mk.sign,
    });
    let out = p.build(d, &[])?;
    Ok(StepOutcome {
        diagram: out,
        chi: 0,
        aliases: vec![],
    })
}

fn apply_relabel(d: &Diagram, pairs: &[(EdgeId, EdgeId)]) -> Result<StepOutcome> {
    let froms: BTreeSet<EdgeId> = pairs.iter().map(|p| p.0).collect();
    let tos: BTreeSet<EdgeId> = pairs.iter().map(|p| p.1).collect();
    if froms.len() != pairs.len() || tos.len() != pairs.len() {
        return Err(Error::Movie("relabel pairs must be one-to-one".into()));
    }
    let all: BTreeSet<EdgeId> = d.edge_ids().collect();
    for &(f, _) in pairs {
        if !all.contains(&f) {
            return Err(Error::Movie(format!("no edge {f} to relabel")));
        }
    }
    for &(_, t) in pairs {
        if all.contains(&t) && !froms.contains(&t) {
            return Err(Error::Movie(format!("relabel target {t} is already in use")));
        }
    }
    let map: BTreeMap<EdgeId, EdgeId> = pairs.iter().copied().collect();
    let rn = |e: EdgeId| map.get(&e).copied().unwrap_or(e);
    let mut p = Parts::of(d);
    for q in p.crossings.iter_mut() {
        for s in q.iter_mut() {
            *s = rn(*s);
        }
    }
    for l in p.loops.iter_mut() {
        l.edge = rn(l.edge);
    }
    for m in p.marks.iter_mut() {
        m.edge = rn(m.edge);
    }
    for pl in p.placements.iter_mut() {
        pl.edge = rn(pl.edge);
        pl.host = rn(pl.host);
    }
    p.outer = p.outer.map(|(e, s)| (rn(e), s));
    let out = p.build(d, pairs)?;
    Ok(StepOutcome {
        diagram: out,
        chi: 0,
        aliases: pairs.to_vec(),
    })
}

fn apply_r3(d: &Diagram, es: [EdgeId; 3]) -> Result<StepOutcome> {
    let [x, y, z] = es;
    if x == y || y == z || x == z {
        return Err(Error::Movie("the three triangle edges must be distinct".into()));
    }
    let rm = region_map(d)?;
    // the triangle is the face bounded by exactly these three sides
    let tri = {
        let mut found = None;
        let mut want = [x, y, z];
        want.sort_unstable();
        'outer: for f in 0..rm.n_regions {
            if f == rm.outer {
                continue;
            }
            let mut sides = Vec::new();
            for e in d.edge_ids() {
                let (l, r) = rm.side_regions(e).unwrap();
                if l == f {
                    sides.push(e);
                }
                if r == f {
                    sides.push(e);
                }
                if sides.len() > 3 {
                    continue 'outer;
                }
            }
            sides.sort_unstable();
            if sides == want {
                found = Some(f);
                break;
            }
        }
        found.ok_or_else(|| {
            Error::Movie(format!("edges {x}, {y}, {z} do not bound a triangle"))
        })?
    };
    let _ = tri;
    // each side's endpoints are two of the three corner crossings
    let corners_of = |e: EdgeId| -> Result<(usize, usize)> {
        let en = d
            .ends(e)
            .ok_or_else(|| Error::Movie(format!("edge {e} is a free circle")))?;
        Ok((en.tail.0, en.head.0))
    };
    let (cx, cy, cz) = (corners_of(x)?, corners_of(y)?, corners_of(z)?);
    let shared = |p: (usize, usize), q: (usize, usize)| -> Result<usize> {
        for k in [p.0, p.1] {
            if k == q.0 || k == q.1 {
                return Ok(k);
            }
        }
        Err(Error::Movie("triangle corners do not close up".into()))
    };
    let kxy = shared(cx, cy)?;
    let kyz = shared(cy, cz)?;
    let kxz = shared(cx, cz)?;
    if kxy == kyz || kyz == kxz || kxy == kxz {
        return Err(Error::Movie("triangle corners do not close up".into()));
    }
    // rank the strands: the top one passes over at both of its corners
    let slot_at = |e: EdgeId, k: usize| -> usize {
        let en = d.ends(e).unwrap();
        if en.tail.0 == k {
            en.tail.1
        } else {
            en.head.1
        }
    };
    let overs = |e: EdgeId, ks: (usize, usize)| -> usize {
        usize::from(slot_at(e, ks.0) % 2 == 1) + usize::from(slot_at(e, ks.1) % 2 == 1)
    };
    let mut ranked = [(x, cx, overs(x, cx)), (y, cy, overs(y, cy)), (z, cz, overs(z, cz))];
    ranked.sort_by_key(|&(_, _, o)| std::cmp::Reverse(o));
    if ranked.map(|r| r.2) != [2, 1, 0] {
        return Err(Error::Movie(
            "the triangle strands are cyclically interleaved; no R3 applies".into(),
        ));
    }
    // no piece may be anchored in the vanishing triangle
    for pl in &d.placements {
        if [x, y, z].contains(&pl.host) && rm.region(pl.host, pl.side) == Some(tri) {
            return Err(Error::Movie(
                "a piece is placed inside the vanishing triangle".into(),
            ));
        }
    }
    // per strand: outer-in, side edge, outer-out, and its two corners in
    // strand order
    struct Strand {
        side_edge: EdgeId,
        k_first: usize,
        k_second: usize,
        outer_in: EdgeId,
        outer_out: EdgeId,
    }
    let strand = |e: EdgeId| -> Strand {
        let en = d.ends(e).unwrap();
        let (k_first, k_second) = (en.tail.0, en.head.0);
        Strand {
            side_edge: e,
            k_first,
            k_second,
            outer_in: d.crossings[k_first][(en.tail.1 + 2) % 4],
            outer_out: d.crossings[k_second][(en.head.1 + 2) % 4],
        }
    };
    let strands = [strand(ranked[0].0), strand(ranked[1].0), strand(ranked[2].0)];
    // after the move each strand meets its corners in the opposite order
    let passage = |st: &Strand, k: usize| -> (EdgeId, EdgeId) {
        if k == st.k_second {
            (st.outer_in, st.side_edge)
        } else {
            (st.side_edge, st.outer_out)
        }
    };
    let mut p = Parts::of(d);
    for k in [kxy, kyz, kxz] {
        let at: Vec<&Strand> = strands
            .iter()
            .filter(|s| s.k_first == k || s.k_second == k)
            .collect();
        // over strand = the one ranked higher
        let (over, under) = (at[0], at[1]);
        let (o_in, o_out) = passage(over, k);
        let (u_in, u_out) = passage(under, k);
        // keep the original rotation: the over strand enters at the same
        // slot parity position it used to
        let old_over_in_slot = {
            let e = over.side_edge;
            let en = d.ends(e).unwrap();
            // the over strand's in-edge at k before the move
            let old_in_slot = if en.tail.0 == k {
                // e leaves k: the strand entered via its outer edge
                (en.tail.1 + 2) % 4
            } else {
                en.head.1
            };
            old_in_slot
        };
        let oi = if old_over_in_slot % 2 == 1 {
            old_over_in_slot
        } else {
            // cannot happen for the over strand
            return Err(Error::Movie("triangle classification failed".into()));
        };
        let mut quad = [0usize; 4];
        quad[0] = u_in;
        quad[2] = u_out;
        quad[oi] = o_in;
        quad[4 - oi] = o_out;
        p.crossings[k] = quad;
    }
    let out = p.build_embedded(d, &[], &rm, &[x, y, z])?;
    Ok(StepOutcome {
        diagram: out,
        chi: 0,
        aliases: vec![],
    })
}

/// Apply one step to a still.
pub fn apply_step(d: &Diagram, step: &MovieStep) -> Result<StepOutcome> {
    match step {
        MovieStep::Cup { host, cw, color } => apply_cup(d, *host, *cw, *color),
        MovieStep::Cap { edge } => apply_cap(d, *edge),
        MovieStep::Saddle { a, b, side } => apply_saddle(d, *a, *b, *side),
        MovieStep::R2Add { over, under, side } => apply_r2add(d, *over, *under, *side),
        MovieStep::R2Remove { mid_over } => apply_r2remove(d, *mid_over),
        MovieStep::R3 { edges } => apply_r3(d, *edges),
        MovieStep::R1Add { edge, sign, side } => apply_r1add(d, *edge, *sign, *side),
        MovieStep::R1Remove { crossing } => apply_r1remove(d, *crossing),
        MovieStep::R1PrimeAdd { edge } => apply_r1prime_add(d, *edge),
        MovieStep::R1PrimeRemove { mid } => apply_r1prime_remove(d, *mid),
        MovieStep::MarkToCurl { edge, sign } => apply_mark_to_curl(d, *edge, *sign),
        MovieStep::CurlToMark { crossing } => apply_curl_to_mark(d, *crossing),
        MovieStep::MarkCreatePair {
            edge,
            pos_plus,
            pos_minus,
        } => apply_mark_pair(d, *edge, pos_plus, pos_minus),
        MovieStep::MarkAnnihilatePair { edge } => apply_mark_annihilate(d, *edge),
        MovieStep::MarkSlide { edge, toward_head } => apply_mark_slide(d, *edge, *toward_head),
        MovieStep::Relabel { pairs } => apply_relabel(d, pairs),
    }
}

// ---------------------------------------------------------------- movies

#[derive(Clone, Debug, PartialEq)]
pub struct Movie {
    pub start: Diagram,
    pub steps: Vec<MovieStep>,
}

impl Movie {
    pub fn new(start: Diagram) -> Movie {
        Movie {
            start,
            steps: Vec::new(),
        }
    }

    pub fn then(mut self, step: MovieStep) -> Movie {
        self.steps.push(step);
        self
    }

    /// All stills, starting with `start`; length `steps.len() + 1`.
    pub fn stills(&self) -> Result<Vec<Diagram>> {
        let mut out = vec![self.start.clone()];
        for (i, step) in self.steps.iter().enumerate() {
            let next = apply_step(out.last().unwrap(), step)
                .map_err(|e| Error::Movie(format!("step {i}: {e}")))?;
            out.push(next.diagram);
        }
        Ok(out)
    }

    pub fn end(&self) -> Result<Diagram> {
        Ok(self.stills()?.pop().unwrap())
    }

    /// Euler characteristic of the traced surface.
    pub fn euler_characteristic(&self) -> Result<i64> {
        let mut chi = 0;
        let mut d = self.start.clone();
        for step in &self.steps {
            let out = apply_step(&d, step)?;
            chi += out.chi;
            d = out.diagram;
        }
        Ok(chi)
    }

    /// The movie read backwards, step by step. Mark positions are
    /// canonicalized rather than restored exactly.
    pub fn reversed(&self) -> Result<Movie> {
        let stills = self.stills()?;
        let mut steps = Vec::new();
        for (i, step) in self.steps.iter().enumerate().rev() {
            let before = &stills[i];
            let after = &stills[i + 1];
            steps.extend(reverse_step(before, step, after)?);
        }
        let rev = Movie {
            start: stills.last().unwrap().clone(),
            steps,
        };
        // the reverse must land back on the start, marks aside
        let back = rev.end()?;
        if !eq_mod_mark_pos(&back, &self.start) {
            return Err(Error::Movie("could not invert the movie".into()));
        }
        Ok(rev)
    }
}

/// Diagram equality with mark positions forgotten. Sign order along each
/// edge still counts, cyclically on a crossingless circle.
pub fn eq_mod_mark_pos(a: &Diagram, b: &Diagram) -> bool {
    let strip = |d: &Diagram| -> (Vec<[EdgeId; 4]>, Vec<FreeLoop>, BTreeMap<usize, u32>, Vec<Placement>, Option<(EdgeId, Side)>) {
        (
            d.crossings.clone(),
            d.loops.clone(),
            d.colors.clone(),
            d.placements.clone(),
            d.outer,
        )
    };
    if strip(a) != strip(b) {
        return false;
    }
    let edges: BTreeSet<EdgeId> = a.marks.iter().chain(&b.marks).map(|m| m.edge).collect();
    for e in edges {
        let signs = |d: &Diagram| -> Vec<i8> {
            d.marks.iter().filter(|m| m.edge == e).map(|m| m.sign).collect()
        };
        let (sa, sb) = (signs(a), signs(b));
        if sa.len() != sb.len() {
            return false;
        }
        if a.loops.iter().any(|l| l.edge == e) {
            let n = sa.len().max(1);
            let cyclic_eq = (0..n).any(|r| (0..sa.len()).all(|i| sa[(i + r) % n] == sb[i]));
            if !cyclic_eq {
                return false;
            }
        } else if sa != sb {
            return false;
        }
    }
    true
}

fn reverse_step(before: &Diagram, step: &MovieStep, after: &Diagram) -> Result<Vec<MovieStep>> {
    let try_variants = |variants: Vec<Vec<MovieStep>>| -> Result<Vec<MovieStep>> {
        for cand in variants {
            let mut d = after.clone();
            let mut ok = true;
            for s in &cand {
                match apply_step(&d, s) {
                    Ok(out) => d = out.diagram,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && eq_mod_mark_pos(&d, before) {
                return Ok(cand);
            }
        }
        Err(Error::Movie("no inverse found for a movie step".into()))
    };
    let fresh_after = max_edge(after) + 1;
    match step {
        MovieStep::Cup { .. } => Ok(vec![MovieStep::Cap {
            edge: max_edge(after),
        }]),
        MovieStep::Cap { edge } => {
            let l = before.loops.iter().find(|l| l.edge == *edge).unwrap();
            let host = before
                .placements
                .iter()
                .find(|pl| pl.edge == *edge)
                .map(|pl| (pl.host, pl.side));
            let color = before.color(before.component_of(*edge).unwrap());
            let mut steps = vec![MovieStep::Cup {
                host,
                cw: !l.ccw,
                color,
            }];
            if fresh_after != *edge {
                steps.push(MovieStep::Relabel {
                    pairs: vec![(fresh_after, *edge)],
                });
            }
            Ok(steps)
        }
        MovieStep::Saddle { a, b, .. } => {
            let mut variants = Vec::new();
            if a == b {
                // pinch: merge the two circles back
                let f = max_edge(before) + 1;
                for side in [None, Some(Side::L), Some(Side::R)] {
                    variants.push(vec![MovieStep::Saddle { a: *a, b: f, side }]);
                }
            } else {
                let died = [*a, *b]
                    .into_iter()
                    .find(|&e| before.component_of(e).is_some() && after.component_of(e).is_none());
                match died {
                    None => {
                        for side in [None, Some(Side::L), Some(Side::R)] {
                            variants.push(vec![MovieStep::Saddle {
                                a: *a,
                                b: *b,
                                side,
                            }]);
                        }
                    }
                    Some(dead) => {
                        let kept = if dead == *a { *b } else { *a };
                        for side in [Some(Side::L), Some(Side::R), None] {
                            variants.push(vec![
                                MovieStep::Saddle {
                                    a: kept,
                                    b: kept,
                                    side,
                                },
                                MovieStep::Relabel {
                                    pairs: vec![(fresh_after, dead)],
                                },
                            ]);
                        }
                    }
                }
            }
            try_variants(variants)
        }
        MovieStep::R2Add { .. } => Ok(vec![MovieStep::R2Remove {
            mid_over: max_edge(before) + 1,
        }]),
        MovieStep::R2Remove { mid_over } => {
            let (k1, k2, q_edge) = r2_bigon(before, *mid_over)?;
            let _ = (k1, k2);
            let pe = before.ends(*mid_over).unwrap();
            let qe = before.ends(q_edge).unwrap();
            let x_in = before.crossings[pe.tail.0][4 - pe.tail.1];
            let x_out = before.crossings[pe.head.0][4 - pe.head.1];
            let u_in = before.crossings[qe.tail.0][(qe.tail.1 + 2) % 4];
            let u_out = before.crossings[qe.head.0][(qe.head.1 + 2) % 4];
            // ids the segments melted into
            let over_kept = survivor_of(after, &[x_in, *mid_over, x_out]);
            let under_kept = survivor_of(after, &[u_in, q_edge, u_out]);
            let mut variants = Vec::new();
            for side in [None, Some(Side::L), Some(Side::R)] {
                let mut steps = vec![MovieStep::R2Add {
                    over: over_kept,
                    under: under_kept,
                    side,
                }];
                // fresh ids by role: overpass, underpass, then outer tails
                let m = max_edge(after);
                let mut pairs = vec![(m + 1, *mid_over), (m + 2, q_edge)];
                let mut next = m + 3;
                if over_kept == under_kept {
                    pairs.push((next, x_out));
                } else {
                    if after.ends(over_kept).is_some() {
                        pairs.push((next, x_out));
                        next += 1;
                    }
                    if after.ends(under_kept).is_some() {
                        pairs.push((next, u_out));
                    }
                }
                let pairs: Vec<(EdgeId, EdgeId)> =
                    pairs.into_iter().filter(|(f, t)| f != t).collect();
                if !pairs.is_empty() {
                    steps.push(MovieStep::Relabel { pairs });
                }
                variants.push(steps);
            }
            try_variants(variants)
        }
        MovieStep::R3 { edges } => Ok(vec![MovieStep::R3 { edges: *edges }]),
        MovieStep::R1Add { .. } => Ok(vec![MovieStep::R1Remove {
            crossing: before.n_crossings(),
        }]),
        MovieStep::R1Remove { crossing } => {
            let little = curl_loop(before, *crossing)?;
            let sign = before.sign(*crossing);
            let q = before.crossings[*crossing];
            let mut e_in = 0;
            let mut e_out = 0;
            for s in 0..4 {
                if q[s] != little {
                    if before.points_in(*crossing, s) {
                        e_in = q[s];
                    } else {
                        e_out = q[s];
                    }
                }
            }
            let kept = survivor_of(after, &[e_in, little, e_out]);
            let mut variants = Vec::new();
            for side in [Side::L, Side::R] {
                let m = max_edge(after);
                let mut pairs = vec![(m + 1, little)];
                if after.ends(kept).is_some() {
                    pairs.push((m + 2, e_out));
                }
                let pairs: Vec<(EdgeId, EdgeId)> =
                    pairs.into_iter().filter(|(f, t)| f != t).collect();
                let mut steps = vec![MovieStep::R1Add {
                    edge: kept,
                    sign,
                    side,
                }];
                if !pairs.is_empty() {
                    steps.push(MovieStep::Relabel { pairs });
                }
                variants.push(steps);
            }
            try_variants(variants)
        }
        MovieStep::R1PrimeAdd { edge } => {
            let mid = if before.ends(*edge).is_some() {
                max_edge(before) + 2
            } else {
                *edge
            };
            Ok(vec![MovieStep::R1PrimeRemove { mid }])
        }
        MovieStep::R1PrimeRemove { .. } | MovieStep::MarkSlide { .. } => {
            // reconstructed by search over the simple candidates
            let variants: Vec<Vec<MovieStep>> = match step {
                MovieStep::R1PrimeRemove { mid } => {
                    let ends = before.ends(*mid).unwrap();
                    let (k1, k2) = (ends.tail.0, ends.head.0);
                    let (l1, l2) = (curl_loop(before, k1)?, curl_loop(before, k2)?);
                    let strand = |k: usize, lit: EdgeId, inward: bool| {
                        let q = before.crossings[k];
                        (0..4)
                            .map(|s| q[s])
                            .find(|&e| {
                                e != lit
                                    && e != *mid
                                    && (0..4).any(|s| {
                                        q[s] == e && before.points_in(k, s) == inward
                                    })
                            })
                            .unwrap_or(*mid)
                    };
                    let e_in = strand(k1, l1, true);
                    let e_out = strand(k2, l2, false);
                    let kept = survivor_of(after, &[e_in, *mid]);
                    let m = max_edge(after);
                    // fresh ids differ by host shape: arc hosts split off a
                    // continuation edge, loop hosts reuse the host
                    let arc: Vec<(EdgeId, EdgeId)> =
                        vec![(m + 1, l1), (m + 2, *mid), (m + 3, l2), (m + 4, e_out)];
                    let lp: Vec<(EdgeId, EdgeId)> =
                        vec![(m + 1, l2), (m + 2, l1), (m + 3, *mid)];
                    [arc, lp]
                        .into_iter()
                        .map(|pairs| {
                            let pairs: Vec<(EdgeId, EdgeId)> =
                                pairs.into_iter().filter(|(f, t)| f != t).collect();
                            let mut steps = vec![MovieStep::R1PrimeAdd { edge: kept }];
                            if !pairs.is_empty() {
                                steps.push(MovieStep::Relabel { pairs });
                            }
                            steps
                        })
                        .collect()
                }
                MovieStep::MarkSlide { toward_head, .. } => {
                    // the mark is now on the continuation edge
                    let moved: Vec<EdgeId> = after
                        .marks
                        .iter()
                        .map(|m| m.edge)
                        .filter(|e| {
                            after.marks.iter().filter(|m| m.edge == *e).count()
                                != before.marks.iter().filter(|m| m.edge == *e).count()
                        })
                        .collect();
                    moved
                        .into_iter()
                        .map(|e| {
                            vec![MovieStep::MarkSlide {
                                edge: e,
                                toward_head: !toward_head,
                            }]
                        })
                        .collect()
                }
                _ => unreachable!(),
            };
            try_variants(variants)
        }
        MovieStep::MarkToCurl { .. } => Ok(vec![MovieStep::CurlToMark {
            crossing: before.n_crossings(),
        }]),
        MovieStep::CurlToMark { crossing } => {
            let little = curl_loop(before, *crossing)?;
            let sign = before.sign(*crossing);
            let q = before.crossings[*crossing];
            let mut e_in = 0;
            for s in 0..4 {
                if q[s] != little && before.points_in(*crossing, s) {
                    e_in = q[s];
                }
            }
            let kept = survivor_of(after, &[e_in]);
            Ok(vec![MovieStep::MarkToCurl { edge: kept, sign }])
        }
        MovieStep::MarkCreatePair { edge, .. } => {
            Ok(vec![MovieStep::MarkAnnihilatePair { edge: *edge }])
        }
        MovieStep::MarkAnnihilatePair { edge } => {
            let on_e: Vec<&Mark> = before.marks.iter().filter(|m| m.edge == *edge).collect();
            let at = on_e
                .windows(2)
                .position(|w| w[0].sign == -w[1].sign)
                .unwrap();
            let (a, b) = (on_e[at], on_e[at + 1]);
            let (pp, pm) = if a.sign > 0 {
                (a.pos.clone(), b.pos.clone())
            } else {
                (b.pos.clone(), a.pos.clone())
            };
            Ok(vec![MovieStep::MarkCreatePair {
                edge: *edge,
                pos_plus: pp,
                pos_minus: pm,
            }])
        }
        MovieStep::Relabel { pairs } => Ok(vec![MovieStep::Relabel {
            pairs: pairs.iter().map(|&(f, t)| (t, f)).collect(),
        }]),
    }
}

/// The id a fused group of edges survives under.
fn survivor_of(after: &Diagram, members: &[EdgeId]) -> EdgeId {
    for &e in members {
        if after.component_of(e).is_some() {
            return e;
        }
    }
    members[0]
}

// ---------------------------------------------------------------- ledgers

/// Framing bookkeeping along a movie.
#[derive(Clone, Debug)]
pub struct FramingReport {
    /// Total framing number (writhe + twist, plus linking terms) per still.
    pub per_still: Vec<i64>,
    /// Whether all stills agree.
    pub constant: bool,
    /// Whether the first and last stills agree.
    pub start_end_agree: bool,
    /// Indices of steps that are bare first Reidemeister moves.
    pub bare_r1_steps: Vec<usize>,
}

/// Check a movie for framed-isotopy bookkeeping: the framing number of
/// every still, and which steps break framing.
pub fn framed_validate(movie: &Movie) -> Result<FramingReport> {
    let stills = movie.stills()?;
    let per_still: Vec<i64> = stills.iter().map(|d| d.framing_coefficient().1).collect();
    let bare_r1_steps: Vec<usize> = movie
        .steps
        .iter()
        .enumerate()
        .filter(|(_, s)| s.breaks_framing())
        .map(|(i, _)| i)
        .collect();
    let constant = per_still.windows(2).all(|w| w[0] == w[1]);
    let start_end_agree = per_still.first() == per_still.last();
    Ok(FramingReport {
        per_still,
        constant,
        start_end_agree,
        bare_r1_steps,
    })
}

/// The surface a movie traces out.
#[derive(Clone, Debug)]
pub struct SurfaceTrace {
    pub chi: i64,
    /// Connected components of the surface.
    pub n_components: usize,
    /// Does every component touch the first still?
    pub all_touch_start: bool,
    /// Does every component touch the first or the last still?
    pub closed_components: usize,
}

/// Trace the surface swept by a movie: its Euler characteristic and how
/// its connected components meet the boundary.
pub fn surface_trace(movie: &Movie) -> Result<SurfaceTrace> {
    let mut stills = vec![movie.start.clone()];
    let mut chi = 0i64;
    // union-find over (still, component)
    let mut nodes: Vec<(usize, usize)> = (0..movie.start.n_components())
        .map(|c| (0, c))
        .collect();
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    let mut index: BTreeMap<(usize, usize), usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, &n)| (n, i))
        .collect();
    for (si, step) in movie.steps.iter().enumerate() {
        let before = stills.last().unwrap().clone();
        let out = apply_step(&before, step)?;
        chi += out.chi;
        let after = out.diagram;
        for c in 0..after.n_components() {
            let i = nodes.len();
            nodes.push((si + 1, c));
            parent.push(i);
            index.insert((si + 1, c), i);
        }
        let link = |cb: usize, ca: usize, parent: &mut Vec<usize>| {
            let i = index[&(si, cb)];
            let j = index[&(si + 1, ca)];
            let (ri, rj) = (find(parent, i), find(parent, j));
            if ri != rj {
                parent[ri] = rj;
            }
        };
        for e in after.edge_ids().collect::<Vec<_>>() {
            if let (Some(cb), Some(ca)) = (before.component_of(e), after.component_of(e)) {
                link(cb, ca, &mut parent);
            }
        }
        for &(old, new) in &out.aliases {
            if let (Some(cb), Some(ca)) = (before.component_of(old), after.component_of(new)) {
                link(cb, ca, &mut parent);
            }
        }
        stills.push(after);
    }
    let last = stills.len() - 1;
    let mut comps: BTreeMap<usize, (bool, bool)> = BTreeMap::new();
    for (i, &(si, _)) in nodes.iter().enumerate() {
        let r = find(&mut parent, i);
        let entry = comps.entry(r).or_insert((false, false));
        if si == 0 {
            entry.0 = true;
        }
        if si == last {
            entry.1 = true;
        }
    }
    let n_components = comps.len();
    let all_touch_start = comps.values().all(|&(s, _)| s);
    let closed_components = comps.values().filter(|&&(s, e)| !s && !e).count();
    Ok(SurfaceTrace {
        chi,
        n_components,
        all_touch_start,
        closed_components,
    })
}

// ------------------------------------------------------- marks and curls

/// Trade every mark for a curl of the same sign, one `MarkToCurl` step per
/// mark. The framing number of each still is unchanged.
pub fn marked_to_curls(d: &Diagram) -> Result<Movie> {
    let mut movie = Movie::new(d.clone());
    let mut cur = d.clone();
    while let Some(mk) = cur.marks.first().cloned() {
        let step = MovieStep::MarkToCurl {
            edge: mk.edge,
            sign: mk.sign,
        };
        cur = apply_step(&cur, &step)?.diagram;
        movie.steps.push(step);
    }
    Ok(movie)
}

/// Rewrite a movie so no step is a framed first Reidemeister move: each
/// `R1PrimeAdd` becomes a mark pair fed through `MarkToCurl`, and each
/// `R1PrimeRemove` goes back through marks.
pub fn curls_to_marks(movie: &Movie) -> Result<Movie> {
    let stills = movie.stills()?;
    let mut steps = Vec::new();
    for (i, step) in movie.steps.iter().enumerate() {
        match step {
            MovieStep::R1PrimeAdd { edge } => {
                let third = BigRational::new(1.into(), 3.into());
                let two_thirds = BigRational::new(2.into(), 3.into());
                steps.push(MovieStep::MarkCreatePair {
                    edge: *edge,
                    pos_plus: third,
                    pos_minus: two_thirds,
                });
                steps.push(MovieStep::MarkToCurl {
                    edge: *edge,
                    sign: 1,
                });
                // the minus mark moved to the continuation segment
                let cont = if stills[i].ends(*edge).is_some() {
                    max_edge(&stills[i]) + 2
                } else {
                    *edge
                };
                steps.push(MovieStep::MarkToCurl {
                    edge: cont,
                    sign: -1,
                });
            }
            MovieStep::R1PrimeRemove { mid } => {
                let ends = stills[i].ends(*mid).unwrap();
                let (k1, k2) = (ends.tail.0, ends.head.0);
                // tail-side first, mirroring the removal order
                steps.push(MovieStep::CurlToMark { crossing: k1 });
                let mid_d = apply_step(&stills[i], &MovieStep::CurlToMark { crossing: k1 })?;
                let l2 = curl_loop(&stills[i], k2)?;
                let k2_new = (0..mid_d.diagram.n_crossings())
                    .find(|&k| curl_loop(&mid_d.diagram, k).ok() == Some(l2))
                    .ok_or_else(|| Error::Movie("lost track of the paired curl".into()))?;
                steps.push(MovieStep::CurlToMark { crossing: k2_new });
                let after2 = apply_step(&mid_d.diagram, &MovieStep::CurlToMark { crossing: k2_new })?;
                // both marks now sit on the fused edge
                let marked: Vec<EdgeId> = after2
                    .diagram
                    .marks
                    .iter()
                    .map(|m| m.edge)
                    .collect();
                steps.push(MovieStep::MarkAnnihilatePair { edge: marked[0] });
            }
            other => steps.push(other.clone()),
        }
    }
    Ok(Movie {
        start: movie.start.clone(),
        steps,
    })
}

// ---------------------------------------------------------- text format

fn sign_str(s: i8) -> &'static str {
    if s > 0 {
        "+"
    } else {
        "-"
    }
}

fn side_str(s: Side) -> &'static str {
    match s {
        Side::L => "L",
        Side::R => "R",
    }
}

impl fmt::Display for MovieStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MovieStep::Cup { host, cw, color } => {
                write!(f, "CUP")?;
                if let Some((h, s)) = host {
                    write!(f, " e{h} {}", side_str(*s))?;
                }
                if *cw {
                    write!(f, " cw")?;
                }
                if *color != 1 {
                    write!(f, " c{color}")?;
                }
                Ok(())
            }
            MovieStep::Cap { edge } => write!(f, "CAP e{edge}"),
            MovieStep::Saddle { a, b, side } => {
                if a == b {
                    write!(f, "SADDLE e{a}")?;
                } else {
                    write!(f, "SADDLE e{a} e{b}")?;
                }
                if let Some(s) = side {
                    write!(f, " {}", side_str(*s))?;
                }
                Ok(())
            }
            MovieStep::R2Add { over, under, side } => {
                write!(f, "R2+ e{over} e{under}")?;
                if let Some(s) = side {
                    write!(f, " {}", side_str(*s))?;
                }
                Ok(())
            }
            MovieStep::R2Remove { mid_over } => write!(f, "R2- e{mid_over}"),
            MovieStep::R3 { edges } => {
                write!(f, "R3 e{} e{} e{}", edges[0], edges[1], edges[2])
            }
            MovieStep::R1Add { edge, sign, side } => {
                write!(f, "R1{} e{edge}", sign_str(*sign))?;
                if *side != Side::L {
                    write!(f, " {}", side_str(*side))?;
                }
                Ok(())
            }
            MovieStep::R1Remove { crossing } => write!(f, "UNR1 x{crossing}"),
            MovieStep::R1PrimeAdd { edge } => write!(f, "R1' e{edge}"),
            MovieStep::R1PrimeRemove { mid } => write!(f, "UNR1' e{mid}"),
            MovieStep::MarkToCurl { edge, sign } => {
                write!(f, "MR1{} e{edge}", sign_str(*sign))
            }
            MovieStep::CurlToMark { crossing } => write!(f, "UNMR1 x{crossing}"),
            MovieStep::MarkCreatePair {
                edge,
                pos_plus,
                pos_minus,
            } => write!(f, "MARKPAIR e{edge} {pos_plus} {pos_minus}"),
            MovieStep::MarkAnnihilatePair { edge } => write!(f, "UNMARKPAIR e{edge}"),
            MovieStep::MarkSlide { edge, toward_head } => {
                write!(f, "MARKSLIDE e{edge}")?;
                if !toward_head {
                    write!(f, " back")?;
                }
                Ok(())
            }
            MovieStep::Relabel { pairs } => {
                write!(f, "RELABEL")?;
                for (a, b) in pairs {
                    write!(f, " {a}>{b}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_edge(tok: &str) -> Result<EdgeId> {
    tok.strip_prefix('e')
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse(format!("expected an edge like e3, got {tok}")))
}

fn parse_crossing(tok: &str) -> Result<usize> {
    tok.strip_prefix('x')
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse(format!("expected a crossing like x2, got {tok}")))
}

fn parse_side(tok: &str) -> Result<Side> {
    match tok {
        "L" => Ok(Side::L),
        "R" => Ok(Side::R),
        _ => Err(Error::Parse(format!("expected L or R, got {tok}"))),
    }
}

pub fn parse_step(line: &str) -> Result<MovieStep> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.is_empty() {
        return Err(Error::Parse("empty movie step".into()));
    }
    let rest = &toks[1..];
    let step = match toks[0] {
        "CUP" => {
            let mut host = None;
            let mut cw = false;
            let mut color = 1;
            let mut i = 0;
            if i + 1 < rest.len() && rest[i].starts_with('e') {
                host = Some((parse_edge(rest[i])?, parse_side(rest[i + 1])?));
                i += 2;
            }
            while i < rest.len() {
                if rest[i] == "cw" {
                    cw = true;
                } else if let Some(c) = rest[i].strip_prefix('c') {
                    color = c
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad color {}", rest[i])))?;
                } else {
                    return Err(Error::Parse(format!("unexpected token {}", rest[i])));
                }
                i += 1;
            }
            MovieStep::Cup { host, cw, color }
        }
        "CAP" => MovieStep::Cap {
            edge: parse_edge(one(rest)?)?,
        },
        "SADDLE" => match rest {
            [a] => {
                let e = parse_edge(a)?;
                MovieStep::Saddle {
                    a: e,
                    b: e,
                    side: None,
                }
            }
            [a, s] if !s.starts_with('e') => {
                let e = parse_edge(a)?;
                MovieStep::Saddle {
                    a: e,
                    b: e,
                    side: Some(parse_side(s)?),
                }
            }
            [a, b] => MovieStep::Saddle {
                a: parse_edge(a)?,
                b: parse_edge(b)?,
                side: None,
            },
            [a, b, s] => MovieStep::Saddle {
                a: parse_edge(a)?,
                b: parse_edge(b)?,
                side: Some(parse_side(s)?),
            },
            _ => return Err(Error::Parse(format!("bad saddle: {line}"))),
        },
        "R2+" => match rest {
            [a, b] => MovieStep::R2Add {
                over: parse_edge(a)?,
                under: parse_edge(b)?,
                side: None,
            },
            [a, b, s] => MovieStep::R2Add {
                over: parse_edge(a)?,
                under: parse_edge(b)?,
                side: Some(parse_side(s)?),
            },
            _ => return Err(Error::Parse(format!("bad R2+: {line}"))),
        },
        "R2-" => MovieStep::R2Remove {
            mid_over: parse_edge(one(rest)?)?,
        },
        "R3" => match rest {
            [a, b, c] => MovieStep::R3 {
                edges: [parse_edge(a)?, parse_edge(b)?, parse_edge(c)?],
            },
            _ => return Err(Error::Parse(format!("bad R3: {line}"))),
        },
        "R1+" | "R1-" => {
            let sign = if toks[0] == "R1+" { 1 } else { -1 };
            match rest {
                [e] => MovieStep::R1Add {
                    edge: parse_edge(e)?,
                    sign,
                    side: Side::L,
                },
                [e, s] => MovieStep::R1Add {
                    edge: parse_edge(e)?,
                    sign,
                    side: parse_side(s)?,
                },
                _ => return Err(Error::Parse(format!("bad R1: {line}"))),
            }
        }
        "UNR1" => MovieStep::R1Remove {
            crossing: parse_crossing(one(rest)?)?,
        },
        "R1'" => MovieStep::R1PrimeAdd {
            edge: parse_edge(one(rest)?)?,
        },
        "UNR1'" => MovieStep::R1PrimeRemove {
            mid: parse_edge(one(rest)?)?,
        },
        "MR1+" | "MR1-" => MovieStep::MarkToCurl {
            edge: parse_edge(one(rest)?)?,
            sign: if toks[0] == "MR1+" { 1 } else { -1 },
        },
        "UNMR1" => MovieStep::CurlToMark {
            crossing: parse_crossing(one(rest)?)?,
        },
        "MARKPAIR" => match rest {
            [e, p, q] => MovieStep::MarkCreatePair {
                edge: parse_edge(e)?,
                pos_plus: parse_rational(p)
                    .ok_or_else(|| Error::Parse(format!("bad position {p}")))?,
                pos_minus: parse_rational(q)
                    .ok_or_else(|| Error::Parse(format!("bad position {q}")))?,
            },
            _ => return Err(Error::Parse(format!("bad MARKPAIR: {line}"))),
        },
        "UNMARKPAIR" => MovieStep::MarkAnnihilatePair {
            edge: parse_edge(one(rest)?)?,
        },
        "MARKSLIDE" => match rest {
            [e] => MovieStep::MarkSlide {
                edge: parse_edge(e)?,
                toward_head: true,
            },
            [e, b] if *b == "back" => MovieStep::MarkSlide {
                edge: parse_edge(e)?,
                toward_head: false,
            },
            _ => return Err(Error::Parse(format!("bad MARKSLIDE: {line}"))),
        },
        "RELABEL" => {
            let mut pairs = Vec::new();
            for tok in rest {
                let (a, b) = tok
                    .split_once('>')
                    .ok_or_else(|| Error::Parse(format!("bad relabel pair {tok}")))?;
                pairs.push((
                    a.parse()
                        .map_err(|_| Error::Parse(format!("bad edge {a}")))?,
                    b.parse()
                        .map_err(|_| Error::Parse(format!("bad edge {b}")))?,
                ));
            }
            MovieStep::Relabel { pairs }
        }
        other => return Err(Error::Parse(format!("unknown movie step {other}"))),
    };
    Ok(step)
}

fn one<'a>(rest: &[&'a str]) -> Result<&'a str> {
    if rest.len() == 1 {
        Ok(rest[0])
    } else {
        Err(Error::Parse("expected exactly one argument".into()))
    }
}

impl fmt::Display for Movie {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        writeln!(f, "---")?;
        for step in &self.steps {
            writeln!(f, "{step}")?;
        }
        Ok(())
    }
}

pub fn parse_movie(text: &str) -> Result<Movie> {
    let mut head = String::new();
    let mut steps = Vec::new();
    let mut seen_sep = false;
    for line in text.lines() {
        let t = line.trim();
        if t == "---" {
            seen_sep = true;
            continue;
        }
        if !seen_sep {
            head.push_str(line);
            head.push('\n');
        } else if !t.is_empty() {
            steps.push(parse_step(t)?);
        }
    }
    if !seen_sep {
        return Err(Error::Parse("movie has no --- separator".into()));
    }
    Ok(Movie {
        start: crate::diagram::from_pd(&head)?,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::from_pd;

    fn unlink2() -> Diagram {
        Diagram::new(
            vec![],
            vec![
                FreeLoop { edge: 1, ccw: true },
                FreeLoop { edge: 2, ccw: true },
            ],
            vec![],
            BTreeMap::new(),
            vec![],
            None,
        )
        .unwrap()
    }

    #[test]
    fn saddle_merges_two_circles_into_one() {
        let out = apply_saddle(&unlink2(), 1, 2, None).unwrap();
        assert_eq!(out.diagram, Diagram::unknot());
        assert_eq!(out.chi, -1);
    }

    #[test]
    fn pinch_splits_a_circle() {
        // through the interior: two lobes side by side (the sibling
        // placement is redundant and normalizes away)
        let out = apply_pinch(&Diagram::unknot(), 1, Side::L).unwrap();
        assert_eq!(out.diagram.n_components(), 2);
        assert_eq!(
            out.diagram.loops,
            vec![
                FreeLoop { edge: 1, ccw: true },
                FreeLoop { edge: 2, ccw: true },
            ]
        );
        assert_eq!(out.diagram.placements, vec![]);
        // against the exterior: nested, inner lobe reversed
        let out = apply_pinch(&Diagram::unknot(), 1, Side::R).unwrap();
        assert_eq!(
            out.diagram.loops,
            vec![
                FreeLoop { edge: 1, ccw: true },
                FreeLoop { edge: 2, ccw: false },
            ]
        );
        assert_eq!(
            out.diagram.placements,
            vec![Placement {
                edge: 2,
                host: 1,
                side: Side::L
            }]
        );
    }

    #[test]
    fn saddle_then_pinch_roundtrips_components() {
        let merged = apply_saddle(&unlink2(), 1, 2, None).unwrap().diagram;
        let split = apply_pinch(&merged, 1, Side::L).unwrap().diagram;
        assert_eq!(split.n_components(), 2);
    }

    #[test]
    fn incoherent_saddle_is_rejected() {
        // nested same-sense circles: the annulus between them sees the two
        // arcs run the same way, so the band is disallowed...
        let d = Diagram::new(
            vec![],
            vec![
                FreeLoop { edge: 1, ccw: true },
                FreeLoop { edge: 2, ccw: true },
            ],
            vec![],
            BTreeMap::new(),
            vec![Placement {
                edge: 2,
                host: 1,
                side: Side::L,
            }],
            None,
        )
        .unwrap();
        assert!(apply_saddle(&d, 1, 2, None).is_err());
        // ...while side-by-side same-sense circles merge fine
        assert!(apply_saddle(&unlink2(), 1, 2, None).is_ok());
    }

    #[test]
    fn r2_add_then_remove_restores_the_unlink() {
        let d = unlink2();
        let pushed = apply_r2add(&d, 1, 2, None).unwrap().diagram;
        assert_eq!(pushed.n_crossings(), 2);
        assert_eq!(pushed.sign(0) + pushed.sign(1), 0);
        assert_eq!(pushed.n_components(), 2);
        let back = apply_r2remove(&pushed, 3).unwrap().diagram;
        assert_eq!(back, d);
    }

    #[test]
    fn self_r2_on_the_unknot_roundtrips() {
        let d = Diagram::unknot();
        let pushed = apply_r2add(&d, 1, 1, Some(Side::L)).unwrap().diagram;
        assert_eq!(pushed.n_crossings(), 2);
        assert_eq!(pushed.n_components(), 1);
        assert_eq!(pushed.writhe(), 0);
        let back = apply_r2remove(&pushed, 2).unwrap().diagram;
        assert_eq!(back, d);
        // and through the other side
        let pushed = apply_r2add(&d, 1, 1, Some(Side::R)).unwrap().diagram;
        let back = apply_r2remove(&pushed, 2).unwrap().diagram;
        assert_eq!(back, d);
    }

    #[test]
    fn r1_add_then_remove_restores_the_unknot() {
        for sign in [1, -1] {
            for side in [Side::L, Side::R] {
                let curled = apply_r1add(&Diagram::unknot(), 1, sign, side)
                    .unwrap()
                    .diagram;
                assert_eq!(curled.n_crossings(), 1);
                assert_eq!(curled.writhe(), i64::from(sign));
                let back = apply_r1remove(&curled, 0).unwrap().diagram;
                assert_eq!(back, Diagram::unknot());
            }
        }
    }

    #[test]
    fn r1_on_an_arc_roundtrips() {
        // a curl on one edge of an existing kink
        let kink = from_pd("X(1,1,2,2)").unwrap();
        for sign in [1, -1] {
            let curled = apply_r1add(&kink, 2, sign, Side::L).unwrap().diagram;
            assert_eq!(curled.n_crossings(), 2);
            assert_eq!(curled.writhe(), 1 + i64::from(sign));
            let back = apply_r1remove(&curled, 1).unwrap().diagram;
            assert_eq!(back, kink);
        }
    }

    #[test]
    fn r1_prime_adds_and_cancels_opposite_curls() {
        let out = apply_r1prime_add(&Diagram::unknot(), 1).unwrap().diagram;
        assert_eq!(out.n_crossings(), 2);
        assert_eq!(out.writhe(), 0);
        assert_eq!(out.framing_coefficient().1, 0);
        // the segment between the curls
        let mid = 4;
        let back = apply_r1prime_remove(&out, mid).unwrap().diagram;
        assert_eq!(back, Diagram::unknot());
    }

    #[test]
    fn marks_trade_for_curls_preserving_framing() {
        let mut d = Diagram::unknot();
        d = apply_mark_pair(
            &d,
            1,
            &BigRational::new(1.into(), 4.into()),
            &BigRational::new(3.into(), 4.into()),
        )
        .unwrap()
        .diagram;
        assert_eq!(d.framing_coefficient().1, 0);
        let movie = marked_to_curls(&d).unwrap();
        let end = movie.end().unwrap();
        assert!(end.marks.is_empty());
        assert_eq!(end.n_crossings(), 2);
        assert_eq!(end.framing_coefficient().1, 0);
        for still in movie.stills().unwrap() {
            assert_eq!(still.framing_coefficient().1, 0);
        }
    }

    #[test]
    fn curl_to_mark_undoes_mark_to_curl() {
        let mut d = Diagram::unknot();
        d = apply_mark_pair(
            &d,
            1,
            &BigRational::new(1.into(), 4.into()),
            &BigRational::new(3.into(), 4.into()),
        )
        .unwrap()
        .diagram;
        let curled = apply_mark_to_curl(&d, 1, 1).unwrap().diagram;
        assert_eq!(curled.n_crossings(), 1);
        assert_eq!(curled.marks.len(), 1);
        let back = apply_curl_to_mark(&curled, 0).unwrap().diagram;
        assert!(eq_mod_mark_pos(&back, &d));
    }

    #[test]
    fn mark_slide_crosses_a_crossing() {
        let kink = from_pd("X(1,1,2,2)").unwrap();
        let marked = apply_mark_pair(
            &kink,
            2,
            &BigRational::new(1.into(), 4.into()),
            &BigRational::new(3.into(), 4.into()),
        )
        .unwrap()
        .diagram;
        let slid = apply_mark_slide(&marked, 2, true).unwrap().diagram;
        // the head of edge 2 feeds the crossing; the strand continues as 1
        assert_eq!(
            slid.marks.iter().filter(|m| m.edge == 1).count(),
            1
        );
        let back = apply_mark_slide(&slid, 1, false).unwrap().diagram;
        assert!(eq_mod_mark_pos(&back, &marked));
        assert_eq!(marked.framing_coefficient(), slid.framing_coefficient());
    }

    #[test]
    fn r3_flips_a_triangle_and_is_an_involution() {
        // a braid closure with an R3 triangle
        let d = crate::diagram::from_braid("s1 s2 s1", 3).unwrap();
        // locate a triangular face: try all triples of crossing-bounded faces
        let mut flipped = None;
        let ids: Vec<EdgeId> = d.edge_ids().collect();
        'search: for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                for k in j + 1..ids.len() {
                    if let Ok(out) = apply_r3(&d, [ids[i], ids[j], ids[k]]) {
                        flipped = Some((out.diagram, [ids[i], ids[j], ids[k]]));
                        break 'search;
                    }
                }
            }
        }
        let (flipped, tri) = flipped.expect("the braid closure of s1 s2 s1 has a triangle");
        assert_eq!(flipped.n_crossings(), 3);
        assert_eq!(flipped.writhe(), d.writhe());
        assert_ne!(flipped, d);
        let back = apply_r3(&flipped, tri).unwrap().diagram;
        assert_eq!(back, d);
    }

    #[test]
    fn relabel_renames_consistently() {
        let d = from_pd("X(1,1,2,2)").unwrap();
        let out = apply_relabel(&d, &[(1, 5), (2, 1)]).unwrap().diagram;
        assert_eq!(out.crossings, vec![[5, 5, 1, 1]]);
        let back = apply_relabel(&out, &[(5, 1), (1, 2)]).unwrap().diagram;
        assert_eq!(back, d);
    }

    #[test]
    fn movie_text_roundtrips() {
        let movie = Movie::new(unlink2())
            .then(MovieStep::R2Add {
                over: 1,
                under: 2,
                side: None,
            })
            .then(MovieStep::R2Remove { mid_over: 3 })
            .then(MovieStep::Saddle {
                a: 1,
                b: 2,
                side: None,
            })
            .then(MovieStep::R1PrimeAdd { edge: 1 })
            .then(MovieStep::MarkCreatePair {
                edge: 1,
                pos_plus: BigRational::new(1.into(), 4.into()),
                pos_minus: BigRational::new(1.into(), 2.into()),
            })
            .then(MovieStep::MarkSlide {
                edge: 1,
                toward_head: true,
            })
            .then(MovieStep::Relabel {
                pairs: vec![(1, 9)],
            });
        movie.stills().expect("the steps compose");
        let text = movie.to_string();
        let parsed = parse_movie(&text).unwrap();
        assert_eq!(parsed, movie);
        assert_eq!(parsed.to_string(), text);
    }

    #[test]
    fn reversal_undoes_each_step() {
        let movie = Movie::new(unlink2())
            .then(MovieStep::R2Add {
                over: 1,
                under: 2,
                side: None,
            })
            .then(MovieStep::R2Remove { mid_over: 3 })
            .then(MovieStep::Saddle {
                a: 1,
                b: 2,
                side: None,
            })
            .then(MovieStep::cup())
            .then(MovieStep::Cap { edge: 2 });
        let rev = movie.reversed().unwrap();
        assert_eq!(rev.end().unwrap(), movie.start);
    }

    #[test]
    fn framing_ledger_flags_bare_curls() {
        let movie = Movie::new(Diagram::unknot())
            .then(MovieStep::R1PrimeAdd { edge: 1 })
            .then(MovieStep::R1Add {
                edge: 1,
                sign: 1,
                side: Side::L,
            });
        let report = framed_validate(&movie).unwrap();
        assert_eq!(report.per_still, vec![0, 0, 1]);
        assert!(!report.constant);
        assert!(!report.start_end_agree);
        assert_eq!(report.bare_r1_steps, vec![1]);

        let framed = Movie::new(Diagram::unknot()).then(MovieStep::R1PrimeAdd { edge: 1 });
        let report = framed_validate(&framed).unwrap();
        assert!(report.constant);
        assert!(report.bare_r1_steps.is_empty());
    }

    #[test]
    fn surface_trace_counts_components_and_euler() {
        // a sphere: born and capped, never touching the start
        let sphere = Movie::new(Diagram::empty())
            .then(MovieStep::cup())
            .then(MovieStep::Cap { edge: 1 });
        let tr = surface_trace(&sphere).unwrap();
        assert_eq!(tr.chi, 2);
        assert_eq!(tr.n_components, 1);
        assert!(!tr.all_touch_start);
        assert_eq!(tr.closed_components, 1);

        // a pair of pants from the 2-unlink to the unknot
        let pants = Movie::new(unlink2()).then(MovieStep::Saddle {
            a: 1,
            b: 2,
            side: None,
        });
        let tr = surface_trace(&pants).unwrap();
        assert_eq!(tr.chi, -1);
        assert_eq!(tr.n_components, 1);
        assert!(tr.all_touch_start);

        // a torus hanging off nothing: cup, pinch, merge, cap
        let torus = Movie::new(Diagram::empty())
            .then(MovieStep::cup())
            .then(MovieStep::Saddle {
                a: 1,
                b: 1,
                side: None,
            })
            .then(MovieStep::Saddle {
                a: 1,
                b: 2,
                side: None,
            })
            .then(MovieStep::Cap { edge: 1 });
        let tr = surface_trace(&torus).unwrap();
        assert_eq!(tr.chi, 0);
        assert_eq!(tr.n_components, 1);
    }

    #[test]
    fn curls_to_marks_eliminates_framed_r1_steps() {
        let movie = Movie::new(Diagram::unknot()).then(MovieStep::R1PrimeAdd { edge: 1 });
        let rewritten = curls_to_marks(&movie).unwrap();
        assert!(rewritten
            .steps
            .iter()
            .all(|s| !matches!(s, MovieStep::R1PrimeAdd { .. })));
        assert_eq!(rewritten.end().unwrap(), movie.end().unwrap());
        for still in rewritten.stills().unwrap() {
            assert_eq!(still.framing_coefficient().1, 0);
        }
    }
}
