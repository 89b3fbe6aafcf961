//! Oriented link diagrams: PD codes, free loops, framing marks, colorings.
//!
//! A crossing is the quadruple of edge ids met counterclockwise starting at
//! the incoming under-strand. Orientations are not stored; they are derived
//! by propagating the under-in/under-out directions through the over-strands
//! and around the components. The sign of a crossing is +1 exactly when the
//! over-strand runs from the fourth slot to the second.
//!
//! PD codes cannot say where split pieces sit in the plane, so the text
//! format adds a few clauses:
//!
//!   X(1,4,2,5)            crossing
//!   X(1,4,2,5,+)          crossing with its sign declared; needed only
//!                         when some component never goes under
//!   O(7)                  crossingless circle, counterclockwise
//!   O(8,cw)               clockwise circle
//!   M(3,1/4,+)            framing mark on edge 3, a quarter along, sign +
//!   C(2,3)                component 2 carries color 3
//!   IN 7 2 L              the piece holding edge 7 sits in the face left
//!                         of edge 2 (which must be in another piece)
//!   OUTER 1 R             the unbounded face is the one right of edge 1
//!
//! Components are numbered from 1 in order of their smallest edge id.
//! Defaults: pieces side by side in the unbounded face, color 1 everywhere.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type EdgeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    L,
    R,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::L => Side::R,
            Side::R => Side::L,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::L => "L",
            Side::R => "R",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeLoop {
    pub edge: EdgeId,
    pub ccw: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mark {
    pub edge: EdgeId,
    pub pos: BigRational,
    pub sign: i8,
}

/// "the piece containing `edge` lies in the face on `side` of `host`"
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    pub edge: EdgeId,
    pub host: EdgeId,
    pub side: Side,
}

/// Where each edge starts and ends: (crossing index, slot index).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeEnds {
    pub tail: (usize, usize),
    pub head: (usize, usize),
}

#[derive(Clone, Debug)]
pub struct Diagram {
    pub crossings: Vec<[EdgeId; 4]>,
    /// Signs given by the author rather than derived; they seed and are
    /// checked against the orientation propagation.
    declared: Vec<Option<i8>>,
    pub loops: Vec<FreeLoop>,
    pub marks: Vec<Mark>,
    /// component index -> color, only entries != 1
    pub colors: BTreeMap<usize, u32>,
    pub placements: Vec<Placement>,
    pub outer: Option<(EdgeId, Side)>,
    // derived
    signs: Vec<i8>,
    /// per crossing slot: does the edge point into the crossing here
    heads: Vec<[bool; 4]>,
    ends: BTreeMap<EdgeId, EdgeEnds>,
    comp_of: BTreeMap<EdgeId, usize>,
    n_components: usize,
    piece_of: BTreeMap<EdgeId, usize>,
    n_pieces: usize,
}

impl PartialEq for Diagram {
    fn eq(&self, other: &Self) -> bool {
        self.crossings == other.crossings
            && self.loops == other.loops
            && self.marks == other.marks
            && self.colors == other.colors
            && self.placements == other.placements
            && self.outer == other.outer
    }
}
impl Eq for Diagram {}

impl Diagram {
    pub fn new(
        crossings: Vec<[EdgeId; 4]>,
        loops: Vec<FreeLoop>,
        marks: Vec<Mark>,
        colors: BTreeMap<usize, u32>,
        placements: Vec<Placement>,
        outer: Option<(EdgeId, Side)>,
    ) -> Result<Diagram> {
        Self::with_declared_signs(crossings, Vec::new(), loops, marks, colors, placements, outer)
    }

    /// Like `new`, with author-declared crossing signs (None = derive). A
    /// component that never goes under cannot be oriented from the PD code
    /// alone; declaring the signs of the crossings it passes over resolves
    /// the ambiguity.
    pub fn with_declared_signs(
        crossings: Vec<[EdgeId; 4]>,
        declared: Vec<Option<i8>>,
        loops: Vec<FreeLoop>,
        marks: Vec<Mark>,
        colors: BTreeMap<usize, u32>,
        placements: Vec<Placement>,
        outer: Option<(EdgeId, Side)>,
    ) -> Result<Diagram> {
        let mut declared = declared;
        if declared.is_empty() {
            declared = vec![None; crossings.len()];
        }
        if declared.len() != crossings.len() {
            return Err(Error::Diagram(format!(
                "{} declared signs for {} crossings",
                declared.len(),
                crossings.len()
            )));
        }
        if let Some(s) = declared.iter().flatten().find(|s| s.abs() != 1) {
            return Err(Error::Diagram(format!("declared sign {s} is not ±1")));
        }
        let mut loops = loops;
        loops.sort_by_key(|l| l.edge);
        let mut marks = marks;
        marks.sort_by(|a, b| (a.edge, &a.pos).cmp(&(b.edge, &b.pos)));
        let mut d = Diagram {
            crossings,
            declared,
            loops,
            marks,
            colors,
            placements,
            outer,
            signs: Vec::new(),
            heads: Vec::new(),
            ends: BTreeMap::new(),
            comp_of: BTreeMap::new(),
            n_components: 0,
            piece_of: BTreeMap::new(),
            n_pieces: 0,
        };
        d.derive()?;
        crate::embed::check_planar(&d)?;
        Ok(d)
    }

    pub fn empty() -> Diagram {
        Diagram::new(vec![], vec![], vec![], BTreeMap::new(), vec![], None).unwrap()
    }

    /// A crossingless round unknot, counterclockwise.
    pub fn unknot() -> Diagram {
        Diagram::new(
            vec![],
            vec![FreeLoop { edge: 1, ccw: true }],
            vec![],
            BTreeMap::new(),
            vec![],
            None,
        )
        .unwrap()
    }

    fn derive(&mut self) -> Result<()> {
        let mut occ: BTreeMap<EdgeId, Vec<(usize, usize)>> = BTreeMap::new();
        for (k, x) in self.crossings.iter().enumerate() {
            for (s, &e) in x.iter().enumerate() {
                if e == 0 {
                    return Err(Error::Diagram("edge ids start at 1".into()));
                }
                occ.entry(e).or_default().push((k, s));
            }
        }
        for l in &self.loops {
            if l.edge == 0 {
                return Err(Error::Diagram("edge ids start at 1".into()));
            }
            if occ.contains_key(&l.edge) {
                return Err(Error::Diagram(format!(
                    "edge {} is both a free loop and a crossing edge",
                    l.edge
                )));
            }
        }
        let mut seen_loops = BTreeSet::new();
        for l in &self.loops {
            if !seen_loops.insert(l.edge) {
                return Err(Error::Diagram(format!("free loop {} repeated", l.edge)));
            }
        }
        for (&e, at) in &occ {
            if at.len() != 2 {
                return Err(Error::Diagram(format!(
                    "edge {e} appears {} times, want 2",
                    at.len()
                )));
            }
        }

        // orient: slot 0 points in, slot 2 points out; the two over slots
        // disagree with each other; an edge points in at exactly one end
        let mut head: BTreeMap<(usize, usize), bool> = BTreeMap::new();
        let mut queue: Vec<((usize, usize), bool)> = Vec::new();
        for k in 0..self.crossings.len() {
            queue.push(((k, 0), true));
            queue.push(((k, 2), false));
            // sign +1 means the over-strand runs from slot 3 to slot 1
            if let Some(s) = self.declared[k] {
                queue.push(((k, 3), s > 0));
            }
        }
        let other_occ = |e: EdgeId, at: (usize, usize)| -> (usize, usize) {
            let v = &occ[&e];
            if v[0] == at {
                v[1]
            } else {
                v[0]
            }
        };
        let assign = |o: (usize, usize),
                          val: bool,
                          head: &mut BTreeMap<(usize, usize), bool>,
                          queue: &mut Vec<((usize, usize), bool)>|
         -> Result<()> {
            if let Some(&old) = head.get(&o) {
                if old != val {
                    return Err(Error::Diagram(
                        "orientations cannot be made consistent".into(),
                    ));
                }
                return Ok(());
            }
            head.insert(o, val);
            let e = self.crossings[o.0][o.1];
            queue.push((other_occ(e, o), !val));
            if o.1 == 1 || o.1 == 3 {
                queue.push(((o.0, 4 - o.1), !val));
            }
            Ok(())
        };
        while let Some((o, val)) = queue.pop() {
            assign(o, val, &mut head, &mut queue)?;
        }
        for (k, _) in self.crossings.iter().enumerate() {
            if !head.contains_key(&(k, 1)) {
                return Err(Error::Diagram(format!(
                    "crossing {k}: over-strand direction undetermined (a component \
                     with no under-passage cannot be oriented from a bare PD code; \
                     declare the sign, X(a,b,c,d,+) or X(a,b,c,d,-))"
                )));
            }
        }

        self.heads = self
            .crossings
            .iter()
            .enumerate()
            .map(|(k, _)| [head[&(k, 0)], head[&(k, 1)], head[&(k, 2)], head[&(k, 3)]])
            .collect();
        self.signs = self
            .heads
            .iter()
            .map(|h| if h[3] { 1 } else { -1 })
            .collect();
        self.ends = occ
            .iter()
            .map(|(&e, at)| {
                let (x, y) = (at[0], at[1]);
                let ends = if head[&x] {
                    EdgeEnds { tail: y, head: x }
                } else {
                    EdgeEnds { tail: x, head: y }
                };
                (e, ends)
            })
            .collect();

        // strand components: through-traffic at each crossing
        let all_edges: Vec<EdgeId> = occ.keys().copied().chain(self.loops.iter().map(|l| l.edge)).collect();
        let mut comp_uf = Uf::new(&all_edges);
        let mut piece_uf = Uf::new(&all_edges);
        for x in &self.crossings {
            comp_uf.union(x[0], x[2]);
            comp_uf.union(x[1], x[3]);
            for s in 1..4 {
                piece_uf.union(x[0], x[s]);
            }
        }
        (self.comp_of, self.n_components) = comp_uf.numbered();
        (self.piece_of, self.n_pieces) = piece_uf.numbered();

        for m in &self.marks {
            if !self.ends.contains_key(&m.edge) && !self.loops.iter().any(|l| l.edge == m.edge) {
                return Err(Error::Diagram(format!("mark on unknown edge {}", m.edge)));
            }
            if m.pos <= BigRational::zero() || m.pos >= BigRational::one() {
                return Err(Error::Diagram("mark position must be strictly inside (0,1)".into()));
            }
            if m.sign != 1 && m.sign != -1 {
                return Err(Error::Diagram("mark sign must be +1 or -1".into()));
            }
        }
        for w in self.marks.windows(2) {
            if w[0].edge == w[1].edge && w[0].pos == w[1].pos {
                return Err(Error::Diagram(format!(
                    "two marks at the same point of edge {}",
                    w[0].edge
                )));
            }
        }
        for (&c, &n) in &self.colors {
            if c >= self.n_components {
                return Err(Error::Diagram(format!("color for missing component {}", c + 1)));
            }
            if n == 0 {
                return Err(Error::Diagram("colors are positive".into()));
            }
        }
        self.colors.retain(|_, &mut n| n != 1);

        // placements must form a forest over pieces
        let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
        for p in &self.placements {
            let (child, host) = match (self.piece_of.get(&p.edge), self.piece_of.get(&p.host)) {
                (Some(&a), Some(&b)) => (a, b),
                _ => return Err(Error::Diagram("placement names an unknown edge".into())),
            };
            if child == host {
                return Err(Error::Diagram("a piece cannot sit inside itself".into()));
            }
            if parent.insert(child, host).is_some() {
                return Err(Error::Diagram("piece placed twice".into()));
            }
        }
        for (&c, _) in &parent {
            let (mut at, mut steps) = (c, 0);
            while let Some(&up) = parent.get(&at) {
                at = up;
                steps += 1;
                if steps > parent.len() {
                    return Err(Error::Diagram("placement cycle".into()));
                }
            }
        }
        if let Some((e, _)) = self.outer {
            let piece = *self
                .piece_of
                .get(&e)
                .ok_or_else(|| Error::Diagram("OUTER names an unknown edge".into()))?;
            if parent.contains_key(&piece) {
                return Err(Error::Diagram("OUTER edge must lie in an unplaced piece".into()));
            }
        }
        Ok(())
    }

    pub fn n_crossings(&self) -> usize {
        self.crossings.len()
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn n_pieces(&self) -> usize {
        self.n_pieces
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.ends
            .keys()
            .copied()
            .chain(self.loops.iter().map(|l| l.edge))
    }

    pub fn n_edges(&self) -> usize {
        self.ends.len() + self.loops.len()
    }

    pub fn ends(&self, e: EdgeId) -> Option<EdgeEnds> {
        self.ends.get(&e).copied()
    }

    /// Does edge e point into crossing k at slot s.
    pub fn points_in(&self, k: usize, s: usize) -> bool {
        self.heads[k][s]
    }

    pub fn sign(&self, k: usize) -> i8 {
        self.signs[k]
    }

    pub fn declared_sign(&self, k: usize) -> Option<i8> {
        self.declared[k]
    }

    pub fn component_of(&self, e: EdgeId) -> Option<usize> {
        self.comp_of.get(&e).copied()
    }

    pub fn piece_of(&self, e: EdgeId) -> Option<usize> {
        self.piece_of.get(&e).copied()
    }

    pub fn color(&self, component: usize) -> u32 {
        self.colors.get(&component).copied().unwrap_or(1)
    }

    pub fn coloring(&self) -> Vec<u32> {
        (0..self.n_components).map(|c| self.color(c)).collect()
    }

    pub fn component_edges(&self, component: usize) -> Vec<EdgeId> {
        self.edge_ids()
            .filter(|&e| self.comp_of[&e] == component)
            .collect()
    }

    pub fn positive_crossings(&self) -> usize {
        self.signs.iter().filter(|&&s| s > 0).count()
    }

    pub fn negative_crossings(&self) -> usize {
        self.signs.iter().filter(|&&s| s < 0).count()
    }

    pub fn writhe(&self) -> i64 {
        self.signs.iter().map(|&s| s as i64).sum()
    }

    /// Crossing sign after reversing the marked components.
    pub fn sign_wrt(&self, k: usize, reversed: &[bool]) -> i8 {
        let (u, o) = self.strands_at(k);
        let mut s = self.signs[k];
        if reversed[u] {
            s = -s;
        }
        if reversed[o] {
            s = -s;
        }
        s
    }

    /// The smoothing respecting the given orientation: 0 where the crossing
    /// is positive with respect to it, 1 where negative.
    pub fn oriented_choice(&self, reversed: &[bool]) -> Vec<u8> {
        assert_eq!(reversed.len(), self.n_components);
        (0..self.crossings.len())
            .map(|k| if self.sign_wrt(k, reversed) > 0 { 0 } else { 1 })
            .collect()
    }

    /// Components of the two strands through crossing k: (under, over).
    pub fn strands_at(&self, k: usize) -> (usize, usize) {
        let x = self.crossings[k];
        (self.comp_of[&x[0]], self.comp_of[&x[1]])
    }

    pub fn self_writhe(&self, component: usize) -> i64 {
        (0..self.crossings.len())
            .filter(|&k| self.strands_at(k) == (component, component))
            .map(|k| self.signs[k] as i64)
            .sum()
    }

    /// Half the signed count of crossings between two distinct components.
    pub fn linking_number(&self, i: usize, j: usize) -> Result<i64> {
        if i == j {
            return Err(Error::Diagram("linking number needs two distinct components".into()));
        }
        if i >= self.n_components || j >= self.n_components {
            return Err(Error::Diagram("no such component".into()));
        }
        let sum: i64 = (0..self.crossings.len())
            .filter(|&k| {
                let (u, o) = self.strands_at(k);
                (u, o) == (i, j) || (u, o) == (j, i)
            })
            .map(|k| self.signs[k] as i64)
            .sum();
        debug_assert!(sum % 2 == 0);
        Ok(sum / 2)
    }

    pub fn twist(&self, component: usize) -> i64 {
        self.marks
            .iter()
            .filter(|m| self.comp_of[&m.edge] == component)
            .map(|m| m.sign as i64)
            .sum()
    }

    /// Per-component framing numbers (self-writhe + twist) and the total,
    /// which adds twice the pairwise linking numbers.
    pub fn framing_coefficient(&self) -> (Vec<i64>, i64) {
        let per: Vec<i64> = (0..self.n_components)
            .map(|c| self.self_writhe(c) + self.twist(c))
            .collect();
        let mut total: i64 = per.iter().sum();
        for i in 0..self.n_components {
            for j in 0..self.n_components {
                if i != j {
                    total += self.linking_number(i, j).unwrap();
                }
            }
        }
        (per, total)
    }

    /// Swap over and under everywhere (reflection through the page). A
    /// component that always went under now always goes over, so the mirror
    /// declares every crossing sign.
    pub fn mirror(&self) -> Diagram {
        let crossings = self
            .crossings
            .iter()
            .zip(&self.signs)
            .map(|(x, &s)| {
                if s > 0 {
                    [x[3], x[0], x[1], x[2]]
                } else {
                    [x[1], x[2], x[3], x[0]]
                }
            })
            .collect();
        let declared = self.signs.iter().map(|&s| Some(-s)).collect();
        Diagram::with_declared_signs(
            crossings,
            declared,
            self.loops.clone(),
            self.marks.clone(),
            self.colors.clone(),
            self.placements.clone(),
            self.outer,
        )
        .expect("mirror of a valid diagram is valid")
    }

    /// Reverse the orientation of one component.
    pub fn reverse_component(&self, component: usize) -> Result<Diagram> {
        if component >= self.n_components {
            return Err(Error::Diagram("no such component".into()));
        }
        let crossings = self
            .crossings
            .iter()
            .map(|x| {
                if self.comp_of[&x[0]] == component {
                    [x[2], x[3], x[0], x[1]]
                } else {
                    *x
                }
            })
            .collect();
        // the sign flips where exactly one of the two strands reverses
        let declared = self
            .crossings
            .iter()
            .zip(&self.declared)
            .map(|(x, d)| {
                let flips =
                    (self.comp_of[&x[0]] == component) != (self.comp_of[&x[1]] == component);
                d.map(|s| if flips { -s } else { s })
            })
            .collect();
        let loops = self
            .loops
            .iter()
            .map(|l| {
                if self.comp_of[&l.edge] == component {
                    FreeLoop { edge: l.edge, ccw: !l.ccw }
                } else {
                    l.clone()
                }
            })
            .collect();
        let marks = self
            .marks
            .iter()
            .map(|m| {
                if self.comp_of[&m.edge] == component {
                    Mark {
                        edge: m.edge,
                        pos: BigRational::one() - &m.pos,
                        sign: m.sign,
                    }
                } else {
                    m.clone()
                }
            })
            .collect();
        Diagram::with_declared_signs(
            crossings,
            declared,
            loops,
            marks,
            self.colors.clone(),
            self.placements.clone(),
            self.outer,
        )
    }

    /// Side-by-side union; the right diagram's edges are shifted past the
    /// left's. Component numbering keeps left components first.
    pub fn disjoint_union(&self, other: &Diagram) -> Diagram {
        let shift = self.edge_ids().max().unwrap_or(0);
        let f = |e: EdgeId| e + shift;
        let mut crossings = self.crossings.clone();
        crossings.extend(other.crossings.iter().map(|x| x.map(f)));
        let mut declared = self.declared.clone();
        declared.extend(&other.declared);
        let mut loops = self.loops.clone();
        loops.extend(other.loops.iter().map(|l| FreeLoop { edge: f(l.edge), ccw: l.ccw }));
        let mut marks = self.marks.clone();
        marks.extend(other.marks.iter().map(|m| Mark {
            edge: f(m.edge),
            pos: m.pos.clone(),
            sign: m.sign,
        }));
        let mut colors = self.colors.clone();
        colors.extend(other.colors.iter().map(|(&c, &n)| (c + self.n_components, n)));
        let mut placements = self.placements.clone();
        placements.extend(other.placements.iter().map(|p| Placement {
            edge: f(p.edge),
            host: f(p.host),
            side: p.side,
        }));
        Diagram::with_declared_signs(crossings, declared, loops, marks, colors, placements, self.outer)
            .expect("union of valid diagrams is valid")
    }

    /// Replace all colors.
    pub fn with_colors(&self, colors: &[u32]) -> Result<Diagram> {
        if colors.len() != self.n_components {
            return Err(Error::Diagram(format!(
                "{} colors for {} components",
                colors.len(),
                self.n_components
            )));
        }
        let map = colors
            .iter()
            .enumerate()
            .map(|(c, &n)| (c, n))
            .collect();
        Diagram::with_declared_signs(
            self.crossings.clone(),
            self.declared.clone(),
            self.loops.clone(),
            self.marks.clone(),
            map,
            self.placements.clone(),
            self.outer,
        )
    }

    /// The total smoothing at a vertex of the cube: choice[k] is 0 or 1.
    /// 0 joins slots (0,1) and (2,3); 1 joins (0,3) and (1,2).
    pub fn resolve(&self, choice: &[u8]) -> Resolution {
        assert_eq!(choice.len(), self.crossings.len());
        let all: Vec<EdgeId> = self.edge_ids().collect();
        let mut uf = Uf::new(&all);
        for (x, &c) in self.crossings.iter().zip(choice) {
            if c == 0 {
                uf.union(x[0], x[1]);
                uf.union(x[2], x[3]);
            } else {
                uf.union(x[0], x[3]);
                uf.union(x[1], x[2]);
            }
        }
        let (circle_of, n) = uf.numbered();
        let mut circles = vec![Vec::new(); n];
        for (&e, &c) in &circle_of {
            circles[c].push(e);
        }
        Resolution { circles, circle_of }
    }
}

/// Circles of a total smoothing, numbered by least edge id.
#[derive(Clone, Debug)]
pub struct Resolution {
    pub circles: Vec<Vec<EdgeId>>,
    pub circle_of: BTreeMap<EdgeId, usize>,
}

impl Resolution {
    pub fn len(&self) -> usize {
        self.circles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circles.is_empty()
    }
}

/// Edge-keyed union-find that numbers its classes by least member.
pub(crate) struct Uf {
    parent: BTreeMap<EdgeId, EdgeId>,
}

impl Uf {
    pub(crate) fn new(keys: &[EdgeId]) -> Uf {
        Uf {
            parent: keys.iter().map(|&k| (k, k)).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: EdgeId) -> EdgeId {
        while self.parent[&x] != x {
            let up = self.parent[&self.parent[&x]];
            self.parent.insert(x, up);
            x = up;
        }
        x
    }

    pub(crate) fn union(&mut self, a: EdgeId, b: EdgeId) {
        let (ra, rb) = (self.find(a), self.find(b));
        // keep the smaller id as the root so classes sort by least edge
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent.insert(hi, lo);
    }

    /// (member -> class index, class count), classes ordered by least member.
    pub(crate) fn numbered(&mut self) -> (BTreeMap<EdgeId, usize>, usize) {
        let keys: Vec<EdgeId> = self.parent.keys().copied().collect();
        let mut roots = BTreeSet::new();
        for &k in &keys {
            let r = self.find(k);
            roots.insert(r);
        }
        let index: BTreeMap<EdgeId, usize> =
            roots.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let map = keys.iter().map(|&k| (k, index[&self.find(k)])).collect();
        (map, index.len())
    }
}

// ---------------------------------------------------------------- text form

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (x, d) in self.crossings.iter().zip(&self.declared) {
            match d {
                None => writeln!(f, "X({},{},{},{})", x[0], x[1], x[2], x[3])?,
                Some(s) => {
                    let s = if *s > 0 { '+' } else { '-' };
                    writeln!(f, "X({},{},{},{},{})", x[0], x[1], x[2], x[3], s)?;
                }
            }
        }
        for l in &self.loops {
            if l.ccw {
                writeln!(f, "O({})", l.edge)?;
            } else {
                writeln!(f, "O({},cw)", l.edge)?;
            }
        }
        for m in &self.marks {
            let s = if m.sign > 0 { '+' } else { '-' };
            writeln!(f, "M({},{}/{},{})", m.edge, m.pos.numer(), m.pos.denom(), s)?;
        }
        for (&c, &n) in &self.colors {
            writeln!(f, "C({},{})", c + 1, n)?;
        }
        for p in &self.placements {
            writeln!(f, "IN {} {} {}", p.edge, p.host, p.side)?;
        }
        if let Some((e, s)) = self.outer {
            writeln!(f, "OUTER {e} {s}")?;
        }
        Ok(())
    }
}

pub fn print_pd(d: &Diagram) -> String {
    d.to_string()
}

pub fn from_pd(text: &str) -> Result<Diagram> {
    let mut crossings = Vec::new();
    let mut declared = Vec::new();
    let mut loops = Vec::new();
    let mut marks = Vec::new();
    let mut colors_raw: Vec<(usize, u32)> = Vec::new();
    let mut placements = Vec::new();
    let mut outer = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| Error::Parse(format!("line {}: {msg}: {line}", lineno + 1));
        if let Some(body) = strip_call(line, "X") {
            let parts = split_args(body);
            if parts.len() != 4 && parts.len() != 5 {
                return Err(err("X takes four edges and an optional sign"));
            }
            let mut q = [0usize; 4];
            for (i, p) in parts.iter().take(4).enumerate() {
                q[i] = parse_edge(p).ok_or_else(|| err("bad edge id"))?;
            }
            let sign = match parts.get(4).map(String::as_str) {
                None => None,
                Some("+") | Some("+1") => Some(1),
                Some("-") | Some("-1") => Some(-1),
                Some(_) => return Err(err("crossing sign must be + or -")),
            };
            crossings.push(q);
            declared.push(sign);
        } else if let Some(body) = strip_call(line, "O") {
            let parts = split_args(body);
            let (edge, ccw) = match parts.as_slice() {
                [e] => (e.as_str(), true),
                [e, dir] if dir == "ccw" => (e.as_str(), true),
                [e, dir] if dir == "cw" => (e.as_str(), false),
                _ => return Err(err("O takes an edge and optional cw/ccw")),
            };
            let edge = parse_edge(edge).ok_or_else(|| err("bad edge id"))?;
            loops.push(FreeLoop { edge, ccw });
        } else if let Some(body) = strip_call(line, "M") {
            let parts = split_args(body);
            if parts.len() != 3 {
                return Err(err("M takes edge, position, sign"));
            }
            let edge = parse_edge(&parts[0]).ok_or_else(|| err("bad edge id"))?;
            let pos = parse_rational(&parts[1]).ok_or_else(|| err("bad position"))?;
            let sign = match parts[2].as_str() {
                "+" | "+1" => 1,
                "-" | "-1" => -1,
                _ => return Err(err("mark sign must be + or -")),
            };
            marks.push(Mark { edge, pos, sign });
        } else if let Some(body) = strip_call(line, "C") {
            let parts = split_args(body);
            if parts.len() != 2 {
                return Err(err("C takes component, color"));
            }
            let comp: usize = parts[0].parse().map_err(|_| err("bad component"))?;
            if comp == 0 {
                return Err(err("components are numbered from 1"));
            }
            let n: u32 = parts[1].parse().map_err(|_| err("bad color"))?;
            colors_raw.push((comp - 1, n));
        } else if let Some(rest) = line.strip_prefix("IN ") {
            let w: Vec<&str> = rest.split_whitespace().collect();
            if w.len() != 3 {
                return Err(err("IN takes edge, host edge, side"));
            }
            let edge = parse_edge(w[0]).ok_or_else(|| err("bad edge id"))?;
            let host = parse_edge(w[1]).ok_or_else(|| err("bad edge id"))?;
            let side = parse_side(w[2]).ok_or_else(|| err("side must be L or R"))?;
            placements.push(Placement { edge, host, side });
        } else if let Some(rest) = line.strip_prefix("OUTER ") {
            let w: Vec<&str> = rest.split_whitespace().collect();
            if w.len() != 2 {
                return Err(err("OUTER takes edge, side"));
            }
            let edge = parse_edge(w[0]).ok_or_else(|| err("bad edge id"))?;
            let side = parse_side(w[1]).ok_or_else(|| err("side must be L or R"))?;
            if outer.replace((edge, side)).is_some() {
                return Err(err("OUTER given twice"));
            }
        } else {
            return Err(err("unrecognized line"));
        }
    }
    let mut colors = BTreeMap::new();
    for (c, n) in colors_raw {
        if colors.insert(c, n).is_some() {
            return Err(Error::Parse(format!("component {} colored twice", c + 1)));
        }
    }
    Diagram::with_declared_signs(crossings, declared, loops, marks, colors, placements, outer)
}

fn strip_call<'a>(line: &'a str, name: &str) -> Option<&'a str> {
    let rest = line.strip_prefix(name)?;
    let rest = rest.trim_start();
    let rest = rest.strip_prefix('(')?;
    rest.strip_suffix(')')
}

fn split_args(body: &str) -> Vec<String> {
    body.split(',').map(|s| s.trim().to_string()).collect()
}

fn parse_edge(s: &str) -> Option<EdgeId> {
    let e: usize = s.parse().ok()?;
    if e == 0 {
        None
    } else {
        Some(e)
    }
}

fn parse_side(s: &str) -> Option<Side> {
    match s {
        "L" => Some(Side::L),
        "R" => Some(Side::R),
        _ => None,
    }
}

/// `p/q`, an integer, or a finite decimal; always exact.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let whole = whole.trim();
        let neg = whole.starts_with('-');
        let digits = whole.trim_start_matches(['-', '+']);
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let w: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().ok()?
        };
        let num: BigInt = frac.parse().ok()?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let val = BigRational::from(w) + BigRational::new(num, den);
        return Some(if neg { -val } else { val });
    }
    let n: BigInt = s.parse().ok()?;
    Some(BigRational::from(n))
}

// ------------------------------------------------------------------- braids

/// Closure of a braid word like `s1 s2^-1 s1^3` on the given strand count.
/// A positive generator makes positive crossings in the closure.
pub fn from_braid(word: &str, strands: usize) -> Result<Diagram> {
    if strands == 0 {
        return Err(Error::Parse("braid needs at least one strand".into()));
    }
    let mut letters: Vec<(usize, bool)> = Vec::new();
    for tok in word.split_whitespace() {
        let body = tok
            .strip_prefix('s')
            .ok_or_else(|| Error::Parse(format!("bad braid letter {tok}")))?;
        let (i_str, exp) = match body.split_once('^') {
            Some((i, e)) => {
                let e: i64 = e
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent in {tok}")))?;
                (i, e)
            }
            None => (body, 1),
        };
        let i: usize = i_str
            .parse()
            .map_err(|_| Error::Parse(format!("bad braid letter {tok}")))?;
        if i == 0 || i + 1 > strands {
            return Err(Error::Parse(format!(
                "generator s{i} needs strands {i} and {}",
                i + 1
            )));
        }
        if exp == 0 {
            continue;
        }
        for _ in 0..exp.unsigned_abs() {
            letters.push((i - 1, exp > 0));
        }
    }

    let mut next_id = 1;
    let mut fresh = || {
        next_id += 1;
        next_id - 1
    };
    let initial: Vec<EdgeId> = (0..strands).map(|_| fresh()).collect();
    let mut at = initial.clone();
    let mut crossings: Vec<[EdgeId; 4]> = Vec::new();
    let mut declared: Vec<Option<i8>> = Vec::new();
    for (i, positive) in letters {
        let (u, v) = (at[i], at[i + 1]);
        let (x, y) = (fresh(), fresh());
        // strands run downward; u enters from the upper left, v from the
        // upper right, x leaves lower left, y lower right
        if positive {
            crossings.push([u, x, y, v]);
        } else {
            crossings.push([v, u, x, y]);
        }
        // words like s1 s1^-1 close up with a strand that never goes
        // under, so carry the signs explicitly
        declared.push(Some(if positive { 1 } else { -1 }));
        at[i] = x;
        at[i + 1] = y;
    }

    // close up: the edge leaving the bottom of each position is the edge
    // entering its top
    let rename: BTreeMap<EdgeId, EdgeId> = at
        .iter()
        .zip(&initial)
        .filter(|(f, i)| f != i)
        .map(|(&f, &i)| (f, i))
        .collect();
    let mut loops = Vec::new();
    for (f, i) in at.iter().zip(&initial) {
        if f == i {
            loops.push(FreeLoop { edge: *i, ccw: true });
        }
    }
    for x in &mut crossings {
        for e in x.iter_mut() {
            if let Some(&r) = rename.get(e) {
                *e = r;
            }
        }
    }
    Diagram::with_declared_signs(crossings, declared, loops, vec![], BTreeMap::new(), vec![], None)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn right_trefoil() -> Diagram {
        from_braid("s1 s1 s1", 2).unwrap()
    }

    #[test]
    fn kinks_have_the_advertised_signs() {
        let neg = from_pd("X(1,2,2,1)").unwrap();
        assert_eq!(neg.n_crossings(), 1);
        assert_eq!(neg.n_components(), 1);
        assert_eq!(neg.writhe(), -1);

        let pos = from_pd("X(1,1,2,2)").unwrap();
        assert_eq!(pos.writhe(), 1);
        assert_eq!(pos.mirror().writhe(), -1);
    }

    #[test]
    fn braid_closures() {
        let t = right_trefoil();
        assert_eq!(t.n_crossings(), 3);
        assert_eq!(t.n_components(), 1);
        assert_eq!(t.writhe(), 3);
        assert_eq!(t.mirror().writhe(), -3);

        let hopf = from_braid("s1^2", 2).unwrap();
        assert_eq!(hopf.n_components(), 2);
        assert_eq!(hopf.writhe(), 2);
        assert_eq!(hopf.linking_number(0, 1).unwrap(), 1);
        let rev = hopf.reverse_component(1).unwrap();
        assert_eq!(rev.linking_number(0, 1).unwrap(), -1);

        // an untouched strand closes to a free loop
        let d = from_braid("s1", 3).unwrap();
        assert_eq!(d.n_components(), 2);
        assert_eq!(d.loops.len(), 1);

        let empty = from_pd("").unwrap();
        assert_eq!(empty.n_components(), 0);
    }

    #[test]
    fn framing_bookkeeping() {
        let t = right_trefoil();
        assert_eq!(t.framing_coefficient(), (vec![3], 3));

        let marked = from_pd("O(1)\nM(1,1/4,+)\nM(1,3/4,-)").unwrap();
        assert_eq!(marked.framing_coefficient(), (vec![0], 0));

        let hopf = from_braid("s1 s1", 2).unwrap();
        assert_eq!(hopf.framing_coefficient(), (vec![0, 0], 2));
    }

    #[test]
    fn round_trip_is_exact() {
        let text = "X(2,1,1,2)\nO(5)\nO(6,cw)\nM(1,1/3,+)\nC(2,3)\nIN 5 1 L\nOUTER 2 R\n";
        let d = from_pd(text).unwrap();
        assert_eq!(print_pd(&d), text);
        assert_eq!(from_pd(&print_pd(&d)).unwrap(), d);

        // decimals parse exactly and print as fractions
        let m = from_pd("O(1)\nM(1,0.25,+)").unwrap();
        assert_eq!(print_pd(&m), "O(1)\nM(1,1/4,+)\n");

        // declared signs survive the round trip
        let k = from_pd("X(1,1,2,2,+)").unwrap();
        assert_eq!(print_pd(&k), "X(1,1,2,2,+)\n");
        assert_eq!(k.sign(0), 1);
    }

    #[test]
    fn declared_signs_orient_pure_over_components() {
        // closing s1 s1^-1 leaves one strand passing over everything; the
        // braid constructor declares crossing signs so this still orients
        let d = from_braid("s1 s1^-1", 2).unwrap();
        assert_eq!(d.n_components(), 2);
        assert_eq!(d.sign(0), 1);
        assert_eq!(d.sign(1), -1);
        assert_eq!(d.writhe(), 0);
        assert_eq!(d.linking_number(0, 1).unwrap(), 0);
        assert_eq!(from_pd(&print_pd(&d)).unwrap(), d);

        // same code without the declarations cannot be oriented
        let bare = print_pd(&d).replace(",+", "").replace(",-", "");
        assert!(from_pd(&bare).is_err());

        // reversing the under-strand component flips both signs
        let rev = d.reverse_component(0).unwrap();
        assert_eq!(rev.sign(0), -1);
        assert_eq!(rev.sign(1), 1);

        // mirrors of sign-declared diagrams flip every sign
        let m = d.mirror();
        assert_eq!(m.sign(0), -1);
        assert_eq!(m.sign(1), 1);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(from_pd("X(1,2,3)").is_err());
        assert!(from_pd("X(1,2,3,4)").is_err()); // dangling edges
        assert!(from_pd("X(1,2,1,2)").is_err()); // not planar
        // consistent counts, impossible orientations
        assert!(from_pd("X(1,2,3,4)\nX(2,1,3,4)").is_err());
        assert!(from_pd("O(1)\nM(1,0,+)").is_err());
        assert!(from_pd("O(1)\nC(2,2)").is_err());
        assert!(from_pd("O(1)\nO(2)\nIN 1 1 L").is_err());
        assert!(from_braid("s2", 2).is_err());
        // a declared sign contradicting the strands is caught
        assert!(from_pd("X(1,1,2,2,-)").is_err());
        assert!(from_pd("X(1,1,2,2,*)").is_err());
    }

    #[test]
    fn unions_and_reversals_compose() {
        let t = right_trefoil();
        let u = Diagram::unknot();
        let both = t.disjoint_union(&u);
        assert_eq!(both.n_components(), 2);
        assert_eq!(both.n_pieces(), 2);
        assert_eq!(both.writhe(), 3);
        assert_eq!(both.linking_number(0, 1).unwrap(), 0);
        assert_eq!(both.framing_coefficient(), (vec![3, 0], 3));
        assert_eq!(from_pd(&print_pd(&both)).unwrap(), both);
    }

    #[test]
    fn resolutions_of_the_trefoil_count_circles() {
        // all-0 gives 2 circles, each single flip gives 1, and so on up to
        // the all-1 Seifert state with 3 (the braid closure orientation)
        let t = right_trefoil();
        let sizes: Vec<usize> = (0..8u8)
            .map(|v| t.resolve(&[(v & 1), (v >> 1) & 1, (v >> 2) & 1]).len())
            .collect();
        let by_weight: Vec<Vec<usize>> = (0..=3)
            .map(|w| {
                (0..8u8)
                    .filter(|v| v.count_ones() == w)
                    .map(|v| sizes[v as usize])
                    .collect()
            })
            .collect();
        assert_eq!(by_weight[0], vec![2]);
        assert_eq!(by_weight[1], vec![1, 1, 1]);
        assert_eq!(by_weight[2], vec![2, 2, 2]);
        assert_eq!(by_weight[3], vec![3]);

        let m = t.mirror();
        let sizes: Vec<usize> = (0..8u8)
            .map(|v| m.resolve(&[(v & 1), (v >> 1) & 1, (v >> 2) & 1]).len())
            .collect();
        assert_eq!(sizes[0], 3);
        assert_eq!(sizes[7], 2);
    }
}
