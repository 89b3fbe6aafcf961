//! The geometry a PD code determines: faces of the 4-valent graph, the
//! region map with its chessboard coloring, and nesting data for the
//! circles of a smoothing.
//!
//! Slots of a crossing are in counterclockwise order, which is a rotation
//! system; faces are traced with the region kept on the left of each
//! directed edge. Split pieces are merged into one plane via the diagram's
//! placement clauses (side by side in the unbounded face by default).
//!
//! Smoothing a crossing deletes the vertex and merges two opposite corner
//! regions into a channel; the other two corners survive and become
//! adjacent to the channel across the new arcs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::diagram::{Diagram, EdgeId, Resolution, Side};
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct Dart {
    edge: EdgeId,
    fwd: bool,
}

struct Faces {
    orbit_of: BTreeMap<Dart, usize>,
    n_orbits: usize,
}

fn out_dart(d: &Diagram, k: usize, s: usize) -> Dart {
    let edge = d.crossings[k][s];
    Dart { edge, fwd: !d.points_in(k, s) }
}

fn next_dart(d: &Diagram, x: Dart) -> Dart {
    match d.ends(x.edge) {
        None => x, // free loop: each side is a whole face
        Some(ends) => {
            let rev_leaves = if x.fwd { ends.head } else { ends.tail };
            let (k, s) = rev_leaves;
            out_dart(d, k, (s + 3) % 4)
        }
    }
}

fn faces(d: &Diagram) -> Faces {
    let mut all: Vec<Dart> = Vec::new();
    for edge in d.edge_ids() {
        all.push(Dart { edge, fwd: false });
        all.push(Dart { edge, fwd: true });
    }
    all.sort();
    let mut orbit_of = BTreeMap::new();
    let mut n = 0;
    for &d0 in &all {
        if orbit_of.contains_key(&d0) {
            continue;
        }
        let mut x = d0;
        loop {
            orbit_of.insert(x, n);
            x = next_dart(d, x);
            if x == d0 {
                break;
            }
        }
        n += 1;
    }
    Faces { orbit_of, n_orbits: n }
}

/// Per-piece Euler check; the only way a consistent-looking PD code can
/// fail to describe a diagram in the plane.
pub(crate) fn check_planar(d: &Diagram) -> Result<()> {
    let f = faces(d);
    let n_p = d.n_pieces();
    let mut v = vec![0i64; n_p];
    let mut e = vec![0i64; n_p];
    let mut fc: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n_p];
    for k in 0..d.n_crossings() {
        v[d.piece_of(d.crossings[k][0]).unwrap()] += 1;
    }
    for edge in d.edge_ids() {
        let p = d.piece_of(edge).unwrap();
        if d.ends(edge).is_some() {
            e[p] += 1;
        }
        fc[p].insert(f.orbit_of[&Dart { edge, fwd: true }]);
        fc[p].insert(f.orbit_of[&Dart { edge, fwd: false }]);
    }
    for p in 0..n_p {
        if v[p] == 0 {
            continue;
        }
        if v[p] - e[p] + fc[p].len() as i64 != 2 {
            return Err(Error::Diagram("PD code is not planar".into()));
        }
    }
    Ok(())
}

/// The corner region between slots s and s+1 of crossing k.
fn corner(d: &Diagram, f: &Faces, k: usize, s: usize) -> usize {
    let t = (s + 1) % 4;
    let edge = d.crossings[k][t];
    f.orbit_of[&Dart { edge, fwd: d.points_in(k, t) }]
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
    }
}

struct Merged {
    region_of_orbit: Vec<usize>,
    n_regions: usize,
    outer: usize,
}

impl Merged {
    fn region(&self, f: &Faces, x: Dart) -> usize {
        self.region_of_orbit[f.orbit_of[&x]]
    }
}

/// Glue the per-piece face structures into one plane, optionally smoothing
/// every crossing per `choice`.
fn merge_pieces(d: &Diagram, f: &Faces, choice: Option<&[u8]>) -> Result<Merged> {
    if f.n_orbits == 0 {
        return Ok(Merged { region_of_orbit: vec![], n_regions: 1, outer: 0 });
    }
    let n_p = d.n_pieces();
    let mut outer_orbit: Vec<Option<usize>> = vec![None; n_p];
    if let Some((e, side)) = d.outer {
        let x = Dart { edge: e, fwd: side == Side::L };
        outer_orbit[d.piece_of(e).unwrap()] = Some(f.orbit_of[&x]);
    }
    for l in &d.loops {
        let p = d.piece_of(l.edge).unwrap();
        if outer_orbit[p].is_none() {
            // the left of a counterclockwise loop is its inside
            let x = Dart { edge: l.edge, fwd: !l.ccw };
            outer_orbit[p] = Some(f.orbit_of[&x]);
        }
    }
    let mut min_edge: BTreeMap<usize, EdgeId> = BTreeMap::new();
    for edge in d.edge_ids() {
        let p = d.piece_of(edge).unwrap();
        let m = min_edge.entry(p).or_insert(edge);
        if edge < *m {
            *m = edge;
        }
    }
    for p in 0..n_p {
        if outer_orbit[p].is_none() {
            let x = Dart { edge: min_edge[&p], fwd: true };
            outer_orbit[p] = Some(f.orbit_of[&x]);
        }
    }
    let outer_orbit: Vec<usize> = outer_orbit.into_iter().map(|o| o.unwrap()).collect();

    let mut sets = DisjointSets::new(f.n_orbits);
    let placed: BTreeSet<usize> = d
        .placements
        .iter()
        .map(|p| d.piece_of(p.edge).unwrap())
        .collect();
    let roots: Vec<usize> = (0..n_p).filter(|p| !placed.contains(p)).collect();
    for w in roots.windows(2) {
        sets.union(outer_orbit[w[0]], outer_orbit[w[1]]);
    }
    for p in &d.placements {
        let child = d.piece_of(p.edge).unwrap();
        let host = Dart { edge: p.host, fwd: p.side == Side::L };
        sets.union(outer_orbit[child], f.orbit_of[&host]);
    }
    if let Some(choice) = choice {
        for k in 0..d.n_crossings() {
            if choice[k] == 0 {
                sets.union(corner(d, f, k, 1), corner(d, f, k, 3));
            } else {
                sets.union(corner(d, f, k, 0), corner(d, f, k, 2));
            }
        }
    }

    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    for o in 0..f.n_orbits {
        let r = sets.find(o);
        let n = index.len();
        index.entry(r).or_insert(n);
    }
    let region_of_orbit: Vec<usize> = (0..f.n_orbits).map(|o| index[&sets.find(o)]).collect();
    let n_regions = index.len();
    let outer_piece = match d.outer {
        Some((e, _)) => d.piece_of(e).unwrap(),
        None => roots[0],
    };
    let outer = region_of_orbit[outer_orbit[outer_piece]];
    Ok(Merged { region_of_orbit, n_regions, outer })
}

/// Distance from the unbounded region, counting strand crossings. Errors if
/// any adjacency fails the chessboard property.
fn region_depths(d: &Diagram, f: &Faces, m: &Merged, choice: Option<&[u8]>) -> Result<Vec<usize>> {
    let mut adj: Vec<(usize, usize)> = Vec::new();
    for edge in d.edge_ids() {
        let l = m.region(f, Dart { edge, fwd: true });
        let r = m.region(f, Dart { edge, fwd: false });
        adj.push((l, r));
    }
    if let Some(choice) = choice {
        for k in 0..d.n_crossings() {
            let c: Vec<usize> = (0..4)
                .map(|s| m.region_of_orbit[corner(d, f, k, s)])
                .collect();
            if choice[k] == 0 {
                adj.push((c[0], c[1]));
                adj.push((c[2], c[1]));
            } else {
                adj.push((c[1], c[0]));
                adj.push((c[3], c[0]));
            }
        }
    }
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); m.n_regions];
    for &(a, b) in &adj {
        nbrs[a].push(b);
        nbrs[b].push(a);
    }
    let mut depth = vec![usize::MAX; m.n_regions];
    depth[m.outer] = 0;
    let mut q = VecDeque::from([m.outer]);
    while let Some(r) = q.pop_front() {
        for &s in &nbrs[r] {
            if depth[s] == usize::MAX {
                depth[s] = depth[r] + 1;
                q.push_back(s);
            }
        }
    }
    if depth.iter().any(|&x| x == usize::MAX) {
        return Err(Error::Diagram("region structure is disconnected".into()));
    }
    for &(a, b) in &adj {
        if depth[a].abs_diff(depth[b]) != 1 {
            return Err(Error::Diagram("chessboard coloring failed".into()));
        }
    }
    Ok(depth)
}

/// Faces of the diagram with the chessboard coloring: the unbounded region
/// is white, regions across one strand alternate.
#[derive(Clone, Debug)]
pub struct RegionMap {
    pub n_regions: usize,
    pub outer: usize,
    pub depth: Vec<usize>,
    pub black: Vec<bool>,
    sides: BTreeMap<EdgeId, (usize, usize)>,
}

impl RegionMap {
    /// Regions (left, right) of the directed edge.
    pub fn side_regions(&self, edge: EdgeId) -> Option<(usize, usize)> {
        self.sides.get(&edge).copied()
    }

    pub fn region(&self, edge: EdgeId, side: Side) -> Option<usize> {
        let (l, r) = self.side_regions(edge)?;
        Some(match side {
            Side::L => l,
            Side::R => r,
        })
    }

    pub fn sigma_region(&self, region: usize) -> i8 {
        if self.black[region] {
            1
        } else {
            -1
        }
    }
}

pub fn region_map(d: &Diagram) -> Result<RegionMap> {
    let f = faces(d);
    let m = merge_pieces(d, &f, None)?;
    if f.n_orbits == 0 {
        return Ok(RegionMap {
            n_regions: 1,
            outer: 0,
            depth: vec![0],
            black: vec![false],
            sides: BTreeMap::new(),
        });
    }
    let depth = region_depths(d, &f, &m, None)?;
    let black = depth.iter().map(|&x| x % 2 == 1).collect();
    let sides = d
        .edge_ids()
        .map(|edge| {
            let l = m.region(&f, Dart { edge, fwd: true });
            let r = m.region(&f, Dart { edge, fwd: false });
            (edge, (l, r))
        })
        .collect();
    Ok(RegionMap {
        n_regions: m.n_regions,
        outer: m.outer,
        depth,
        black,
        sides,
    })
}

/// +1 on the black side, -1 on the white.
pub fn sigma(d: &Diagram, edge: EdgeId, side: Side) -> Result<i8> {
    let rm = region_map(d)?;
    let r = rm
        .region(edge, side)
        .ok_or_else(|| Error::Diagram(format!("no edge {edge}")))?;
    Ok(rm.sigma_region(r))
}

/// Nesting depth and rotation sense of each circle of a smoothing, for an
/// orientation given by the set of reversed components.
#[derive(Clone, Debug)]
pub struct CircleGeometry {
    pub depth: Vec<usize>,
    pub ccw: Vec<bool>,
}

pub fn circle_geometry(
    d: &Diagram,
    choice: &[u8],
    res: &Resolution,
    reversed: &[bool],
) -> Result<CircleGeometry> {
    let f = faces(d);
    let m = merge_pieces(d, &f, Some(choice))?;
    let depths = region_depths(d, &f, &m, Some(choice))?;
    let mut depth = Vec::with_capacity(res.len());
    let mut ccw = Vec::with_capacity(res.len());
    for circle in &res.circles {
        let edge = circle[0];
        let comp = d.component_of(edge).unwrap();
        let travel = !reversed[comp];
        let dl = depths[m.region(&f, Dart { edge, fwd: travel })];
        let dr = depths[m.region(&f, Dart { edge, fwd: !travel })];
        debug_assert_eq!(dl.abs_diff(dr), 1);
        depth.push(dl.min(dr));
        ccw.push(dl > dr);
    }
    Ok(CircleGeometry { depth, ccw })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{from_braid, from_pd};

    #[test]
    fn unknot_regions_and_sigma() {
        let d = Diagram::unknot();
        let rm = region_map(&d).unwrap();
        assert_eq!(rm.n_regions, 2);
        assert_eq!(rm.depth[rm.outer], 0);
        assert!(!rm.black[rm.outer]);
        assert_eq!(sigma(&d, 1, Side::L).unwrap(), 1);
        assert_eq!(sigma(&d, 1, Side::R).unwrap(), -1);
    }

    #[test]
    fn small_diagrams_have_the_right_region_counts() {
        let kink = from_pd("X(1,1,2,2)").unwrap();
        let rm = region_map(&kink).unwrap();
        assert_eq!(rm.n_regions, 3);
        let mut ds = rm.depth.clone();
        ds.sort_unstable();
        assert_eq!(ds, vec![0, 1, 1]);

        let t = from_braid("s1 s1 s1", 2).unwrap();
        assert_eq!(region_map(&t).unwrap().n_regions, 5);

        // vertices - edges + regions = 1 + split pieces
        let both = t.disjoint_union(&Diagram::unknot());
        let rm = region_map(&both).unwrap();
        assert_eq!(3 - 6 + rm.n_regions as i64, 1 + both.n_pieces() as i64);
    }

    #[test]
    fn adjacent_regions_have_opposite_colors() {
        let d = from_braid("s1 s2^-1 s1 s2^-1", 3).unwrap();
        let rm = region_map(&d).unwrap();
        for edge in d.edge_ids() {
            let (l, r) = rm.side_regions(edge).unwrap();
            assert_ne!(rm.black[l], rm.black[r]);
        }
    }

    #[test]
    fn nested_loops_make_a_black_annulus() {
        let d = from_pd("O(1)\nO(2)\nIN 2 1 L").unwrap();
        let rm = region_map(&d).unwrap();
        assert_eq!(rm.n_regions, 3);
        assert_eq!(sigma(&d, 1, Side::L).unwrap(), 1);
        assert_eq!(sigma(&d, 1, Side::R).unwrap(), -1);
        assert_eq!(sigma(&d, 2, Side::R).unwrap(), 1);
        assert_eq!(sigma(&d, 2, Side::L).unwrap(), -1);
    }

    #[test]
    fn seifert_circles_of_the_trefoil_alternate_parity() {
        let t = from_braid("s1 s1 s1", 2).unwrap();
        let choice = t.oriented_choice(&[false]);
        assert_eq!(choice, vec![0, 0, 0]);
        let res = t.resolve(&choice);
        assert_eq!(res.len(), 2);
        let geo = circle_geometry(&t, &choice, &res, &[false]).unwrap();
        let p0 = (geo.depth[0] + geo.ccw[0] as usize) % 2;
        let p1 = (geo.depth[1] + geo.ccw[1] as usize) % 2;
        assert_ne!(p0, p1);
    }

    #[test]
    fn loop_orientation_enters_the_rotation_sense() {
        let d = from_pd("O(1)\nO(2,cw)\nIN 2 1 L").unwrap();
        let res = d.resolve(&[]);
        let geo = circle_geometry(&d, &[], &res, &[false, false]).unwrap();
        assert_eq!(geo.depth, vec![0, 1]);
        assert_eq!(geo.ccw, vec![true, false]);
        let geo = circle_geometry(&d, &[], &res, &[true, false]).unwrap();
        assert_eq!(geo.ccw, vec![false, false]);
    }
}
