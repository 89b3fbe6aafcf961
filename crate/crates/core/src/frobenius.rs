//! The two rank-2 Frobenius structures driving the cube: the q-graded one
//! and its filtered deformation. Circles carry the basis v+ (qdeg +1),
//! v- (qdeg -1); merges multiply, splits comultiply.
//!
//! The deformed maps add v-v- -> v+ and v- -> v+v+ on top of the graded
//! ones, so the differential entries shift qdeg by 0 or +4. In the basis
//! a := v+ + v-, b := v- - v+ the deformed structure diagonalizes:
//! m(a,a) = 2a, m(b,b) = -2b, m(a,b) = 0, com(a) = a@a, com(b) = b@b.

pub const VPLUS: i8 = 1;
pub const VMINUS: i8 = -1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Functor {
    Kh,
    Lee,
}

impl Functor {
    /// m on basis vectors, as (result label, coefficient) terms.
    pub fn multiply(self, x: i8, y: i8) -> Vec<(i8, i64)> {
        match (x, y) {
            (VPLUS, VPLUS) => vec![(VPLUS, 1)],
            (VPLUS, VMINUS) | (VMINUS, VPLUS) => vec![(VMINUS, 1)],
            (VMINUS, VMINUS) => match self {
                Functor::Kh => vec![],
                Functor::Lee => vec![(VPLUS, 1)],
            },
            _ => panic!("labels are +1 or -1"),
        }
    }

    /// Comultiplication, as ((left label, right label), coefficient) terms.
    pub fn comultiply(self, x: i8) -> Vec<((i8, i8), i64)> {
        match x {
            VPLUS => vec![((VPLUS, VMINUS), 1), ((VMINUS, VPLUS), 1)],
            VMINUS => match self {
                Functor::Kh => vec![((VMINUS, VMINUS), 1)],
                Functor::Lee => vec![((VMINUS, VMINUS), 1), ((VPLUS, VPLUS), 1)],
            },
            _ => panic!("labels are +1 or -1"),
        }
    }

    /// The unit element a birth creates.
    pub fn unit(self) -> Vec<(i8, i64)> {
        vec![(VPLUS, 1)]
    }

    /// The trace a death applies.
    pub fn counit(self, x: i8) -> i64 {
        match x {
            VPLUS => 0,
            VMINUS => 1,
            _ => panic!("labels are +1 or -1"),
        }
    }
}

pub fn qdeg_of_label(x: i8) -> i64 {
    x as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    type El = BTreeMap<i8, i64>;

    fn el(terms: &[(i8, i64)]) -> El {
        let mut m = El::new();
        for &(k, c) in terms {
            *m.entry(k).or_insert(0) += c;
            if m[&k] == 0 {
                m.remove(&k);
            }
        }
        m
    }

    fn mul(f: Functor, a: &El, b: &El) -> El {
        let mut out = Vec::new();
        for (&x, &ca) in a {
            for (&y, &cb) in b {
                for (z, c) in f.multiply(x, y) {
                    out.push((z, c * ca * cb));
                }
            }
        }
        el(&out)
    }

    type El2 = BTreeMap<(i8, i8), i64>;

    fn com(f: Functor, a: &El) -> El2 {
        let mut m = El2::new();
        for (&x, &ca) in a {
            for ((u, v), c) in f.comultiply(x) {
                *m.entry((u, v)).or_insert(0) += c * ca;
            }
        }
        m.retain(|_, c| *c != 0);
        m
    }

    fn basis(x: i8) -> El {
        el(&[(x, 1)])
    }

    #[test]
    fn frobenius_axioms_hold() {
        for f in [Functor::Kh, Functor::Lee] {
            let labels = [VPLUS, VMINUS];
            // associativity and commutativity
            for &x in &labels {
                for &y in &labels {
                    assert_eq!(mul(f, &basis(x), &basis(y)), mul(f, &basis(y), &basis(x)));
                    for &z in &labels {
                        let xy_z = mul(f, &mul(f, &basis(x), &basis(y)), &basis(z));
                        let x_yz = mul(f, &basis(x), &mul(f, &basis(y), &basis(z)));
                        assert_eq!(xy_z, x_yz);
                    }
                }
            }
            // unit and counit laws
            let one = el(&f.unit());
            for &x in &labels {
                assert_eq!(mul(f, &one, &basis(x)), basis(x));
                let d = com(f, &basis(x));
                let left: Vec<(i8, i64)> = d
                    .iter()
                    .map(|(&(u, v), &c)| (v, c * f.counit(u)))
                    .collect();
                assert_eq!(el(&left), basis(x));
            }
            // Frobenius compatibility: com(m(x,y)) = (m x id)(x @ com(y))
            for &x in &labels {
                for &y in &labels {
                    let lhs = com(f, &mul(f, &basis(x), &basis(y)));
                    let mut rhs = El2::new();
                    for ((u, v), c) in f.comultiply(y) {
                        for (w, c2) in f.multiply(x, u) {
                            *rhs.entry((w, v)).or_insert(0) += c * c2;
                        }
                    }
                    rhs.retain(|_, c| *c != 0);
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn deformed_structure_diagonalizes() {
        let f = Functor::Lee;
        let a = el(&[(VPLUS, 1), (VMINUS, 1)]);
        let b = el(&[(VMINUS, 1), (VPLUS, -1)]);
        assert_eq!(mul(f, &a, &a), el(&[(VPLUS, 2), (VMINUS, 2)]));
        assert_eq!(mul(f, &b, &b), el(&[(VMINUS, -2), (VPLUS, 2)])); // -2b
        assert_eq!(mul(f, &a, &b), El::new());
        // com(a) = a@a, com(b) = b@b
        let mut aa = El2::new();
        for (&x, &cx) in &a {
            for (&y, &cy) in &a {
                *aa.entry((x, y)).or_insert(0) += cx * cy;
            }
        }
        assert_eq!(com(f, &a), aa);
        let mut bb = El2::new();
        for (&x, &cx) in &b {
            for (&y, &cy) in &b {
                *bb.entry((x, y)).or_insert(0) += cx * cy;
            }
        }
        assert_eq!(com(f, &b), bb);
    }

    #[test]
    fn split_then_merge_squares_as_expected()  {
        // m(com(x)) is 2*(v+ -> v-, v- -> 0) for the graded structure and
        // twice the invertible v+ <-> v- swap for the deformed one
        let check = |f: Functor, x: i8| -> El {
            let d = com(f, &basis(x));
            let mut out = Vec::new();
            for (&(u, v), &c) in &d {
                for (w, c2) in f.multiply(u, v) {
                    out.push((w, c * c2));
                }
            }
            el(&out)
        };
        assert_eq!(check(Functor::Kh, VPLUS), el(&[(VMINUS, 2)]));
        assert_eq!(check(Functor::Kh, VMINUS), El::new());
        assert_eq!(check(Functor::Lee, VPLUS), el(&[(VMINUS, 2)]));
        assert_eq!(check(Functor::Lee, VMINUS), el(&[(VPLUS, 2)]));
    }

    #[test]
    fn grading_shifts() {
        for f in [Functor::Kh, Functor::Lee] {
            for &x in &[VPLUS, VMINUS] {
                for &y in &[VPLUS, VMINUS] {
                    for (z, _) in f.multiply(x, y) {
                        let shift = qdeg_of_label(z) - qdeg_of_label(x) - qdeg_of_label(y);
                        if f == Functor::Kh {
                            assert_eq!(shift, -1);
                        } else {
                            assert!(shift == -1 || shift == 3);
                        }
                    }
                }
                for ((u, v), _) in f.comultiply(x) {
                    let shift = qdeg_of_label(u) + qdeg_of_label(v) - qdeg_of_label(x);
                    if f == Functor::Kh {
                        assert_eq!(shift, -1);
                    } else {
                        assert!(shift == -1 || shift == 3);
                    }
                }
            }
        }
    }
}
