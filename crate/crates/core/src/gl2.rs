//! 2×2 matrices, vectors and lines over `F_l`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Column vector `(x, y)` over `F_l`; entries reduced into `[0, l)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vec2(pub u64, pub u64);

impl Vec2 {
    pub fn reduce(self, l: u64) -> Vec2 {
        Vec2(self.0 % l, self.1 % l)
    }

    pub fn is_zero(&self) -> bool {
        self.0 == 0 && self.1 == 0
    }

    pub fn neg(self, l: u64) -> Vec2 {
        Vec2((l - self.0 % l) % l, (l - self.1 % l) % l)
    }

    pub fn scale(self, c: u64, l: u64) -> Vec2 {
        Vec2(self.0 * c % l, self.1 * c % l)
    }

    pub fn add(self, o: Vec2, l: u64) -> Vec2 {
        Vec2((self.0 + o.0) % l, (self.1 + o.1) % l)
    }

    /// Canonical representative of `{v, −v}`.
    pub fn up_to_sign(self, l: u64) -> Vec2 {
        self.reduce(l).min(self.neg(l))
    }
}

/// A point of `P^1(F_l)`, stored as `(1, y)` or `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Line(Vec2);

impl Line {
    /// The line spanned by a nonzero vector.
    pub fn span(v: Vec2, l: u64) -> Option<Line> {
        let v = v.reduce(l);
        if v.is_zero() {
            return None;
        }
        if v.0 == 0 {
            Some(Line(Vec2(0, 1)))
        } else {
            let inv = inv_mod_small(v.0, l);
            Some(Line(Vec2(1, v.1 * inv % l)))
        }
    }

    pub fn generator(&self) -> Vec2 {
        self.0
    }

    pub fn contains(&self, v: Vec2, l: u64) -> bool {
        let v = v.reduce(l);
        let g = self.0;
        (g.0 * v.1 + l * l - g.1 * v.0 % l).is_multiple_of(l)
    }

    /// All `l + 1` lines in a fixed order.
    pub fn all(l: u64) -> Vec<Line> {
        let mut out: Vec<Line> = (0..l).map(|y| Line(Vec2(1, y))).collect();
        out.push(Line(Vec2(0, 1)));
        out
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span({}, {})", self.0 .0, self.0 .1)
    }
}

pub fn inv_mod_small(a: u64, l: u64) -> u64 {
    let a = a % l;
    assert!(a != 0, "0 is not invertible mod {l}");
    let (mut r0, mut r1) = (l as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    assert_eq!(r0, 1, "{a} is not invertible mod {l}");
    t0.rem_euclid(l as i128) as u64
}

/// Matrix `[[a, b], [c, d]]` over `F_l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mat2 {
    l: u64,
    e: [u64; 4],
}

impl Mat2 {
    pub fn new(l: u64, a: i64, b: i64, c: i64, d: i64) -> Mat2 {
        let r = |x: i64| x.rem_euclid(l as i64) as u64;
        Mat2 {
            l,
            e: [r(a), r(b), r(c), r(d)],
        }
    }

    pub fn from_rows(l: u64, rows: [[i64; 2]; 2]) -> Mat2 {
        Mat2::new(l, rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn identity(l: u64) -> Mat2 {
        Mat2::new(l, 1, 0, 0, 1)
    }

    pub fn modulus(&self) -> u64 {
        self.l
    }

    pub fn rows(&self) -> [[u64; 2]; 2] {
        [[self.e[0], self.e[1]], [self.e[2], self.e[3]]]
    }

    pub fn det(&self) -> u64 {
        let l = self.l;
        (self.e[0] * self.e[3] % l + l * l - self.e[1] * self.e[2] % l) % l
    }

    pub fn trace(&self) -> u64 {
        (self.e[0] + self.e[3]) % self.l
    }

    pub fn is_invertible(&self) -> bool {
        self.det() != 0
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        assert_eq!(self.l, o.l);
        let l = self.l;
        let [a, b, c, d] = self.e;
        let [p, q, r, s] = o.e;
        Mat2 {
            l,
            e: [
                (a * p + b * r) % l,
                (a * q + b * s) % l,
                (c * p + d * r) % l,
                (c * q + d * s) % l,
            ],
        }
    }

    pub fn pow(&self, mut k: u64) -> Mat2 {
        let mut r = Mat2::identity(self.l);
        let mut b = *self;
        while k > 0 {
            if k & 1 == 1 {
                r = r.mul(&b);
            }
            b = b.mul(&b);
            k >>= 1;
        }
        r
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det == 0 {
            return None;
        }
        let l = self.l;
        let i = inv_mod_small(det, l);
        let [a, b, c, d] = self.e;
        Some(Mat2 {
            l,
            e: [d * i % l, (l - b) * i % l, (l - c) * i % l, a * i % l],
        })
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        let l = self.l;
        let v = v.reduce(l);
        let [a, b, c, d] = self.e;
        Vec2((a * v.0 + b * v.1) % l, (c * v.0 + d * v.1) % l)
    }

    pub fn apply_line(&self, m: Line) -> Line {
        Line::span(self.apply(m.generator()), self.l).expect("invertible matrix")
    }

    /// `(A − I)` nilpotent and `A ≠ I`.
    pub fn is_unipotent(&self) -> bool {
        let l = self.l;
        let n = Mat2::new(
            l,
            self.e[0] as i64 - 1,
            self.e[1] as i64,
            self.e[2] as i64,
            self.e[3] as i64 - 1,
        );
        n.mul(&n).e == [0; 4] && n.e != [0; 4]
    }

    /// Multiplicative order (the matrix must be invertible).
    pub fn order(&self) -> u64 {
        assert!(self.is_invertible());
        let id = Mat2::identity(self.l);
        let mut x = *self;
        let mut k = 1;
        while x != id {
            x = x.mul(self);
            k += 1;
        }
        k
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.e;
        write!(f, "[[{a},{b}],[{c},{d}]]")
    }
}

/// Every invertible matrix over `F_r`, by direct enumeration of all `r^4`.
pub fn enumerate_gl2(r: u64) -> Vec<Mat2> {
    let mut out = Vec::new();
    for a in 0..r {
        for b in 0..r {
            for c in 0..r {
                for d in 0..r {
                    let m = Mat2::new(r, a as i64, b as i64, c as i64, d as i64);
                    if m.is_invertible() {
                        out.push(m);
                    }
                }
            }
        }
    }
    out
}

/// `(r^2 − 1)(r^2 − r)`.
pub fn gl2_order_formula(r: u64) -> u64 {
    (r * r - 1) * (r * r - r)
}

/// Subgroup generated by `gens`, breadth-first from the identity.
pub fn group_closure(l: u64, gens: &[Mat2]) -> Vec<Mat2> {
    let id = Mat2::identity(l);
    let mut seen = BTreeSet::from([id]);
    let mut out = vec![id];
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = x.mul(g);
            if seen.insert(y) {
                out.push(y);
                queue.push_back(y);
            }
        }
    }
    out
}

/// `|SL_2(F_l)| = l(l^2 − 1)`.
pub fn sl2_order(l: u64) -> u64 {
    l * (l * l - 1)
}

/// True when the generated group contains `SL_2(F_l)`.
pub fn contains_sl2(l: u64, gens: &[Mat2]) -> bool {
    let g = group_closure(l, gens);
    g.iter().filter(|m| m.det() == 1).count() as u64 == sl2_order(l)
}
