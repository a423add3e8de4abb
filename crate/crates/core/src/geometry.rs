//! Points of the radial graph of the square lattice in doubled integer
//! coordinates.
//!
//! The integer lattice points sit at even/even coordinates and the face
//! centers at odd/odd coordinates, so every class test is a parity test.

use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coord {
    pub x: i32,
    pub y: i32,
}

impl Coord {
    pub const fn new(x: i32, y: i32) -> Self {
        Coord { x, y }
    }

    pub const fn offset(self, dx: i32, dy: i32) -> Self {
        Coord {
            x: self.x + dx,
            y: self.y + dy,
        }
    }

    /// Squared Euclidean distance in doubled units.
    pub fn dist2(self, other: Coord) -> i64 {
        let dx = i64::from(self.x) - i64::from(other.x);
        let dy = i64::from(self.y) - i64::from(other.y);
        dx * dx + dy * dy
    }

    /// `None` when the point is not a vertex of the radial graph
    /// (mixed parity).
    pub fn class(self) -> Option<VertexClass> {
        let ex = self.x.rem_euclid(2) == 0;
        let ey = self.y.rem_euclid(2) == 0;
        match (ex, ey) {
            (true, true) => {
                if (self.x - self.y).rem_euclid(4) == 0 {
                    Some(VertexClass::V1)
                } else {
                    Some(VertexClass::V2)
                }
            }
            (false, false) => Some(VertexClass::V3),
            _ => None,
        }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl From<(i32, i32)> for Coord {
    fn from((x, y): (i32, i32)) -> Self {
        Coord { x, y }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexClass {
    V1,
    V2,
    V3,
}

impl VertexClass {
    pub fn is_corner(self) -> bool {
        matches!(self, VertexClass::V1 | VertexClass::V2)
    }

    pub fn label(self) -> &'static str {
        match self {
            VertexClass::V1 => "V1",
            VertexClass::V2 => "V2",
            VertexClass::V3 => "V3",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeClass {
    /// Half-diagonal between a lattice point and a face center.
    E1,
    /// Unit edge between a V1 and a V2 point. Dimers here are impurities.
    E2,
    /// Unit edge between two face centers (triangular lattice only).
    E3,
}

impl EdgeClass {
    /// Class of the segment `a`–`b`, or `None` if it is not an edge of
    /// the radial graph (or of its triangular extension).
    pub fn classify(a: Coord, b: Coord) -> Option<EdgeClass> {
        let ca = a.class()?;
        let cb = b.class()?;
        let d2 = a.dist2(b);
        match (ca, cb) {
            (VertexClass::V3, VertexClass::V3) if d2 == 4 => Some(EdgeClass::E3),
            (VertexClass::V3, c) | (c, VertexClass::V3) if c.is_corner() && d2 == 2 => {
                Some(EdgeClass::E1)
            }
            (VertexClass::V1, VertexClass::V2) | (VertexClass::V2, VertexClass::V1) if d2 == 4 => {
                Some(EdgeClass::E2)
            }
            _ => None,
        }
    }

    pub fn is_impurity(self) -> bool {
        matches!(self, EdgeClass::E2 | EdgeClass::E3)
    }

    pub fn label(self) -> &'static str {
        match self {
            EdgeClass::E1 => "E1",
            EdgeClass::E2 => "E2",
            EdgeClass::E3 => "E3",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes_follow_parity() {
        assert_eq!(Coord::new(0, 0).class(), Some(VertexClass::V1));
        assert_eq!(Coord::new(2, 0).class(), Some(VertexClass::V2));
        assert_eq!(Coord::new(2, 2).class(), Some(VertexClass::V1));
        assert_eq!(Coord::new(-2, 0).class(), Some(VertexClass::V2));
        assert_eq!(Coord::new(1, 1).class(), Some(VertexClass::V3));
        assert_eq!(Coord::new(-1, 3).class(), Some(VertexClass::V3));
        assert_eq!(Coord::new(1, 0).class(), None);
    }

    #[test]
    fn edge_classes() {
        let o = Coord::new(0, 0);
        assert_eq!(EdgeClass::classify(o, Coord::new(1, 1)), Some(EdgeClass::E1));
        assert_eq!(EdgeClass::classify(o, Coord::new(2, 0)), Some(EdgeClass::E2));
        assert_eq!(EdgeClass::classify(o, Coord::new(0, -2)), Some(EdgeClass::E2));
        assert_eq!(
            EdgeClass::classify(Coord::new(1, 1), Coord::new(3, 1)),
            Some(EdgeClass::E3)
        );
        // two V1 points at distance sqrt(2) are not adjacent
        assert_eq!(EdgeClass::classify(o, Coord::new(2, 2)), None);
        assert_eq!(EdgeClass::classify(o, Coord::new(4, 0)), None);
    }
}
