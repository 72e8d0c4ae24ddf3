//! Spatial domains, subregions, and boundary geometry.
//!
//! Two domain shapes are supported: an open interval `(0, L)` and the open
//! unit square `(0,1)²`. Regions are axis-aligned sub-intervals or
//! sub-rectangles; sensors and adapted eigenbases are defined relative to
//! them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometric tolerance for containment and boundary membership checks.
pub const GEOM_TOL: f64 = 1e-12;

/// The spatial domain Ω.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainSpec {
    /// Open interval `(0, length)`.
    Interval { length: f64 },
    /// Open unit square `(0,1) × (0,1)`.
    UnitSquare,
}

impl DomainSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Interval { length } => {
                if !length.is_finite() || *length <= 0.0 {
                    return Err(Error::InvalidDomain(format!(
                        "interval length must be positive and finite, got {length}"
                    )));
                }
                Ok(())
            }
            DomainSpec::UnitSquare => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Interval { .. } => 1,
            DomainSpec::UnitSquare => 2,
        }
    }

    /// The whole domain viewed as a region.
    pub fn full_region(&self) -> Region {
        match self {
            DomainSpec::Interval { length } => Region::Interval { a: 0.0, b: *length },
            DomainSpec::UnitSquare => Region::Rect {
                x: (0.0, 1.0),
                y: (0.0, 1.0),
            },
        }
    }

    /// True when `p` lies in the closure of the domain.
    pub fn contains(&self, p: &Point) -> bool {
        self.full_region().contains(p)
    }

    /// True when `p` lies on the boundary ∂Ω (within `GEOM_TOL`).
    pub fn on_boundary(&self, p: &Point) -> bool {
        match (self, p) {
            (DomainSpec::Interval { length }, Point::D1(x)) => {
                x.abs() <= GEOM_TOL || (x - length).abs() <= GEOM_TOL
            }
            (DomainSpec::UnitSquare, Point::D2(x, y)) => {
                let on_x = x.abs() <= GEOM_TOL || (x - 1.0).abs() <= GEOM_TOL;
                let on_y = y.abs() <= GEOM_TOL || (y - 1.0).abs() <= GEOM_TOL;
                (on_x || on_y) && self.contains(p)
            }
            _ => false,
        }
    }
}

/// A point of the domain; the variant fixes the spatial dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    D1(f64),
    D2(f64, f64),
}

impl Point {
    pub fn dim(&self) -> usize {
        match self {
            Point::D1(_) => 1,
            Point::D2(..) => 2,
        }
    }

    /// Coordinate along `axis` (0 or 1).
    pub fn coord(&self, axis: usize) -> f64 {
        match (self, axis) {
            (Point::D1(x), 0) => *x,
            (Point::D2(x, _), 0) => *x,
            (Point::D2(_, y), 1) => *y,
            _ => f64::NAN,
        }
    }
}

/// An axis-aligned subregion ω of the domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// Closed sub-interval `[a, b]`.
    Interval { a: f64, b: f64 },
    /// Closed sub-rectangle `[x.0, x.1] × [y.0, y.1]`.
    Rect { x: (f64, f64), y: (f64, f64) },
}

impl Region {
    pub fn dim(&self) -> usize {
        match self {
            Region::Interval { .. } => 1,
            Region::Rect { .. } => 2,
        }
    }

    /// Extent `[lo, hi]` along `axis`.
    pub fn span(&self, axis: usize) -> (f64, f64) {
        match (self, axis) {
            (Region::Interval { a, b }, 0) => (*a, *b),
            (Region::Rect { x, .. }, 0) => *x,
            (Region::Rect { y, .. }, 1) => *y,
            _ => (f64::NAN, f64::NAN),
        }
    }

    /// Side length along `axis`.
    pub fn side(&self, axis: usize) -> f64 {
        let (lo, hi) = self.span(axis);
        hi - lo
    }

    /// Lebesgue measure (length or area).
    pub fn measure(&self) -> f64 {
        (0..self.dim()).map(|ax| self.side(ax)).product()
    }

    pub fn validate_in(&self, domain: &DomainSpec) -> Result<()> {
        if self.dim() != domain.dim() {
            return Err(Error::InvalidRegion(format!(
                "region dimension {} does not match domain dimension {}",
                self.dim(),
                domain.dim()
            )));
        }
        let full = domain.full_region();
        for ax in 0..self.dim() {
            let (lo, hi) = self.span(ax);
            let (flo, fhi) = full.span(ax);
            if !(lo.is_finite() && hi.is_finite()) || hi - lo <= GEOM_TOL {
                return Err(Error::InvalidRegion(format!(
                    "degenerate extent [{lo}, {hi}] along axis {ax}"
                )));
            }
            if lo < flo - GEOM_TOL || hi > fhi + GEOM_TOL {
                return Err(Error::InvalidRegion(format!(
                    "extent [{lo}, {hi}] along axis {ax} leaves the domain [{flo}, {fhi}]"
                )));
            }
        }
        Ok(())
    }

    /// True when `p` lies in the closure of the region.
    pub fn contains(&self, p: &Point) -> bool {
        if p.dim() != self.dim() {
            return false;
        }
        (0..self.dim()).all(|ax| {
            let (lo, hi) = self.span(ax);
            let c = p.coord(ax);
            c >= lo - GEOM_TOL && c <= hi + GEOM_TOL
        })
    }

    /// True when `p` lies in the interior, at least `margin` from every face.
    pub fn contains_interior(&self, p: &Point, margin: f64) -> bool {
        if p.dim() != self.dim() {
            return false;
        }
        (0..self.dim()).all(|ax| {
            let (lo, hi) = self.span(ax);
            let c = p.coord(ax);
            c > lo + margin && c < hi - margin
        })
    }

    /// True when `other` is contained in `self` (closures, within `GEOM_TOL`).
    pub fn contains_region(&self, other: &Region) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|ax| {
                let (lo, hi) = self.span(ax);
                let (olo, ohi) = other.span(ax);
                olo >= lo - GEOM_TOL && ohi <= hi + GEOM_TOL
            })
    }

    /// True when the two regions overlap on a set of positive measure.
    pub fn overlaps(&self, other: &Region) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|ax| {
                let (lo, hi) = self.span(ax);
                let (olo, ohi) = other.span(ax);
                hi.min(ohi) - lo.max(olo) > GEOM_TOL
            })
    }

    /// Approximate equality of two regions (within `GEOM_TOL` per face).
    pub fn approx_eq(&self, other: &Region) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|ax| {
                let (lo, hi) = self.span(ax);
                let (olo, ohi) = other.span(ax);
                (lo - olo).abs() <= GEOM_TOL && (hi - ohi).abs() <= GEOM_TOL
            })
    }
}

/// One of the four sides of the unit square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl Edge {
    /// Axis that varies along the edge (0 for bottom/top, 1 for left/right).
    pub fn tangent_axis(&self) -> usize {
        match self {
            Edge::Bottom | Edge::Top => 0,
            Edge::Left | Edge::Right => 1,
        }
    }

    /// Axis normal to the edge.
    pub fn normal_axis(&self) -> usize {
        1 - self.tangent_axis()
    }

    /// Fixed coordinate of the edge along its normal axis.
    pub fn normal_coord(&self) -> f64 {
        match self {
            Edge::Left | Edge::Bottom => 0.0,
            Edge::Right | Edge::Top => 1.0,
        }
    }

    /// Sign of the outward normal derivative: −∂/∂ξ on the low faces,
    /// +∂/∂ξ on the high faces.
    pub fn outward_sign(&self) -> f64 {
        match self {
            Edge::Left | Edge::Bottom => -1.0,
            Edge::Right | Edge::Top => 1.0,
        }
    }

    /// The point on the edge at tangential coordinate `s`.
    pub fn point_at(&self, s: f64) -> Point {
        match self.tangent_axis() {
            0 => Point::D2(s, self.normal_coord()),
            _ => Point::D2(self.normal_coord(), s),
        }
    }
}
