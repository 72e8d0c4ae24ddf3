//! Sensor models and the output map.
//!
//! A sensor turns a field into one output channel. Five geometries are
//! supported: interior zones (L² pairing with a profile), interior points
//! (evaluation), boundary points and boundary segments (outward normal
//! derivative, pointwise or paired with a profile along the segment), and
//! filaments (line integral along a polyline). The k-th entry of a sensor's
//! output row is the functional applied to the k-th basis mode, so for a
//! state with coefficients `c` the output is `row · c` and an output matrix
//! stacks one row per sensor.
//!
//! Zone and boundary pairings with `uniform` and `mode` profiles use the
//! closed-form sine integrals from [`crate::basis`]; shaped, sampled, and
//! filament profiles fall back to adaptive quadrature.
//!
//! Suites demand pairwise disjoint supports: overlapping zones, duplicated
//! points, a point inside another sensor's zone, crossing filaments, or
//! overlapping boundary segments are construction errors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::{sine_integral, sine_product_integral, EigenBasis, ModeIndex, SineFactor};
use crate::domain::{DomainSpec, Edge, Point, Region, GEOM_TOL};
use crate::error::{Error, Result};
use crate::quad;
use crate::state::{SpectralState, TimeGrid};

/// Quadrature tolerance for profile pairings without a closed form.
const PROFILE_TOL: f64 = 1e-12;
/// Quadrature tolerance for filament line integrals.
const FILAMENT_TOL: f64 = 1e-10;

/// Even reference shapes for symmetric-product zone profiles, defined on
/// `[−1, 1]` around the support center per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvenShape {
    /// Constant 1.
    Uniform,
    /// cos(πs/2): smooth roll-off to zero at the support edge.
    Cosine,
    /// 1 − |s|: linear tent.
    Triangle,
}

impl EvenShape {
    fn value(&self, s: f64) -> f64 {
        match self {
            EvenShape::Uniform => 1.0,
            EvenShape::Cosine => (0.5 * std::f64::consts::PI * s).cos(),
            EvenShape::Triangle => 1.0 - s.abs(),
        }
    }
}

/// Spatial distribution paired with the field over a zone, boundary segment,
/// or filament.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Profile {
    /// The unnormalized indicator, f ≡ 1 on the support.
    Uniform,
    /// An eigenfunction shape: f = φ_index of the basis the row is taken
    /// against (exact pairing by orthonormality when the zone is the span).
    Mode { index: ModeIndex },
    /// Product f(ξ₁,ξ₂) = f₁(ξ₁−c₁)·f₂(ξ₂−c₂) of even factors about the
    /// zone center; 2D zones only.
    SymmetricProduct { shape_x: EvenShape, shape_y: EvenShape },
    /// Piecewise-linear table over the relative coordinate of the support
    /// (0 at its start, 1 at its end); 1D-parametrized supports only.
    Samples { positions: Vec<f64>, values: Vec<f64> },
}

impl Profile {
    fn validate(&self) -> Result<()> {
        if let Profile::Samples { positions, values } = self {
            if positions.len() != values.len() || positions.len() < 2 {
                return Err(Error::InvalidSensor(
                    "sample table needs at least two matching position/value pairs".into(),
                ));
            }
            if positions.iter().chain(values.iter()).any(|v| !v.is_finite()) {
                return Err(Error::InvalidSensor("non-finite sample table".into()));
            }
            if (positions[0]).abs() > 1e-9 || (positions.last().unwrap() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidSensor(
                    "sample positions are relative coordinates and must span [0, 1]".into(),
                ));
            }
            if positions.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidSensor(
                    "sample positions must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }

    /// Linear interpolation of a sample table at relative coordinate `s`.
    fn sample_value(positions: &[f64], values: &[f64], s: f64) -> f64 {
        if s <= positions[0] {
            return values[0];
        }
        if s >= *positions.last().unwrap() {
            return *values.last().unwrap();
        }
        let i = positions.partition_point(|p| *p <= s).min(positions.len() - 1);
        let (p0, p1) = (positions[i - 1], positions[i]);
        let (v0, v1) = (values[i - 1], values[i]);
        v0 + (v1 - v0) * (s - p0) / (p1 - p0)
    }
}

/// Where a sensor measures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SensorGeometry {
    /// Interior zone: ⟨x, f⟩ over a closed subregion.
    Zone { support: Region },
    /// Interior point evaluation x(b).
    Pointwise { point: Point },
    /// Outward normal derivative at a boundary point.
    BoundaryPoint { point: Point },
    /// Normal-derivative trace paired with a profile along part of one edge
    /// of the unit square.
    BoundaryZone { edge: Edge, span: (f64, f64) },
    /// Line integral along a polyline.
    Filament { vertices: Vec<Point> },
}

/// One output channel: a geometry, an optional profile, and a label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SensorDe")]
pub struct Sensor {
    label: String,
    #[serde(flatten)]
    geometry: SensorGeometry,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<Profile>,
}

/// Wire form of [`Sensor`]: deserialization funnels through [`Sensor::new`]
/// so serde-built sensors observe the same invariants as constructed ones.
#[derive(Deserialize)]
struct SensorDe {
    label: String,
    #[serde(flatten)]
    geometry: SensorGeometry,
    #[serde(default)]
    profile: Option<Profile>,
}

impl TryFrom<SensorDe> for Sensor {
    type Error = Error;

    fn try_from(de: SensorDe) -> Result<Self> {
        Sensor::new(de.label, de.geometry, de.profile)
    }
}

impl Sensor {
    /// Builds a sensor. Zone-like geometries default to the uniform profile
    /// when `profile` is `None`; pointwise geometries reject profiles.
    pub fn new(
        label: impl Into<String>,
        geometry: SensorGeometry,
        profile: Option<Profile>,
    ) -> Result<Self> {
        let takes_profile = matches!(
            geometry,
            SensorGeometry::Zone { .. }
                | SensorGeometry::BoundaryZone { .. }
                | SensorGeometry::Filament { .. }
        );
        if !takes_profile && profile.is_some() {
            return Err(Error::InvalidSensor(
                "pointwise geometries carry no profile".into(),
            ));
        }
        let profile = if takes_profile {
            let p = profile.unwrap_or(Profile::Uniform);
            p.validate()?;
            Some(p)
        } else {
            None
        };
        match &geometry {
            SensorGeometry::Filament { vertices } => {
                if vertices.len() < 2 {
                    return Err(Error::InvalidSensor(
                        "a filament needs at least two vertices".into(),
                    ));
                }
                if vertices.iter().any(|v| v.dim() != 2) {
                    return Err(Error::InvalidSensor("filaments are two-dimensional".into()));
                }
                for w in vertices.windows(2) {
                    if dist2(&w[0], &w[1]) <= GEOM_TOL * GEOM_TOL {
                        return Err(Error::InvalidSensor(
                            "consecutive filament vertices coincide".into(),
                        ));
                    }
                }
            }
            SensorGeometry::BoundaryZone { span, .. } => {
                if !(span.0.is_finite() && span.1.is_finite()) || span.1 - span.0 <= GEOM_TOL {
                    return Err(Error::InvalidSensor(format!(
                        "degenerate boundary span [{}, {}]",
                        span.0, span.1
                    )));
                }
            }
            _ => {}
        }
        Ok(Sensor {
            label: label.into(),
            geometry,
            profile,
        })
    }

    /// Interior point sensor.
    pub fn pointwise(label: impl Into<String>, point: Point) -> Result<Self> {
        Sensor::new(label, SensorGeometry::Pointwise { point }, None)
    }

    /// Zone sensor with the uniform profile.
    pub fn zone(label: impl Into<String>, support: Region) -> Result<Self> {
        Sensor::new(label, SensorGeometry::Zone { support }, None)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn geometry(&self) -> &SensorGeometry {
        &self.geometry
    }

    pub fn profile(&self) -> Option<&Profile> {
        self.profile.as_ref()
    }

    /// Checks the support against a concrete domain.
    pub fn validate_in(&self, domain: &DomainSpec) -> Result<()> {
        match &self.geometry {
            SensorGeometry::Zone { support } => {
                support.validate_in(domain)?;
                match self.profile.as_ref().unwrap() {
                    Profile::SymmetricProduct { .. } if domain.dim() != 2 => {
                        Err(Error::InvalidSensor(
                            "symmetric-product profiles need a two-dimensional zone".into(),
                        ))
                    }
                    Profile::Samples { .. } if domain.dim() != 1 => Err(Error::InvalidSensor(
                        "sample-table profiles parametrize one-dimensional supports".into(),
                    )),
                    Profile::Mode { index } => {
                        let dims_match = matches!(
                            (index, domain.dim()),
                            (ModeIndex::D1(_), 1) | (ModeIndex::D2(..), 2)
                        );
                        if dims_match {
                            Ok(())
                        } else {
                            Err(Error::InvalidSensor(
                                "mode profile index does not match the domain dimension".into(),
                            ))
                        }
                    }
                    _ => Ok(()),
                }
            }
            SensorGeometry::Pointwise { point } => {
                if point.dim() != domain.dim() {
                    return Err(Error::InvalidSensor(
                        "sensor point dimension does not match the domain".into(),
                    ));
                }
                if !domain.full_region().contains_interior(point, 0.0) {
                    return Err(Error::InvalidSensor(format!(
                        "pointwise sensor at {point:?} is not strictly inside the domain"
                    )));
                }
                Ok(())
            }
            SensorGeometry::BoundaryPoint { point } => {
                if point.dim() != domain.dim() {
                    return Err(Error::InvalidSensor(
                        "sensor point dimension does not match the domain".into(),
                    ));
                }
                if !domain.on_boundary(point) {
                    return Err(Error::InvalidSensor(format!(
                        "boundary sensor at {point:?} is not on the boundary"
                    )));
                }
                Ok(())
            }
            SensorGeometry::BoundaryZone { span, .. } => {
                if domain.dim() != 2 {
                    return Err(Error::InvalidSensor(
                        "boundary segments need a two-dimensional domain".into(),
                    ));
                }
                if span.0 < -GEOM_TOL || span.1 > 1.0 + GEOM_TOL {
                    return Err(Error::InvalidSensor(format!(
                        "boundary span [{}, {}] leaves the edge",
                        span.0, span.1
                    )));
                }
                match self.profile.as_ref().unwrap() {
                    Profile::Uniform | Profile::Samples { .. } => Ok(()),
                    _ => Err(Error::InvalidSensor(
                        "boundary segments take uniform or sample-table profiles".into(),
                    )),
                }
            }
            SensorGeometry::Filament { vertices } => {
                if domain.dim() != 2 {
                    return Err(Error::InvalidSensor(
                        "filaments need a two-dimensional domain".into(),
                    ));
                }
                if let Some(v) = vertices.iter().find(|v| !domain.contains(v)) {
                    return Err(Error::InvalidSensor(format!(
                        "filament vertex {v:?} leaves the domain"
                    )));
                }
                match self.profile.as_ref().unwrap() {
                    Profile::Uniform | Profile::Samples { .. } => Ok(()),
                    _ => Err(Error::InvalidSensor(
                        "filaments take uniform or sample-table profiles".into(),
                    )),
                }
            }
        }
    }
}

/// A non-empty family of sensors with pairwise disjoint supports.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorSuite {
    sensors: Vec<Sensor>,
}

impl SensorSuite {
    pub fn new(sensors: Vec<Sensor>) -> Result<Self> {
        if sensors.is_empty() {
            return Err(Error::InvalidSensor("a suite needs at least one sensor".into()));
        }
        Ok(SensorSuite { sensors })
    }

    pub fn sensors(&self) -> &[Sensor] {
        &self.sensors
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    /// Validates every sensor against the domain and enforces pairwise
    /// disjoint supports.
    pub fn validate_in(&self, domain: &DomainSpec) -> Result<()> {
        for sensor in &self.sensors {
            sensor.validate_in(domain)?;
        }
        validate_disjoint_supports(&self.sensors)
    }
}

/// Pairwise support-disjointness check (shared with the Gramian path, which
/// also accepts an empty sensor list).
pub fn validate_disjoint_supports(sensors: &[Sensor]) -> Result<()> {
    for i in 0..sensors.len() {
        for j in (i + 1)..sensors.len() {
            if supports_intersect(&sensors[i], &sensors[j]) {
                return Err(Error::InvalidSensor(format!(
                    "sensors '{}' and '{}' have intersecting supports",
                    sensors[i].label(),
                    sensors[j].label()
                )));
            }
        }
    }
    Ok(())
}

fn dist2(a: &Point, b: &Point) -> f64 {
    (0..a.dim().max(b.dim()))
        .map(|ax| {
            let d = a.coord(ax) - b.coord(ax);
            d * d
        })
        .sum()
}

fn orient(p: (f64, f64), q: (f64, f64), r: (f64, f64)) -> f64 {
    (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0)
}

fn xy(p: &Point) -> (f64, f64) {
    (p.coord(0), p.coord(1))
}

/// Distance from point `r` to segment `pq` is within `GEOM_TOL`.
fn point_on_segment(r: (f64, f64), p: (f64, f64), q: (f64, f64)) -> bool {
    let (vx, vy) = (q.0 - p.0, q.1 - p.1);
    let (wx, wy) = (r.0 - p.0, r.1 - p.1);
    let len2 = vx * vx + vy * vy;
    let t = ((wx * vx + wy * vy) / len2).clamp(0.0, 1.0);
    let (dx, dy) = (wx - t * vx, wy - t * vy);
    dx * dx + dy * dy <= GEOM_TOL * GEOM_TOL
}

/// Segment intersection, counting touching endpoints and collinear overlap.
fn segments_intersect(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    point_on_segment(p1, q1, q2)
        || point_on_segment(p2, q1, q2)
        || point_on_segment(q1, p1, p2)
        || point_on_segment(q2, p1, p2)
}

fn segment_meets_rect(p: (f64, f64), q: (f64, f64), rect: &Region) -> bool {
    let (x0, x1) = rect.span(0);
    let (y0, y1) = rect.span(1);
    let inside = |r: (f64, f64)| r.0 >= x0 && r.0 <= x1 && r.1 >= y0 && r.1 <= y1;
    if inside(p) || inside(q) {
        return true;
    }
    let corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
    (0..4).any(|k| segments_intersect(p, q, corners[k], corners[(k + 1) % 4]))
}

fn boundary_segment_endpoints(edge: &Edge, span: (f64, f64)) -> ((f64, f64), (f64, f64)) {
    (xy(&edge.point_at(span.0)), xy(&edge.point_at(span.1)))
}

fn supports_intersect(a: &Sensor, b: &Sensor) -> bool {
    use SensorGeometry::*;
    match (a.geometry(), b.geometry()) {
        (Zone { support: ra }, Zone { support: rb }) => ra.overlaps(rb),
        (Zone { support }, Pointwise { point }) | (Pointwise { point }, Zone { support }) => {
            support.contains(point)
        }
        (Zone { support }, BoundaryPoint { point })
        | (BoundaryPoint { point }, Zone { support }) => support.contains(point),
        (Zone { support }, BoundaryZone { edge, span })
        | (BoundaryZone { edge, span }, Zone { support }) => {
            if support.dim() != 2 {
                return false;
            }
            let (p, q) = boundary_segment_endpoints(edge, *span);
            segment_meets_rect(p, q, support)
        }
        (Zone { support }, Filament { vertices }) | (Filament { vertices }, Zone { support }) => {
            if support.dim() != 2 {
                return false;
            }
            vertices
                .windows(2)
                .any(|w| segment_meets_rect(xy(&w[0]), xy(&w[1]), support))
        }
        (Pointwise { point: pa }, Pointwise { point: pb })
        | (Pointwise { point: pa }, BoundaryPoint { point: pb })
        | (BoundaryPoint { point: pa }, Pointwise { point: pb })
        | (BoundaryPoint { point: pa }, BoundaryPoint { point: pb }) => {
            dist2(pa, pb) <= GEOM_TOL * GEOM_TOL
        }
        (Pointwise { point }, BoundaryZone { edge, span })
        | (BoundaryZone { edge, span }, Pointwise { point })
        | (BoundaryPoint { point }, BoundaryZone { edge, span })
        | (BoundaryZone { edge, span }, BoundaryPoint { point }) => {
            if point.dim() != 2 {
                return false;
            }
            let (p, q) = boundary_segment_endpoints(edge, *span);
            point_on_segment(xy(point), p, q)
        }
        (Pointwise { point }, Filament { vertices })
        | (Filament { vertices }, Pointwise { point })
        | (BoundaryPoint { point }, Filament { vertices })
        | (Filament { vertices }, BoundaryPoint { point }) => {
            if point.dim() != 2 {
                return false;
            }
            vertices
                .windows(2)
                .any(|w| point_on_segment(xy(point), xy(&w[0]), xy(&w[1])))
        }
        (BoundaryZone { edge: ea, span: sa }, BoundaryZone { edge: eb, span: sb }) => {
            ea == eb && sa.1.min(sb.1) - sa.0.max(sb.0) > GEOM_TOL
        }
        (BoundaryZone { edge, span }, Filament { vertices })
        | (Filament { vertices }, BoundaryZone { edge, span }) => {
            let (p, q) = boundary_segment_endpoints(edge, *span);
            vertices
                .windows(2)
                .any(|w| segments_intersect(p, q, xy(&w[0]), xy(&w[1])))
        }
        (Filament { vertices: va }, Filament { vertices: vb }) => va.windows(2).any(|wa| {
            vb.windows(2)
                .any(|wb| segments_intersect(xy(&wa[0]), xy(&wa[1]), xy(&wb[0]), xy(&wb[1])))
        }),
    }
}

/// Output rows stacked per sensor: a q×N matrix applying the suite to a
/// coefficient vector.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputMatrix {
    matrix: DMatrix<f64>,
}

impl OutputMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn channels(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn truncation(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Sensor outputs sampled on a time grid, one row of `values` per channel.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputTrajectory {
    pub times: Vec<f64>,
    /// q×S matrix: `values[(i, s)]` is channel i at sample s.
    pub values: DMatrix<f64>,
    pub labels: Vec<String>,
}

/// The measurement functional of one sensor applied to every basis mode.
pub fn output_row(sensor: &Sensor, basis: &EigenBasis) -> Result<DVector<f64>> {
    sensor.validate_in(basis.domain())?;
    let n = basis.len();
    let mut row = DVector::zeros(n);
    match sensor.geometry() {
        SensorGeometry::Pointwise { point } => {
            for k in 0..n {
                row[k] = basis.eval(k, point);
            }
        }
        SensorGeometry::BoundaryPoint { point } => {
            for k in 0..n {
                row[k] = basis.normal_derivative(k, point)?;
            }
        }
        SensorGeometry::Zone { support } => {
            let profile = sensor.profile().unwrap();
            for k in 0..n {
                row[k] = zone_entry(basis, k, support, profile)?;
            }
        }
        SensorGeometry::BoundaryZone { edge, span } => {
            let profile = sensor.profile().unwrap();
            let t_ax = edge.tangent_axis();
            let n_ax = edge.normal_axis();
            for k in 0..n {
                let normal_factor =
                    edge.outward_sign() * basis.factor(k, n_ax).derivative(edge.normal_coord());
                let tangent = basis.factor(k, t_ax);
                let along = match profile {
                    Profile::Uniform => sine_integral(&tangent, span.0, span.1),
                    Profile::Samples { positions, values } => {
                        let width = span.1 - span.0;
                        quad::integrate(
                            |s| {
                                tangent.value(s)
                                    * Profile::sample_value(
                                        positions,
                                        values,
                                        (s - span.0) / width,
                                    )
                            },
                            span.0,
                            span.1,
                            PROFILE_TOL,
                        )
                    }
                    _ => unreachable!("validated in validate_in"),
                };
                row[k] = normal_factor * along;
            }
        }
        SensorGeometry::Filament { vertices } => {
            let profile = sensor.profile().unwrap();
            let lengths: Vec<f64> = vertices
                .windows(2)
                .map(|w| dist2(&w[0], &w[1]).sqrt())
                .collect();
            let total: f64 = lengths.iter().sum();
            let seg_tol = FILAMENT_TOL / lengths.len() as f64;
            for k in 0..n {
                let mut acc = 0.0;
                let mut offset = 0.0;
                for (w, len) in vertices.windows(2).zip(&lengths) {
                    let (px, py) = xy(&w[0]);
                    let (qx, qy) = xy(&w[1]);
                    let (dx, dy) = ((qx - px) / len, (qy - py) / len);
                    acc += quad::integrate(
                        |s| {
                            let p = Point::D2(px + s * dx, py + s * dy);
                            let f = match profile {
                                Profile::Uniform => 1.0,
                                Profile::Samples { positions, values } => {
                                    Profile::sample_value(positions, values, (offset + s) / total)
                                }
                                _ => unreachable!("validated in validate_in"),
                            };
                            basis.eval(k, &p) * f
                        },
                        0.0,
                        *len,
                        seg_tol,
                    );
                    offset += len;
                }
                row[k] = acc;
            }
        }
    }
    Ok(row)
}

fn zone_entry(basis: &EigenBasis, k: usize, support: &Region, profile: &Profile) -> Result<f64> {
    match profile {
        Profile::Uniform => Ok((0..basis.dim())
            .map(|ax| {
                let (lo, hi) = support.span(ax);
                sine_integral(&basis.factor(k, ax), lo, hi)
            })
            .product()),
        Profile::Mode { index } => {
            // The profile is the eigenfunction shape for `index` over the
            // basis span, whether or not that index is retained.
            let span = basis.span();
            Ok((0..basis.dim())
                .map(|ax| {
                    let (lo, hi) = support.span(ax);
                    let (slo, shi) = span.span(ax);
                    let len = shi - slo;
                    let profile_factor = SineFactor {
                        amp: (2.0 / len).sqrt(),
                        freq: index.component(ax) as f64 * std::f64::consts::PI / len,
                        origin: slo,
                    };
                    sine_product_integral(&basis.factor(k, ax), &profile_factor, lo, hi)
                })
                .product())
        }
        Profile::SymmetricProduct { shape_x, shape_y } => {
            let shapes = [*shape_x, *shape_y];
            Ok((0..2)
                .map(|ax| {
                    let (lo, hi) = support.span(ax);
                    let center = 0.5 * (lo + hi);
                    let half = 0.5 * (hi - lo);
                    let factor = basis.factor(k, ax);
                    quad::integrate(
                        |xi| factor.value(xi) * shapes[ax].value((xi - center) / half),
                        lo,
                        hi,
                        PROFILE_TOL,
                    )
                })
                .product())
        }
        Profile::Samples { positions, values } => {
            let (lo, hi) = support.span(0);
            let width = hi - lo;
            let factor = basis.factor(k, 0);
            Ok(quad::integrate(
                |xi| {
                    factor.value(xi) * Profile::sample_value(positions, values, (xi - lo) / width)
                },
                lo,
                hi,
                PROFILE_TOL,
            ))
        }
    }
}

/// Stacks [`output_row`] over a validated suite.
pub fn output_matrix(suite: &SensorSuite, basis: &EigenBasis) -> Result<OutputMatrix> {
    suite.validate_in(basis.domain())?;
    let mut matrix = DMatrix::zeros(suite.len(), basis.len());
    for (i, sensor) in suite.sensors().iter().enumerate() {
        let row = output_row(sensor, basis)?;
        matrix.set_row(i, &row.transpose());
    }
    Ok(OutputMatrix { matrix })
}

/// Input pairing for an actuator: identical to the output row, but boundary
/// geometries are rejected (a normal-derivative trace is a measurement, not
/// an input distribution).
pub fn input_column(actuator: &Sensor, basis: &EigenBasis) -> Result<DVector<f64>> {
    match actuator.geometry() {
        SensorGeometry::BoundaryPoint { .. } | SensorGeometry::BoundaryZone { .. } => {
            Err(Error::InvalidControl(
                "boundary geometries cannot act as input profiles".into(),
            ))
        }
        _ => output_row(actuator, basis),
    }
}

/// Free-evolution outputs on a time grid: `y_i(t_s) = Σ_k C_ik e^{λ_k t_s} c_k`.
pub fn simulate_output(
    x0: &SpectralState,
    suite: &SensorSuite,
    grid: &TimeGrid,
) -> Result<OutputTrajectory> {
    let c = output_matrix(suite, x0.basis())?;
    let n = x0.basis().len();
    let q = suite.len();
    let mut values = DMatrix::zeros(q, grid.len());
    for (s, t) in grid.samples().iter().enumerate() {
        let decayed = DVector::from_iterator(
            n,
            (0..n).map(|k| (x0.basis().eigenvalue(k) * t).exp() * x0.coefficients()[k]),
        );
        let y = c.matrix() * decayed;
        values.set_column(s, &y);
    }
    Ok(OutputTrajectory {
        times: grid.samples().to_vec(),
        values,
        labels: suite.sensors().iter().map(|s| s.label().to_string()).collect(),
    })
}
