//! Worked scenarios packaged as one-call reports.
//!
//! The 1D pointwise-sensor study contrasts global and regional verdicts for
//! a sensor at a rational position, reporting both the even-integer rule for
//! blind modes and the numerically detected set. The rectangle-placement
//! screens turn the symmetry-based placement conditions into bounded integer
//! tests on sensor coordinates. Every verdict here is advisory arithmetic on
//! top of the rank/Gramian machinery, never a replacement for it, and the
//! test suites hold the two accountable to each other.

use serde::Serialize;

use crate::basis::{build_basis, inner_product_region, Convention};
use crate::domain::{DomainSpec, Point, Region};
use crate::error::{Error, Result};
use crate::observability::{
    default_region_truncation, observability_constant, rank_test, regional_gramian,
    StrategicReport, Thresholds,
};
use crate::sensors::{output_row, Profile, Sensor, SensorGeometry, SensorSuite};

/// Blind-mode detection cutoff on |φ_j(b)|.
const BLIND_TOL: f64 = 1e-8;
/// Vertex tolerance for polyline reflection symmetry.
const SYMMETRY_TOL: f64 = 1e-10;

/// Outcome of the pole-free equality test behind the 1D cross-term argument.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TanCondition {
    pub i: u32,
    pub j: u32,
    pub alpha: f64,
    /// i·sin(jπα)·cos(iπα)
    pub lhs: f64,
    /// j·sin(iπα)·cos(jπα)
    pub rhs: f64,
    pub equal: bool,
}

/// Evaluates i·tan(jπα) = j·tan(iπα) in cross-multiplied sine/cosine form,
/// which stays finite at tangent poles. Inequality signals a nonvanishing
/// cross inner product over the window [α, α+b], i.e. an observation channel
/// from a blind mode into visible ones.
pub fn tan_condition(i: u32, j: u32, alpha: f64) -> TanCondition {
    let pi = std::f64::consts::PI;
    let lhs = i as f64 * (j as f64 * pi * alpha).sin() * (i as f64 * pi * alpha).cos();
    let rhs = j as f64 * (i as f64 * pi * alpha).sin() * (j as f64 * pi * alpha).cos();
    let equal = (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0);
    TanCondition {
        i,
        j,
        alpha,
        lhs,
        rhs,
        equal,
    }
}

/// Result of bounded rational detection on a real number.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RationalWitness {
    pub value: f64,
    /// First continued-fraction convergent p/q with q ≤ q_max within
    /// `tolerance` of the value, in lowest terms.
    pub detected: Option<(i64, u32)>,
    pub q_max: u32,
    pub tolerance: f64,
}

/// Detects a rational value by its continued-fraction convergents.
///
/// Irrationality is undecidable in floating point, so the check is bounded:
/// only denominators up to `q_max` are tried and a hit must approximate the
/// value within `tau`. Convergents are automatically in lowest terms.
pub fn rational_detect(x: f64, q_max: u32, tau: f64) -> RationalWitness {
    let mut witness = RationalWitness {
        value: x,
        detected: None,
        q_max,
        tolerance: tau,
    };
    if !x.is_finite() || q_max == 0 {
        return witness;
    }
    let (mut p_prev, mut p) = (1i64, x.floor() as i64);
    let (mut q_prev, mut q) = (0i64, 1i64);
    let mut frac = x - x.floor();
    for _ in 0..64 {
        if q <= q_max as i64 && (x - p as f64 / q as f64).abs() < tau {
            witness.detected = Some((p, q as u32));
            return witness;
        }
        if q > q_max as i64 || frac.abs() < f64::EPSILON {
            break;
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        frac = inv - a;
        let (np, nq) = (a as i64 * p + p_prev, a as i64 * q + q_prev);
        p_prev = p;
        q_prev = q;
        p = np;
        q = nq;
    }
    witness
}

/// One integer hit in a placement screen: retained axis `axis`, frequency
/// index `index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AxisHit {
    pub axis: usize,
    pub index: u32,
}

/// Verdict of a placement screen over a rectangular region.
#[derive(Clone, Debug, Serialize)]
pub struct CorollaryReport {
    /// True when no scaled coordinate lands on an integer: the placement
    /// avoids every nodal line of the region's modes up to `i_max`.
    pub strategic_candidate: bool,
    pub failing: Vec<AxisHit>,
    pub i_max: u32,
    pub tolerance: f64,
    pub note: String,
}

const SCREEN_NOTE: &str = "advisory screen: integer hits mark nodal-line placements; \
the rank test is authoritative";

/// Shared arithmetic of the placement screens: for each axis and each
/// 1 ≤ i ≤ i_max, flags i·(c−α)/(β−α) landing within `tau` of an integer
/// (zero included: sitting on the region edge fails every frequency).
fn integer_screen(center: &[f64], region: &Region, i_max: u32, tau: f64) -> CorollaryReport {
    let mut failing = Vec::new();
    for (axis, c) in center.iter().enumerate() {
        let (lo, hi) = region.span(axis);
        let rel = (c - lo) / (hi - lo);
        for i in 1..=i_max {
            let r = i as f64 * rel;
            if (r - r.round()).abs() < tau {
                failing.push(AxisHit { axis, index: i });
            }
        }
    }
    CorollaryReport {
        strategic_candidate: failing.is_empty(),
        failing,
        i_max,
        tolerance: tau,
        note: SCREEN_NOTE.to_string(),
    }
}

/// Placement screen for an interior pointwise sensor on a rectangular
/// region: candidate iff no i·(b−α)/(β−α) is an integer on either axis.
pub fn corollary_42_predicate(
    b: &Point,
    region: &Region,
    i_max: u32,
    tau_rat: f64,
) -> Result<CorollaryReport> {
    if b.dim() != region.dim() || region.dim() != 2 {
        return Err(Error::Precondition(
            "the pointwise placement screen takes a 2D point and region".into(),
        ));
    }
    if !region.contains(b) {
        return Err(Error::OutsideDomain(format!(
            "sensor point {b:?} lies outside the screened region"
        )));
    }
    Ok(integer_screen(
        &[b.coord(0), b.coord(1)],
        region,
        i_max,
        tau_rat,
    ))
}

/// Placement screen for a rectangular zone sensor carrying a symmetric
/// product profile: the same integer test applied to the support center.
pub fn corollary_41_predicate(
    sensor: &Sensor,
    region: &Region,
    i_max: u32,
    tau_rat: f64,
) -> Result<CorollaryReport> {
    let SensorGeometry::Zone { support } = sensor.geometry() else {
        return Err(Error::Precondition(
            "the zone placement screen takes a zone sensor".into(),
        ));
    };
    if !matches!(sensor.profile(), Some(Profile::SymmetricProduct { .. })) {
        return Err(Error::Precondition(
            "the zone placement screen needs a symmetric-product profile".into(),
        ));
    }
    if support.dim() != 2 || region.dim() != 2 {
        return Err(Error::Precondition(
            "the zone placement screen is two-dimensional".into(),
        ));
    }
    let center: Vec<f64> = (0..2)
        .map(|ax| {
            let (lo, hi) = support.span(ax);
            0.5 * (lo + hi)
        })
        .collect();
    Ok(integer_screen(&center, region, i_max, tau_rat))
}

/// Placement screen for a filament sensor: verifies the polyline is
/// reflection-symmetric about an axis-parallel line through its bounding-box
/// center, then applies the integer test to the center coordinates.
pub fn corollary_43_predicate(
    vertices: &[Point],
    region: &Region,
    i_max: u32,
    tau_rat: f64,
) -> Result<CorollaryReport> {
    if vertices.len() < 2 || vertices.iter().any(|v| v.dim() != 2) || region.dim() != 2 {
        return Err(Error::Precondition(
            "the filament placement screen takes a 2D polyline of at least two vertices".into(),
        ));
    }
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vertices {
        min_x = min_x.min(v.coord(0));
        max_x = max_x.max(v.coord(0));
        min_y = min_y.min(v.coord(1));
        max_y = max_y.max(v.coord(1));
    }
    let center = [0.5 * (min_x + max_x), 0.5 * (min_y + max_y)];
    let symmetric_about = |axis: usize| {
        let reflect = |v: &Point| {
            let mut c = [v.coord(0), v.coord(1)];
            c[axis] = 2.0 * center[axis] - c[axis];
            c
        };
        let matches_at = |i: usize, j: usize| {
            let r = reflect(&vertices[i]);
            (r[0] - vertices[j].coord(0)).abs() <= SYMMETRY_TOL
                && (r[1] - vertices[j].coord(1)).abs() <= SYMMETRY_TOL
        };
        let n = vertices.len();
        (0..n).all(|i| matches_at(i, i)) || (0..n).all(|i| matches_at(i, n - 1 - i))
    };
    if !symmetric_about(0) && !symmetric_about(1) {
        return Err(Error::Precondition(
            "the filament placement screen needs a polyline symmetric about an axis line".into(),
        ));
    }
    Ok(integer_screen(&center, region, i_max, tau_rat))
}

/// Rational detection on the squared side ratio of a rectangular region.
/// No detection predicts simple eigenvalues (multiplicity 1 throughout), so
/// a single sensor can suffice for the region.
pub fn multiplicity_condition_29(
    region: &Region,
    q_max: u32,
    tau_rat: f64,
) -> Result<RationalWitness> {
    if region.dim() != 2 {
        return Err(Error::Precondition(
            "the side-ratio condition takes a 2D region".into(),
        ));
    }
    let s1 = region.side(0);
    let s2 = region.side(1);
    Ok(rational_detect((s1 * s1) / (s2 * s2), q_max, tau_rat))
}

/// Canonical mode pair for the 1D study's cross-term instance.
const STUDY_PAIR: (u32, u32) = (6, 4);

/// Full report of the 1D pointwise-sensor study.
#[derive(Clone, Debug, Serialize)]
pub struct CounterExampleReport {
    pub schema: u32,
    pub alpha: f64,
    pub b: f64,
    pub beta: f64,
    pub truncation: usize,
    pub region_truncation: usize,
    pub horizon: f64,
    /// Blind modes per the even-integer rule {j : j·b ∈ 2N}.
    pub even_rule_modes: Vec<u32>,
    /// Blind modes detected numerically as {j : |φ_j(b)| < 1e-8}. The two
    /// sets are reported side by side, unreconciled.
    pub detected_blind_modes: Vec<u32>,
    /// Rank-route verdict for the whole domain.
    pub global: StrategicReport,
    pub regional_strategic: bool,
    pub regional_gramian_min_eigenvalue: f64,
    pub regional_gramian_threshold: f64,
    pub observability_constant: Option<f64>,
    /// ⟨φ_4, φ_6⟩ over the window: the cross term the study's argument
    /// turns on.
    pub cross_inner_product: f64,
    pub tan_instance: TanCondition,
}

/// Runs the 1D study: a pointwise sensor at `b` on the unit interval, judged
/// globally by the rank route and on the window ω = [α, α+b] by the
/// regional Gramian route. Both verdicts delegate to the observability
/// machinery; this function only assembles the report.
pub fn counterexample_1d(
    alpha: f64,
    b: f64,
    n: usize,
    horizon: f64,
) -> Result<CounterExampleReport> {
    let beta = alpha + b;
    if !(alpha > 0.0 && alpha < 1.0 && b > 0.0 && beta <= 1.0 + 1e-12) {
        return Err(Error::InvalidRegion(format!(
            "window [{alpha}, {beta}] does not fit inside the unit interval"
        )));
    }
    let pair_max = STUDY_PAIR.0.max(STUDY_PAIR.1) as usize;
    if n < pair_max {
        return Err(Error::Precondition(format!(
            "truncation {n} cannot cover the study's mode pair (needs at least {pair_max})"
        )));
    }
    let thresholds = Thresholds::default();
    let domain = DomainSpec::Interval { length: 1.0 };
    let basis = build_basis(&domain, None, n, Convention::Laplacian)?;
    let sensor = Sensor::pointwise("probe", Point::D1(b))?;
    let suite = SensorSuite::new(vec![sensor.clone()])?;
    let global = rank_test(&suite, &basis, &thresholds)?;

    let row = output_row(&sensor, &basis)?;
    let detected_blind_modes: Vec<u32> = (0..n)
        .filter(|&k| row[k].abs() < BLIND_TOL)
        .map(|k| (k + 1) as u32)
        .collect();
    let even_rule_modes: Vec<u32> = (1..=n as u32)
        .filter(|&j| {
            let half = j as f64 * b / 2.0;
            half.round() >= 1.0 && (half - half.round()).abs() < thresholds.tau_rat
        })
        .collect();

    let region = Region::Interval { a: alpha, b: beta.min(1.0) };
    let n_region = default_region_truncation(&basis, &region)?;
    let region_basis = build_basis(&domain, Some(&region), n_region, Convention::Laplacian)?;
    let gramian = regional_gramian(
        std::slice::from_ref(&sensor),
        &basis,
        &region_basis,
        horizon,
        &thresholds,
    )?;

    let (i0, j0) = STUDY_PAIR;
    let cross =
        inner_product_region(&basis, j0 as usize - 1, &basis, i0 as usize - 1, &region)?;

    Ok(CounterExampleReport {
        schema: 1,
        alpha,
        b,
        beta,
        truncation: n,
        region_truncation: n_region,
        horizon,
        even_rule_modes,
        detected_blind_modes,
        global,
        regional_strategic: gramian.is_positive(),
        regional_gramian_min_eigenvalue: gramian.min_eigenvalue(),
        regional_gramian_threshold: gramian.threshold(),
        observability_constant: observability_constant(&gramian),
        cross_inner_product: cross,
        tan_instance: tan_condition(i0, j0, alpha),
    })
}
