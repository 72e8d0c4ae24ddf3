//! Observability analysis on a truncated eigenbasis.
//!
//! Two complementary routes decide whether a sensor suite can see every
//! retained mode of the diffusion dynamics over a region:
//!
//! * the rank route groups eigenvalues by multiplicity and asks each group's
//!   sensor block for full column rank, which certifies that no nonzero
//!   combination of same-eigenvalue modes is invisible;
//! * the Gramian route assembles the finite-horizon output energy form
//!   restricted to the region and asks for positive definiteness, which also
//!   yields a quantitative observability constant.
//!
//! Both operate on the same output matrix, so a disagreement outside
//! numerical-threshold bands indicates a bug, and the test suites lean on
//! that cross-check. Initial-state reconstruction solves the sampled output
//! equations in least squares after the Gramian gate confirms the problem is
//! determined.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::basis::{build_basis, cross_matrix, EigenBasis, ModeIndex};
use crate::domain::Region;
use crate::error::{Error, Result};
use crate::sensors::{
    output_matrix, output_row, validate_disjoint_supports, OutputTrajectory, Sensor, SensorSuite,
};
use crate::state::SpectralState;

/// Which decision route produced a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rank,
    Gramian,
}

/// Numerical cutoffs shared across the analysis routines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Relative gap under which two eigenvalues share a multiplicity group.
    pub eps_group: f64,
    /// Singular values below `tau_rank · σ_max · max(q, r)` do not count
    /// toward the rank of a group block.
    pub tau_rank: f64,
    /// A Gramian is positive when its smallest eigenvalue exceeds
    /// `tau_gram_rel · trace / n`.
    pub tau_gram_rel: f64,
    /// Absolute tolerance for recognizing a rational number by continued
    /// fractions.
    pub tau_rat: f64,
    /// Largest denominator tried by rational detection.
    pub q_max: u32,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            eps_group: 1e-9,
            tau_rank: 1e-8,
            tau_gram_rel: 1e-10,
            tau_rat: 1e-9,
            q_max: 1000,
        }
    }
}

/// Absolute floor under the relative rank cutoff. Unit-normalized
/// eigenfunctions give output entries of order one, evaluated with roundoff
/// near 1e-16, so anything under 1e-12 is noise and nothing legitimate
/// comes close to it.
const RANK_FLOOR_ABS: f64 = 1e-12;

/// Absolute floor under the trace-relative Gramian positivity threshold.
/// Gramian entries scale like squared output entries over decay rates;
/// roundoff-born matrices sit near 1e-33.
const GRAMIAN_FLOOR_ABS: f64 = 1e-30;

/// Modes of a basis partitioned into equal-eigenvalue groups.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupedSpectrum {
    groups: Vec<(f64, Vec<usize>)>,
}

impl GroupedSpectrum {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Representative eigenvalue of group `g`.
    pub fn eigenvalue(&self, g: usize) -> f64 {
        self.groups[g].0
    }

    /// Positions (into the basis) of the modes in group `g`.
    pub fn modes(&self, g: usize) -> &[usize] {
        &self.groups[g].1
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[usize])> {
        self.groups.iter().map(|(l, m)| (*l, m.as_slice()))
    }

    pub fn max_multiplicity(&self) -> usize {
        self.groups.iter().map(|(_, m)| m.len()).max().unwrap_or(0)
    }
}

/// Partitions the basis modes into groups of numerically equal eigenvalues.
///
/// Modes arrive sorted by |λ|, so a greedy scan suffices: a mode joins the
/// current group when its eigenvalue sits within `eps · max(1, |λ_ref|)` of
/// the group's first member.
pub fn group_eigenvalues(basis: &EigenBasis, eps: f64) -> GroupedSpectrum {
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for k in 0..basis.len() {
        let lambda = basis.eigenvalue(k);
        match groups.last_mut() {
            Some((rep, members)) if (lambda - *rep).abs() <= eps * rep.abs().max(1.0) => {
                members.push(k);
            }
            _ => groups.push((lambda, vec![k])),
        }
    }
    GroupedSpectrum { groups }
}

/// One multiplicity group's sensor block and its rank diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct GroupMatrix {
    pub eigenvalue: f64,
    /// Mode indices retained in this group.
    pub modes: Vec<ModeIndex>,
    pub multiplicity: usize,
    pub rank: usize,
    /// r-th largest singular value of the block: the margin that must stay
    /// positive for full column rank.
    pub min_singular_value: f64,
    /// The q×r block of sensor-row entries at this group's modes.
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
}

/// Verdict of the rank route, serializable as a report.
#[derive(Clone, Debug, Serialize)]
pub struct StrategicReport {
    pub schema: u32,
    pub method: Method,
    pub strategic: bool,
    /// Number of output channels q.
    pub channels: usize,
    /// Number of retained modes N.
    pub truncation: usize,
    pub max_multiplicity: usize,
    pub groups: Vec<GroupMatrix>,
    /// Positions (into `groups`) of rank-deficient groups.
    pub failing_groups: Vec<usize>,
}

fn singular_values_desc(m: &DMatrix<f64>) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Decides strategic placement by the per-group rank condition: the suite is
/// strategic for the basis exactly when every equal-eigenvalue group's q×r
/// sensor block has rank r (which forces q ≥ max multiplicity).
pub fn rank_test(
    suite: &SensorSuite,
    basis: &EigenBasis,
    thresholds: &Thresholds,
) -> Result<StrategicReport> {
    let c = output_matrix(suite, basis)?;
    let grouped = group_eigenvalues(basis, thresholds.eps_group);
    let q = suite.len();
    // Rank cutoff scale: the largest singular value of the whole output
    // matrix. A per-block scale would pass a group whose block is uniformly
    // tiny, exactly the blind placements the test exists to catch. The
    // absolute floor covers the placement where the whole matrix is
    // evaluation roundoff (a sensor on a nodal set of every retained mode,
    // e.g. the edge of an adapted region): relative to itself such a matrix
    // looks full rank, while in exact arithmetic it is zero.
    let sigma_max = singular_values_desc(c.matrix()).first().copied().unwrap_or(0.0);
    let mut groups = Vec::with_capacity(grouped.len());
    let mut failing = Vec::new();
    for (g, (lambda, members)) in grouped.iter().enumerate() {
        let r = members.len();
        let mut block = DMatrix::zeros(q, r);
        for (col, &k) in members.iter().enumerate() {
            block.set_column(col, &c.matrix().column(k));
        }
        let sv = singular_values_desc(&block);
        let cutoff = (thresholds.tau_rank * sigma_max * q.max(r) as f64).max(RANK_FLOOR_ABS);
        let rank = sv.iter().filter(|s| **s > cutoff).count();
        let min_sv = if sv.len() >= r { sv[r - 1] } else { 0.0 };
        if rank < r {
            failing.push(g);
        }
        groups.push(GroupMatrix {
            eigenvalue: lambda,
            modes: members.iter().map(|&k| basis.mode(k).index).collect(),
            multiplicity: r,
            rank,
            min_singular_value: min_sv,
            matrix: block,
        });
    }
    let max_multiplicity = grouped.max_multiplicity();
    Ok(StrategicReport {
        schema: 1,
        method: Method::Rank,
        strategic: q >= max_multiplicity && failing.is_empty(),
        channels: q,
        truncation: basis.len(),
        max_multiplicity,
        groups,
        failing_groups: failing,
    })
}

/// Produces a unit-norm state invisible to the suite, if one exists among
/// the retained modes: the null direction of the first rank-deficient group
/// block, embedded at that group's mode positions.
pub fn kernel_witness(
    suite: &SensorSuite,
    basis: &EigenBasis,
    thresholds: &Thresholds,
) -> Result<Option<SpectralState>> {
    let report = rank_test(suite, basis, thresholds)?;
    let Some(&g) = report.failing_groups.first() else {
        return Ok(None);
    };
    let grouped = group_eigenvalues(basis, thresholds.eps_group);
    let members = grouped.modes(g);
    let block = &report.groups[g].matrix;
    // Null right-singular direction via the r×r normal matrix, which always
    // exposes the kernel even when the block has fewer rows than columns.
    let normal = block.transpose() * block;
    let eig = SymmetricEigen::new(normal);
    let mut smallest = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[smallest] {
            smallest = i;
        }
    }
    let direction = eig.eigenvectors.column(smallest);
    let mut coeffs = DVector::zeros(basis.len());
    for (i, &k) in members.iter().enumerate() {
        coeffs[k] = direction[i];
    }
    let norm = coeffs.norm();
    coeffs /= norm;
    Ok(Some(SpectralState::new(basis.clone(), coeffs)?))
}

/// Finite-horizon output-energy form restricted to a region, with its
/// spectral diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Gramian {
    matrix: DMatrix<f64>,
    min_eigenvalue: f64,
    max_eigenvalue: f64,
    threshold: f64,
    horizon: f64,
}

impl Gramian {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.max_eigenvalue
    }

    /// Positivity cutoff this Gramian was judged against.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Whether the form is positive definite beyond the threshold, i.e. the
    /// suite observes the region on this horizon.
    pub fn is_positive(&self) -> bool {
        self.min_eigenvalue > self.threshold
    }

    pub fn observability_constant(&self) -> Option<f64> {
        observability_constant(self)
    }
}

/// The reconstruction-error amplification factor 1/√λ_min, available when
/// the Gramian is positive.
pub fn observability_constant(gramian: &Gramian) -> Option<f64> {
    if gramian.is_positive() {
        Some(1.0 / gramian.min_eigenvalue.sqrt())
    } else {
        None
    }
}

/// Assembles the regional observability Gramian over `[0, horizon]`.
///
/// With C the output matrix on the full-domain basis, the global form is
/// W_mn = (CᵀC)_mn · (e^{(λ_m+λ_n)T} − 1)/(λ_m + λ_n); compressing by the
/// cross matrix X of region-basis pairings gives M = Xᵀ W X on the region's
/// own modes. An empty sensor list yields the zero form, which is never
/// positive.
pub fn regional_gramian(
    sensors: &[Sensor],
    basis: &EigenBasis,
    region_basis: &EigenBasis,
    horizon: f64,
    thresholds: &Thresholds,
) -> Result<Gramian> {
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::InvalidTimeGrid(format!(
            "gramian horizon must be positive, got {horizon}"
        )));
    }
    if !basis.is_global() {
        return Err(Error::Precondition(
            "the output matrix lives on the full-domain basis".into(),
        ));
    }
    if basis.domain() != region_basis.domain() {
        return Err(Error::Mismatch(
            "global and regional bases describe different domains".into(),
        ));
    }
    if basis.convention() != region_basis.convention() {
        return Err(Error::Mismatch(
            "global and regional bases use different eigenvalue conventions".into(),
        ));
    }
    for sensor in sensors {
        sensor.validate_in(basis.domain())?;
    }
    validate_disjoint_supports(sensors)?;

    let n = basis.len();
    let mut c = DMatrix::zeros(sensors.len(), n);
    for (i, sensor) in sensors.iter().enumerate() {
        let row = output_row(sensor, basis)?;
        c.set_row(i, &row.transpose());
    }
    let ctc = c.transpose() * &c;
    let mut w = DMatrix::zeros(n, n);
    for m in 0..n {
        for l in 0..n {
            let s = basis.eigenvalue(m) + basis.eigenvalue(l);
            let k = if s.abs() < 1e-12 {
                horizon
            } else {
                ((s * horizon).exp() - 1.0) / s
            };
            w[(m, l)] = ctc[(m, l)] * k;
        }
    }
    let x = cross_matrix(basis, region_basis, region_basis.span())?;
    let mut m = x.transpose() * w * &x;
    // Symmetrize to wash out the asymmetry quadrature leaves behind.
    let mt = m.transpose();
    m = 0.5 * (&m + &mt);

    let n_r = region_basis.len();
    let eig = SymmetricEigen::new(m.clone());
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Floored for the same reason as the rank cutoff: a trace made of
    // evaluation roundoff must not certify its own eigenvalues as positive.
    let threshold =
        (thresholds.tau_gram_rel * m.trace().max(0.0) / n_r as f64).max(GRAMIAN_FLOOR_ABS);
    Ok(Gramian {
        matrix: m,
        min_eigenvalue,
        max_eigenvalue,
        threshold,
        horizon,
    })
}

/// Default regional truncation for a given global basis: keep the region
/// modes whose decay rate is at most a quarter of the global basis's fastest,
/// and at least one. Faster region modes decay below observational reach over
/// horizons the global truncation can resolve, which makes the compressed
/// form numerically singular regardless of sensor placement.
pub fn default_region_truncation(basis: &EigenBasis, region: &Region) -> Result<usize> {
    if !basis.is_global() {
        return Err(Error::Precondition(
            "region sizing starts from the full-domain basis".into(),
        ));
    }
    if region.approx_eq(basis.span()) {
        return Ok(basis.len());
    }
    let cap = basis.eigenvalue(basis.len() - 1).abs() / 4.0;
    let candidate = build_basis(basis.domain(), Some(region), basis.len(), basis.convention())?;
    let kept = (0..candidate.len())
        .take_while(|&k| candidate.eigenvalue(k).abs() <= cap)
        .count();
    Ok(kept.max(1))
}

/// Result of a least-squares initial-state recovery.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    /// Recovered initial state on the region basis.
    pub state: SpectralState,
    /// Norm of the stacked output residual at the solution.
    pub residual: f64,
    /// Gramian used for the feasibility gate.
    pub gramian: Gramian,
}

/// Recovers the regional initial state from sampled outputs.
///
/// Stacks one block C·diag(e^{λ t_s})·X per sample and solves for the region
/// coefficients in least squares (optionally ridge-regularized). The
/// regional Gramian over the trajectory's horizon gates the solve: an
/// indefinite form means the data cannot determine the state, reported as
/// [`Error::Underdetermined`] rather than a garbage estimate.
pub fn reconstruct_initial_state(
    trajectory: &OutputTrajectory,
    suite: &SensorSuite,
    basis: &EigenBasis,
    region_basis: &EigenBasis,
    ridge: f64,
    thresholds: &Thresholds,
) -> Result<Reconstruction> {
    if !ridge.is_finite() || ridge < 0.0 {
        return Err(Error::Precondition(format!(
            "ridge weight must be a finite nonnegative number, got {ridge}"
        )));
    }
    let q = suite.len();
    let s_count = trajectory.times.len();
    if trajectory.values.nrows() != q || trajectory.values.ncols() != s_count {
        return Err(Error::Mismatch(format!(
            "trajectory shape {}×{} does not match {} channels over {} samples",
            trajectory.values.nrows(),
            trajectory.values.ncols(),
            q,
            s_count
        )));
    }
    if s_count == 0 || trajectory.times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidTimeGrid(
            "trajectory needs finite nonnegative sample times".into(),
        ));
    }
    let horizon = *trajectory.times.last().unwrap();
    if horizon <= 0.0 {
        return Err(Error::InvalidTimeGrid(
            "trajectory must extend past t = 0".into(),
        ));
    }

    let gramian = regional_gramian(suite.sensors(), basis, region_basis, horizon, thresholds)?;
    if !gramian.is_positive() {
        return Err(Error::Underdetermined(format!(
            "gramian minimum eigenvalue {:.3e} is below the positivity threshold {:.3e}",
            gramian.min_eigenvalue(),
            gramian.threshold()
        )));
    }

    let c = output_matrix(suite, basis)?;
    let x = cross_matrix(basis, region_basis, region_basis.span())?;
    let n = basis.len();
    let n_r = region_basis.len();
    let mut a = DMatrix::zeros(q * s_count, n_r);
    let mut y = DVector::zeros(q * s_count);
    for (s, &t) in trajectory.times.iter().enumerate() {
        let mut decayed = x.clone();
        for m in 0..n {
            let scale = (basis.eigenvalue(m) * t).exp();
            decayed.row_mut(m).scale_mut(scale);
        }
        let block = c.matrix() * decayed;
        a.view_mut((s * q, 0), (q, n_r)).copy_from(&block);
        for i in 0..q {
            y[s * q + i] = trajectory.values[(i, s)];
        }
    }

    let coeffs = if ridge > 0.0 {
        let mut normal = a.transpose() * &a;
        for k in 0..n_r {
            normal[(k, k)] += ridge;
        }
        let rhs = a.transpose() * &y;
        Cholesky::new(normal)
            .ok_or_else(|| {
                Error::Underdetermined("ridge-regularized normal equations are singular".into())
            })?
            .solve(&rhs)
    } else {
        let svd = a.clone().svd(true, true);
        let sigma_max = svd
            .singular_values
            .iter()
            .copied()
            .fold(0.0_f64, f64::max);
        svd.solve(&y, thresholds.tau_rank * sigma_max)
            .map_err(|e| Error::Underdetermined(e.to_string()))?
    };
    let residual = (&a * &coeffs - &y).norm();
    Ok(Reconstruction {
        state: SpectralState::new(region_basis.clone(), coeffs)?,
        residual,
        gramian,
    })
}
