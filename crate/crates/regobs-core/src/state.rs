//! Spectral states and their evolution under the diffusion semigroup.
//!
//! A state is a coefficient vector over an eigenbasis; the semigroup acts
//! diagonally, `c_k(t) = exp(λ_k t)·c_k(0)`. Forced evolution with
//! piecewise-constant inputs integrates the variation-of-constants formula
//! exactly, one constant piece at a time.

use nalgebra::DVector;

use crate::basis::{cross_matrix, EigenBasis};
use crate::domain::{Point, Region};
use crate::error::{Error, Result};
use crate::sensors::{input_column, Sensor};

/// Coefficients of a field over an eigenbasis.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralState {
    basis: EigenBasis,
    coefficients: DVector<f64>,
}

impl SpectralState {
    pub fn new(basis: EigenBasis, coefficients: DVector<f64>) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::Mismatch(format!(
                "{} coefficients for a basis of {} modes",
                coefficients.len(),
                basis.len()
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Precondition("coefficients must be finite".into()));
        }
        Ok(SpectralState {
            basis,
            coefficients,
        })
    }

    /// The zero field.
    pub fn zero(basis: EigenBasis) -> Self {
        let n = basis.len();
        SpectralState {
            basis,
            coefficients: DVector::zeros(n),
        }
    }

    /// The pure mode `k` with unit coefficient.
    pub fn mode(basis: EigenBasis, k: usize) -> Result<Self> {
        if k >= basis.len() {
            return Err(Error::Precondition(format!(
                "mode {k} exceeds truncation {}",
                basis.len()
            )));
        }
        let mut c = DVector::zeros(basis.len());
        c[k] = 1.0;
        Ok(SpectralState {
            basis,
            coefficients: c,
        })
    }

    pub fn basis(&self) -> &EigenBasis {
        &self.basis
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    /// L² norm over the basis span (coefficient norm, by orthonormality).
    pub fn norm(&self) -> f64 {
        self.coefficients.norm()
    }
}

/// Sample times for output trajectories: finite, non-negative, strictly
/// increasing, with the horizon at the last sample.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    samples: Vec<f64>,
}

impl TimeGrid {
    /// `count` equally spaced samples on `[0, horizon]`, endpoints included.
    pub fn uniform(horizon: f64, count: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidTimeGrid(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidTimeGrid(format!(
                "at least 2 samples required, got {count}"
            )));
        }
        let step = horizon / (count - 1) as f64;
        let samples = (0..count)
            .map(|s| if s + 1 == count { horizon } else { s as f64 * step })
            .collect();
        Ok(TimeGrid { samples })
    }

    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidTimeGrid("no samples".into()));
        }
        if samples[0] < 0.0 || samples.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidTimeGrid(
                "samples must be finite and non-negative".into(),
            ));
        }
        if samples.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTimeGrid(
                "samples must be strictly increasing".into(),
            ));
        }
        Ok(TimeGrid { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.samples.last().unwrap()
    }
}

/// One piecewise-constant control channel: `values[i]` on
/// `[breakpoints[i], breakpoints[i+1])`, zero outside the covered range.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseConstant {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::InvalidControl(format!(
                "{} breakpoints do not delimit {} value pieces",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidControl("non-finite control data".into()));
        }
        if breakpoints[0] < 0.0 {
            return Err(Error::InvalidControl("breakpoints must start at or after 0".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidControl(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(PiecewiseConstant {
            breakpoints,
            values,
        })
    }

    /// A single constant piece on `[t0, t1)`.
    pub fn constant(value: f64, t0: f64, t1: f64) -> Result<Self> {
        PiecewiseConstant::new(vec![t0, t1], vec![value])
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Iterates `(piece start, piece end, value)`.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(self.values.iter())
            .map(|(w, v)| (w[0], w[1], *v))
    }

    /// Control value at time `t` (zero outside the covered range).
    pub fn value_at(&self, t: f64) -> f64 {
        self.pieces()
            .find(|(a, b, _)| t >= *a && t < *b)
            .map(|(_, _, v)| v)
            .unwrap_or(0.0)
    }
}

/// Free evolution: `c_k(t) = exp(λ_k t)·c_k(0)`.
pub fn evolve(state: &SpectralState, t: f64) -> Result<SpectralState> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Precondition(format!(
            "evolution time must be non-negative, got {t}"
        )));
    }
    let coefficients = DVector::from_iterator(
        state.basis.len(),
        state
            .coefficients
            .iter()
            .enumerate()
            .map(|(k, c)| (state.basis.eigenvalue(k) * t).exp() * c),
    );
    Ok(SpectralState {
        basis: state.basis.clone(),
        coefficients,
    })
}

/// Forced evolution under `actuators` driven by piecewise-constant controls:
///
/// ```text
/// c_k(t) = e^{λ_k t} c_k(0) + Σ_a b_k^a Σ_pieces v·(e^{λ_k(t−τ₀)} − e^{λ_k(t−τ₁)})/λ_k
/// ```
///
/// with `b_k^a = ⟨f_a, φ_k⟩`; the per-piece factor is the exact integral of
/// the constant piece against the semigroup. Controls must live inside
/// `[0, t]`; intervals they do not cover contribute nothing.
pub fn evolve_with_input(
    state: &SpectralState,
    t: f64,
    actuators: &[Sensor],
    controls: &[PiecewiseConstant],
) -> Result<SpectralState> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Precondition(format!(
            "evolution time must be non-negative, got {t}"
        )));
    }
    if actuators.len() != controls.len() {
        return Err(Error::InvalidControl(format!(
            "{} actuators but {} control channels",
            actuators.len(),
            controls.len()
        )));
    }
    for control in controls {
        if control.end() > t + 1e-12 {
            return Err(Error::InvalidControl(format!(
                "control piece ends at {} beyond the evolution time {t}",
                control.end()
            )));
        }
    }

    let mut next = evolve(state, t)?;
    for (actuator, control) in actuators.iter().zip(controls) {
        let b = input_column(actuator, &state.basis)?;
        for k in 0..state.basis.len() {
            let lambda = state.basis.eigenvalue(k);
            let mut forced = 0.0;
            for (tau0, tau1, v) in control.pieces() {
                if lambda.abs() < 1e-12 {
                    forced += v * (tau1 - tau0);
                } else {
                    forced +=
                        v * ((lambda * (t - tau0)).exp() - (lambda * (t - tau1)).exp()) / lambda;
                }
            }
            next.coefficients[k] += b[k] * forced;
        }
    }
    Ok(next)
}

/// Field value Σ c_k φ_k(p) at a point of the domain closure.
pub fn eval_state(state: &SpectralState, p: &Point) -> Result<f64> {
    if p.dim() != state.basis.dim() {
        return Err(Error::Mismatch(format!(
            "point dimension {} does not match basis dimension {}",
            p.dim(),
            state.basis.dim()
        )));
    }
    if !state.basis.domain().contains(p) {
        return Err(Error::OutsideDomain(format!("{p:?}")));
    }
    Ok((0..state.basis.len())
        .map(|k| state.coefficients[k] * state.basis.eval(k, p))
        .sum())
}

/// Restriction to a subregion: the coefficients of the region-adapted
/// expansion, `a_k = Σ_m c_m ⟨φ_m, ψ_k⟩_ω`. The restriction never gains
/// norm.
pub fn restrict(
    state: &SpectralState,
    region: &Region,
    region_basis: &EigenBasis,
) -> Result<SpectralState> {
    if !region_basis.span().approx_eq(region) {
        return Err(Error::Mismatch(
            "region basis is not adapted to the requested region".into(),
        ));
    }
    region.validate_in(state.basis.domain())?;
    let x = cross_matrix(&state.basis, region_basis, region)?;
    let coefficients = x.transpose() * &state.coefficients;
    Ok(SpectralState {
        basis: region_basis.clone(),
        coefficients,
    })
}

/// Extension by zero: a region-supported state viewed in an enclosing basis,
/// `c_m = Σ_k a_k ⟨φ_m, ψ_k⟩_ω` (adjoint of [`restrict`], up to truncation).
pub fn extend(state: &SpectralState, target_basis: &EigenBasis) -> Result<SpectralState> {
    let region = *state.basis.span();
    region.validate_in(target_basis.domain())?;
    let x = cross_matrix(target_basis, &state.basis, &region)?;
    let coefficients = x * &state.coefficients;
    Ok(SpectralState {
        basis: target_basis.clone(),
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, Convention, ModeIndex};
    use crate::domain::DomainSpec;
    use crate::sensors::{Profile, SensorGeometry};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn interval_basis(n: usize) -> EigenBasis {
        build_basis(
            &DomainSpec::Interval { length: 1.0 },
            None,
            n,
            Convention::Laplacian,
        )
        .unwrap()
    }

    #[test]
    fn evolve_identity_at_zero() {
        let basis = interval_basis(4);
        let x = SpectralState::new(basis, DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0])).unwrap();
        let y = evolve(&x, 0.0).unwrap();
        assert_eq!(x.coefficients(), y.coefficients());
    }

    #[test]
    fn evolve_first_mode_decay() {
        let basis = interval_basis(3);
        let x = SpectralState::mode(basis, 0).unwrap();
        let y = evolve(&x, 0.1).unwrap();
        let want = (-0.1 * PI * PI).exp();
        assert_abs_diff_eq!(y.coefficients()[0], want, epsilon = 1e-15);
        assert_abs_diff_eq!(want, 0.372708, epsilon = 1e-6);
        assert_eq!(y.coefficients()[1], 0.0);
    }

    #[test]
    fn evolve_rejects_negative_time() {
        let basis = interval_basis(2);
        let x = SpectralState::mode(basis, 0).unwrap();
        assert!(matches!(evolve(&x, -0.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn long_horizon_decays_to_noise_floor() {
        let basis = interval_basis(1);
        let x = SpectralState::mode(basis, 0).unwrap();
        let y = evolve(&x, 5.0).unwrap();
        assert!(y.coefficients()[0].abs() < 1e-20);
    }

    #[test]
    fn semigroup_composition() {
        let basis = interval_basis(6);
        let x = SpectralState::new(
            basis,
            DVector::from_vec(vec![0.3, -1.2, 0.8, 0.05, -0.4, 1.0]),
        )
        .unwrap();
        let one_shot = evolve(&x, 0.7).unwrap();
        let two_step = evolve(&evolve(&x, 0.3).unwrap(), 0.4).unwrap();
        for k in 0..6 {
            let denom = one_shot.coefficients()[k].abs().max(1e-300);
            assert!(
                ((one_shot.coefficients()[k] - two_step.coefficients()[k]) / denom).abs() < 1e-12
            );
        }
    }

    #[test]
    fn evolution_is_a_contraction() {
        let basis = interval_basis(5);
        let x = SpectralState::new(
            basis,
            DVector::from_vec(vec![1.0, 2.0, -3.0, 0.1, 0.7]),
        )
        .unwrap();
        assert!(evolve(&x, 0.05).unwrap().norm() <= x.norm());
    }

    fn first_mode_actuator() -> Sensor {
        Sensor::new(
            "heater",
            SensorGeometry::Zone {
                support: Region::Interval { a: 0.0, b: 1.0 },
            },
            Some(Profile::Mode {
                index: ModeIndex::D1(1),
            }),
        )
        .unwrap()
    }

    #[test]
    fn constant_input_closed_form() {
        // ċ₁ = λ₁c₁ + u with c₁(0) = 0, u ≡ 1 on [0, T]: c₁(T) = (e^{λ₁T}−1)/λ₁.
        let basis = interval_basis(4);
        let x0 = SpectralState::zero(basis.clone());
        let t = 0.2;
        let u = PiecewiseConstant::constant(1.0, 0.0, t).unwrap();
        let xt = evolve_with_input(&x0, t, &[first_mode_actuator()], &[u]).unwrap();
        let lambda = basis.eigenvalue(0);
        let want = ((lambda * t).exp() - 1.0) / lambda;
        assert_abs_diff_eq!(xt.coefficients()[0], want, epsilon = 1e-14);
        for k in 1..4 {
            assert_abs_diff_eq!(xt.coefficients()[k], 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn forced_evolution_matches_rk4() {
        // Independent oracle: fixed-step RK4 on ċ = λc + b·u(τ) with a
        // two-piece control, stepped inside each constant piece.
        let basis = interval_basis(3);
        let x0 = SpectralState::new(basis.clone(), DVector::from_vec(vec![0.4, -0.2, 0.1]))
            .unwrap();
        let t = 0.3;
        let u = PiecewiseConstant::new(vec![0.0, 0.12, 0.3], vec![2.0, -1.5]).unwrap();
        let actuator = first_mode_actuator();
        let got = evolve_with_input(&x0, t, &[actuator.clone()], &[u.clone()]).unwrap();

        let b = input_column(&actuator, &basis).unwrap();
        for k in 0..3 {
            let lambda = basis.eigenvalue(k);
            let mut c = x0.coefficients()[k];
            for (a0, a1, v) in u.pieces() {
                let steps = 4000;
                let h = (a1 - a0) / steps as f64;
                let f = |c: f64| lambda * c + b[k] * v;
                for _ in 0..steps {
                    let k1 = f(c);
                    let k2 = f(c + 0.5 * h * k1);
                    let k3 = f(c + 0.5 * h * k2);
                    let k4 = f(c + h * k3);
                    c += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                }
            }
            assert_abs_diff_eq!(got.coefficients()[k], c, epsilon = 1e-9);
        }
    }

    #[test]
    fn zero_control_reduces_to_free_evolution() {
        let basis = interval_basis(3);
        let x0 = SpectralState::new(basis, DVector::from_vec(vec![1.0, 0.5, -0.25])).unwrap();
        let u = PiecewiseConstant::constant(0.0, 0.0, 0.5).unwrap();
        let forced = evolve_with_input(&x0, 0.5, &[first_mode_actuator()], &[u]).unwrap();
        let free = evolve(&x0, 0.5).unwrap();
        assert_eq!(forced.coefficients(), free.coefficients());
    }

    #[test]
    fn control_beyond_horizon_rejected() {
        let basis = interval_basis(2);
        let x0 = SpectralState::zero(basis);
        let u = PiecewiseConstant::constant(1.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            evolve_with_input(&x0, 0.5, &[first_mode_actuator()], &[u]),
            Err(Error::InvalidControl(_))
        ));
    }

    #[test]
    fn eval_state_examples() {
        let basis = interval_basis(4);
        let x = SpectralState::mode(basis, 3).unwrap();
        // φ₄(1/2) = √2·sin(2π) = 0.
        assert_abs_diff_eq!(eval_state(&x, &Point::D1(0.5)).unwrap(), 0.0, epsilon = 1e-13);
        assert!(matches!(
            eval_state(&x, &Point::D1(1.5)),
            Err(Error::OutsideDomain(_))
        ));
    }

    #[test]
    fn restrict_to_full_domain_is_identity() {
        let basis = interval_basis(5);
        let full = Region::Interval { a: 0.0, b: 1.0 };
        let x = SpectralState::new(
            basis.clone(),
            DVector::from_vec(vec![0.2, -0.9, 0.4, 0.0, 1.1]),
        )
        .unwrap();
        let y = restrict(&x, &full, &basis).unwrap();
        for k in 0..5 {
            assert_abs_diff_eq!(y.coefficients()[k], x.coefficients()[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn restrict_blind_mode_onto_window() {
        // Restriction coefficients are cross inner products; checked against
        // direct quadrature of φ₄·ψ_k over the window.
        let basis = interval_basis(6);
        let region = Region::Interval { a: 0.25, b: 0.75 };
        let regional = build_basis(
            &DomainSpec::Interval { length: 1.0 },
            Some(&region),
            3,
            Convention::Laplacian,
        )
        .unwrap();
        let x = SpectralState::mode(basis.clone(), 3).unwrap();
        let a = restrict(&x, &region, &regional).unwrap();
        for k in 0..3 {
            let oracle = crate::quad::integrate(
                |xi| basis.eval(3, &Point::D1(xi)) * regional.eval(k, &Point::D1(xi)),
                0.25,
                0.75,
                1e-12,
            );
            assert_abs_diff_eq!(a.coefficients()[k], oracle, epsilon = 1e-11);
        }
    }

    #[test]
    fn restriction_never_gains_norm() {
        let basis = interval_basis(8);
        let region = Region::Interval { a: 0.3, b: 0.8 };
        let regional = build_basis(
            &DomainSpec::Interval { length: 1.0 },
            Some(&region),
            4,
            Convention::Laplacian,
        )
        .unwrap();
        let x = SpectralState::new(
            basis,
            DVector::from_vec(vec![0.9, -0.1, 0.3, 0.7, -0.6, 0.2, 0.05, -0.4]),
        )
        .unwrap();
        let a = restrict(&x, &region, &regional).unwrap();
        assert!(a.norm() <= x.norm() + 1e-12);
    }

    #[test]
    fn extend_then_restrict_roundtrips_resolved_modes() {
        // With the global truncation far above the regional one, zero
        // extension followed by restriction is close to the identity.
        let domain = DomainSpec::Interval { length: 1.0 };
        let region = Region::Interval { a: 0.25, b: 0.75 };
        let global = build_basis(&domain, None, 200, Convention::Laplacian).unwrap();
        let regional = build_basis(&domain, Some(&region), 3, Convention::Laplacian).unwrap();
        let a0 = SpectralState::new(regional.clone(), DVector::from_vec(vec![1.0, -0.5, 0.25]))
            .unwrap();
        let back = restrict(&extend(&a0, &global).unwrap(), &region, &regional).unwrap();
        for k in 0..3 {
            assert_abs_diff_eq!(back.coefficients()[k], a0.coefficients()[k], epsilon = 1e-3);
        }
    }

    #[test]
    fn time_grid_validation() {
        assert!(TimeGrid::uniform(1.0, 64).is_ok());
        assert!(matches!(
            TimeGrid::uniform(0.0, 8),
            Err(Error::InvalidTimeGrid(_))
        ));
        assert!(matches!(
            TimeGrid::uniform(1.0, 1),
            Err(Error::InvalidTimeGrid(_))
        ));
        assert!(matches!(
            TimeGrid::from_samples(vec![0.0, 0.5, 0.5]),
            Err(Error::InvalidTimeGrid(_))
        ));
        assert!(matches!(
            TimeGrid::from_samples(vec![-0.1, 0.5]),
            Err(Error::InvalidTimeGrid(_))
        ));
        let g = TimeGrid::uniform(1.0, 64).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.samples()[0], 0.0);
        assert_eq!(g.horizon(), 1.0);
    }
}
