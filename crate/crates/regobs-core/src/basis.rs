//! Dirichlet eigenbases of the diffusion operator on an interval or
//! rectangle, global or adapted to a subregion.
//!
//! On an interval `(a, b)` the modes are
//!
//! ```text
//! φ_j(ξ) = √(2/(b−a)) · sin(jπ(ξ−a)/(b−a)),    j = 1, 2, …
//! ```
//!
//! and on a rectangle the two-factor products of these. They are orthonormal
//! in L² of their span. Eigenvalues come in two scale conventions: the
//! `laplacian` convention carries the π² factor of the Dirichlet Laplacian,
//!
//! ```text
//! λ_j  = −j²π²/(b−a)²           (interval)
//! λ_ij = −π²(i²/s₁² + j²/s₂²)   (rectangle with sides s₁, s₂)
//! ```
//!
//! while the `paper` config token selects the unscaled variant without π².
//! The two conventions order, group, and rank identically; only the decay
//! rates differ.
//!
//! Inner products of any two modes over any sub-interval or sub-rectangle
//! have closed forms built from the stable primitive
//! `∫ cos(wξ+c) dξ = Δ·sinc(wΔ/2)·cos(w·mid+c)`, which stays accurate as
//! `w → 0`; adaptive quadrature is kept as an independent cross-check.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::domain::{DomainSpec, Point, Region, GEOM_TOL};
use crate::error::{Error, Result};

/// Eigenvalue scale convention.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    /// λ = −π²·Σ (index/side)², the Dirichlet Laplacian spectrum.
    #[default]
    #[serde(rename = "laplacian")]
    Laplacian,
    /// Same spectrum without the π² factor (config token `paper`).
    #[serde(rename = "paper", alias = "unscaled")]
    Unscaled,
}

impl Convention {
    fn scale(self) -> f64 {
        match self {
            Convention::Laplacian => PI * PI,
            Convention::Unscaled => 1.0,
        }
    }
}

/// Mode label: one index per spatial axis, starting at 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModeIndex {
    D1(u32),
    D2(u32, u32),
}

impl ModeIndex {
    /// Index along `axis`.
    pub fn component(&self, axis: usize) -> u32 {
        match (self, axis) {
            (ModeIndex::D1(j), 0) => *j,
            (ModeIndex::D2(i, _), 0) => *i,
            (ModeIndex::D2(_, j), 1) => *j,
            _ => 0,
        }
    }

    fn lex_cmp(&self, other: &ModeIndex) -> Ordering {
        match (self, other) {
            (ModeIndex::D1(a), ModeIndex::D1(b)) => a.cmp(b),
            (ModeIndex::D2(a1, a2), ModeIndex::D2(b1, b2)) => a1.cmp(b1).then(a2.cmp(b2)),
            _ => Ordering::Equal,
        }
    }
}

/// One eigenpair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mode {
    pub index: ModeIndex,
    pub eigenvalue: f64,
}

/// One sine factor `amp · sin(freq·(ξ − origin))` of a mode.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SineFactor {
    pub amp: f64,
    pub freq: f64,
    pub origin: f64,
}

impl SineFactor {
    pub fn value(&self, xi: f64) -> f64 {
        self.amp * (self.freq * (xi - self.origin)).sin()
    }

    pub fn derivative(&self, xi: f64) -> f64 {
        self.amp * self.freq * (self.freq * (xi - self.origin)).cos()
    }

    /// Phase constant when the factor is written as `amp·sin(freq·ξ + c)`.
    fn phase(&self) -> f64 {
        -self.freq * self.origin
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// ∫_{r0}^{r1} cos(wξ + c) dξ, stable for any `w` including 0.
pub(crate) fn integral_cos(w: f64, c: f64, r0: f64, r1: f64) -> f64 {
    let delta = r1 - r0;
    let mid = 0.5 * (r0 + r1);
    delta * sinc(0.5 * w * delta) * (w * mid + c).cos()
}

/// ∫_{r0}^{r1} sin(wξ + c) dξ, stable for any `w` including 0.
pub(crate) fn integral_sin(w: f64, c: f64, r0: f64, r1: f64) -> f64 {
    let delta = r1 - r0;
    let mid = 0.5 * (r0 + r1);
    delta * sinc(0.5 * w * delta) * (w * mid + c).sin()
}

/// ∫_{r0}^{r1} a(ξ) dξ for a single sine factor.
pub(crate) fn sine_integral(a: &SineFactor, r0: f64, r1: f64) -> f64 {
    a.amp * integral_sin(a.freq, a.phase(), r0, r1)
}

/// ∫_{r0}^{r1} a(ξ)·b(ξ) dξ via the product-to-sum identity.
pub(crate) fn sine_product_integral(a: &SineFactor, b: &SineFactor, r0: f64, r1: f64) -> f64 {
    let diff = integral_cos(a.freq - b.freq, a.phase() - b.phase(), r0, r1);
    let sum = integral_cos(a.freq + b.freq, a.phase() + b.phase(), r0, r1);
    0.5 * a.amp * b.amp * (diff - sum)
}

/// Truncated Dirichlet eigenbasis over a span region inside a domain.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenBasis {
    domain: DomainSpec,
    span: Region,
    convention: Convention,
    modes: Vec<Mode>,
}

/// Builds the first `n` modes (by |eigenvalue|, rectangle ties broken
/// lexicographically by index) over `region`, or over the whole domain when
/// `region` is `None`.
pub fn build_basis(
    domain: &DomainSpec,
    region: Option<&Region>,
    n: usize,
    convention: Convention,
) -> Result<EigenBasis> {
    domain.validate()?;
    let span = match region {
        Some(r) => {
            r.validate_in(domain)?;
            *r
        }
        None => domain.full_region(),
    };
    if n == 0 {
        return Err(Error::InvalidBasis("truncation order must be at least 1".into()));
    }
    if n > 100_000 {
        return Err(Error::InvalidBasis(format!("truncation order {n} is unreasonably large")));
    }

    let scale = convention.scale();
    let modes = match span {
        Region::Interval { a, b } => {
            let len = b - a;
            (1..=n as u32)
                .map(|j| Mode {
                    index: ModeIndex::D1(j),
                    eigenvalue: -scale * (j as f64 / len).powi(2),
                })
                .collect()
        }
        Region::Rect { x, y } => {
            // Any mode outside the n×n index box is dominated by n modes
            // inside it, so enumerating the box suffices for the first n.
            let (s1, s2) = (x.1 - x.0, y.1 - y.0);
            let m = n as u32;
            let mut candidates = Vec::with_capacity(n * n);
            for i in 1..=m {
                for j in 1..=m {
                    let eigenvalue =
                        -scale * ((i as f64 / s1).powi(2) + (j as f64 / s2).powi(2));
                    candidates.push(Mode {
                        index: ModeIndex::D2(i, j),
                        eigenvalue,
                    });
                }
            }
            candidates.sort_by(|a, b| {
                a.eigenvalue
                    .abs()
                    .total_cmp(&b.eigenvalue.abs())
                    .then_with(|| a.index.lex_cmp(&b.index))
            });
            candidates.truncate(n);
            candidates
        }
    };

    Ok(EigenBasis {
        domain: *domain,
        span,
        convention,
        modes,
    })
}

impl EigenBasis {
    /// Global basis over the whole domain.
    pub fn global(domain: &DomainSpec, n: usize, convention: Convention) -> Result<Self> {
        build_basis(domain, None, n, convention)
    }

    /// Basis adapted to a subregion.
    pub fn adapted(
        domain: &DomainSpec,
        region: &Region,
        n: usize,
        convention: Convention,
    ) -> Result<Self> {
        build_basis(domain, Some(region), n, convention)
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    /// The set the basis is orthonormal over.
    pub fn span(&self) -> &Region {
        &self.span
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode(&self, k: usize) -> &Mode {
        &self.modes[k]
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.modes[k].eigenvalue
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// True when the span is the full domain.
    pub fn is_global(&self) -> bool {
        self.span.approx_eq(&self.domain.full_region())
    }

    /// The sine factor of mode `k` along `axis`.
    pub(crate) fn factor(&self, k: usize, axis: usize) -> SineFactor {
        let (lo, hi) = self.span.span(axis);
        let len = hi - lo;
        let j = self.modes[k].index.component(axis) as f64;
        SineFactor {
            amp: (2.0 / len).sqrt(),
            freq: j * PI / len,
            origin: lo,
        }
    }

    /// Value of mode `k` at `p`. The sine expressions extend analytically to
    /// the whole domain; for a region-adapted basis, points outside the span
    /// get the continuation of the formula, not the zero extension.
    pub fn eval(&self, k: usize, p: &Point) -> f64 {
        debug_assert_eq!(p.dim(), self.dim(), "point dimension must match the basis");
        (0..self.dim())
            .map(|ax| self.factor(k, ax).value(p.coord(ax)))
            .product()
    }

    /// Partial derivative of mode `k` along `axis` at `p`.
    pub fn partial(&self, k: usize, p: &Point, axis: usize) -> f64 {
        debug_assert_eq!(p.dim(), self.dim(), "point dimension must match the basis");
        (0..self.dim())
            .map(|ax| {
                let f = self.factor(k, ax);
                if ax == axis {
                    f.derivative(p.coord(ax))
                } else {
                    f.value(p.coord(ax))
                }
            })
            .product()
    }

    /// Outward normal derivative of mode `k` at a boundary point of the
    /// domain. Corners are rejected: the normal is ambiguous there.
    pub fn normal_derivative(&self, k: usize, p: &Point) -> Result<f64> {
        if p.dim() != self.dim() {
            return Err(Error::Mismatch(format!(
                "point dimension {} does not match basis dimension {}",
                p.dim(),
                self.dim()
            )));
        }
        match self.domain {
            DomainSpec::Interval { length } => {
                let x = p.coord(0);
                if x.abs() <= GEOM_TOL {
                    Ok(-self.partial(k, p, 0))
                } else if (x - length).abs() <= GEOM_TOL {
                    Ok(self.partial(k, p, 0))
                } else {
                    Err(Error::OutsideDomain(format!("{x} is not a boundary point")))
                }
            }
            DomainSpec::UnitSquare => {
                let (x, y) = (p.coord(0), p.coord(1));
                if !self.domain.contains(p) {
                    return Err(Error::OutsideDomain(format!("({x}, {y}) leaves the domain")));
                }
                let on_x = x.abs() <= GEOM_TOL || (x - 1.0).abs() <= GEOM_TOL;
                let on_y = y.abs() <= GEOM_TOL || (y - 1.0).abs() <= GEOM_TOL;
                match (on_x, on_y) {
                    (true, true) => Err(Error::Precondition(format!(
                        "({x}, {y}) is a corner; the outward normal is ambiguous"
                    ))),
                    (true, false) => {
                        let sign = if x.abs() <= GEOM_TOL { -1.0 } else { 1.0 };
                        Ok(sign * self.partial(k, p, 0))
                    }
                    (false, true) => {
                        let sign = if y.abs() <= GEOM_TOL { -1.0 } else { 1.0 };
                        Ok(sign * self.partial(k, p, 1))
                    }
                    (false, false) => Err(Error::OutsideDomain(format!(
                        "({x}, {y}) is not a boundary point"
                    ))),
                }
            }
        }
    }
}

/// L² inner product ⟨φ_a, φ_b⟩ over `region`, where the two modes may come
/// from different bases (for example a global mode against a region-adapted
/// one). Closed form; exact up to rounding.
pub fn inner_product_region(
    basis_a: &EigenBasis,
    mode_a: usize,
    basis_b: &EigenBasis,
    mode_b: usize,
    region: &Region,
) -> Result<f64> {
    if basis_a.dim() != basis_b.dim() || region.dim() != basis_a.dim() {
        return Err(Error::Mismatch(
            "bases and region must share one spatial dimension".into(),
        ));
    }
    if mode_a >= basis_a.len() || mode_b >= basis_b.len() {
        return Err(Error::Precondition(format!(
            "mode indices ({mode_a}, {mode_b}) exceed truncations ({}, {})",
            basis_a.len(),
            basis_b.len()
        )));
    }
    region.validate_in(basis_a.domain())?;
    region.validate_in(basis_b.domain())?;

    let mut product = 1.0;
    for ax in 0..region.dim() {
        let (lo, hi) = region.span(ax);
        product *= sine_product_integral(
            &basis_a.factor(mode_a, ax),
            &basis_b.factor(mode_b, ax),
            lo,
            hi,
        );
    }
    Ok(product)
}

/// Cross matrix X with `X[m, k] = ⟨φ_m, ψ_k⟩` over `region`, rows indexed by
/// `row_basis` modes and columns by `col_basis` modes.
pub fn cross_matrix(
    row_basis: &EigenBasis,
    col_basis: &EigenBasis,
    region: &Region,
) -> Result<DMatrix<f64>> {
    let mut x = DMatrix::zeros(row_basis.len(), col_basis.len());
    for m in 0..row_basis.len() {
        for k in 0..col_basis.len() {
            x[(m, k)] = inner_product_region(row_basis, m, col_basis, k, region)?;
        }
    }
    Ok(x)
}
