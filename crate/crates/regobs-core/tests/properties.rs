//! Randomized invariants tying the closed-form spectral arithmetic to
//! independent numerics.

use nalgebra::DVector;
use proptest::prelude::*;

use regobs_core::state::restrict;
use regobs_core::{
    build_basis, inner_product_region, quad, Convention, DomainSpec, Point, Region, SpectralState,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Every pairing the library computes in closed form must agree with
    /// adaptive quadrature of the same product, for arbitrary windows and
    /// mode choices, in both the global×global and global×adapted layouts.
    #[test]
    fn closed_form_pairings_match_quadrature(
        a in 0.01f64..0.55,
        width in 0.08f64..0.4,
        j in 0usize..8,
        k in 0usize..8,
    ) {
        let b = (a + width).min(0.97);
        let domain = DomainSpec::Interval { length: 1.0 };
        let region = Region::Interval { a, b };
        let global = build_basis(&domain, None, 8, Convention::Laplacian).unwrap();
        let adapted = build_basis(&domain, Some(&region), 8, Convention::Laplacian).unwrap();

        let closed = inner_product_region(&global, j, &global, k, &region).unwrap();
        let oracle = quad::integrate(
            |xi| global.eval(j, &Point::D1(xi)) * global.eval(k, &Point::D1(xi)),
            a,
            b,
            1e-12,
        );
        prop_assert!(
            (closed - oracle).abs() < 1e-9,
            "global pairing ({j},{k}) on [{a},{b}]: {closed} vs {oracle}"
        );

        let closed = inner_product_region(&global, j, &adapted, k, &region).unwrap();
        let oracle = quad::integrate(
            |xi| global.eval(j, &Point::D1(xi)) * adapted.eval(k, &Point::D1(xi)),
            a,
            b,
            1e-12,
        );
        prop_assert!(
            (closed - oracle).abs() < 1e-9,
            "cross pairing ({j},{k}) on [{a},{b}]: {closed} vs {oracle}"
        );
    }

    /// Restriction to a subregion never grows the coefficient norm: the
    /// restricted coordinates are those of an orthogonal projection in
    /// L²(ω), bounded by the L²(Ω) norm of the state.
    #[test]
    fn restriction_contracts_coefficient_norm(
        a in 0.05f64..0.5,
        width in 0.1f64..0.45,
        coeffs in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let b = (a + width).min(0.95);
        let domain = DomainSpec::Interval { length: 1.0 };
        let region = Region::Interval { a, b };
        let global = build_basis(&domain, None, 6, Convention::Laplacian).unwrap();
        let adapted = build_basis(&domain, Some(&region), 6, Convention::Laplacian).unwrap();
        let x = SpectralState::new(global, DVector::from_vec(coeffs)).unwrap();
        let restricted = restrict(&x, &region, &adapted).unwrap();
        prop_assert!(
            restricted.norm() <= x.norm() * (1.0 + 1e-9) + 1e-12,
            "restricted norm {} exceeds state norm {}",
            restricted.norm(),
            x.norm()
        );
    }
}
