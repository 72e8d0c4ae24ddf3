//! Adaptive Gauss–Kronrod quadrature.
//!
//! A 7-point Gauss / 15-point Kronrod pair with interval bisection, used for
//! sensor profiles that have no closed-form pairing with the sine basis
//! (sample tables, shaped zone profiles, filament line integrals) and as the
//! independent cross-check for the closed-form inner products.

/// Kronrod abscissae on [0, 1] side of the symmetric 15-point rule.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// 7-point Gauss weights; the Gauss nodes are the odd-indexed Kronrod ones.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss–Kronrod evaluation on `[a, b]`: returns (kronrod, |kronrod − gauss|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);

    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;

    for i in 0..7 {
        let dx = h * XGK[i];
        let fsum = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * fsum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fsum;
        }
    }
    kronrod *= h;
    gauss *= h;
    (kronrod, (kronrod - gauss).abs())
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol` by adaptive
/// bisection. Orientation follows the endpoints (`a > b` flips the sign).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a, tol);
    }
    let tol = tol.max(f64::EPSILON);
    // (lo, hi, budget) intervals still to refine; budget splits in half with
    // the interval so the summed error stays under the requested tolerance.
    let mut stack = vec![(a, b, tol, 0u32)];
    let mut total = 0.0;
    while let Some((lo, hi, budget, depth)) = stack.pop() {
        let (value, err) = gk15(&f, lo, hi);
        if err <= budget || depth >= 40 {
            total += value;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * budget, depth + 1));
            stack.push((mid, hi, 0.5 * budget, depth + 1));
        }
    }
    total
}

/// Iterated 2D integral of `f` over `[ax, bx] × [ay, by]`.
///
/// The inner integral runs one decade tighter than the outer so the inner
/// error does not masquerade as outer-integrand roughness.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    (ax, bx): (f64, f64),
    (ay, by): (f64, f64),
    tol: f64,
) -> f64 {
    let inner_tol = tol * 0.1;
    integrate(
        |x| integrate(|y| f(x, y), ay, by, inner_tol),
        ax,
        bx,
        tol,
    )
}
