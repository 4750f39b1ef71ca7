//! Small adaptive quadrature used for flux areas and densities of states.

use crate::real::Real;

/// Adaptive Simpson integration of `f` over `[a, b]` to a relative tolerance.
///
/// The integrand is assumed continuous; endpoint square-root behavior should
/// first be removed with [`integrate_sqrt_endpoints`].
pub fn adaptive_simpson<R: Real, F: Fn(R) -> R>(f: &F, a: R, b: R, rel_tol: R) -> R {
    let m = (a + b) * R::of(0.5);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    // Absolute budget from the first estimate; the recursion halves it per split.
    let tol = whole.abs() * rel_tol + R::of(1e-300);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

fn simpson<R: Real>(a: R, b: R, fa: R, fm: R, fb: R) -> R {
    (b - a) / R::of(6.0) * (fa + R::of(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<R: Real, F: Fn(R) -> R>(
    f: &F,
    a: R,
    b: R,
    fa: R,
    fm: R,
    fb: R,
    whole: R,
    tol: R,
    depth: u32,
) -> R {
    let m = (a + b) * R::of(0.5);
    let lm = (a + m) * R::of(0.5);
    let rm = (m + b) * R::of(0.5);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= R::of(15.0) * tol {
        return left + right + delta / R::of(15.0);
    }
    let half_tol = tol * R::of(0.5);
    recurse(f, a, m, fa, flm, fm, left, half_tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, half_tol, depth - 1)
}

/// Integrates `f` over `[a, b]` when `f` vanishes like a square root at one or
/// both endpoints (turning points of a momentum extent).
///
/// The substitution x = mid + half·sinθ maps the interval to θ ∈ [−π/2, π/2]
/// and turns √(b−x) or √(x−a) factors into smooth cos²-like behavior.
pub fn integrate_sqrt_endpoints<R: Real, F: Fn(R) -> R>(f: &F, a: R, b: R, rel_tol: R) -> R {
    if b <= a {
        return R::zero();
    }
    let mid = (a + b) * R::of(0.5);
    let half = (b - a) * R::of(0.5);
    let g = move |theta: R| f(mid + half * theta.sin()) * half * theta.cos();
    adaptive_simpson(&g, -R::FRAC_PI_2(), R::FRAC_PI_2(), rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = adaptive_simpson(&|x: f64| x * x, 0.0, 1.0, 1e-12);
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn sine_over_half_period() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn circle_area_via_sqrt_endpoints() {
        // ∫_{-1}^{1} 2√(1−x²) dx = π
        let v = integrate_sqrt_endpoints(
            &|x: f64| 2.0 * (1.0 - x * x).max(0.0).sqrt(),
            -1.0,
            1.0,
            1e-12,
        );
        assert!(
            (v - std::f64::consts::PI).abs() < 1e-11,
            "got {v}, want pi"
        );
    }

    #[test]
    fn one_sided_root() {
        // ∫_0^1 √(1−x) dx = 2/3
        let v = integrate_sqrt_endpoints(&|x: f64| (1.0 - x).max(0.0).sqrt(), 0.0, 1.0, 1e-12);
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }
}
