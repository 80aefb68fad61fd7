//! Small derivative-free 1-D solvers.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimizes `f` on `[a, b]` by golden-section search until the bracket is
/// narrower than `tol`. Returns `(x_min, f(x_min))`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let tol = tol.max(0.0);
    for _ in 0..500 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if c >= d {
            break;
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Coarse grid scan over `[a, b]` with `n` points followed by golden-section
/// refinement around the best grid point.
pub fn grid_then_golden<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    n: usize,
    tol: f64,
) -> (f64, f64) {
    let n = n.max(3);
    let h = (b - a) / (n - 1) as f64;
    let mut best = (a, f64::INFINITY);
    for i in 0..n {
        let x = a + h * i as f64;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    let lo = (best.0 - h).max(a);
    let hi = (best.0 + h).min(b);
    let refined = golden_section(&mut f, lo, hi, tol);
    if refined.1 <= best.1 {
        refined
    } else {
        best
    }
}

/// Locates a sign change of `f` on `[a, b]` by bisection. `fa` is `f(a)`,
/// already known to the caller. Stops once the bracket is narrower than `tol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, fa: f64, tol: f64) -> f64 {
    let sa = fa.is_sign_negative();
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if f(m).is_sign_negative() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, fx) = golden_section(|x| (x - 1.234).powi(2) + 3.0, -10.0, 10.0, 1e-10);
        assert!((x - 1.234).abs() < 1e-7);
        assert!((fx - 3.0).abs() < 1e-15);
    }

    #[test]
    fn grid_stage_escapes_local_minimum() {
        let f = |x: f64| (3.0 * x).cos() + 0.1 * x;
        let (x, _) = grid_then_golden(f, 0.0, 10.0, 200, 1e-10);
        // global minimum on [0, 10] is the cos trough nearest 0 (slope term)
        assert!((x - std::f64::consts::PI / 3.0).abs() < 0.05, "{x}");
    }

    #[test]
    fn bisection_converges_to_root() {
        let f = |x: f64| x * x - 2.0;
        let r = bisect(f, 0.0, 2.0, f(0.0), 1e-14);
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }
}
