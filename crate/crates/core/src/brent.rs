//! Bounded one-dimensional minimization (Brent's golden-section /
//! parabolic-interpolation hybrid).

/// Result of [`minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrentResult {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
    pub converged: bool,
}

const GOLDEN: f64 = 0.381_966_011_250_105_1; // (3 - sqrt(5)) / 2

/// Minimize `f` on `[lo, hi]` to absolute tolerance `tol` in `x`.
///
/// Follows the classic `fmin` scheme: the final interval satisfies
/// `|x - mid| <= 2 tol1 - (hi - lo)/2` with `tol1 = sqrt(eps)|x| + tol/3`.
pub fn minimize<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> BrentResult
where
    F: FnMut(f64) -> f64,
{
    assert!(lo < hi, "empty bracket [{lo}, {hi}]");
    let eps = f64::EPSILON.sqrt();
    let (mut a, mut b) = (lo, hi);
    let mut v = a + GOLDEN * (b - a);
    let mut w = v;
    let mut x = v;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    let mut fx = f(x);
    let mut fv = fx;
    let mut fw = fx;
    let mut evaluations = 1;
    let tol3 = tol / 3.0;

    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = eps * x.abs() + tol3;
        let t2 = 2.0 * tol1;
        if (x - xm).abs() <= t2 - 0.5 * (b - a) {
            return BrentResult { x, fx, evaluations, converged: true };
        }

        let mut golden = true;
        if e.abs() > tol1 {
            // trial parabola through x, v, w
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let r = e;
            e = d;
            if p.abs() < (0.5 * q * r).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < t2 || b - u < t2 {
                    d = if x < xm { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < xm { b - x } else { a - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 { x + d } else if d > 0.0 { x + tol1 } else { x - tol1 };
        let fu = f(u);
        evaluations += 1;

        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    BrentResult { x, fx, evaluations, converged: false }
}
