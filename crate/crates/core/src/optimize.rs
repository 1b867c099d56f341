//! One-dimensional maximization: geometric bracketing plus golden-section search.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub arg: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol` (absolute) or after
/// `max_iter` shrink steps.
pub fn golden_max<F>(f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Maximum
where
    F: Fn(f64) -> f64,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while (hi - lo).abs() > tol && iterations < max_iter {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        iterations += 1;
    }
    if f1 >= f2 {
        Maximum {
            arg: x1,
            value: f1,
            iterations,
        }
    } else {
        Maximum {
            arg: x2,
            value: f2,
            iterations,
        }
    }
}

/// Outcome of expanding a bracket around a starting point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bracket {
    /// `f(mid) >= f(lo)` and `f(mid) >= f(hi)`.
    Interior { lo: f64, mid: f64, hi: f64 },
    /// `f` kept increasing until `hi` hit the upper limit.
    AtUpper { hi: f64 },
    /// `f` kept increasing until `lo` hit the lower limit.
    AtLower { lo: f64 },
}

/// Brackets a maximum of `f` by stepping away from `start` by `step`,
/// doubling the step each time, within `[lower, upper]`.
pub fn bracket_additive<F>(f: &F, start: f64, step: f64, lower: f64, upper: f64) -> Bracket
where
    F: Fn(f64) -> f64,
{
    expand(f, start, lower, upper, |x, k| {
        x + k.signum() * step * (2f64.powf(k.abs()) - 1.0)
    })
}

/// Brackets a maximum of `f` on a positive axis by multiplying (dividing) by
/// `factor` from `start`, within `[lower, upper]`.
pub fn bracket_geometric<F>(f: &F, start: f64, factor: f64, lower: f64, upper: f64) -> Bracket
where
    F: Fn(f64) -> f64,
{
    expand(f, start, lower, upper, |x, k| x * factor.powf(k))
}

fn expand<F, M>(f: &F, start: f64, lower: f64, upper: f64, mv: M) -> Bracket
where
    F: Fn(f64) -> f64,
    M: Fn(f64, f64) -> f64,
{
    let f0 = f(start);

    // Walk upward: (before, current) are the last two points visited.
    let (mut before, mut current, mut f_current) = (start, start, f0);
    let mut k = 1.0;
    let up = loop {
        let x = mv(start, k).min(upper);
        let fx = f(x);
        if fx < f_current {
            break x;
        }
        if x >= upper {
            return Bracket::AtUpper { hi: upper };
        }
        before = current;
        current = x;
        f_current = fx;
        k += 1.0;
    };
    if current > start {
        return Bracket::Interior {
            lo: before,
            mid: current,
            hi: up,
        };
    }

    // The first upward step already fell: walk downward instead.
    let (mut before, mut current, mut f_current) = (up, start, f0);
    let mut k = 1.0;
    loop {
        let x = mv(start, -k).max(lower);
        let fx = f(x);
        if fx < f_current {
            return Bracket::Interior {
                lo: x,
                mid: current,
                hi: before,
            };
        }
        if x <= lower {
            return Bracket::AtLower { lo: lower };
        }
        before = current;
        current = x;
        f_current = fx;
        k += 1.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let m = golden_max(|x| -(x - 1.3).powi(2), -5.0, 5.0, 1e-10, 200);
        assert!((m.arg - 1.3).abs() < 1e-9);
    }

    #[test]
    fn geometric_bracket_contains_peak() {
        let f = |y: f64| -(y.ln() - 3.0).powi(2);
        match bracket_geometric(&f, 1.0, 4.0, 1e-12, 1e12) {
            Bracket::Interior { lo, mid, hi } => {
                assert!(lo < 3f64.exp() && 3f64.exp() < hi);
                assert!(f(mid) >= f(lo) && f(mid) >= f(hi));
            }
            other => panic!("{other:?}"),
        }
        match bracket_geometric(&f, 1e6, 4.0, 1e-12, 1e12) {
            Bracket::Interior { lo, hi, .. } => assert!(lo < 3f64.exp() && 3f64.exp() < hi),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn monotone_function_hits_limits() {
        assert_eq!(
            bracket_geometric(&|y: f64| y, 1.0, 4.0, 1e-12, 1e12),
            Bracket::AtUpper { hi: 1e12 }
        );
        assert_eq!(
            bracket_additive(&|x: f64| -x, 0.0, 1.0, -30.0, 30.0),
            Bracket::AtLower { lo: -30.0 }
        );
    }

    #[test]
    fn additive_bracket_both_directions() {
        for &peak in &[-17.2, 0.4, 55.0] {
            let f = |x: f64| -(x - peak).abs();
            match bracket_additive(&f, 0.0, 1.0, -1e3, 1e3) {
                Bracket::Interior { lo, hi, .. } => {
                    assert!(lo <= peak && peak <= hi, "{peak}: {lo} {hi}")
                }
                other => panic!("{other:?}"),
            }
        }
    }
}
