//! One-dimensional extremum search: a uniform grid scan followed by
//! golden-section refinement of the best bracket.
//!
//! The functions searched here (detection probabilities and the witness as
//! functions of `phi_x`) are smooth sinusoids with a single maximum per
//! period, so a grid fine enough to isolate that maximum followed by a
//! golden-section search converges to it.

use std::f64::consts::TAU;

use crate::tol;

/// Location and value of an extremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub arg: f64,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `arg_tol`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, arg_tol: f64) -> Extremum {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > arg_tol {
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
    }
    let mid = 0.5 * (lo + hi);
    let fm = f(mid);
    [(x1, f1), (x2, f2), (mid, fm)].into_iter().fold(Extremum { arg: mid, value: fm }, |best, (x, v)| {
        if v > best.value {
            Extremum { arg: x, value: v }
        } else {
            best
        }
    })
}

/// Maximizes a `2π`-periodic function over `[0, 2π)`.
///
/// Scans `grid_points` uniform points, then refines the bracket around the
/// first best grid point. A flat function (grid spread below the algebraic
/// tolerance) reports `arg = 0`, the smallest non-negative maximizer. The
/// returned argument is wrapped into `[0, 2π)`.
pub fn maximize_periodic(f: impl Fn(f64) -> f64, grid_points: usize, arg_tol: f64) -> Extremum {
    assert!(grid_points >= 3, "grid must bracket an extremum");
    let step = TAU / grid_points as f64;
    let values: Vec<f64> = (0..grid_points).map(|i| f(i as f64 * step)).collect();

    let (mut best_i, mut best_v) = (0, values[0]);
    let mut min_v = values[0];
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best_v {
            best_i = i;
            best_v = v;
        }
        min_v = min_v.min(v);
    }
    if best_v - min_v <= tol::ALGEBRAIC {
        return Extremum { arg: 0.0, value: values[0] };
    }

    let centre = best_i as f64 * step;
    let refined = golden_section_max(&f, centre - step, centre + step, arg_tol);
    if refined.value >= best_v {
        Extremum { arg: refined.arg.rem_euclid(TAU), value: refined.value }
    } else {
        Extremum { arg: centre, value: best_v }
    }
}

/// Minimizes a `2π`-periodic function over `[0, 2π)`; see [`maximize_periodic`].
pub fn minimize_periodic(f: impl Fn(f64) -> f64, grid_points: usize, arg_tol: f64) -> Extremum {
    let e = maximize_periodic(|x| -f(x), grid_points, arg_tol);
    Extremum { arg: e.arg, value: -e.value }
}
