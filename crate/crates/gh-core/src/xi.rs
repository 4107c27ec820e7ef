//! Numerical checks that the comparison functions behind the product bounds
//! peak on the boundary.
//!
//! Two families are checked. On an interval,
//!
//! ```text
//! xi(x) = | (x + 1)^(1/p) - (alpha x + beta)^(1/p) |,   x in [0, t]
//! ```
//!
//! should attain its supremum at an endpoint. On a box, with nonnegative
//! weights and offsets,
//!
//! ```text
//! xi(k) = | (A + sum (a_n k_n)^p)^(1/p) - (B + sum (b_n k_n)^p)^(1/p) |
//! ```
//!
//! should attain its supremum at a corner. Each check scans a grid, evaluates
//! the endpoints/corners through the same arithmetic, and reports the defect
//! `grid_max - corner_max`. The extreme grid points ARE the corners (computed
//! bit for bit alike), so the defect is nonnegative and a pass means no grid
//! point beat the boundary by more than [`XI_PASS_TOL`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::GhError;
use crate::exponent::Exponent;
use crate::parallel::map_chunks;
use crate::scalar::Scalar;
use crate::space::product_index;
use crate::Result;

/// A boundary check passes when the grid exceeds the corners by at most this.
/// Strictly positive so that rounding noise at a flat maximum cannot flip a
/// true statement into a failure.
pub const XI_PASS_TOL: f64 = 1e-9;

/// Hard ceiling on grid evaluations per check.
pub const XI_MAX_EVALS: usize = 100_000_000;

/// Most axes a box check will take; the grid is exponential in this.
pub const XI_MAX_AXES: usize = 4;

/// Outcome of one boundary check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XiReport<T> {
    pub grid_max: T,
    pub corner_max: T,
    /// `grid_max - corner_max`, always >= 0.
    pub defect: T,
    pub pass: bool,
    pub grid_points: usize,
    /// Coordinates of the first grid point attaining `grid_max`.
    pub grid_argmax: Vec<T>,
    /// Coordinates of the first corner attaining `corner_max`.
    pub corner_argmax: Vec<T>,
}

fn require_finite_p<T: Scalar>(p: Exponent<T>) -> Result<T> {
    match p {
        Exponent::Finite(v) => Ok(v),
        Exponent::Infinity => Err(GhError::InvalidExponent {
            value: f64::INFINITY,
        }),
    }
}

fn require_positive<T: Scalar>(v: T) -> Result<T> {
    if v.is_nan() || v <= T::zero() || v.is_infinite() {
        Err(GhError::NonpositiveScale {
            value: v.to_f64_lossy(),
        })
    } else {
        Ok(v)
    }
}

/// Largest value of `eval` over `0..total` with its first attaining index.
/// Scanned in fixed 8192-wide chunks so the result (argmax included) does not
/// depend on the worker count.
fn scan_flat<T: Scalar>(total: usize, eval: impl Fn(usize) -> T + Sync) -> (T, usize) {
    const CHUNK: usize = 8192;
    let ranges: Vec<(usize, usize)> = (0..total.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(total)))
        .collect();
    let outcomes = map_chunks(ranges, |(lo, hi)| {
        let mut best = eval(lo);
        let mut at = lo;
        for i in (lo + 1)..hi {
            let v = eval(i);
            if v > best {
                best = v;
                at = i;
            }
        }
        (best, at)
    });
    let (mut best, mut at) = outcomes[0];
    for &(v, i) in &outcomes[1..] {
        if v > best {
            best = v;
            at = i;
        }
    }
    (best, at)
}

/// Interval check: scans `xi` on `grid` evenly spaced points of `[0, t]` and
/// compares against `max(xi(0), xi(t))`.
pub fn xi_endpoint_check<T: Scalar>(
    alpha: T,
    beta: T,
    p: Exponent<T>,
    t: T,
    grid: usize,
) -> Result<XiReport<T>> {
    let pv = require_finite_p(p)?;
    let _ = Exponent::new(pv)?;
    require_positive(alpha)?;
    require_positive(beta)?;
    require_positive(t)?;
    if grid < 2 {
        return Err(GhError::GridTooSmall { got: grid });
    }
    if grid > XI_MAX_EVALS {
        return Err(GhError::CapExceeded {
            what: "interval grid points",
            required: grid as f64,
            cap: XI_MAX_EVALS as f64,
        });
    }

    let span = T::from_usize(grid - 1).unwrap();
    let coord = |i: usize| t * (T::from_usize(i).unwrap() / span);
    let xi = |x: T| (p.finish(x + T::one()) - p.finish(alpha * x + beta)).abs();

    let (grid_max, grid_at) = scan_flat(grid, |i| xi(coord(i)));
    // i = 0 and i = grid-1 reproduce x = 0 and x = t exactly, so the corner
    // values are grid values and the defect cannot go negative.
    let lo = xi(coord(0));
    let hi = xi(coord(grid - 1));
    let (corner_max, corner_at) = if hi > lo { (hi, grid - 1) } else { (lo, 0) };

    let defect = grid_max - corner_max;
    debug_assert!(defect >= T::zero());
    Ok(XiReport {
        grid_max,
        corner_max,
        defect,
        pass: defect <= T::from_f64_lossy(XI_PASS_TOL),
        grid_points: grid,
        grid_argmax: vec![coord(grid_at)],
        corner_argmax: vec![coord(corner_at)],
    })
}

/// Box check: scans `xi` on a `grid_per_axis^N` lattice over the box
/// `prod [0, t_n]` and compares against the `2^N` corners.
pub fn xi_corner_check<T: Scalar>(
    a: &[T],
    b: &[T],
    a_const: T,
    b_const: T,
    p: Exponent<T>,
    box_t: &[T],
    grid_per_axis: usize,
) -> Result<XiReport<T>> {
    let pv = require_finite_p(p)?;
    let _ = Exponent::new(pv)?;
    let n = a.len();
    if n == 0 {
        return Err(GhError::EmptyProduct);
    }
    if b.len() != n {
        return Err(GhError::LengthMismatch { a: n, b: b.len() });
    }
    if box_t.len() != n {
        return Err(GhError::LengthMismatch {
            a: n,
            b: box_t.len(),
        });
    }
    if n > XI_MAX_AXES {
        return Err(GhError::CapExceeded {
            what: "box axes",
            required: n as f64,
            cap: XI_MAX_AXES as f64,
        });
    }
    for (index, &v) in a.iter().chain(b).enumerate() {
        if v.is_nan() || v < T::zero() {
            return Err(GhError::NegativeWeight {
                index: index % n,
                value: v.to_f64_lossy(),
            });
        }
    }
    for (name, v) in [("a_const", a_const), ("b_const", b_const)] {
        if v.is_nan() || v < T::zero() {
            return Err(GhError::NegativeConstant {
                name,
                value: v.to_f64_lossy(),
            });
        }
    }
    for &t in box_t {
        require_positive(t)?;
    }
    if grid_per_axis < 2 {
        return Err(GhError::GridTooSmall { got: grid_per_axis });
    }
    let total = grid_per_axis
        .checked_pow(n as u32)
        .filter(|&t| t <= XI_MAX_EVALS)
        .ok_or(GhError::CapExceeded {
            what: "box grid points",
            required: (grid_per_axis as f64).powi(n as i32),
            cap: XI_MAX_EVALS as f64,
        })?;

    let span = T::from_usize(grid_per_axis - 1).unwrap();
    let coord = |axis: usize, i: usize| box_t[axis] * (T::from_usize(i).unwrap() / span);
    let xi = |kappa: &[T]| {
        let mut acc_a = a_const;
        let mut acc_b = b_const;
        for k in 0..n {
            acc_a = p.accumulate(acc_a, a[k] * kappa[k]);
            acc_b = p.accumulate(acc_b, b[k] * kappa[k]);
        }
        (p.finish(acc_a) - p.finish(acc_b)).abs()
    };

    let idx = product_index(&vec![grid_per_axis; n]);
    let at_flat = |flat: usize| {
        let kappa: Vec<T> = (0..n).map(|k| coord(k, idx.coord(flat, k))).collect();
        xi(&kappa)
    };
    let (grid_max, grid_at) = scan_flat(total, at_flat);
    let grid_argmax: Vec<T> = (0..n).map(|k| coord(k, idx.coord(grid_at, k))).collect();

    // Corner k_n in {0, t_n}: identical bits to the extreme grid coordinates,
    // since t * (0/span) = 0 and t * (span/span) = t exactly.
    let corner_coords = |mask: usize| -> Vec<T> {
        (0..n)
            .map(|k| if mask >> k & 1 == 1 { box_t[k] } else { T::zero() })
            .collect()
    };
    let mut corner_max = xi(&corner_coords(0));
    let mut corner_at = 0usize;
    for mask in 1..1usize << n {
        let v = xi(&corner_coords(mask));
        if v > corner_max {
            corner_max = v;
            corner_at = mask;
        }
    }

    let defect = grid_max - corner_max;
    debug_assert!(defect >= T::zero());
    Ok(XiReport {
        grid_max,
        corner_max,
        defect,
        pass: defect <= T::from_f64_lossy(XI_PASS_TOL),
        grid_points: total,
        grid_argmax,
        corner_argmax: corner_coords(corner_at),
    })
}

/// One recorded failure from [`verify_lemmas`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaFailure<T> {
    /// `"endpoint"` or `"corner"`.
    pub check: String,
    pub draw: usize,
    pub defect: T,
    /// Human-readable parameter dump sufficient to replay the case.
    pub params: String,
    pub report: XiReport<T>,
}

/// Aggregate outcome of randomized boundary checking.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport<T> {
    pub draws: usize,
    pub grid: usize,
    pub seed: u64,
    pub endpoint_failures: usize,
    pub corner_failures: usize,
    /// Largest endpoint-check defect seen, failing or not.
    pub worst_endpoint_defect: T,
    pub worst_corner_defect: T,
    /// At most the first five failures, with full reports.
    pub failures: Vec<LemmaFailure<T>>,
}

const MAX_RECORDED_FAILURES: usize = 5;

struct DrawParams {
    alpha: f64,
    beta: f64,
    p_interval: f64,
    t: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    a_const: f64,
    b_const: f64,
    box_t: Vec<f64>,
    p_box: f64,
    box_grid: usize,
}

// A draw in (0, c]: c * (1 - u) with u in [0, 1), so scales never vanish.
fn positive_draw(rng: &mut ChaCha8Rng, c: f64) -> f64 {
    c * (1.0 - rng.gen::<f64>())
}

fn sample_draw(rng: &mut ChaCha8Rng, grid: usize) -> DrawParams {
    let alpha = positive_draw(rng, 4.0);
    let beta = positive_draw(rng, 4.0);
    let p_interval = 1.0 + 7.0 * rng.gen::<f64>();
    let t = positive_draw(rng, 5.0);

    let n: usize = rng.gen_range(1..=3);
    let a: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 4.0).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 4.0).collect();
    let a_const = rng.gen::<f64>() * 4.0;
    let b_const = rng.gen::<f64>() * 4.0;
    let box_t: Vec<f64> = (0..n).map(|_| positive_draw(rng, 5.0)).collect();
    let p_box = 1.0 + 7.0 * rng.gen::<f64>();
    // Spread the eval budget evenly across axes.
    let box_grid = ((grid as f64).powf(1.0 / n as f64).floor() as usize).max(2);

    DrawParams {
        alpha,
        beta,
        p_interval,
        t,
        a,
        b,
        a_const,
        b_const,
        box_t,
        p_box,
        box_grid,
    }
}

/// Runs `draws` randomized endpoint checks and `draws` randomized corner
/// checks, each grid sized so one check costs about `grid` evaluations.
/// Identical `(draws, grid, seed)` always yields an identical report.
pub fn verify_lemmas<T: Scalar>(draws: usize, grid: usize, seed: u64) -> Result<VerifyReport<T>> {
    if grid < 2 {
        return Err(GhError::GridTooSmall { got: grid });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params: Vec<DrawParams> = (0..draws).map(|_| sample_draw(&mut rng, grid)).collect();

    let run_one = |dp: &DrawParams| -> Result<(XiReport<T>, XiReport<T>, String, String)> {
        let c = T::from_f64_lossy;
        let endpoint = xi_endpoint_check(
            c(dp.alpha),
            c(dp.beta),
            Exponent::new(c(dp.p_interval))?,
            c(dp.t),
            grid,
        )?;
        let a: Vec<T> = dp.a.iter().map(|&v| c(v)).collect();
        let b: Vec<T> = dp.b.iter().map(|&v| c(v)).collect();
        let box_t: Vec<T> = dp.box_t.iter().map(|&v| c(v)).collect();
        let corner = xi_corner_check(
            &a,
            &b,
            c(dp.a_const),
            c(dp.b_const),
            Exponent::new(c(dp.p_box))?,
            &box_t,
            dp.box_grid,
        )?;
        let endpoint_params = format!(
            "alpha={} beta={} p={} t={}",
            dp.alpha, dp.beta, dp.p_interval, dp.t
        );
        let corner_params = format!(
            "a={:?} b={:?} A={} B={} p={} t={:?} grid={}",
            dp.a, dp.b, dp.a_const, dp.b_const, dp.p_box, dp.box_t, dp.box_grid
        );
        Ok((endpoint, corner, endpoint_params, corner_params))
    };

    let outcomes: Result<Vec<_>> = map_chunks(params, |dp| run_one(&dp)).into_iter().collect();
    let outcomes = outcomes?;

    let mut report = VerifyReport {
        draws,
        grid,
        seed,
        endpoint_failures: 0,
        corner_failures: 0,
        worst_endpoint_defect: T::zero(),
        worst_corner_defect: T::zero(),
        failures: Vec::new(),
    };
    for (draw, (endpoint, corner, ep, cp)) in outcomes.into_iter().enumerate() {
        report.worst_endpoint_defect = report.worst_endpoint_defect.max(endpoint.defect);
        report.worst_corner_defect = report.worst_corner_defect.max(corner.defect);
        for (check, rep, params) in [("endpoint", endpoint, ep), ("corner", corner, cp)] {
            if rep.pass {
                continue;
            }
            if check == "endpoint" {
                report.endpoint_failures += 1;
            } else {
                report.corner_failures += 1;
            }
            if report.failures.len() < MAX_RECORDED_FAILURES {
                report.failures.push(LemmaFailure {
                    check: check.to_string(),
                    draw,
                    defect: rep.defect,
                    params,
                    report: rep,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Caps;
    use crate::linear::{subset_sup_exhaustive, WeightVector};

    #[test]
    fn identical_scales_make_xi_vanish() {
        let p = Exponent::new(2.0f64).unwrap();
        let got = xi_endpoint_check(1.0, 1.0, p, 3.0, 101).unwrap();
        assert_eq!(got.grid_max, 0.0);
        assert_eq!(got.corner_max, 0.0);
        assert!(got.pass);
    }

    #[test]
    fn endpoint_example_peaks_at_the_right_edge() {
        let p = Exponent::new(2.0f64).unwrap();
        let got = xi_endpoint_check(2.0, 0.5, p, 3.0, 10001).unwrap();
        assert!(got.pass);
        assert_eq!(got.defect, 0.0);
        assert_eq!(got.grid_argmax, vec![3.0]);
        assert_eq!(got.corner_argmax, vec![3.0]);
        let direct = 6.5f64.sqrt() - 2.0;
        assert!((got.corner_max - direct).abs() <= 1e-15);
    }

    #[test]
    fn corner_example_passes_with_zero_defect() {
        let p = Exponent::new(2.0f64).unwrap();
        let got = xi_corner_check(
            &[1.0, 2.0],
            &[2.0, 1.0],
            0.3,
            0.3,
            p,
            &[1.0, 1.0],
            201,
        )
        .unwrap();
        assert!(got.pass);
        assert_eq!(got.defect, 0.0);
        assert_eq!(got.grid_points, 201 * 201);
        let direct = (4.3f64.sqrt() - 1.3f64.sqrt()).abs();
        assert_eq!(got.corner_max, direct);
        // The two maximizing corners tie; the grid scan (first axis slowest)
        // reaches (0, 1) first while the corner scan (bit 0 = first axis)
        // reaches (1, 0) first.
        assert_eq!(got.grid_argmax, vec![0.0, 1.0]);
        assert_eq!(got.corner_argmax, vec![1.0, 0.0]);
    }

    #[test]
    fn unit_box_corners_reproduce_the_subset_sup() {
        // With zero offsets and a unit box, the corner values are exactly the
        // subset functional values, mask for mask.
        let p = Exponent::new(2.0f64).unwrap();
        let a = [1.0, 3.0, 0.7];
        let b = [2.0, 5.0, 0.1];
        let got = xi_corner_check(&a, &b, 0.0, 0.0, p, &[1.0, 1.0, 1.0], 2).unwrap();
        let wa = WeightVector::new(a.to_vec(), p).unwrap();
        let wb = WeightVector::new(b.to_vec(), p).unwrap();
        let sup = subset_sup_exhaustive(&wa, &wb, &Caps::default()).unwrap();
        assert_eq!(got.corner_max, sup.value);
        assert_eq!(got.grid_max, sup.value);
    }

    #[test]
    fn parameters_are_validated() {
        let p2 = Exponent::new(2.0f64).unwrap();
        assert!(matches!(
            xi_endpoint_check(0.0, 1.0, p2, 3.0, 11).unwrap_err(),
            GhError::NonpositiveScale { .. }
        ));
        assert!(matches!(
            xi_endpoint_check(1.0, 1.0, Exponent::Infinity, 3.0, 11).unwrap_err(),
            GhError::InvalidExponent { .. }
        ));
        assert!(matches!(
            xi_endpoint_check(1.0, 1.0, p2, 3.0, 1).unwrap_err(),
            GhError::GridTooSmall { got: 1 }
        ));
        assert!(matches!(
            xi_corner_check(&[-1.0], &[1.0], 0.0, 0.0, p2, &[1.0], 11).unwrap_err(),
            GhError::NegativeWeight { .. }
        ));
        assert!(matches!(
            xi_corner_check(&[1.0], &[1.0], -0.1, 0.0, p2, &[1.0], 11).unwrap_err(),
            GhError::NegativeConstant { .. }
        ));
        assert!(matches!(
            xi_corner_check(&[1.0], &[1.0], 0.0, 0.0, p2, &[0.0], 11).unwrap_err(),
            GhError::NonpositiveScale { .. }
        ));
        assert!(matches!(
            xi_corner_check(&[1.0, 2.0], &[1.0], 0.0, 0.0, p2, &[1.0, 1.0], 11).unwrap_err(),
            GhError::LengthMismatch { a: 2, b: 1 }
        ));
        assert!(matches!(
            xi_corner_check::<f64>(&[], &[], 0.0, 0.0, p2, &[], 11).unwrap_err(),
            GhError::EmptyProduct
        ));
        assert!(matches!(
            xi_corner_check(&[1.0; 5], &[1.0; 5], 0.0, 0.0, p2, &[1.0; 5], 11).unwrap_err(),
            GhError::CapExceeded { .. }
        ));
    }

    #[test]
    fn randomized_checks_all_pass() {
        let got: VerifyReport<f64> = verify_lemmas(25, 501, 1).unwrap();
        assert_eq!(got.endpoint_failures, 0);
        assert_eq!(got.corner_failures, 0);
        assert!(got.failures.is_empty());
        assert!(got.worst_endpoint_defect <= XI_PASS_TOL);
        assert!(got.worst_corner_defect <= XI_PASS_TOL);
    }

    #[test]
    fn verification_is_deterministic() {
        let a: VerifyReport<f64> = verify_lemmas(10, 301, 7).unwrap();
        let b: VerifyReport<f64> = verify_lemmas(10, 301, 7).unwrap();
        assert_eq!(a, b);
    }
}
