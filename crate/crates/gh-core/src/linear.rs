//! Linear products: the subset-supremum functional, the diagonal-map
//! distortion identity, GH bounds with attainability detection, and the
//! flat-tori calculator.
//!
//! For weight vectors `a, b` and exponent `p`, the central quantity is
//!
//! ```text
//! sup over S of | ||a restricted to S||_p - ||b restricted to S||_p |
//! ```
//!
//! It upper-bounds `2 d_GH` between the weighted products of any shared
//! unit-diameter factors, and whenever it collapses to the full-set value
//! `| ||a||_p - ||b||_p |` the distance is exactly half that.
//!
//! Every route below evaluates the functional through the one shared
//! accumulate/finish path, so cross-identities (witness re-evaluation, the
//! diagonal map on factors realizing distances 0 and 1) hold bit for bit.

use serde::{Deserialize, Serialize};

use crate::config::Caps;
use crate::error::GhError;
use crate::exponent::Exponent;
use crate::parallel::map_chunks;
use crate::scalar::Scalar;
use crate::space::{cycle, product_index, FiniteMetricSpace};
use crate::Result;

/// Slack on the attainability comparison `subset-sup <= | ||a|| - ||b|| |`.
/// The raw gap is reported so borderline calls can be judged by the caller.
pub const ATTAINABILITY_TOL: f64 = 1e-12;

/// Unit-diameter factors may miss 1 by at most this much.
pub const UNIT_DIAMETER_TOL: f64 = 1e-12;

/// Nonnegative weights `(a_1 .. a_N)` tied to an exponent `p in [1, inf]`.
/// Only constructible through [`new`](Self::new), which rejects negative
/// entries; no deserializer, so files cannot smuggle in an unvalidated one.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar + Serialize"))]
pub struct WeightVector<T> {
    entries: Vec<T>,
    p: Exponent<T>,
}

impl<T: Scalar> WeightVector<T> {
    pub fn new(entries: Vec<T>, p: Exponent<T>) -> Result<Self> {
        for (index, &v) in entries.iter().enumerate() {
            if v.is_nan() || v < T::zero() {
                return Err(GhError::NegativeWeight {
                    index,
                    value: v.to_f64_lossy(),
                });
            }
        }
        Ok(WeightVector { entries, p })
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn p(&self) -> Exponent<T> {
        self.p
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `||a||_p`, folded in index order (identical to the full-subset value).
    pub fn norm(&self) -> T {
        self.p.norm(&self.entries)
    }
}

fn check_compatible<T: Scalar>(a: &WeightVector<T>, b: &WeightVector<T>) -> Result<()> {
    if a.len() != b.len() {
        return Err(GhError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    if a.p() != b.p() {
        return Err(GhError::ExponentMismatch);
    }
    Ok(())
}

/// `| ||a_S||_p - ||b_S||_p |` for the subset encoded by `mask` (bit n picks
/// index n), folded in index order.
fn eval_mask<T: Scalar>(p: Exponent<T>, a: &[T], b: &[T], mask: u64) -> T {
    let mut acc_a = p.zero_acc();
    let mut acc_b = p.zero_acc();
    for n in 0..a.len() {
        if mask >> n & 1 == 1 {
            acc_a = p.accumulate(acc_a, a[n]);
            acc_b = p.accumulate(acc_b, b[n]);
        }
    }
    (p.finish(acc_a) - p.finish(acc_b)).abs()
}

fn mask_to_indices(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

/// The functional at an explicit index subset, for re-checking witnesses.
pub fn subset_value<T: Scalar>(
    a: &WeightVector<T>,
    b: &WeightVector<T>,
    subset: &[usize],
) -> Result<T> {
    check_compatible(a, b)?;
    let mut mask = 0u64;
    for &i in subset {
        if i >= a.len() {
            return Err(GhError::MapOutOfRange {
                index: i,
                value: i,
                n: a.len(),
            });
        }
        mask |= 1 << i;
    }
    Ok(eval_mask(a.p(), a.entries(), b.entries(), mask))
}

/// How a subset-sup value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsetSupMethod {
    /// Every one of the `2^N` subsets was evaluated.
    Exhaustive,
    /// `p = 1`: the sign-split subsets `{a_n > b_n}` and `{b_n > a_n}`
    /// dominate, so only those two are evaluated.
    ClosedFormP1,
    /// `p = inf`: some singleton always dominates.
    SingletonLinf,
}

impl std::fmt::Display for SubsetSupMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SubsetSupMethod::Exhaustive => write!(f, "exhaustive"),
            SubsetSupMethod::ClosedFormP1 => write!(f, "closed-form-p1"),
            SubsetSupMethod::SingletonLinf => write!(f, "singleton-linf"),
        }
    }
}

/// The supremum with its attaining subset. `value` is always the functional
/// evaluated at `witness_subset` (the maximizing subset with the smallest
/// bitmask encoding).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsetSupResult<T> {
    pub value: T,
    pub witness_subset: Vec<usize>,
    pub method: SubsetSupMethod,
}

/// Exact subset supremum. Dispatches to the p=1 or p=inf shortcut when one
/// applies, otherwise enumerates all subsets (capped).
pub fn subset_sup<T: Scalar>(
    a: &WeightVector<T>,
    b: &WeightVector<T>,
    caps: &Caps,
) -> Result<SubsetSupResult<T>> {
    check_compatible(a, b)?;
    match a.p() {
        Exponent::Infinity => Ok(singleton_linf(a, b)),
        Exponent::Finite(p) if p == T::one() => Ok(closed_form_p1(a, b)),
        Exponent::Finite(_) => subset_sup_exhaustive(a, b, caps),
    }
}

/// Full `2^N` enumeration regardless of `p`; the oracle for the shortcuts.
pub fn subset_sup_exhaustive<T: Scalar>(
    a: &WeightVector<T>,
    b: &WeightVector<T>,
    caps: &Caps,
) -> Result<SubsetSupResult<T>> {
    check_compatible(a, b)?;
    let n = a.len();
    let effective_cap = caps.subset_sup_n.min(63);
    if n as u32 > effective_cap {
        return Err(GhError::CapExceeded {
            what: "subset-sup indices",
            required: n as f64,
            cap: effective_cap as f64,
        });
    }

    let p = a.p();
    let (av, bv) = (a.entries(), b.entries());
    let total = 1u64 << n;
    let chunk_size = 1u64 << n.min(16);
    let ranges: Vec<(u64, u64)> = (0..total.div_ceil(chunk_size))
        .map(|c| (c * chunk_size, ((c + 1) * chunk_size).min(total)))
        .collect();

    let scan = |(lo, hi): (u64, u64)| -> (T, u64) {
        let mut best = eval_mask(p, av, bv, lo);
        let mut best_mask = lo;
        for mask in (lo + 1)..hi {
            let v = eval_mask(p, av, bv, mask);
            if v > best {
                best = v;
                best_mask = mask;
            }
        }
        (best, best_mask)
    };

    let outcomes = map_chunks(ranges, scan);
    let (mut best, mut best_mask) = outcomes[0];
    for &(v, mask) in &outcomes[1..] {
        if v > best {
            best = v;
            best_mask = mask;
        }
    }
    Ok(SubsetSupResult {
        value: best,
        witness_subset: mask_to_indices(best_mask, n),
        method: SubsetSupMethod::Exhaustive,
    })
}

/// For p=1 the supremum is attained on one of the two sign-split subsets,
/// since mixing signs only cancels. Both candidates are evaluated through the
/// shared functional so the reported value matches its witness bit for bit.
fn closed_form_p1<T: Scalar>(a: &WeightVector<T>, b: &WeightVector<T>) -> SubsetSupResult<T> {
    let (av, bv) = (a.entries(), b.entries());
    let mut plus = 0u64;
    let mut minus = 0u64;
    for n in 0..av.len() {
        if av[n] > bv[n] {
            plus |= 1 << n;
        } else if bv[n] > av[n] {
            minus |= 1 << n;
        }
    }
    let p = a.p();
    let vp = eval_mask(p, av, bv, plus);
    let vm = eval_mask(p, av, bv, minus);
    let mask = if vp > vm || (vp == vm && plus <= minus) {
        plus
    } else {
        minus
    };
    SubsetSupResult {
        value: vp.max(vm),
        witness_subset: mask_to_indices(mask, av.len()),
        method: SubsetSupMethod::ClosedFormP1,
    }
}

/// For p=inf the supremum is attained at a singleton: for any subset, the
/// larger of the two inner suprema, say `a_i`, gives
/// `|sup a_S - sup b_S| <= |a_i - b_i|`.
fn singleton_linf<T: Scalar>(a: &WeightVector<T>, b: &WeightVector<T>) -> SubsetSupResult<T> {
    let (av, bv) = (a.entries(), b.entries());
    let mut best = T::zero();
    let mut witness: Vec<usize> = Vec::new();
    for n in 0..av.len() {
        let v = (av[n] - bv[n]).abs();
        if v > best {
            best = v;
            witness = vec![n];
        }
    }
    SubsetSupResult {
        value: best,
        witness_subset: witness,
        method: SubsetSupMethod::SingletonLinf,
    }
}

/// The l^1 monotone shortcut: when one vector dominates the other
/// componentwise (and p = 1), `2 d_GH` is the plain difference sum
/// `sum |b_n - a_n|`. Returns `None` when the hypothesis fails.
pub fn l1_corollary_value<T: Scalar>(a: &WeightVector<T>, b: &WeightVector<T>) -> Option<T> {
    if a.p() != Exponent::Finite(T::one()) || b.p() != a.p() || a.len() != b.len() {
        return None;
    }
    let (av, bv) = (a.entries(), b.entries());
    let a_le_b = av.iter().zip(bv).all(|(&x, &y)| x <= y);
    let b_le_a = bv.iter().zip(av).all(|(&y, &x)| y <= x);
    if !a_le_b && !b_le_a {
        return None;
    }
    let mut sum = T::zero();
    for (&x, &y) in av.iter().zip(bv) {
        sum = sum + (y - x).abs();
    }
    Some(sum)
}

/// GH bounds between two linear products over shared unit-diameter factors.
/// All fields are d_GH values (halved); `sup` keeps the doubled functional
/// with its witness.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearGhResult<T> {
    pub upper: T,
    pub lower: T,
    pub exact: Option<T>,
    pub attainable: bool,
    /// `subset-sup - | ||a|| - ||b|| |`; attainable means this is below
    /// [`ATTAINABILITY_TOL`]. Nonnegative up to float noise.
    pub condition_gap: T,
    pub norm_a: T,
    pub norm_b: T,
    pub sup: SubsetSupResult<T>,
}

/// Upper bound `subset-sup / 2`, lower bound `| ||a|| - ||b|| | / 2`, and the
/// exact value when the two collapse.
pub fn linear_gh<T: Scalar>(
    a: &WeightVector<T>,
    b: &WeightVector<T>,
    caps: &Caps,
) -> Result<LinearGhResult<T>> {
    let sup = subset_sup(a, b, caps)?;
    let half = T::from_f64_lossy(0.5);
    let norm_a = a.norm();
    let norm_b = b.norm();
    let diff = (norm_a - norm_b).abs();
    let condition_gap = sup.value - diff;
    let attainable = condition_gap <= T::from_f64_lossy(ATTAINABILITY_TOL);
    let lower = half * diff;
    let upper = half * sup.value;
    Ok(LinearGhResult {
        upper,
        lower,
        exact: attainable.then_some(lower),
        attainable,
        condition_gap,
        norm_a,
        norm_b,
        sup,
    })
}

/// Distortion of the identity map between `prod a_n W_n` and `prod b_n W_n`,
/// streamed over point pairs without materializing either product. Factors
/// must have diameter 1 (the weights carry all scale).
pub fn diagonal_distortion<T: Scalar>(
    factors: &[FiniteMetricSpace<T>],
    a: &WeightVector<T>,
    b: &WeightVector<T>,
    caps: &Caps,
) -> Result<T> {
    check_compatible(a, b)?;
    if factors.len() != a.len() {
        return Err(GhError::SizeMismatch {
            what: "diagonal-map factors vs weights",
            expected: a.len(),
            got: factors.len(),
        });
    }
    let unit_tol = T::from_f64_lossy(UNIT_DIAMETER_TOL);
    for (k, f) in factors.iter().enumerate() {
        if (f.diameter() - T::one()).abs() > unit_tol {
            return Err(GhError::DiameterNotOne {
                factor: k,
                diam: f.diameter().to_f64_lossy(),
            });
        }
    }
    let sizes: Vec<usize> = factors.iter().map(|f| f.len()).collect();
    let total = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
    let total = match total {
        Some(t) if t <= caps.product_points => t,
        _ => {
            return Err(GhError::CapExceeded {
                what: "diagonal-map product points",
                required: sizes.iter().map(|&s| s as f64).product(),
                cap: caps.product_points as f64,
            })
        }
    };

    let p = a.p();
    let (av, bv) = (a.entries(), b.entries());
    let idx = product_index(&sizes);
    let rows: Vec<usize> = (0..total).collect();
    let row_max = |u: usize| -> T {
        let mut worst = T::zero();
        for v in (u + 1)..total {
            let mut acc_a = p.zero_acc();
            let mut acc_b = p.zero_acc();
            for (k, f) in factors.iter().enumerate() {
                let d = f.d(idx.coord(u, k), idx.coord(v, k));
                acc_a = p.accumulate(acc_a, av[k] * d);
                acc_b = p.accumulate(acc_b, bv[k] * d);
            }
            worst = worst.max((p.finish(acc_a) - p.finish(acc_b)).abs());
        }
        worst
    };
    let worst = map_chunks(rows, row_max)
        .into_iter()
        .fold(T::zero(), |acc, v| acc.max(v));
    Ok(worst)
}

/// Flat-tori comparison: the exact linear-product answer for the weights plus
/// a discretized cross-check on `cycle:resolution` factors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ToriReport<T> {
    pub linear: LinearGhResult<T>,
    pub resolution: usize,
    pub points_per_torus: usize,
    /// Identity-map distortion between the discretized tori.
    pub discrete_distortion: T,
    /// `subset-sup - discrete_distortion`; zero up to float noise because the
    /// cycle factors realize the corner distances 0 and 1.
    pub discretization_gap: T,
    /// The example criterion `| ||a|| - ||b|| | - max_n |a_n - b_n|`;
    /// nonnegative exactly when the bound is attainable.
    pub condition_margin: T,
}

/// d_GH between the flat tori with radius vectors `a` and `b` (l^2 products
/// of two rescaled unit-diameter circles), plus a discretization report.
pub fn tori_distance<T: Scalar>(
    a: [T; 2],
    b: [T; 2],
    resolution: usize,
    caps: &Caps,
) -> Result<ToriReport<T>> {
    let p = Exponent::new(T::from_f64_lossy(2.0))?;
    let wa = WeightVector::new(a.to_vec(), p)?;
    let wb = WeightVector::new(b.to_vec(), p)?;
    let linear = linear_gh(&wa, &wb, caps)?;

    let circle = cycle::<T>(resolution)?;
    let factors = vec![circle.clone(), circle];
    let discrete = diagonal_distortion(&factors, &wa, &wb, caps)?;

    let diff = (wa.norm() - wb.norm()).abs();
    let singleton = (a[0] - b[0]).abs().max((a[1] - b[1]).abs());
    Ok(ToriReport {
        discretization_gap: linear.sup.value - discrete,
        condition_margin: diff - singleton,
        points_per_torus: resolution * resolution,
        resolution,
        discrete_distortion: discrete,
        linear,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::simplex;

    fn caps() -> Caps {
        Caps::default()
    }

    fn w(entries: &[f64], p: f64) -> WeightVector<f64> {
        WeightVector::new(entries.to_vec(), Exponent::new(p).unwrap()).unwrap()
    }

    fn w_inf(entries: &[f64]) -> WeightVector<f64> {
        WeightVector::new(entries.to_vec(), Exponent::Infinity).unwrap()
    }

    #[test]
    fn negative_weights_are_rejected() {
        let err = WeightVector::new(vec![1.0, -2.0], Exponent::new(2.0).unwrap()).unwrap_err();
        assert!(matches!(err, GhError::NegativeWeight { index: 1, .. }));
    }

    #[test]
    fn torus_weights_attain_the_full_set() {
        let a = w(&[1.0, 3.0], 2.0);
        let b = w(&[2.0, 5.0], 2.0);
        let sup = subset_sup(&a, &b, &caps()).unwrap();
        let expected = 29f64.sqrt() - 10f64.sqrt();
        assert!((sup.value - expected).abs() <= 1e-12);
        assert_eq!(sup.witness_subset, vec![0, 1]);
        // The witness re-evaluates to the reported value exactly.
        assert_eq!(subset_value(&a, &b, &sup.witness_subset).unwrap(), sup.value);
    }

    #[test]
    fn p1_closed_form_on_a_monotone_pair() {
        let a = w(&[1.0, 2.0], 1.0);
        let b = w(&[2.0, 3.0], 1.0);
        let sup = subset_sup(&a, &b, &caps()).unwrap();
        assert_eq!(sup.value, 2.0);
        assert_eq!(sup.witness_subset, vec![0, 1]);
        assert_eq!(sup.method, SubsetSupMethod::ClosedFormP1);
    }

    #[test]
    fn equal_vectors_give_zero_with_empty_witness() {
        for p in [1.0, 2.0, 3.5] {
            let a = w(&[0.5, 1.5, 2.5], p);
            let sup = subset_sup(&a, &a, &caps()).unwrap();
            assert_eq!(sup.value, 0.0);
            assert!(sup.witness_subset.is_empty());
        }
        let a = w_inf(&[0.5, 1.5]);
        let sup = subset_sup(&a, &a, &caps()).unwrap();
        assert_eq!(sup.value, 0.0);
        assert!(sup.witness_subset.is_empty());
    }

    #[test]
    fn disjoint_supports_peak_at_a_singleton() {
        let a = w(&[1.0, 0.0], 2.0);
        let b = w(&[0.0, 1.0], 2.0);
        let sup = subset_sup(&a, &b, &caps()).unwrap();
        assert_eq!(sup.value, 1.0);
        assert_eq!(sup.witness_subset, vec![0]); // smaller mask beats {1}
        assert_eq!(sup.method, SubsetSupMethod::Exhaustive);
    }

    #[test]
    fn linf_singleton_matches_exhaustive_exactly() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = rng.gen_range(1..=10);
            let av: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 4.0).collect();
            let bv: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 4.0).collect();
            let a = w_inf(&av);
            let b = w_inf(&bv);
            let fast = subset_sup(&a, &b, &caps()).unwrap();
            let slow = subset_sup_exhaustive(&a, &b, &caps()).unwrap();
            assert_eq!(fast.value, slow.value);
        }
    }

    #[test]
    fn p1_closed_form_matches_exhaustive_on_dyadic_draws() {
        // Dyadic entries keep every partial sum exact, so the two routes
        // must agree bit for bit, witness included.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let n = rng.gen_range(1..=12);
            let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
                rng.gen_range(0..1u64 << 20) as f64 / (1u64 << 20) as f64
            };
            let av: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
            let bv: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
            let a = w(&av, 1.0);
            let b = w(&bv, 1.0);
            let fast = subset_sup(&a, &b, &caps()).unwrap();
            let slow = subset_sup_exhaustive(&a, &b, &caps()).unwrap();
            assert_eq!(fast.value, slow.value);
            assert_eq!(fast.witness_subset, slow.witness_subset);
        }
    }

    #[test]
    fn exhaustive_cap_is_enforced() {
        let a = w(&[0.5; 25], 2.0);
        let err = subset_sup(&a, &a, &caps()).unwrap_err();
        assert!(matches!(err, GhError::CapExceeded { .. }));
    }

    #[test]
    fn mismatches_are_rejected() {
        let a = w(&[1.0], 2.0);
        let b = w(&[1.0, 2.0], 2.0);
        assert!(matches!(
            subset_sup(&a, &b, &caps()).unwrap_err(),
            GhError::LengthMismatch { a: 1, b: 2 }
        ));
        let c = w(&[1.0], 3.0);
        assert!(matches!(
            subset_sup(&a, &c, &caps()).unwrap_err(),
            GhError::ExponentMismatch
        ));
    }

    #[test]
    fn symmetry_and_scale_equivariance() {
        let a = w(&[1.0, 3.0, 0.25], 2.0);
        let b = w(&[2.0, 0.5, 1.75], 2.0);
        let ab = subset_sup(&a, &b, &caps()).unwrap();
        let ba = subset_sup(&b, &a, &caps()).unwrap();
        assert_eq!(ab.value, ba.value);

        // Power-of-two scaling is exact in floats.
        let a4 = w(&[4.0, 12.0, 1.0], 2.0);
        let b4 = w(&[8.0, 2.0, 7.0], 2.0);
        let scaled = subset_sup(&a4, &b4, &caps()).unwrap();
        assert_eq!(scaled.value, 4.0 * ab.value);
    }

    #[test]
    fn tori_linear_gh_is_attainable() {
        let a = w(&[1.0, 3.0], 2.0);
        let b = w(&[2.0, 5.0], 2.0);
        let got = linear_gh(&a, &b, &caps()).unwrap();
        assert!(got.attainable);
        assert_eq!(got.condition_gap, 0.0);
        let expected = (29f64.sqrt() - 10f64.sqrt()) / 2.0;
        assert_eq!(got.exact, Some(got.lower));
        assert!((got.exact.unwrap() - expected).abs() <= 1e-12);
    }

    #[test]
    fn monotone_p1_matches_the_corollary() {
        let a = w(&[1.0, 2.0], 1.0);
        let b = w(&[2.0, 3.0], 1.0);
        let got = linear_gh(&a, &b, &caps()).unwrap();
        assert!(got.attainable);
        assert_eq!(got.exact, Some(1.0));
        assert_eq!(l1_corollary_value(&a, &b), Some(2.0));

        // Non-monotone pairs have no corollary value.
        let c = w(&[3.0, 1.0], 1.0);
        assert_eq!(l1_corollary_value(&a, &c), None);
        // Nor do other exponents.
        assert_eq!(
            l1_corollary_value(&w(&[1.0], 2.0), &w(&[2.0], 2.0)),
            None
        );
    }

    #[test]
    fn disjoint_supports_are_not_attainable() {
        let a = w(&[1.0, 0.0], 2.0);
        let b = w(&[0.0, 1.0], 2.0);
        let got = linear_gh(&a, &b, &caps()).unwrap();
        assert!(!got.attainable);
        assert_eq!(got.exact, None);
        assert_eq!(got.lower, 0.0);
        assert_eq!(got.upper, 0.5);
        assert_eq!(got.condition_gap, 1.0);
    }

    #[test]
    fn diagonal_distortion_single_pair() {
        let factors = vec![simplex::<f64>(2)];
        let a = w(&[1.0], 2.0);
        let b = w(&[2.0], 2.0);
        let got = diagonal_distortion(&factors, &a, &b, &caps()).unwrap();
        assert_eq!(got, 1.0);
    }

    #[test]
    fn diagonal_distortion_equals_subset_sup_bitwise() {
        // Two-point factors realize exactly the corner distances {0, 1}, so
        // the identity-map scan walks the same accumulate/finish sequence as
        // the subset enumeration.
        let factors = vec![simplex::<f64>(2), simplex::<f64>(2)];
        let a = w(&[1.0, 3.0], 2.0);
        let b = w(&[2.0, 5.0], 2.0);
        let dis = diagonal_distortion(&factors, &a, &b, &caps()).unwrap();
        let sup = subset_sup(&a, &b, &caps()).unwrap();
        assert_eq!(dis, sup.value);

        let same = diagonal_distortion(&factors, &a, &a, &caps()).unwrap();
        assert_eq!(same, 0.0);
    }

    #[test]
    fn diagonal_distortion_validates_unit_diameter() {
        let factors = vec![simplex::<f64>(2).scale(0.5).unwrap()];
        let a = w(&[1.0], 2.0);
        let err = diagonal_distortion(&factors, &a, &a, &caps()).unwrap_err();
        assert!(matches!(err, GhError::DiameterNotOne { factor: 0, .. }));
    }

    #[test]
    fn diagonal_distortion_respects_the_point_cap() {
        let tight = Caps {
            product_points: 3,
            ..Caps::default()
        };
        let factors = vec![simplex::<f64>(2), simplex::<f64>(2)];
        let a = w(&[1.0, 1.0], 2.0);
        let err = diagonal_distortion(&factors, &a, &a, &tight).unwrap_err();
        assert!(matches!(err, GhError::CapExceeded { .. }));
    }

    #[test]
    fn tori_distance_example() {
        let got = tori_distance([1.0, 3.0], [2.0, 5.0], 8, &caps()).unwrap();
        assert!(got.linear.attainable);
        let expected = 29f64.sqrt() - 10f64.sqrt();
        assert!((2.0 * got.linear.exact.unwrap() - expected).abs() <= 1e-12);
        assert!((got.condition_margin - (expected - 2.0)).abs() <= 1e-12);
        // Cycles realize distances 0 and 1, so the discretization already
        // attains the subset supremum.
        assert_eq!(got.discretization_gap, 0.0);
        assert_eq!(got.points_per_torus, 64);
    }

    #[test]
    fn tori_distance_identical_radii() {
        let got = tori_distance([1.0, 3.0], [1.0, 3.0], 4, &caps()).unwrap();
        assert_eq!(got.linear.exact, Some(0.0));
        assert_eq!(got.discrete_distortion, 0.0);
    }

    #[test]
    fn tori_condition_failure_reports_bounds() {
        let got = tori_distance([1.0, 1.0], [1.0, 2.0], 4, &caps()).unwrap();
        assert!(!got.linear.attainable);
        assert!(got.condition_margin < 0.0);
        let diff = (2f64.sqrt() - 5f64.sqrt()).abs();
        assert!((got.linear.lower - diff / 2.0).abs() <= 1e-12);
        assert_eq!(got.linear.upper, 0.5);
    }

    #[test]
    fn discretization_is_monotone_in_resolution() {
        let a = [1.0, 3.0];
        let b = [2.0, 4.5];
        let mut last = 0.0;
        for m in [4, 8, 16] {
            let got = tori_distance(a, b, m, &caps()).unwrap();
            assert!(got.discrete_distortion >= last);
            assert!(got.discrete_distortion <= got.linear.sup.value + 1e-12);
            last = got.discrete_distortion;
        }
    }
}
