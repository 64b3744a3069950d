//! Exact (Clopper-Pearson) binomial confidence intervals.
//!
//! The interval for `s` successes in `n` trials at failure probability
//! `alpha` is the pair of success probabilities at which the observed
//! outcome becomes just barely plausible:
//!
//! * lower bound `L`: the `p` where P(X ≥ s) = α/2 (0 when s = 0),
//! * upper bound `U`: the `p` where P(X ≤ s) = α/2 (1 when s = n).
//!
//! Both are found by bisection on the binomial CDF, evaluated in log space
//! so trials in the hundreds of thousands stay accurate.

/// Two-sided Clopper-Pearson interval.
///
/// Returns `(lower, upper)` with `lower ≤ successes/trials ≤ upper`, each
/// computed to absolute tolerance better than 1e-12.
///
/// # Panics
/// If `trials == 0`, `successes > trials`, or `alpha` is outside (0, 1).
pub fn clopper_pearson(trials: u64, successes: u64, alpha: f64) -> (f64, f64) {
    assert!(trials >= 1, "interval undefined for zero trials");
    assert!(successes <= trials);
    assert!(alpha > 0.0 && alpha < 1.0);
    let half = alpha / 2.0;
    let lower = if successes == 0 {
        0.0
    } else {
        // P(X ≥ s) grows with p; find where it reaches α/2.
        bisect(|p| (1.0 - binomial_cdf(successes - 1, trials, p)) - half)
    };
    let upper = if successes == trials {
        1.0
    } else {
        // P(X ≤ s) falls with p; find where it drops to α/2.
        bisect(|p| half - binomial_cdf(successes, trials, p))
    };
    (lower, upper)
}

/// Root of a function that is negative at 0 and positive at 1.
fn bisect(f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..64 {
        if hi - lo <= 1e-13 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// P(X ≤ k) for X ~ Binomial(n, p), by summing the smaller tail in log
/// space. O(min(k, n−k)) per call.
pub fn binomial_cdf(k: u64, n: u64, p: f64) -> f64 {
    debug_assert!(n >= 1);
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return if k >= n { 1.0 } else { 0.0 };
    }
    if k >= n {
        return 1.0;
    }
    // Reflect onto the shorter tail: P(X ≤ k) = 1 − P(X' ≤ n−k−1) for
    // X' ~ Binomial(n, 1−p).
    if k > n / 2 {
        return 1.0 - binomial_cdf(n - k - 1, n, 1.0 - p);
    }
    let ln_p = p.ln();
    let ln_q = (1.0 - p).ln_1p_neg();
    // ln C(n, i), updated incrementally from i = 0.
    let mut ln_choose = 0.0f64;
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for i in 0..=k {
        let term = (ln_choose + i as f64 * ln_p + (n - i) as f64 * ln_q).exp();
        // Kahan summation: the terms span many magnitudes.
        let y = term - compensation;
        let t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
        ln_choose += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    sum.min(1.0)
}

/// `ln(1-p)` computed without cancellation for small `p`.
trait Ln1pNeg {
    fn ln_1p_neg(self) -> f64;
}

impl Ln1pNeg for f64 {
    fn ln_1p_neg(self) -> f64 {
        // self is already 1-p; recover p to use ln_1p when 1-p ≈ 1.
        let p = 1.0 - self;
        if p.abs() < 0.5 {
            (-p).ln_1p()
        } else {
            self.ln()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_successes_anchor() {
        let (l, u) = clopper_pearson(10, 10, 0.05);
        assert!((l - 0.6915).abs() < 5e-4, "L = {l}");
        assert_eq!(u, 1.0);
    }

    #[test]
    fn zero_successes_anchor() {
        let (l, u) = clopper_pearson(50_000, 0, 0.05);
        assert_eq!(l, 0.0);
        // Closed form: U = 1 − (α/2)^(1/n).
        let expected = 1.0 - (0.025f64).powf(1.0 / 50_000.0);
        assert!((u - expected).abs() < 1e-12, "U = {u}, expected {expected}");
        assert!((u - 7.38e-5).abs() < 1e-7);
    }

    #[test]
    fn zero_successes_lower_is_zero_for_any_n() {
        for n in [1, 7, 100, 4096] {
            let (l, _) = clopper_pearson(n, 0, 0.1);
            assert_eq!(l, 0.0);
        }
    }

    #[test]
    fn interval_brackets_the_point_estimate() {
        for &(n, s) in &[(1, 0), (1, 1), (2, 1), (100, 37), (5000, 4999), (400_000, 13)] {
            let (l, u) = clopper_pearson(n, s, 0.05);
            let rho = s as f64 / n as f64;
            assert!(l <= rho + 1e-12 && rho <= u + 1e-12, "n={n} s={s}: [{l}, {u}]");
            assert!((0.0..=1.0).contains(&l) && (0.0..=1.0).contains(&u));
        }
    }

    #[test]
    fn closed_form_single_trial() {
        // n=1, s=1: L solves P(X ≥ 1) = p = α/2.
        let (l, u) = clopper_pearson(1, 1, 0.05);
        assert!((l - 0.025).abs() < 1e-12);
        assert_eq!(u, 1.0);
        // n=1, s=0: U solves P(X ≤ 0) = 1−p = α/2.
        let (l, u) = clopper_pearson(1, 0, 0.05);
        assert_eq!(l, 0.0);
        assert!((u - 0.975).abs() < 1e-12);
    }

    #[test]
    fn cdf_matches_direct_expansion() {
        // n = 6, p = 0.3, cross-checked against an exact rational expansion.
        let q: f64 = 0.7;
        let p: f64 = 0.3;
        let direct: f64 = q.powi(6) + 6.0 * p * q.powi(5) + 15.0 * p * p * q.powi(4);
        assert!((binomial_cdf(2, 6, 0.3) - direct).abs() < 1e-14);
        assert_eq!(binomial_cdf(6, 6, 0.3), 1.0);
        assert_eq!(binomial_cdf(3, 6, 0.0), 1.0);
        assert_eq!(binomial_cdf(3, 6, 1.0), 0.0);
    }

    #[test]
    fn cdf_symmetric_reduction_consistent() {
        // Same value whether computed on the short or long tail.
        for &(k, n, p) in &[(70_u64, 100_u64, 0.65), (99, 100, 0.999), (30, 100, 0.35)] {
            let via_reflection = binomial_cdf(k, n, p);
            // Force the direct branch through the complement identity.
            let direct = 1.0 - binomial_cdf(n - k - 1, n, 1.0 - p);
            assert!(
                (via_reflection - direct).abs() < 1e-12,
                "k={k} n={n} p={p}: {via_reflection} vs {direct}"
            );
        }
    }

    #[test]
    fn agrees_with_reference_binomial_cdf() {
        // statrs as an independent oracle for the CDF and hence the interval.
        use statrs::distribution::{Binomial, DiscreteCDF};
        for &(n, s) in &[(10_u64, 3_u64), (100, 0), (100, 100), (1000, 17), (50_000, 10)] {
            for &p in &[1e-6, 1e-3, 0.02, 0.3, 0.7, 0.97] {
                let ours = binomial_cdf(s, n, p);
                let reference = Binomial::new(p, n).unwrap().cdf(s);
                assert!(
                    (ours - reference).abs() < 1e-9,
                    "n={n} s={s} p={p}: {ours} vs {reference}"
                );
            }
        }
    }

    #[test]
    fn agrees_with_reference_interval_bisection() {
        // Independent bisection against the statrs CDF across a grid.
        use statrs::distribution::{Binomial, DiscreteCDF};
        let bisect_on = |f: &dyn Fn(f64) -> f64| {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..64 {
                let mid = 0.5 * (lo + hi);
                if f(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        for &(n, s) in &[(10_u64, 10_u64), (50, 1), (200, 88), (1024, 512), (50_000, 10)] {
            let alpha = 0.05;
            let (l, u) = clopper_pearson(n, s, alpha);
            if s > 0 {
                let want = bisect_on(&|p: f64| {
                    (1.0 - Binomial::new(p.clamp(1e-300, 1.0), n).unwrap().cdf(s - 1))
                        - alpha / 2.0
                });
                assert!((l - want).abs() < 1e-9, "L n={n} s={s}: {l} vs {want}");
            }
            if s < n {
                let want = bisect_on(&|p: f64| {
                    alpha / 2.0 - Binomial::new(p.clamp(1e-300, 1.0), n).unwrap().cdf(s)
                });
                assert!((u - want).abs() < 1e-9, "U n={n} s={s}: {u} vs {want}");
            }
        }
    }

    #[test]
    #[should_panic(expected = "zero trials")]
    fn zero_trials_rejected() {
        clopper_pearson(0, 0, 0.05);
    }
}
