//! One-sided exact binomial tail against chance.

use super::ProtocolError;

/// Largest `n` handled with exact 128-bit integer sums. `sum_j C(120, j)` is
/// `2^120`, well inside `u128`, and so is every intermediate product below.
const EXACT_LIMIT: u64 = 120;

/// `P(K >= k)` for `K ~ Binomial(n, 1/2)`.
///
/// For `n <= 120` the tail is summed exactly in integers and rounded once.
/// Larger `n` sums probabilities in floating point starting from the term
/// nearest the mode, using the symmetry `P(K <= k-1) = P(K >= n-k+1)` so that
/// every summed term decreases; the relative error stays around `1e-12` up
/// to `n = 10^4`.
pub fn binomial_p_value(n: u64, k: u64) -> Result<f64, ProtocolError> {
    if n == 0 {
        return Err(ProtocolError::InvalidArgument("binomial test needs n >= 1".into()));
    }
    if k > n {
        return Err(ProtocolError::InvalidArgument(format!("k = {k} exceeds n = {n}")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    if n <= EXACT_LIMIT {
        return Ok(exact_tail(n, k));
    }
    if 2 * k > n {
        Ok(decreasing_tail(n, k))
    } else {
        Ok((1.0 - decreasing_tail(n, n - k + 1)).clamp(0.0, 1.0))
    }
}

fn exact_tail(n: u64, k: u64) -> f64 {
    // Walk C(n, j) down from j = n, where C(n, n) = 1.
    let mut c: u128 = 1;
    let mut sum: u128 = 0;
    let mut j = n;
    loop {
        sum += c;
        if j == k {
            break;
        }
        // C(n, j-1) = C(n, j) * j / (n - j + 1)
        c = c * j as u128 / (n - j + 1) as u128;
        j -= 1;
    }
    sum as f64 * 2f64.powi(-(n as i32))
}

/// Upper tail from `start > n/2`, where the pmf decreases in `j`.
fn decreasing_tail(n: u64, start: u64) -> f64 {
    // ln C(n, start) = sum_{i=1..n-start} ln((start + i) / i)
    let ln_c: f64 = (1..=n - start).map(|i| ((start + i) as f64 / i as f64).ln()).sum();
    let mut term = (ln_c - n as f64 * std::f64::consts::LN_2).exp();
    let mut sum = 0.0;
    let mut j = start;
    loop {
        sum += term;
        if j == n || term < sum * 1e-18 {
            break;
        }
        term *= (n - j) as f64 / (j + 1) as f64;
        j += 1;
    }
    sum
}

/// Smallest `k` whose tail probability is at most `alpha`, or `None` when even
/// `k = n` is not significant.
pub fn critical_k(n: u64, alpha: f64) -> Result<Option<u64>, ProtocolError> {
    for k in 0..=n {
        if binomial_p_value(n, k)? <= alpha {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corners() {
        assert_eq!(binomial_p_value(10, 10).unwrap(), 0.0009765625);
        assert_eq!(binomial_p_value(10, 0).unwrap(), 1.0);
        assert_eq!(binomial_p_value(1, 1).unwrap(), 0.5);
        assert_eq!(binomial_p_value(20, 20).unwrap(), 2f64.powi(-20));
        assert!(binomial_p_value(10, 11).is_err());
        assert!(binomial_p_value(0, 0).is_err());
    }

    #[test]
    fn exact_and_float_paths_agree_at_the_seam() {
        // n = 121 uses the floating path; compare with the exact path at 120
        // through the recurrence P_{n+1}(K >= k) = (P_n(K >= k) + P_n(K >= k-1)) / 2.
        for k in 1..=121u64 {
            let lhs = binomial_p_value(121, k).unwrap();
            let a = binomial_p_value(120, k.min(120)).unwrap() * if k == 121 { 0.0 } else { 1.0 };
            let b = binomial_p_value(120, k - 1).unwrap();
            let rhs = 0.5 * (a + b);
            let tol = 1e-12 * rhs.max(1e-300);
            assert!((lhs - rhs).abs() <= tol.max(1e-15 * rhs), "k={k}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn monotone_in_k() {
        for n in [1u64, 7, 64, 121, 500] {
            let mut prev = 1.0;
            for k in 0..=n {
                let p = binomial_p_value(n, k).unwrap();
                assert!(p <= prev && (0.0..=1.0).contains(&p), "n={n} k={k}");
                prev = p;
            }
        }
    }

    #[test]
    fn critical_values() {
        assert_eq!(critical_k(10, 0.05).unwrap(), Some(9));
        assert_eq!(critical_k(4, 0.05).unwrap(), None);
        assert_eq!(critical_k(64, 0.05).unwrap(), Some(40));
    }
}
