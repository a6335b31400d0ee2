//! Legendre polynomials on `[-1, 1]` via Bonnet's three-term recurrence.

/// Evaluates the Legendre polynomial `P_m(x)`.
///
/// Uses the recurrence `m P_m = (2m-1) x P_{m-1} - (m-1) P_{m-2}` with
/// `P_0 = 1`, `P_1 = x`. Defined for every real `x`; callers restrict the
/// domain where orthogonality matters.
pub fn legendre_eval(m: u32, x: f64) -> f64 {
    match m {
        0 => 1.0,
        1 => x,
        _ => {
            let mut prev = 1.0;
            let mut cur = x;
            for k in 2..=m {
                let kf = f64::from(k);
                let next = ((2.0 * kf - 1.0) * x * cur - (kf - 1.0) * prev) / kf;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Evaluates the derivative `dP_m/dx`.
///
/// Uses `P'_m = P'_{m-2} + (2m-1) P_{m-1}`, which stays finite at the
/// endpoints (unlike the `(1-x^2)`-divided form).
pub fn legendre_deriv(m: u32, x: f64) -> f64 {
    match m {
        0 => 0.0,
        1 => 1.0,
        _ => {
            let p = eval_all(m - 1, x);
            // dprev = P'_{k-2}, dcur = P'_{k-1} while stepping k up to m.
            let mut dprev = 0.0;
            let mut dcur = 1.0;
            for k in 2..=m {
                let next = dprev + (2.0 * f64::from(k) - 1.0) * p[(k - 1) as usize];
                dprev = dcur;
                dcur = next;
            }
            dcur
        }
    }
}

/// Evaluates `P_0(x) ..= P_n(x)` in one recurrence pass.
pub fn eval_all(n: u32, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(x);
    for k in 2..=n {
        let kf = f64::from(k);
        let next = ((2.0 * kf - 1.0) * x * out[(k - 1) as usize] - (kf - 1.0) * out[(k - 2) as usize]) / kf;
        out.push(next);
    }
    out
}

/// Evaluates `P'_0(x) ..= P'_n(x)` given the values from [`eval_all`].
pub fn deriv_all(n: u32, values: &[f64]) -> Vec<f64> {
    debug_assert!(values.len() > n as usize);
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(0.0);
    if n == 0 {
        return out;
    }
    out.push(1.0);
    for k in 2..=n {
        let next = out[(k - 2) as usize] + (2.0 * f64::from(k) - 1.0) * values[(k - 1) as usize];
        out.push(next);
    }
    out
}
