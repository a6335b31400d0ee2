//! Pseudo-Zernike radial polynomials on the unit disk.
//!
//! `W_pq(r, θ) = S_pq(r) e^{jqθ}` with the radial part
//! `S_pq(r) = Σ_{k=q}^{p} B_pqk r^k`.

use crate::error::MomentsError;

/// Largest supported radial order. The `B_pqk` coefficients are ratios of
/// factorials up to `(2p+1)!`; beyond order 12 the intermediate products
/// leave the exactly-representable integer range of an `f64`.
pub const MAX_ORDER: u32 = 12;

/// Radial coefficients `B_pqk` for `k = q ..= p`.
///
/// `B_pqk = (-1)^(p-k) (p+k+1)! / [(p-k)! (q+k+1)! (k-q)!]`, computed as the
/// rising product `(q+k+2)·…·(p+k+1)` divided by the two small factorials so
/// every intermediate stays an exact integer in double precision.
pub fn pz_radial_coeffs(p: u32, q: u32) -> Result<Vec<f64>, MomentsError> {
    if q > p {
        return Err(MomentsError::InvalidRepetition { p, q });
    }
    if p > MAX_ORDER {
        return Err(MomentsError::OrderOutOfRange { order: p, max: MAX_ORDER });
    }
    let mut coeffs = Vec::with_capacity((p - q + 1) as usize);
    for k in q..=p {
        let mut num = 1.0f64;
        for i in (q + k + 2)..=(p + k + 1) {
            num *= f64::from(i);
        }
        let den = factorial(p - k) * factorial(k - q);
        let sign = if (p - k) % 2 == 0 { 1.0 } else { -1.0 };
        coeffs.push(sign * num / den);
    }
    Ok(coeffs)
}

fn factorial(n: u32) -> f64 {
    (2..=n).map(f64::from).product()
}

/// Per-order table of radial coefficients, indexed as `table[p][q]`.
///
/// Built once per basis so point evaluations are Horner passes.
#[derive(Debug, Clone)]
pub struct RadialTable {
    coeffs: Vec<Vec<Vec<f64>>>,
}

impl RadialTable {
    pub fn new(order: u32) -> Result<Self, MomentsError> {
        let mut coeffs = Vec::with_capacity(order as usize + 1);
        for p in 0..=order {
            let mut row = Vec::with_capacity(p as usize + 1);
            for q in 0..=p {
                row.push(pz_radial_coeffs(p, q)?);
            }
            coeffs.push(row);
        }
        Ok(Self { coeffs })
    }

    /// `S_pq(r)`.
    pub fn eval(&self, p: u32, q: u32, r: f64) -> f64 {
        let b = &self.coeffs[p as usize][q as usize];
        // S = r^q (B_q + B_{q+1} r + ...): Horner on the inner polynomial.
        let mut acc = 0.0;
        for &c in b.iter().rev() {
            acc = acc * r + c;
        }
        acc * r.powi(q as i32)
    }

    /// `dS_pq/dr`.
    pub fn deriv(&self, p: u32, q: u32, r: f64) -> f64 {
        let b = &self.coeffs[p as usize][q as usize];
        let mut acc = 0.0;
        for (i, &c) in b.iter().enumerate().rev() {
            let k = q + i as u32;
            if k == 0 {
                continue;
            }
            acc = acc * r + f64::from(k) * c;
        }
        if q == 0 {
            acc
        } else {
            acc * r.powi(q as i32 - 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Exact integer oracle: the same factorial ratio in u128 arithmetic.
    fn coeff_exact(p: u32, q: u32, k: u32) -> f64 {
        let mut num: u128 = 1;
        for i in (q + k + 2)..=(p + k + 1) {
            num *= u128::from(i);
        }
        let fact = |n: u32| -> u128 { (2..=u128::from(n)).product::<u128>().max(1) };
        let den = fact(p - k) * fact(k - q);
        assert_eq!(num % den, 0, "B_pqk should be an integer");
        let mag = (num / den) as f64;
        if (p - k) % 2 == 0 {
            mag
        } else {
            -mag
        }
    }

    #[test]
    fn low_order_coefficients() {
        assert_eq!(pz_radial_coeffs(0, 0).unwrap(), vec![1.0]);
        // S_10(r) = 3r - 2
        assert_eq!(pz_radial_coeffs(1, 0).unwrap(), vec![-2.0, 3.0]);
        // S_11(r) = r
        assert_eq!(pz_radial_coeffs(1, 1).unwrap(), vec![1.0]);
        // S_20(r) = 10r^2 - 12r + 3
        assert_eq!(pz_radial_coeffs(2, 0).unwrap(), vec![3.0, -12.0, 10.0]);
    }

    #[test]
    fn rejects_bad_indices() {
        assert!(pz_radial_coeffs(1, 2).is_err());
        assert!(pz_radial_coeffs(MAX_ORDER + 1, 0).is_err());
    }

    #[test]
    fn all_supported_coefficients_are_exact_integers() {
        for p in 0..=MAX_ORDER {
            for q in 0..=p {
                let b = pz_radial_coeffs(p, q).unwrap();
                for (i, &c) in b.iter().enumerate() {
                    let k = q + i as u32;
                    let exact = coeff_exact(p, q, k);
                    assert_eq!(c, exact, "B_{{{p}{q}{k}}}");
                }
            }
        }
    }

    #[test]
    fn radial_values_at_unit_radius_are_one() {
        // S_pq(1) = Σ_k B_pqk = 1 for every (p, q).
        let table = RadialTable::new(8).unwrap();
        for p in 0..=8 {
            for q in 0..=p {
                assert_relative_eq!(table.eval(p, q, 1.0), 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn radial_derivative_matches_central_differences() {
        let table = RadialTable::new(8).unwrap();
        let h = 1e-6;
        for p in 0..=8 {
            for q in 0..=p {
                for i in 0..10 {
                    let r = 0.05 + 0.1 * f64::from(i);
                    let fd = (table.eval(p, q, r + h) - table.eval(p, q, r - h)) / (2.0 * h);
                    let d = table.deriv(p, q, r);
                    assert!(
                        (d - fd).abs() <= 1e-5 * d.abs().max(1.0),
                        "S'_{p}{q}({r}): analytic {d}, fd {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn disk_orthogonality() {
        // ∫∫ W_pq W*_p'q' r dr dθ = π/(p+1) δ_pp' δ_qq', discretized on a
        // midpoint polar grid. The angular factor reduces the integrand to
        // S_pq S_p'q' r cos((q-q')θ) / sin terms; we integrate the full
        // complex product numerically.
        let order = 5u32;
        let table = RadialTable::new(order).unwrap();
        let nr = 600;
        let nt = 256;
        let dr = 1.0 / nr as f64;
        let dt = std::f64::consts::TAU / nt as f64;

        let mut indices = Vec::new();
        for p in 1..=order {
            for q in 0..=p {
                indices.push((p, q));
            }
        }

        for (i, &(p, q)) in indices.iter().enumerate() {
            for &(p2, q2) in &indices[i..] {
                let mut re = 0.0;
                let mut im = 0.0;
                for ir in 0..nr {
                    let r = (ir as f64 + 0.5) * dr;
                    let s = table.eval(p, q, r) * table.eval(p2, q2, r) * r * dr * dt;
                    let dq = f64::from(q as i32 - q2 as i32);
                    for it in 0..nt {
                        let theta = (it as f64 + 0.5) * dt;
                        re += s * (dq * theta).cos();
                        im += s * (dq * theta).sin();
                    }
                }
                let expected = if p == p2 && q == q2 {
                    std::f64::consts::PI / f64::from(p + 1)
                } else {
                    0.0
                };
                assert!(
                    (re - expected).abs() < 1e-3 && im.abs() < 1e-3,
                    "<W_{p}{q}, W_{p2}{q2}> = {re}+{im}j, expected {expected}"
                );
            }
        }
    }
}
