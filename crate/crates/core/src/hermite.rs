//! Hermite polynomials, Hermite functions and the polynomial families
//! obtained by repeatedly applying the raising operators to the vacua.
//!
//! Every family member is a rescaled physicists' Hermite polynomial evaluated
//! at `u = beta / sqrt(2k)`, so the central primitive is a numerically stable
//! recurrence for the normalized functions
//! `e_n(u) = H_n(u) exp(-u^2/2) / sqrt(2^n n! sqrt(pi))`.

use crate::expr::EvalError;

const LN_RESCALE: f64 = 345.387_763_949_106_8; // ln(1e150)
const RESCALE: f64 = 1e150;

/// Physicists' Hermite polynomial `H_n(u)`.
///
/// Fails with [`EvalError::NonFinite`] if the value overflows.
pub fn hermite(n: usize, u: f64) -> Result<f64, EvalError> {
    let mut h0 = 1.0;
    if n == 0 {
        return Ok(h0);
    }
    let mut h1 = 2.0 * u;
    for j in 1..n {
        let h2 = 2.0 * u * h1 - 2.0 * j as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    if h1.is_finite() {
        Ok(h1)
    } else {
        Err(EvalError::NonFinite { x: u, value: h1 })
    }
}

/// `d^j/du^j H_n(u) = 2^j n!/(n-j)! H_{n-j}(u)`.
pub fn hermite_derivative(n: usize, j: usize, u: f64) -> Result<f64, EvalError> {
    if j > n {
        return Ok(0.0);
    }
    let mut c = 1.0;
    for i in 0..j {
        c *= 2.0 * (n - i) as f64;
    }
    let v = c * hermite(n - j, u)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite { x: u, value: v })
    }
}

/// A positive-scale floating value `mantissa * exp(ln_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub ln_scale: f64,
}

impl Scaled {
    /// Multiplies by `exp(ln_factor)` and converts, underflowing to 0.
    pub fn to_f64_times(self, ln_factor: f64) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        self.mantissa * (self.ln_scale + ln_factor).exp()
    }

    pub fn to_f64(self) -> f64 {
        self.to_f64_times(0.0)
    }
}

/// Normalized Hermite functions `e_0(u) ..= e_{n_max}(u)` in overflow-free form.
pub fn hermite_functions_scaled(n_max: usize, u: f64) -> Vec<Scaled> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut scale = -0.5 * u * u;
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25);
    out.push(Scaled { mantissa: cur, ln_scale: scale });
    for n in 0..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * u * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            scale += LN_RESCALE;
        }
        out.push(Scaled { mantissa: cur, ln_scale: scale });
    }
    out
}

/// Normalized Hermite functions `e_n(u)`, `n = 0 ..= n_max`.
pub fn hermite_functions(n_max: usize, u: f64) -> Vec<f64> {
    hermite_functions_scaled(n_max, u).into_iter().map(Scaled::to_f64).collect()
}

/// Normalized Hermite polynomials `e_n(u) exp(u^2/2)`, `n = 0 ..= n_max`.
///
/// Entries that overflow come back infinite.
pub fn normalized_hermite(n_max: usize, u: f64) -> Vec<f64> {
    let shift = 0.5 * u * u;
    hermite_functions_scaled(n_max, u).into_iter().map(|s| s.to_f64_times(shift)).collect()
}

/// `ln n!` by direct summation.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// `ln (2m-1)!!` with the convention `(-1)!! = 1`.
pub fn ln_odd_double_factorial(m: usize) -> f64 {
    (1..=m).map(|i| ((2 * i - 1) as f64).ln()).sum()
}

/// Closed form of the polynomial reached by `n` raisings of the annihilated
/// Gaussian side: `(2k)^(-n/2) H_n(beta / sqrt(2k))`.
pub fn pi_n(n: usize, beta: f64, k: f64) -> Result<f64, EvalError> {
    let h = hermite(n, beta / (2.0 * k).sqrt())?;
    Ok(h * (2.0 * k).powf(-(n as f64) / 2.0))
}

/// Closed form of the polynomial reached on the dual side:
/// `(k/2)^(n/2) H_n(beta / sqrt(2k))`, so that `sigma_n = k^n pi_n`.
pub fn sigma_n(n: usize, beta: f64, k: f64) -> Result<f64, EvalError> {
    let h = hermite(n, beta / (2.0 * k).sqrt())?;
    Ok(h * (0.5 * k).powf(n as f64 / 2.0))
}

/// Integer coefficient table of the recursively generated polynomials.
///
/// Row `n` holds `c_{n,j}` with `pi_n(beta) = sum_j c_{n,j} k^{-(n+j)/2} beta^j`
/// and `sigma_n(beta) = sum_j c_{n,j} k^{(n-j)/2} beta^j`. The rows follow from
/// `pi_n = (beta/k) pi_{n-1} - d pi_{n-1}/d beta` and
/// `sigma_n = beta sigma_{n-1} - k d sigma_{n-1}/d beta`, which both reduce to
/// `c_{n,j} = c_{n-1,j-1} - (j+1) c_{n-1,j+1}`.
#[derive(Debug, Clone)]
pub struct RecursiveFamily {
    rows: Vec<Vec<i128>>,
}

/// Largest order the integer recursion supports without overflow.
pub const MAX_RECURSIVE_ORDER: usize = 30;

impl RecursiveFamily {
    pub fn new(n_max: usize) -> RecursiveFamily {
        assert!(n_max <= MAX_RECURSIVE_ORDER, "recursion supported up to order 30");
        let mut rows: Vec<Vec<i128>> = vec![vec![1]];
        for n in 1..=n_max {
            let prev = &rows[n - 1];
            let mut row = vec![0i128; n + 1];
            for (j, slot) in row.iter_mut().enumerate() {
                let up = if j >= 1 { prev.get(j - 1).copied().unwrap_or(0) } else { 0 };
                let down = prev.get(j + 1).copied().unwrap_or(0);
                *slot = up - (j as i128 + 1) * down;
            }
            rows.push(row);
        }
        RecursiveFamily { rows }
    }

    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn coefficients(&self, n: usize) -> &[i128] {
        &self.rows[n]
    }

    // sum_j c_j w^j in w = beta / sqrt(k)
    fn reduced(&self, n: usize, w: f64) -> f64 {
        self.rows[n].iter().rev().fold(0.0, |acc, &c| acc * w + c as f64)
    }

    pub fn pi(&self, n: usize, beta: f64, k: f64) -> f64 {
        self.reduced(n, beta / k.sqrt()) * k.powf(-(n as f64) / 2.0)
    }

    pub fn sigma(&self, n: usize, beta: f64, k: f64) -> f64 {
        self.reduced(n, beta / k.sqrt()) * k.powf(n as f64 / 2.0)
    }

    /// Sum of absolute term magnitudes, the natural scale for rounding error.
    pub fn pi_condition_scale(&self, n: usize, beta: f64, k: f64) -> f64 {
        let w = (beta / k.sqrt()).abs();
        self.rows[n].iter().rev().fold(0.0, |acc, &c| acc * w + (c as f64).abs())
            * k.powf(-(n as f64) / 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_polynomials() {
        assert_eq!(hermite(0, 3.0).unwrap(), 1.0);
        assert_eq!(hermite(1, 3.0).unwrap(), 6.0);
        assert_eq!(hermite(2, 3.0).unwrap(), 34.0);
        assert_eq!(hermite(3, 0.5).unwrap(), 8.0 * 0.125 - 12.0 * 0.5);
        assert_eq!(hermite_derivative(3, 2, 0.5).unwrap(), 4.0 * 3.0 * 2.0 * hermite(1, 0.5).unwrap());
    }

    #[test]
    fn overflow_is_flagged() {
        assert!(hermite(400, 1e6).is_err());
    }

    #[test]
    fn hermite_functions_match_direct_formula() {
        for u in [-3.0, -0.4, 0.0, 1.7, 4.0] {
            let e = hermite_functions(12, u);
            for (n, &en) in e.iter().enumerate() {
                let direct = hermite(n, u).unwrap() * (-0.5 * u * u).exp()
                    / (2f64.powi(n as i32) * ln_factorial(n).exp() * std::f64::consts::PI.sqrt()).sqrt();
                assert!((en - direct).abs() < 1e-13 * (1.0 + direct.abs()), "n={n} u={u}");
            }
        }
    }

    #[test]
    fn hermite_functions_stay_finite_far_out() {
        let e = hermite_functions(2000, 40.0);
        assert!(e.iter().all(|v| v.is_finite()));
        // turning point of e_n sits near sqrt(2n+1)
        assert!(e[2000].abs() < 1.0 && e[2000] != 0.0);
        assert!(e[0] == 0.0);
    }

    #[test]
    fn recursion_table_rows() {
        let fam = RecursiveFamily::new(4);
        assert_eq!(fam.coefficients(2), &[-1, 0, 1]);
        assert_eq!(fam.coefficients(3), &[0, -3, 0, 1]);
        assert_eq!(fam.coefficients(4), &[3, 0, -6, 0, 1]);
    }

    #[test]
    fn sigma_is_k_power_times_pi() {
        let fam = RecursiveFamily::new(10);
        for &k in &[0.5, 2.0] {
            for n in 0..=10 {
                let b = 0.37;
                let lhs = fam.sigma(n, b, k);
                let rhs = k.powi(n as i32) * fam.pi(n, b, k);
                assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
            }
        }
    }
}
