//! Truncated derivative jets `[f(x0), f'(x0), ..., f^(n)(x0)]`.
//!
//! Arithmetic works on Taylor coefficients internally so that products and
//! compositions are exact up to the truncation order.

use num_complex::Complex64 as C64;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    d: Vec<C64>,
}

fn factorials(n: usize) -> Vec<f64> {
    let mut f = vec![1.0; n + 1];
    for j in 1..=n {
        f[j] = f[j - 1] * j as f64;
    }
    f
}

impl Jet {
    /// Jet from derivative values.
    pub fn new(derivs: Vec<C64>) -> Jet {
        assert!(!derivs.is_empty(), "a jet holds at least the value");
        Jet { d: derivs }
    }

    pub fn from_real(derivs: &[f64]) -> Jet {
        Jet::new(derivs.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn constant(c: C64, order: usize) -> Jet {
        let mut d = vec![C64::new(0.0, 0.0); order + 1];
        d[0] = c;
        Jet { d }
    }

    pub fn zero(order: usize) -> Jet {
        Jet::constant(C64::new(0.0, 0.0), order)
    }

    pub fn order(&self) -> usize {
        self.d.len() - 1
    }

    pub fn value(&self) -> C64 {
        self.d[0]
    }

    /// `j`-th derivative, zero beyond the stored order.
    pub fn deriv(&self, j: usize) -> C64 {
        self.d.get(j).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn derivs(&self) -> &[C64] {
        &self.d
    }

    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.order(), "cannot extend a jet by truncation");
        Jet { d: self.d[..=order].to_vec() }
    }

    /// Jet of `f'`, one order lower.
    pub fn derivative(&self) -> Jet {
        if self.d.len() == 1 {
            return Jet::zero(0);
        }
        Jet { d: self.d[1..].to_vec() }
    }

    pub fn scale(&self, c: C64) -> Jet {
        Jet { d: self.d.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let n = self.order().min(other.order());
        Jet { d: (0..=n).map(|j| self.d[j] + other.d[j]).collect() }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let n = self.order().min(other.order());
        Jet { d: (0..=n).map(|j| self.d[j] - other.d[j]).collect() }
    }

    fn taylor(&self) -> Vec<C64> {
        let f = factorials(self.order());
        self.d.iter().zip(&f).map(|(v, fj)| v / fj).collect()
    }

    fn from_taylor(t: Vec<C64>) -> Jet {
        let f = factorials(t.len() - 1);
        Jet { d: t.into_iter().zip(f).map(|(v, fj)| v * fj).collect() }
    }

    /// Leibniz product, truncated to the lower of the two orders.
    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.order().min(other.order());
        let a = self.taylor();
        let b = other.taylor();
        let mut c = vec![C64::new(0.0, 0.0); n + 1];
        for (i, ai) in a.iter().enumerate().take(n + 1) {
            if *ai == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..=(n - i) {
                c[i + j] += ai * b[j];
            }
        }
        Jet::from_taylor(c)
    }

    /// Jet of `g(inner(x))` given `outer[j] = g^(j)(inner(x0))`.
    ///
    /// Requires `outer.len() > inner.order()`.
    pub fn compose(outer: &[C64], inner: &Jet) -> Jet {
        let n = inner.order();
        assert!(outer.len() > n, "outer derivatives must reach the jet order");
        let mut delta = inner.taylor();
        delta[0] = C64::new(0.0, 0.0);
        let fact = factorials(n);
        let mut result = vec![C64::new(0.0, 0.0); n + 1];
        // power holds delta^j truncated at order n
        let mut power = vec![C64::new(0.0, 0.0); n + 1];
        power[0] = C64::new(1.0, 0.0);
        for j in 0..=n {
            let c = outer[j] / fact[j];
            for (r, p) in result.iter_mut().zip(&power) {
                *r += c * p;
            }
            if j == n {
                break;
            }
            let mut next = vec![C64::new(0.0, 0.0); n + 1];
            for (a, pa) in power.iter().enumerate() {
                if *pa == C64::new(0.0, 0.0) {
                    continue;
                }
                for b in 1..=(n - a) {
                    next[a + b] += pa * delta[b];
                }
            }
            power = next;
        }
        Jet::from_taylor(result)
    }

    /// Jet of `1 / self`.
    pub fn recip(&self) -> Jet {
        let v = self.value();
        let n = self.order();
        let mut outer = Vec::with_capacity(n + 1);
        // d^j/dv^j (1/v) = (-1)^j j! / v^(j+1)
        let mut fact = 1.0;
        for j in 0..=n {
            if j > 0 {
                fact *= j as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            outer.push(sign * fact / v.powi(j as i32 + 1));
        }
        Jet::compose(&outer, self)
    }

    /// Jet of `exp(self)`.
    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        Jet::compose(&vec![e; self.order() + 1], self)
    }
}
