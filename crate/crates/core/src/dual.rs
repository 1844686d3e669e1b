//! First-order forward-mode dual numbers, `v + d·ε` with `ε² = 0`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::distributions::logistic_tail;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub fn constant(v: f64) -> Self {
        Dual { v, d: 0.0 }
    }

    pub fn variable(v: f64) -> Self {
        Dual { v, d: 1.0 }
    }

    /// `active` selects whether this input is the differentiation variable.
    pub fn seed(v: f64, active: bool) -> Self {
        Dual { v, d: if active { 1.0 } else { 0.0 } }
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        Dual { v: e, d: e * self.d }
    }

    pub fn powi2(self) -> Self {
        self * self
    }
}

/// `1/(e^x + 1)` and its derivative `−f(1 − f)`, stable in both tails.
pub fn logistic(x: Dual) -> Dual {
    let f = logistic_tail(x.v);
    let h = logistic_tail(-x.v);
    Dual { v: f, d: -f * h * x.d }
}

/// `1/(e^x − 1)` with derivative `−n(1 + n)`.
pub fn bose_factor(x: Dual) -> Dual {
    let n = 1.0 / x.v.exp_m1();
    Dual { v: n, d: -n * (1.0 + n) * x.d }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { v: self.v + o.v, d: self.d + o.d }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual { v: self.v * o.v, d: self.d * o.v + self.v * o.d }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual { v: self.v / o.v, d: (self.d * o.v - self.v * o.d) / (o.v * o.v) }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { v: -self.v, d: -self.d }
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(self, o: f64) -> Dual {
        Dual { v: self.v + o, d: self.d }
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, o: f64) -> Dual {
        Dual { v: self.v * o, d: self.d * o }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quotient_and_exp_rules() {
        let x = Dual::variable(0.7);
        let y = (x * x).exp() / (x + 1.0);
        let f = |x: f64| (x * x).exp() / (x + 1.0);
        let h = 1e-6;
        assert_relative_eq!(y.v, f(0.7));
        assert_relative_eq!(y.d, (f(0.7 + h) - f(0.7 - h)) / (2.0 * h), max_relative = 1e-8);
    }

    #[test]
    fn logistic_and_bose_derivatives() {
        let l = logistic(Dual::variable(0.0));
        assert_eq!((l.v, l.d), (0.5, -0.25));
        let h = 1e-6;
        let b = bose_factor(Dual::variable(0.4));
        let fd = (1.0 / (0.4f64 + h).exp_m1() - 1.0 / (0.4f64 - h).exp_m1()) / (2.0 * h);
        assert_relative_eq!(b.d, fd, max_relative = 1e-8);
    }
}
