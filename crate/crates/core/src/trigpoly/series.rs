use std::ops::{Add, Mul, Sub};

use super::TrigPoly;

/// Polynomial in δ with [`TrigPoly`] coefficients, truncated after `δ^truncation`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaSeries {
    orders: Vec<TrigPoly>,
}

impl DeltaSeries {
    pub fn zero(n: usize, truncation: usize) -> Self {
        Self {
            orders: vec![TrigPoly::zero(n); truncation + 1],
        }
    }

    /// Series from explicit coefficients; missing orders are zero, extra orders are dropped.
    pub fn from_orders(n: usize, truncation: usize, orders: Vec<TrigPoly>) -> Self {
        let mut s = Self::zero(n, truncation);
        for (j, p) in orders.into_iter().enumerate().take(truncation + 1) {
            s.orders[j] = p;
        }
        s
    }

    /// `δ^0` term only.
    pub fn constant(p: TrigPoly, truncation: usize) -> Self {
        let n = p.num_oscillators();
        Self::from_orders(n, truncation, vec![p])
    }

    /// `1 / (1 + δ g)` expanded as `Σ (−δ g)^j`.
    pub fn geometric_inverse(g: &TrigPoly, truncation: usize) -> Self {
        let n = g.num_oscillators();
        let mut orders = Vec::with_capacity(truncation + 1);
        let mut power = TrigPoly::constant(n, 1.0);
        for _ in 0..=truncation {
            orders.push(power.clone());
            power = &power * &g.scale(-1.0);
        }
        Self::from_orders(n, truncation, orders)
    }

    pub fn truncation(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn num_oscillators(&self) -> usize {
        self.orders[0].num_oscillators()
    }

    pub fn order(&self, j: usize) -> &TrigPoly {
        &self.orders[j]
    }

    pub fn orders(&self) -> &[TrigPoly] {
        &self.orders
    }

    pub fn into_orders(self) -> Vec<TrigPoly> {
        self.orders
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            orders: self.orders.iter().map(|p| p.scale(s)).collect(),
        }
    }

    /// Multiplies every order by the same δ-independent polynomial.
    pub fn mul_poly(&self, p: &TrigPoly) -> Self {
        Self {
            orders: self.orders.iter().map(|q| q * p).collect(),
        }
    }

    /// `δ · self`, dropping the order that falls past the truncation.
    pub fn shifted(&self) -> Self {
        let n = self.num_oscillators();
        let mut orders = Vec::with_capacity(self.orders.len());
        orders.push(TrigPoly::zero(n));
        orders.extend(self.orders[..self.orders.len() - 1].iter().cloned());
        Self { orders }
    }

    /// Evaluates `Σ δ^j p_j(φ)`.
    pub fn eval(&self, delta: f64, phases: &[f64]) -> f64 {
        self.orders
            .iter()
            .rev()
            .fold(0.0, |acc, p| acc * delta + p.eval(phases))
    }
}

impl Add<&DeltaSeries> for &DeltaSeries {
    type Output = DeltaSeries;
    fn add(self, rhs: &DeltaSeries) -> DeltaSeries {
        assert_eq!(self.truncation(), rhs.truncation(), "truncation mismatch");
        DeltaSeries {
            orders: self
                .orders
                .iter()
                .zip(&rhs.orders)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub<&DeltaSeries> for &DeltaSeries {
    type Output = DeltaSeries;
    fn sub(self, rhs: &DeltaSeries) -> DeltaSeries {
        assert_eq!(self.truncation(), rhs.truncation(), "truncation mismatch");
        DeltaSeries {
            orders: self
                .orders
                .iter()
                .zip(&rhs.orders)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul<&DeltaSeries> for &DeltaSeries {
    type Output = DeltaSeries;
    fn mul(self, rhs: &DeltaSeries) -> DeltaSeries {
        assert_eq!(self.truncation(), rhs.truncation(), "truncation mismatch");
        let b = self.truncation();
        let mut out = DeltaSeries::zero(self.num_oscillators(), b);
        for i in 0..=b {
            if self.orders[i].is_empty() {
                continue;
            }
            for j in 0..=(b - i) {
                if rhs.orders[j].is_empty() {
                    continue;
                }
                out.orders[i + j] += &(&self.orders[i] * &rhs.orders[j]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_is_truncation_plus_one() {
        assert_eq!(DeltaSeries::zero(2, 2).orders().len(), 3);
    }

    #[test]
    fn products_truncate() {
        let g = TrigPoly::sin(1, &[(0, 1)], 0.0, 1.0);
        let one_plus = DeltaSeries::from_orders(1, 2, vec![TrigPoly::constant(1, 1.0), g.clone()]);
        let inv = DeltaSeries::geometric_inverse(&g, 2);
        let prod = &one_plus * &inv;
        assert!((prod.order(0) - &TrigPoly::constant(1, 1.0)).is_empty());
        assert!(prod.order(1).is_empty());
        assert!(prod.order(2).is_empty());
    }

    #[test]
    fn eval_horner() {
        let p = DeltaSeries::from_orders(
            1,
            2,
            vec![
                TrigPoly::constant(1, 1.0),
                TrigPoly::constant(1, 2.0),
                TrigPoly::constant(1, 3.0),
            ],
        );
        assert!((p.eval(0.5, &[0.0]) - (1.0 + 1.0 + 0.75)).abs() < 1e-15);
    }
}
