//! Truncated multivariate Taylor jets: forward-mode automatic differentiation
//! of order up to 3 in the 3 chart coordinates.
//!
//! A [`Jet`] stores the Taylor coefficients `c_α = ∂^α f / α!` of a germ at the
//! evaluation point, indexed by multi-index `α = (i,j,k)` with `i+j+k ≤ order`.
//! Multiplication is then a clean truncated convolution, and univariate
//! functions (`sqrt`, `exp`, ...) compose through a Horner pass on the
//! non-constant part. [`Jet::extract`] multiplies the factorial back so callers
//! always see plain partial derivatives.
//!
//! `+`, `-`, `*` and negation are total on finite inputs; the fallible
//! operations (`div`, `recip`, `sqrt`, `exp`, `powi`, `sin`, `cos`) validate
//! their domain and reject non-finite results, and every field-evaluation
//! boundary in the geometry layer re-checks finiteness, so a NaN cannot cross
//! a module boundary without an error.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use thiserror::Error;

/// Number of chart variables.
pub const N_VARS: usize = 3;
/// Highest derivative order a jet can carry.
pub const MAX_ORDER: usize = 3;
/// Coefficient count for order 3 in 3 variables.
pub const N_COEFFS: usize = 20;

/// Multi-indices `(i,j,k)` with `i+j+k ≤ 3` in graded lexicographic order.
pub const MULTI_INDICES: [(u8, u8, u8); N_COEFFS] = [
    (0, 0, 0),
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (2, 0, 0),
    (1, 1, 0),
    (1, 0, 1),
    (0, 2, 0),
    (0, 1, 1),
    (0, 0, 2),
    (3, 0, 0),
    (2, 1, 0),
    (2, 0, 1),
    (1, 2, 0),
    (1, 1, 1),
    (1, 0, 2),
    (0, 3, 0),
    (0, 2, 1),
    (0, 1, 2),
    (0, 0, 3),
];

fn index_of(i: u8, j: u8, k: u8) -> Option<usize> {
    if (i + j + k) as usize > MAX_ORDER {
        return None;
    }
    MULTI_INDICES.iter().position(|&m| m == (i, j, k))
}

fn degree(idx: usize) -> usize {
    let (i, j, k) = MULTI_INDICES[idx];
    (i + j + k) as usize
}

/// `(out, a, b)` triples with `α(a) + α(b) = α(out)`, sorted by `deg(out)` so a
/// truncated product can stop early.
fn product_pairs() -> &'static [(u8, u8, u8)] {
    static PAIRS: OnceLock<Vec<(u8, u8, u8)>> = OnceLock::new();
    PAIRS.get_or_init(|| {
        let mut pairs = Vec::new();
        for (ia, &(ai, aj, ak)) in MULTI_INDICES.iter().enumerate() {
            for (ib, &(bi, bj, bk)) in MULTI_INDICES.iter().enumerate() {
                if let Some(out) = index_of(ai + bi, aj + bj, ak + bk) {
                    pairs.push((out as u8, ia as u8, ib as u8));
                }
            }
        }
        pairs.sort_by_key(|&(out, _, _)| degree(out as usize));
        pairs
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("division by a jet whose value is zero")]
    DivisionByZeroAtPoint,
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("multi-index ({0},{1},{2}) exceeds jet order {3}")]
    IndexOutOfOrder(u8, u8, u8, u8),
    #[error("derivative order exhausted: cannot differentiate an order-0 jet")]
    OrderExhausted,
    #[error("non-finite coefficient produced by {0}")]
    NonFinite(&'static str),
}

/// Truncated Taylor expansion of a scalar germ at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    coeffs: [f64; N_COEFFS],
    order: u8,
}

impl Jet {
    /// Lift of a constant: value `c`, every other coefficient exactly 0.
    pub fn constant(c: f64, order: usize) -> Jet {
        debug_assert!(order <= MAX_ORDER);
        let mut coeffs = [0.0; N_COEFFS];
        coeffs[0] = c;
        Jet {
            coeffs,
            order: order as u8,
        }
    }

    /// Seed jet of the chart coordinate `axis` at a point with that coordinate
    /// value: first derivative 1 along `axis`, everything else 0.
    pub fn coordinate(axis: usize, value: f64, order: usize) -> Jet {
        assert!(axis < N_VARS, "axis out of range");
        assert!((1..=MAX_ORDER).contains(&order), "order must be in 1..=3");
        let mut coeffs = [0.0; N_COEFFS];
        coeffs[0] = value;
        coeffs[1 + axis] = 1.0;
        Jet {
            coeffs,
            order: order as u8,
        }
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    /// The scalar value at the expansion point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Partial derivative `∂^{i+j+k} / ∂x^i ∂y^j ∂z^k` at the expansion point
    /// (stored coefficient times the multi-index factorial).
    pub fn extract(&self, i: u8, j: u8, k: u8) -> Result<f64, JetError> {
        if (i + j + k) > self.order {
            return Err(JetError::IndexOutOfOrder(i, j, k, self.order));
        }
        let idx = index_of(i, j, k).ok_or(JetError::IndexOutOfOrder(i, j, k, self.order))?;
        const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];
        Ok(self.coeffs[idx] * FACT[i as usize] * FACT[j as usize] * FACT[k as usize])
    }

    /// First-order gradient `(∂x, ∂y, ∂z)`.
    pub fn gradient(&self) -> Result<[f64; 3], JetError> {
        Ok([
            self.extract(1, 0, 0)?,
            self.extract(0, 1, 0)?,
            self.extract(0, 0, 1)?,
        ])
    }

    /// Taylor expansion of `∂f/∂x_axis` as a jet of one order less.
    ///
    /// This is the re-differentiation mechanism: the partial of an order-`n`
    /// germ is only known to order `n-1` around the same point.
    pub fn partial(&self, axis: usize) -> Result<Jet, JetError> {
        assert!(axis < N_VARS, "axis out of range");
        if self.order == 0 {
            return Err(JetError::OrderExhausted);
        }
        let mut out = [0.0; N_COEFFS];
        let new_order = self.order - 1;
        for (idx, &(i, j, k)) in MULTI_INDICES.iter().enumerate() {
            if degree(idx) > new_order as usize {
                break;
            }
            let (si, sj, sk) = match axis {
                0 => (i + 1, j, k),
                1 => (i, j + 1, k),
                _ => (i, j, k + 1),
            };
            let src = index_of(si, sj, sk).expect("shifted index in range");
            let m = match axis {
                0 => si,
                1 => sj,
                _ => sk,
            };
            out[idx] = self.coeffs[src] * m as f64;
        }
        Ok(Jet {
            coeffs: out,
            order: new_order,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    fn checked(self, op: &'static str) -> Result<Jet, JetError> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(JetError::NonFinite(op))
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = *self;
        for c in &mut out.coeffs {
            *c *= s;
        }
        out
    }

    /// Truncated composition `f ∘ self` where `taylor[k] = f^{(k)}(value)/k!`.
    ///
    /// Exact for the truncation order because the non-constant part of `self`
    /// is nilpotent to order `order+1`.
    fn compose(&self, taylor: [f64; MAX_ORDER + 1]) -> Jet {
        let mut hat = *self;
        hat.coeffs[0] = 0.0;
        let n = self.order as usize;
        let mut r = Jet::constant(taylor[n], n);
        let mut k = n;
        while k > 0 {
            k -= 1;
            r = r * hat + Jet::constant(taylor[k], n);
        }
        r
    }

    /// `1 / self`. Errors when the value is exactly zero or the result
    /// overflows.
    pub fn recip(&self) -> Result<Jet, JetError> {
        let v = self.value();
        if v == 0.0 {
            return Err(JetError::DivisionByZeroAtPoint);
        }
        let r = 1.0 / v;
        // c_k = (-1)^k / v^{k+1}
        self.compose([r, -r * r, r * r * r, -r * r * r * r])
            .checked("recip")
    }

    pub fn div(&self, rhs: &Jet) -> Result<Jet, JetError> {
        Ok((*self * rhs.recip()?).checked("div")?)
    }

    /// Square root; requires a strictly positive value.
    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let v = self.value();
        if !(v > 0.0) {
            return Err(JetError::Domain("sqrt of a nonpositive value"));
        }
        let s = v.sqrt();
        self.compose([s, 0.5 / s, -1.0 / (8.0 * v * s), 1.0 / (16.0 * v * v * s)])
            .checked("sqrt")
    }

    pub fn exp(&self) -> Result<Jet, JetError> {
        let e = self.value().exp();
        self.compose([e, e, e / 2.0, e / 6.0]).checked("exp")
    }

    pub fn sin(&self) -> Result<Jet, JetError> {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s / 2.0, -c / 6.0]).checked("sin")
    }

    pub fn cos(&self) -> Result<Jet, JetError> {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c / 2.0, s / 6.0]).checked("cos")
    }

    /// Integer power by binary exponentiation; negative exponents go through
    /// [`Jet::recip`].
    pub fn powi(&self, n: i32) -> Result<Jet, JetError> {
        if n < 0 {
            return self.powi(-n)?.recip();
        }
        let mut acc = Jet::constant(1.0, self.order());
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc.checked("powi")
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let mut out = [0.0; N_COEFFS];
        for idx in 0..N_COEFFS {
            if degree(idx) > order as usize {
                break;
            }
            out[idx] = self.coeffs[idx] + rhs.coeffs[idx];
        }
        Jet { coeffs: out, order }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let mut out = [0.0; N_COEFFS];
        for idx in 0..N_COEFFS {
            if degree(idx) > order as usize {
                break;
            }
            out[idx] = self.coeffs[idx] - rhs.coeffs[idx];
        }
        Jet { coeffs: out, order }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order) as usize;
        let mut out = [0.0; N_COEFFS];
        for &(o, a, b) in product_pairs() {
            if degree(o as usize) > order {
                break;
            }
            out[o as usize] += self.coeffs[a as usize] * rhs.coeffs[b as usize];
        }
        Jet {
            coeffs: out,
            order: order as u8,
        }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self;
        out.coeffs[0] += rhs;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn jet3(axis: usize, v: f64) -> Jet {
        Jet::coordinate(axis, v, 3)
    }

    #[test]
    fn coordinate_seed() {
        let j = jet3(0, 2.0);
        assert_eq!(j.value(), 2.0);
        assert_eq!(j.extract(1, 0, 0).unwrap(), 1.0);
        for idx in 2..N_COEFFS {
            assert_eq!(j.coeffs[idx], 0.0);
        }
        let k = Jet::coordinate(2, 0.0, 1);
        assert_eq!(k.value(), 0.0);
        assert_eq!(k.extract(0, 0, 1).unwrap(), 1.0);
        assert!(k.extract(0, 0, 2).is_err());
    }

    #[test]
    fn sum_of_axes_has_unit_gradient() {
        let s = jet3(0, 1.0) + jet3(1, 2.0) + jet3(2, 3.0);
        assert_eq!(s.value(), 6.0);
        assert_eq!(s.gradient().unwrap(), [1.0, 1.0, 1.0]);
    }

    #[test]
    fn square_of_x() {
        let x = jet3(0, 3.0);
        let sq = x * x;
        assert_eq!(sq.value(), 9.0);
        assert_eq!(sq.extract(1, 0, 0).unwrap(), 6.0);
        // derivative 2, stored Taylor coefficient 1
        assert_eq!(sq.extract(2, 0, 0).unwrap(), 2.0);
        assert_eq!(sq.coeffs[index_of(2, 0, 0).unwrap()], 1.0);
        assert_eq!(sq.extract(3, 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn recip_series() {
        let y = jet3(1, 2.0);
        let r = y.recip().unwrap();
        assert!((r.value() - 0.5).abs() < 1e-15);
        assert!((r.extract(0, 1, 0).unwrap() + 0.25).abs() < 1e-15);
        assert!((r.extract(0, 2, 0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn mixed_partial_of_xy() {
        let p = jet3(0, 2.0) * jet3(1, 3.0);
        assert_eq!(p.extract(1, 1, 0).unwrap(), 1.0);
        assert_eq!(p.value(), 6.0);
    }

    #[test]
    fn constant_extract() {
        let c = Jet::constant(5.0, 3);
        assert_eq!(c.extract(0, 0, 0).unwrap(), 5.0);
    }

    #[test]
    fn second_partial_of_disk_function() {
        // F = 1 + m (x^2 + y^2) with m = -1 at (0.5, 0.5, 0)
        let m = -1.0;
        let x = jet3(0, 0.5);
        let y = jet3(1, 0.5);
        let f = Jet::constant(1.0, 3) + (x * x + y * y).scale(m);
        assert_eq!(f.extract(2, 0, 0).unwrap(), -2.0);
        assert!((f.value() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let z = jet3(2, 0.0);
        assert_eq!(z.recip().unwrap_err(), JetError::DivisionByZeroAtPoint);
        assert!(matches!(
            Jet::constant(-1.0, 3).sqrt().unwrap_err(),
            JetError::Domain(_)
        ));
    }

    #[test]
    fn partial_lowers_order() {
        let x = jet3(0, 3.0);
        let cube = (x * x * x).partial(0).unwrap(); // 3x^2 as an order-2 jet
        assert_eq!(cube.order(), 2);
        assert_eq!(cube.value(), 27.0);
        assert_eq!(cube.extract(1, 0, 0).unwrap(), 18.0);
        assert_eq!(cube.extract(2, 0, 0).unwrap(), 6.0);
        let v = cube.partial(0).unwrap().partial(0).unwrap();
        assert_eq!(v.order(), 0);
        assert!(v.partial(0).is_err());
    }

    /// Richardson-extrapolated central difference of order-k mixed partials.
    fn fd_partial(f: &dyn Fn(f64, f64, f64) -> f64, p: [f64; 3], mi: (u8, u8, u8)) -> f64 {
        fn central(f: &dyn Fn(f64, f64, f64) -> f64, p: [f64; 3], mi: (u8, u8, u8), h: f64) -> f64 {
            let (i, j, k) = mi;
            if i > 0 {
                let mut a = p;
                a[0] += h;
                let mut b = p;
                b[0] -= h;
                (central(f, a, (i - 1, j, k), h) - central(f, b, (i - 1, j, k), h)) / (2.0 * h)
            } else if j > 0 {
                let mut a = p;
                a[1] += h;
                let mut b = p;
                b[1] -= h;
                (central(f, a, (i, j - 1, k), h) - central(f, b, (i, j - 1, k), h)) / (2.0 * h)
            } else if k > 0 {
                let mut a = p;
                a[2] += h;
                let mut b = p;
                b[2] -= h;
                (central(f, a, (i, j, k - 1), h) - central(f, b, (i, j, k - 1), h)) / (2.0 * h)
            } else {
                f(p[0], p[1], p[2])
            }
        }
        let order = (mi.0 + mi.1 + mi.2) as usize;
        let h = [1e-4, 1e-4, 5e-3, 2e-2][order];
        let d1 = central(f, p, mi, h);
        let d2 = central(f, p, mi, h / 2.0);
        (4.0 * d2 - d1) / 3.0
    }

    #[test]
    fn exp_derivatives_match_finite_differences() {
        let p = [0.0, 0.3, 0.0];
        let j = (jet3(1, 0.3).scale(2.0)).exp().unwrap();
        let f = |_x: f64, y: f64, _z: f64| (2.0 * y).exp();
        for mi in [(0, 1, 0), (0, 2, 0), (0, 3, 0)] {
            let exact = j.extract(mi.0, mi.1, mi.2).unwrap();
            let fd = fd_partial(&f, p, mi);
            let rel = (exact - fd).abs() / exact.abs().max(1e-6);
            assert!(rel < 1e-6, "mi {mi:?}: jet {exact} vs fd {fd}");
        }
    }

    fn arb_jet() -> impl Strategy<Value = Jet> {
        proptest::collection::vec(-2.0f64..2.0, N_COEFFS).prop_map(|v| {
            let mut coeffs = [0.0; N_COEFFS];
            coeffs.copy_from_slice(&v);
            Jet { coeffs, order: 3 }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn product_rule(a in arb_jet(), b in arb_jet()) {
            let p = a * b;
            for axis in 0..3 {
                let mi = [(1u8,0u8,0u8),(0,1,0),(0,0,1)][axis];
                let lhs = p.extract(mi.0, mi.1, mi.2).unwrap();
                let rhs = a.extract(mi.0, mi.1, mi.2).unwrap() * b.value()
                    + a.value() * b.extract(mi.0, mi.1, mi.2).unwrap();
                let scale = lhs.abs().max(rhs.abs()).max(1.0);
                prop_assert!((lhs - rhs).abs() / scale < 1e-12);
            }
        }

        #[test]
        fn ring_laws(a in arb_jet(), b in arb_jet(), c in arb_jet()) {
            let s1 = (a + b) + c;
            let s2 = a + (b + c);
            let m1 = (a * b) * c;
            let m2 = a * (b * c);
            for idx in 0..N_COEFFS {
                prop_assert!((s1.coeffs[idx] - s2.coeffs[idx]).abs() < 1e-14);
                let scale = m1.coeffs[idx].abs().max(m2.coeffs[idx].abs()).max(1.0);
                prop_assert!((m1.coeffs[idx] - m2.coeffs[idx]).abs() / scale < 1e-14);
                prop_assert!(((a * b).coeffs[idx] - (b * a).coeffs[idx]).abs() < 1e-14);
            }
        }

        #[test]
        fn order_preserved(a in arb_jet(), b in arb_jet()) {
            prop_assert_eq!((a + b).order(), 3);
            prop_assert_eq!((a * b).order(), 3);
            let da = a.partial(0).unwrap();
            prop_assert_eq!((da * b).order(), 2);
        }
    }
}
