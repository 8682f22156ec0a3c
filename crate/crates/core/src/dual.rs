//! Forward-mode automatic differentiation with nestable dual numbers.
//!
//! A [`Dual`] is either a plain real or a pair `re + eps·ε_t`, where `t` is a
//! tag identifying which infinitesimal the pair carries. Components of a pair
//! only ever hold tags strictly smaller than the pair's own tag, so values
//! created by differentiating inside another differentiation never mix up
//! their infinitesimals. Evaluating a function on a value seeded with a fresh
//! tag and reading back the `eps` part gives its exact first derivative.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum Dual<S> {
    Real(S),
    Pair {
        tag: u32,
        re: Box<Dual<S>>,
        eps: Box<Dual<S>>,
    },
}

impl<S: Scalar> Dual<S> {
    pub fn constant(v: S) -> Self {
        Dual::Real(v)
    }

    pub fn zero() -> Self {
        Dual::Real(S::zero())
    }

    /// Seeds `value` as the variable for infinitesimal `tag`.
    ///
    /// `tag` must exceed every tag already present in `value`.
    pub fn variable(value: Dual<S>, tag: u32) -> Self {
        debug_assert!(value.tag() < tag);
        Dual::Pair {
            tag,
            re: Box::new(value),
            eps: Box::new(Dual::Real(S::one())),
        }
    }

    /// Outermost tag, 0 for a plain real.
    pub fn tag(&self) -> u32 {
        match self {
            Dual::Real(_) => 0,
            Dual::Pair { tag, .. } => *tag,
        }
    }

    /// The innermost real part.
    pub fn value(&self) -> S {
        match self {
            Dual::Real(v) => *v,
            Dual::Pair { re, .. } => re.value(),
        }
    }

    /// Splits into the parts along infinitesimal `tag`; values that do not
    /// carry `tag` outermost are constant with respect to it.
    pub fn split(&self, tag: u32) -> (Dual<S>, Dual<S>) {
        match self {
            Dual::Pair { tag: t, re, eps } if *t == tag => ((**re).clone(), (**eps).clone()),
            _ => (self.clone(), Dual::zero()),
        }
    }

    /// Derivative part along `tag`.
    pub fn derivative(&self, tag: u32) -> Dual<S> {
        self.split(tag).1
    }

    fn is_exact_zero(&self) -> bool {
        matches!(self, Dual::Real(v) if v.is_zero())
    }

    fn pair(tag: u32, re: Dual<S>, eps: Dual<S>) -> Self {
        if eps.is_exact_zero() {
            re
        } else {
            Dual::Pair {
                tag,
                re: Box::new(re),
                eps: Box::new(eps),
            }
        }
    }

    /// Applies `f` with derivative `df` by the chain rule.
    fn chain(&self, f: impl Fn(&Dual<S>) -> Dual<S>, df: impl Fn(&Dual<S>) -> Dual<S>) -> Self {
        match self {
            Dual::Real(_) => f(self),
            Dual::Pair { tag, re, eps } => {
                let slope = df(re);
                Dual::pair(*tag, f(re), &slope * &**eps)
            }
        }
    }

    fn real_map(&self, f: impl Fn(S) -> S) -> Self {
        match self {
            Dual::Real(v) => Dual::Real(f(*v)),
            _ => unreachable!("real_map on a pair"),
        }
    }

    pub fn sin(&self) -> Self {
        self.chain(|x| x.real_map_or(S::sin, Dual::sin), |x| x.cos())
    }

    pub fn cos(&self) -> Self {
        self.chain(|x| x.real_map_or(S::cos, Dual::cos), |x| -x.sin())
    }

    pub fn tan(&self) -> Self {
        &self.sin() / &self.cos()
    }

    pub fn cot(&self) -> Self {
        &self.cos() / &self.sin()
    }

    pub fn sqrt(&self) -> Self {
        self.chain(
            |x| x.real_map_or(S::sqrt, Dual::sqrt),
            |x| &Dual::Real(S::one()) / &(&Dual::Real(S::lit(2.0)) * &x.sqrt()),
        )
    }

    pub fn powi(&self, n: i32) -> Self {
        if n == 0 {
            return Dual::Real(S::one());
        }
        self.chain(
            |x| x.real_map_or(|v| v.powi(n), |d| d.powi(n)),
            |x| &Dual::Real(S::lit(n as f64)) * &x.powi(n - 1),
        )
    }

    pub fn recip(&self) -> Self {
        &Dual::Real(S::one()) / self
    }

    fn real_map_or(&self, real: impl Fn(S) -> S, dual: impl Fn(&Dual<S>) -> Dual<S>) -> Self {
        match self {
            Dual::Real(_) => self.real_map(real),
            _ => dual(self),
        }
    }
}

impl<S: Scalar> From<S> for Dual<S> {
    fn from(v: S) -> Self {
        Dual::Real(v)
    }
}

impl<'a, S: Scalar> Add<&'a Dual<S>> for &'a Dual<S> {
    type Output = Dual<S>;
    fn add(self, rhs: &'a Dual<S>) -> Dual<S> {
        let tag = self.tag().max(rhs.tag());
        if tag == 0 {
            return Dual::Real(self.value() + rhs.value());
        }
        let (ar, ae) = self.split(tag);
        let (br, be) = rhs.split(tag);
        Dual::pair(tag, &ar + &br, &ae + &be)
    }
}

impl<'a, S: Scalar> Sub<&'a Dual<S>> for &'a Dual<S> {
    type Output = Dual<S>;
    fn sub(self, rhs: &'a Dual<S>) -> Dual<S> {
        let tag = self.tag().max(rhs.tag());
        if tag == 0 {
            return Dual::Real(self.value() - rhs.value());
        }
        let (ar, ae) = self.split(tag);
        let (br, be) = rhs.split(tag);
        Dual::pair(tag, &ar - &br, &ae - &be)
    }
}

impl<'a, S: Scalar> Mul<&'a Dual<S>> for &'a Dual<S> {
    type Output = Dual<S>;
    fn mul(self, rhs: &'a Dual<S>) -> Dual<S> {
        let tag = self.tag().max(rhs.tag());
        if tag == 0 {
            return Dual::Real(self.value() * rhs.value());
        }
        let (ar, ae) = self.split(tag);
        let (br, be) = rhs.split(tag);
        let eps = &(&ar * &be) + &(&ae * &br);
        Dual::pair(tag, &ar * &br, eps)
    }
}

impl<'a, S: Scalar> Div<&'a Dual<S>> for &'a Dual<S> {
    type Output = Dual<S>;
    fn div(self, rhs: &'a Dual<S>) -> Dual<S> {
        let tag = self.tag().max(rhs.tag());
        if tag == 0 {
            return Dual::Real(self.value() / rhs.value());
        }
        let (ar, ae) = self.split(tag);
        let (br, be) = rhs.split(tag);
        let quotient = &ar / &br;
        let eps = &(&ae - &(&quotient * &be)) / &br;
        Dual::pair(tag, quotient, eps)
    }
}

impl<S: Scalar> Neg for &Dual<S> {
    type Output = Dual<S>;
    fn neg(self) -> Dual<S> {
        match self {
            Dual::Real(v) => Dual::Real(-*v),
            Dual::Pair { tag, re, eps } => Dual::Pair {
                tag: *tag,
                re: Box::new(-&**re),
                eps: Box::new(-&**eps),
            },
        }
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Dual<S>;
    fn neg(self) -> Dual<S> {
        -&self
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl<S: Scalar> $tr<Dual<S>> for Dual<S> {
            type Output = Dual<S>;
            fn $m(self, rhs: Dual<S>) -> Dual<S> {
                (&self).$m(&rhs)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

/// Exact first derivative of `f` at `x`.
pub fn derivative<S: Scalar>(x: S, f: impl Fn(&Dual<S>) -> Dual<S>) -> S {
    let seeded = Dual::variable(Dual::Real(x), 1);
    f(&seeded).derivative(1).value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_derivatives_of_elementary_functions() {
        let x = 0.7f64;
        assert!((derivative(x, |v| v.sin()) - x.cos()).abs() < 1e-15);
        assert!((derivative(x, |v| v.cot()) + 1.0 / (x.sin() * x.sin())).abs() < 1e-14);
        assert!((derivative(x, |v| v.sqrt()) - 0.5 / x.sqrt()).abs() < 1e-15);
        assert!((derivative(x, |v| v.powi(3)) - 3.0 * x * x).abs() < 1e-15);
        assert!((derivative(x, |v| v.recip()) + 1.0 / (x * x)).abs() < 1e-14);
    }

    #[test]
    fn nested_tags_give_second_derivatives() {
        // d²/dx² sin(x) = -sin(x), taken as the derivative of a derivative.
        let x = 1.3f64;
        let outer = Dual::variable(Dual::Real(x), 1);
        let inner = Dual::variable(outer.clone(), 2);
        let second = inner.sin().derivative(2).derivative(1).value();
        assert!((second + x.sin()).abs() < 1e-15);
    }

    #[test]
    fn perturbation_confusion_is_avoided() {
        // d/dx [ x · d/dy (x + y) ] at x = 1 is 1, not 2.
        let x = Dual::variable(Dual::Real(1.0f64), 1);
        let y = Dual::variable(x.clone(), 2);
        let inner = (&x + &y).derivative(2);
        let outer = (&x * &inner).derivative(1);
        assert_eq!(outer.value(), 1.0);
    }
}
