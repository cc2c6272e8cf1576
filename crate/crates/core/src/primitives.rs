//! The function set available to evolved programs.
//!
//! Every primitive is total over finite inputs: division, logarithm and
//! inverse are protected around zero, and square root works on the absolute
//! value of its argument.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Magnitude at or below which a denominator or log argument counts as zero.
pub const PROTECT_EPS: f64 = 0.001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Primitive {
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
    Log,
    Abs,
    Neg,
    Inv,
    Max,
    Min,
    If3,
    If4,
}

impl Primitive {
    pub const ALL: [Primitive; 13] = [
        Primitive::Add,
        Primitive::Sub,
        Primitive::Mul,
        Primitive::Div,
        Primitive::Sqrt,
        Primitive::Log,
        Primitive::Abs,
        Primitive::Neg,
        Primitive::Inv,
        Primitive::Max,
        Primitive::Min,
        Primitive::If3,
        Primitive::If4,
    ];

    pub const fn arity(self) -> usize {
        use Primitive::*;
        match self {
            Sqrt | Log | Abs | Neg | Inv => 1,
            Add | Sub | Mul | Div | Max | Min => 2,
            If3 => 3,
            If4 => 4,
        }
    }

    pub const fn name(self) -> &'static str {
        use Primitive::*;
        match self {
            Add => "add",
            Sub => "sub",
            Mul => "mul",
            Div => "div",
            Sqrt => "sqrt",
            Log => "log",
            Abs => "abs",
            Neg => "neg",
            Inv => "inv",
            Max => "max",
            Min => "min",
            If3 => "if3",
            If4 => "if4",
        }
    }

    /// Primitives sharing the given arity, in canonical order.
    pub fn with_arity(arity: usize) -> impl Iterator<Item = Primitive> {
        Self::ALL.into_iter().filter(move |p| p.arity() == arity)
    }

    /// Applies the primitive to `args`.
    ///
    /// Panics if `args.len() != self.arity()`; callers validate arity when a
    /// program is built, so a mismatch here is a bug.
    pub fn apply(self, args: &[f64]) -> f64 {
        assert_eq!(
            args.len(),
            self.arity(),
            "{} takes {} arguments, got {}",
            self.name(),
            self.arity(),
            args.len()
        );
        match self.arity() {
            1 => self.apply1(args[0]),
            2 => self.apply2(args[0], args[1]),
            3 => if3(args[0], args[1], args[2]),
            _ => if4(args[0], args[1], args[2], args[3]),
        }
    }

    #[inline]
    pub(crate) fn apply1(self, a: f64) -> f64 {
        match self {
            Primitive::Sqrt => a.abs().sqrt(),
            Primitive::Log => protected_log(a),
            Primitive::Abs => a.abs(),
            Primitive::Neg => -a,
            Primitive::Inv => protected_inv(a),
            _ => unreachable!("{} is not unary", self.name()),
        }
    }

    #[inline]
    pub(crate) fn apply2(self, a: f64, b: f64) -> f64 {
        match self {
            Primitive::Add => a + b,
            Primitive::Sub => a - b,
            Primitive::Mul => a * b,
            Primitive::Div => protected_div(a, b),
            Primitive::Max => max(a, b),
            Primitive::Min => min(a, b),
            _ => unreachable!("{} is not binary", self.name()),
        }
    }
}

#[inline]
pub(crate) fn protected_div(a: f64, b: f64) -> f64 {
    if b.abs() > PROTECT_EPS {
        a / b
    } else {
        1.0
    }
}

#[inline]
pub(crate) fn protected_log(a: f64) -> f64 {
    if a.abs() > PROTECT_EPS {
        a.abs().ln()
    } else {
        0.0
    }
}

#[inline]
pub(crate) fn protected_inv(a: f64) -> f64 {
    if a.abs() > PROTECT_EPS {
        1.0 / a
    } else {
        0.0
    }
}

// f64::max/min return the non-NaN operand; NaN must propagate so that a
// broken program is scored as broken.
#[inline]
fn max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else if a >= b {
        a
    } else {
        b
    }
}

#[inline]
fn min(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else if a <= b {
        a
    } else {
        b
    }
}

#[inline]
pub(crate) fn if3(cond: f64, then: f64, other: f64) -> f64 {
    if cond >= 0.0 {
        then
    } else {
        other
    }
}

#[inline]
pub(crate) fn if4(lhs: f64, rhs: f64, then: f64, other: f64) -> f64 {
    if lhs >= rhs {
        then
    } else {
        other
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Primitive {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Primitive::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidProgram(format!("unknown primitive '{s}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Primitive::*;

    #[test]
    fn table_shape() {
        assert_eq!(Primitive::ALL.len(), 13);
        for p in [Add, Sub, Mul, Div, Max, Min] {
            assert_eq!(p.arity(), 2, "{p}");
        }
        for p in [Sqrt, Log, Abs, Neg, Inv] {
            assert_eq!(p.arity(), 1, "{p}");
        }
        assert_eq!(If3.arity(), 3);
        assert_eq!(If4.arity(), 4);
    }

    #[test]
    fn names_round_trip() {
        for p in Primitive::ALL {
            assert_eq!(p.name().parse::<Primitive>().unwrap(), p);
        }
        assert!("sin".parse::<Primitive>().is_err());
    }

    #[test]
    fn documented_values() {
        assert_eq!(Div.apply(&[1.0, 0.0]), 1.0);
        assert_eq!(Sqrt.apply(&[-4.0]), 2.0);
        assert_eq!(If3.apply(&[0.0, 5.0, 7.0]), 5.0);
        assert_eq!(If4.apply(&[2.0, 3.0, 10.0, 20.0]), 20.0);
        assert_eq!(Neg.apply(&[0.0]), 0.0);
        assert_eq!(Log.apply(&[1.0]), 0.0);
    }

    #[test]
    fn protection_edges() {
        assert_eq!(Div.apply(&[5.0, 0.001]), 1.0);
        assert_eq!(Div.apply(&[5.0, -0.001]), 1.0);
        assert_eq!(Div.apply(&[5.0, 0.002]), 5.0 / 0.002);
        assert_eq!(Log.apply(&[-0.0005]), 0.0);
        assert_eq!(Log.apply(&[-std::f64::consts::E]), 1.0);
        assert_eq!(Inv.apply(&[0.0]), 0.0);
        assert_eq!(Inv.apply(&[0.001]), 0.0);
        assert_eq!(Inv.apply(&[-4.0]), -0.25);
        assert_eq!(If3.apply(&[-1e-300, 5.0, 7.0]), 7.0);
        assert_eq!(If4.apply(&[3.0, 3.0, 10.0, 20.0]), 10.0);
    }

    #[test]
    fn unselected_branch_is_ignored() {
        assert_eq!(If3.apply(&[1.0, 2.0, f64::NAN]), 2.0);
        assert_eq!(If4.apply(&[0.0, 1.0, f64::INFINITY, 4.0]), 4.0);
    }

    #[test]
    #[should_panic(expected = "takes 2 arguments")]
    fn arity_mismatch_panics() {
        Add.apply(&[1.0]);
    }

    fn big() -> impl Strategy<Value = f64> {
        -1e100..1e100f64
    }

    proptest! {
        #[test]
        fn total_on_finite_inputs(a in big(), b in big(), c in big(), d in big()) {
            for p in Primitive::ALL {
                let args = [a, b, c, d];
                let v = p.apply(&args[..p.arity()]);
                // Only unprotected overflow (mul, div by tiny-but-not-zero) may leave the reals.
                prop_assert!(!v.is_nan(), "{} -> NaN", p);
            }
        }

        #[test]
        fn division_boundary(x in big(), d in -0.01..0.01f64) {
            let v = Div.apply(&[x, d]);
            if d.abs() <= PROTECT_EPS {
                prop_assert_eq!(v, 1.0);
            } else {
                prop_assert_eq!(v, x / d);
            }
        }

        #[test]
        fn commutative_primitives(a in big(), b in big()) {
            for p in [Add, Mul, Max, Min] {
                prop_assert_eq!(p.apply(&[a, b]), p.apply(&[b, a]));
            }
        }

        #[test]
        fn conditionals_select_exactly_one_branch(a in big(), b in big()) {
            let t = If3.apply(&[a, 1.0, 2.0]);
            prop_assert_eq!(t, if a >= 0.0 { 1.0 } else { 2.0 });
            let t = If4.apply(&[a, b, 1.0, 2.0]);
            prop_assert_eq!(t, if a >= b { 1.0 } else { 2.0 });
        }
    }
}
