//! Scalar abstraction shared by plain reals and jets.

use std::fmt;

/// Smooth elementary functions admitted by the expression language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }

    /// Value and first three derivatives of the function at `x`.
    ///
    /// Returns a domain error where the function (or its derivatives) is not
    /// defined, so that a jet never carries infinities.
    pub fn derivatives(self, x: f64) -> Result<[f64; 4], DomainKind> {
        Ok(match self {
            Func::Exp => {
                let e = x.exp();
                [e, e, e, e]
            }
            Func::Log => {
                if x <= 0.0 {
                    return Err(DomainKind::LogNonPositive);
                }
                let r = 1.0 / x;
                [x.ln(), r, -r * r, 2.0 * r * r * r]
            }
            Func::Sin => {
                let (s, c) = x.sin_cos();
                [s, c, -s, -c]
            }
            Func::Cos => {
                let (s, c) = x.sin_cos();
                [x.cos(), -s, -c, s]
            }
            Func::Tan => {
                let t = x.tan();
                let sec2 = 1.0 + t * t;
                [t, sec2, 2.0 * t * sec2, sec2 * (2.0 + 6.0 * t * t)]
            }
            Func::Sinh => {
                let (s, c) = (x.sinh(), x.cosh());
                [s, c, s, c]
            }
            Func::Cosh => {
                let (s, c) = (x.sinh(), x.cosh());
                [c, s, c, s]
            }
            Func::Tanh => {
                let t = x.tanh();
                let d = 1.0 - t * t;
                [t, d, -2.0 * t * d, d * (6.0 * t * t - 2.0)]
            }
            Func::Sqrt => {
                if x < 0.0 {
                    return Err(DomainKind::SqrtNegative);
                }
                if x == 0.0 {
                    return Err(DomainKind::SqrtAtZero);
                }
                let s = x.sqrt();
                [s, 0.5 / s, -0.25 / (x * s), 0.375 / (x * x * s)]
            }
        })
    }

    /// Plain real evaluation.
    pub fn eval(self, x: f64) -> Result<f64, DomainKind> {
        match self {
            Func::Log if x <= 0.0 => Err(DomainKind::LogNonPositive),
            Func::Sqrt if x < 0.0 => Err(DomainKind::SqrtNegative),
            Func::Exp => Ok(x.exp()),
            Func::Log => Ok(x.ln()),
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Tan => Ok(x.tan()),
            Func::Sinh => Ok(x.sinh()),
            Func::Cosh => Ok(x.cosh()),
            Func::Tanh => Ok(x.tanh()),
            Func::Sqrt => Ok(x.sqrt()),
        }
    }
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Reason an evaluation left the domain of a primitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    LogNonPositive,
    SqrtNegative,
    SqrtAtZero,
    DivisionByZero,
    ZeroToNegativePower,
    DimensionMismatch,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::LogNonPositive => "log of a non-positive value",
            DomainKind::SqrtNegative => "sqrt of a negative value",
            DomainKind::SqrtAtZero => "sqrt is not differentiable at zero",
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::ZeroToNegativePower => "zero raised to a negative power",
            DomainKind::DimensionMismatch => "jet dimension mismatch",
        })
    }
}

/// Arithmetic needed to evaluate an expression.
///
/// Implemented by `f64` and by [`crate::jet::Jet3`]. The jet implementation
/// performs the same floating-point operations on its value part as the `f64`
/// implementation, so evaluating on a constant jet reproduces the real result
/// bit for bit.
pub trait Scalar: Clone + fmt::Debug + Send + Sync {
    fn value(&self) -> f64;
    fn constant_like(&self, c: f64) -> Self;
    fn add(&self, rhs: &Self) -> Result<Self, DomainKind>;
    fn sub(&self, rhs: &Self) -> Result<Self, DomainKind>;
    fn mul(&self, rhs: &Self) -> Result<Self, DomainKind>;
    fn div(&self, rhs: &Self) -> Result<Self, DomainKind>;
    fn neg(&self) -> Self;
    fn apply(&self, func: Func) -> Result<Self, DomainKind>;
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }

    fn constant_like(&self, c: f64) -> Self {
        c
    }

    fn add(&self, rhs: &Self) -> Result<Self, DomainKind> {
        Ok(self + rhs)
    }

    fn sub(&self, rhs: &Self) -> Result<Self, DomainKind> {
        Ok(self - rhs)
    }

    fn mul(&self, rhs: &Self) -> Result<Self, DomainKind> {
        Ok(self * rhs)
    }

    fn div(&self, rhs: &Self) -> Result<Self, DomainKind> {
        if *rhs == 0.0 {
            Err(DomainKind::DivisionByZero)
        } else {
            Ok(self / rhs)
        }
    }

    fn neg(&self) -> Self {
        -self
    }

    fn apply(&self, func: Func) -> Result<Self, DomainKind> {
        func.eval(*self)
    }
}

/// Integer power by binary exponentiation; negative exponents divide.
pub fn powi<S: Scalar>(base: &S, exponent: i64) -> Result<S, DomainKind> {
    if exponent == 0 {
        return Ok(base.constant_like(1.0));
    }
    let mut k = exponent.unsigned_abs();
    let mut acc: Option<S> = None;
    let mut sq = base.clone();
    loop {
        if k & 1 == 1 {
            acc = Some(match acc {
                None => sq.clone(),
                Some(a) => a.mul(&sq)?,
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        sq = sq.mul(&sq)?;
    }
    let pos = acc.expect("nonzero exponent");
    if exponent > 0 {
        Ok(pos)
    } else if base.value() == 0.0 {
        Err(DomainKind::ZeroToNegativePower)
    } else {
        base.constant_like(1.0).div(&pos)
    }
}
