//! Signed values carried as `(sign, ln|x|)`.
//!
//! Correlated momentum distributions mix Gaussians whose individual factors
//! overflow or underflow long before their product does, and divergence
//! integrands need `ln q` far beyond the point where `q` itself underflows.

/// A real number stored as its sign and the logarithm of its magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub ln_abs: f64,
    pub negative: bool,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        ln_abs: f64::NEG_INFINITY,
        negative: false,
    };

    #[inline]
    pub fn positive(ln_abs: f64) -> Self {
        LogValue {
            ln_abs,
            negative: false,
        }
    }

    #[inline]
    pub fn negative(ln_abs: f64) -> Self {
        LogValue {
            ln_abs,
            negative: true,
        }
    }

    pub fn from_value(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogValue {
                ln_abs: x.abs().ln(),
                negative: x < 0.0,
            }
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        let m = self.ln_abs.exp();
        if self.negative {
            -m
        } else {
            m
        }
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.ln_abs == f64::NEG_INFINITY
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        !self.negative && !self.is_zero()
    }

    #[inline]
    pub fn is_negative(self) -> bool {
        self.negative && !self.is_zero()
    }

    /// Multiply by `e^shift`.
    #[inline]
    pub fn shifted(self, shift: f64) -> Self {
        LogValue {
            ln_abs: self.ln_abs + shift,
            negative: self.negative,
        }
    }
}

impl std::ops::Neg for LogValue {
    type Output = LogValue;

    #[inline]
    fn neg(self) -> Self {
        LogValue {
            ln_abs: self.ln_abs,
            negative: !self.negative,
        }
    }
}

/// Sum of signed terms, evaluated relative to the largest magnitude.
pub fn signed_sum(terms: &[LogValue]) -> LogValue {
    let max = terms
        .iter()
        .map(|t| t.ln_abs)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return LogValue::ZERO;
    }
    let mut acc = 0.0;
    for t in terms {
        if t.is_zero() {
            continue;
        }
        let m = (t.ln_abs - max).exp();
        if t.negative {
            acc -= m;
        } else {
            acc += m;
        }
    }
    if acc == 0.0 {
        LogValue::ZERO
    } else {
        LogValue {
            ln_abs: max + acc.abs().ln(),
            negative: acc < 0.0,
        }
    }
}

/// `ln(e^a + e^b)` for two nonnegative quantities.
#[inline]
pub fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}
