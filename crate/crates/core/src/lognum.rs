//! Signed numbers stored as `(sign, ln|v|)` for magnitudes far outside the
//! `f64` range.
//!
//! `sign == 0` is an exact zero. A nonzero sign with `ln_mag == -inf` is a
//! value known to be nonzero whose magnitude underflowed.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNum {
    pub sign: i8,
    #[serde(with = "ln_mag_serde")]
    pub ln_mag: f64,
}

mod ln_mag_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    // JSON has no infinities; -inf is written as null.
    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

impl LogNum {
    pub const ZERO: LogNum = LogNum {
        sign: 0,
        ln_mag: f64::NEG_INFINITY,
    };
    pub const ONE: LogNum = LogNum { sign: 1, ln_mag: 0.0 };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            LogNum::ZERO
        } else {
            LogNum {
                sign: if v > 0.0 { 1 } else { -1 },
                ln_mag: v.abs().ln(),
            }
        }
    }

    /// Positive value `exp(ln_mag)`.
    pub fn from_ln(ln_mag: f64) -> Self {
        LogNum { sign: 1, ln_mag }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.ln_mag.exp()
        }
    }

    pub fn neg(self) -> Self {
        LogNum {
            sign: -self.sign,
            ln_mag: self.ln_mag,
        }
    }

    pub fn mul(self, o: LogNum) -> Self {
        if self.sign == 0 || o.sign == 0 {
            return LogNum::ZERO;
        }
        LogNum {
            sign: self.sign * o.sign,
            ln_mag: self.ln_mag + o.ln_mag,
        }
    }

    pub fn div(self, o: LogNum) -> Self {
        assert!(o.sign != 0, "LogNum division by zero");
        if self.sign == 0 {
            return LogNum::ZERO;
        }
        LogNum {
            sign: self.sign * o.sign,
            ln_mag: self.ln_mag - o.ln_mag,
        }
    }

    pub fn add(self, o: LogNum) -> Self {
        if self.sign == 0 {
            return o;
        }
        if o.sign == 0 {
            return self;
        }
        let (big, small) = if self.ln_mag >= o.ln_mag { (self, o) } else { (o, self) };
        if big.ln_mag == f64::NEG_INFINITY {
            // both underflowed; the sum keeps the sign of either when they agree
            return if big.sign == small.sign { big } else { LogNum::ZERO };
        }
        let r = (small.ln_mag - big.ln_mag).exp();
        if big.sign == small.sign {
            LogNum {
                sign: big.sign,
                ln_mag: big.ln_mag + r.ln_1p(),
            }
        } else if r == 1.0 {
            LogNum::ZERO
        } else {
            LogNum {
                sign: big.sign,
                ln_mag: big.ln_mag + (-r).ln_1p(),
            }
        }
    }

    pub fn sub(self, o: LogNum) -> Self {
        self.add(o.neg())
    }

    pub fn scale_f64(self, f: f64) -> Self {
        self.mul(LogNum::from_f64(f))
    }

    pub fn cmp_value(&self, o: &LogNum) -> Ordering {
        match self.sign.cmp(&o.sign) {
            Ordering::Equal => match self.sign {
                0 => Ordering::Equal,
                1 => self.ln_mag.total_cmp(&o.ln_mag),
                _ => o.ln_mag.total_cmp(&self.ln_mag),
            },
            ord => ord,
        }
    }
}

/// `ln Σ exp(a_i)` ignoring `-inf` entries.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().filter(|a| *a > f64::NEG_INFINITY).collect();
    let Some(m) = v.iter().copied().reduce(f64::max) else {
        return f64::NEG_INFINITY;
    };
    if m == f64::INFINITY {
        return m;
    }
    m + v.iter().map(|a| (a - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_matches_f64() {
        let a = LogNum::from_f64(3.5);
        let b = LogNum::from_f64(-1.25);
        assert!((a.add(b).to_f64() - 2.25).abs() < 1e-14);
        assert!((a.sub(b).to_f64() - 4.75).abs() < 1e-14);
        assert!((a.mul(b).to_f64() + 4.375).abs() < 1e-14);
        assert!((b.div(a).to_f64() + 1.25 / 3.5).abs() < 1e-15);
        assert!(a.sub(a).is_zero());
    }

    #[test]
    fn huge_magnitudes_stay_finite() {
        let a = LogNum::from_ln(1e6);
        let b = LogNum::from_ln(1e6 - 1.0);
        let s = a.add(b);
        assert!((s.ln_mag - (1e6 + (1.0 + (-1.0f64).exp()).ln())).abs() < 1e-6);
        assert_eq!(a.cmp_value(&b), Ordering::Greater);
        assert_eq!(b.neg().cmp_value(&a.neg()), Ordering::Greater);
    }

    #[test]
    fn serde_encodes_zero_as_null() {
        let s = serde_json::to_string(&LogNum::ZERO).unwrap();
        assert_eq!(s, r#"{"sign":0,"ln_mag":null}"#);
        let back: LogNum = serde_json::from_str(&s).unwrap();
        assert!(back.is_zero() && back.ln_mag == f64::NEG_INFINITY);
    }

    #[test]
    fn lse_ignores_neg_infinity() {
        let v = log_sum_exp([0.0, f64::NEG_INFINITY, 0.0]);
        assert!((v - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp([]), f64::NEG_INFINITY);
    }
}
