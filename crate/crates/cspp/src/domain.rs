//! Pointed weight domains: totally ordered weight lattices with extrema and a
//! designated final weight.
//!
//! A weight value is either an exact rational, a finite float, or one of the
//! two infinities. Exact and float values never mix inside one graph; loaders
//! enforce a single numeric mode up front so the hot comparison paths can stay
//! infallible.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("value {value} outside the carrier of {domain}")]
    CarrierViolation { domain: String, value: String },
    #[error("cannot parse weight value from {0:?}")]
    Parse(String),
}

/// One element of a weight domain.
#[derive(Debug, Clone)]
pub enum WeightValue {
    MinusInf,
    Rational(BigRational),
    Float(f64),
    PlusInf,
}

impl WeightValue {
    pub fn int(n: i64) -> Self {
        WeightValue::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        WeightValue::Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Finite float; NaN is rejected and negative zero is normalized.
    pub fn float(x: f64) -> Self {
        assert!(!x.is_nan(), "NaN is not a weight value");
        if x == f64::INFINITY {
            WeightValue::PlusInf
        } else if x == f64::NEG_INFINITY {
            WeightValue::MinusInf
        } else if x == 0.0 {
            WeightValue::Float(0.0)
        } else {
            WeightValue::Float(x)
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, WeightValue::Float(_))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, WeightValue::Rational(_) | WeightValue::Float(_))
    }

    /// Total numeric order (ascending). Exact and float values are only
    /// comparable with values of the same kind; mixes are an internal error.
    pub fn numeric_cmp(&self, other: &WeightValue) -> Ordering {
        use WeightValue::*;
        match (self, other) {
            (MinusInf, MinusInf) => Ordering::Equal,
            (MinusInf, _) => Ordering::Less,
            (_, MinusInf) => Ordering::Greater,
            (PlusInf, PlusInf) => Ordering::Equal,
            (PlusInf, _) => Ordering::Greater,
            (_, PlusInf) => Ordering::Less,
            (Rational(a), Rational(b)) => cmp_rational(a, b),
            (Float(a), Float(b)) => a.total_cmp(b),
            _ => panic!("exact and float weight values mixed in one computation"),
        }
    }

    /// Numeric sum with absorbing infinities. `+inf + -inf` cannot arise from
    /// validated inputs (payloads are finite).
    pub fn add(&self, other: &WeightValue) -> WeightValue {
        use WeightValue::*;
        match (self, other) {
            (MinusInf, PlusInf) | (PlusInf, MinusInf) => {
                panic!("indeterminate sum of opposite infinities")
            }
            (PlusInf, _) | (_, PlusInf) => PlusInf,
            (MinusInf, _) | (_, MinusInf) => MinusInf,
            (Rational(a), Rational(b)) => Rational(a + b),
            (Float(a), Float(b)) => WeightValue::float(a + b),
            _ => panic!("exact and float weight values mixed in one computation"),
        }
    }

    /// Product with `x * inf = inf` for every finite nonnegative `x`,
    /// including zero. Infimum preservation over the empty family forces this
    /// convention for the rate modalities.
    pub fn mul_absorbing_inf(&self, other: &WeightValue) -> WeightValue {
        use WeightValue::*;
        match (self, other) {
            (PlusInf, _) | (_, PlusInf) => PlusInf,
            (MinusInf, _) | (_, MinusInf) => panic!("negative infinity in a product"),
            (Rational(a), Rational(b)) => Rational(a * b),
            (Float(a), Float(b)) => WeightValue::float(a * b),
            _ => panic!("exact and float weight values mixed in one computation"),
        }
    }

    /// Plain finite product; used where the carrier excludes infinities.
    pub fn mul_finite(&self, other: &WeightValue) -> WeightValue {
        use WeightValue::*;
        match (self, other) {
            (Rational(a), Rational(b)) => Rational(a * b),
            (Float(a), Float(b)) => WeightValue::float(a * b),
            _ => panic!("non-finite or mixed operands in a finite product"),
        }
    }

    pub fn numeric_min(&self, other: &WeightValue) -> WeightValue {
        match self.numeric_cmp(other) {
            Ordering::Greater => other.clone(),
            _ => self.clone(),
        }
    }

    pub fn numeric_max(&self, other: &WeightValue) -> WeightValue {
        match self.numeric_cmp(other) {
            Ordering::Less => other.clone(),
            _ => self.clone(),
        }
    }

    /// `|self - other| <= tol`, with equal infinities passing for any
    /// tolerance. `tol` must be finite and of the same numeric kind.
    pub fn within(&self, other: &WeightValue, tol: &WeightValue) -> bool {
        use WeightValue::*;
        match (self, other) {
            (PlusInf, PlusInf) | (MinusInf, MinusInf) => true,
            (Rational(a), Rational(b)) => {
                let tol = match tol {
                    Rational(t) => t.clone(),
                    Float(t) => BigRational::from_float(*t).expect("finite tolerance"),
                    _ => panic!("non-finite tolerance"),
                };
                (a - b).abs() <= tol
            }
            (Float(a), Float(b)) => {
                let t = match tol {
                    Float(t) => *t,
                    Rational(t) => t.to_f64().expect("tolerance fits in f64"),
                    _ => panic!("non-finite tolerance"),
                };
                (a - b).abs() <= t
            }
            (Rational(_), Float(_)) | (Float(_), Rational(_)) => {
                panic!("exact and float weight values mixed in one computation")
            }
            _ => false,
        }
    }

    /// Canonical textual form: `inf`, `-inf`, an integer, `p/q`, or a decimal.
    pub fn render(&self) -> String {
        match self {
            WeightValue::MinusInf => "-inf".to_string(),
            WeightValue::PlusInf => "inf".to_string(),
            WeightValue::Rational(r) => {
                if r.denom().is_one() {
                    r.numer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
            WeightValue::Float(x) => format!("{x}"),
        }
    }

    /// Parses the textual form. `exact` selects rational or float payload.
    pub fn parse(text: &str, exact: bool) -> Result<WeightValue, DomainError> {
        let s = text.trim();
        match s {
            "inf" | "+inf" => return Ok(WeightValue::PlusInf),
            "-inf" => return Ok(WeightValue::MinusInf),
            _ => {}
        }
        if !exact {
            return s
                .parse::<f64>()
                .ok()
                .filter(|x| !x.is_nan())
                .map(WeightValue::float)
                .ok_or_else(|| DomainError::Parse(text.to_string()));
        }
        if let Some((num, den)) = s.split_once('/') {
            let num: BigInt = num
                .trim()
                .parse()
                .map_err(|_| DomainError::Parse(text.to_string()))?;
            let den: BigInt = den
                .trim()
                .parse()
                .map_err(|_| DomainError::Parse(text.to_string()))?;
            if den.is_zero() {
                return Err(DomainError::Parse(text.to_string()));
            }
            return Ok(WeightValue::Rational(BigRational::new(num, den)));
        }
        decimal_to_rational(s).ok_or_else(|| DomainError::Parse(text.to_string()))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            WeightValue::MinusInf => f64::NEG_INFINITY,
            WeightValue::PlusInf => f64::INFINITY,
            WeightValue::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            WeightValue::Float(x) => *x,
        }
    }

    /// The same value in float representation; infinities are unchanged.
    pub fn to_float_value(&self) -> WeightValue {
        match self {
            WeightValue::Rational(r) => WeightValue::float(r.to_f64().expect("finite rational")),
            other => other.clone(),
        }
    }

    /// Numeric comparison that bridges exact and float values through f64.
    /// For diagnostics and range checks only, never for solver decisions.
    pub fn approx_cmp(&self, other: &WeightValue) -> Ordering {
        use WeightValue::*;
        match (self, other) {
            (Rational(_), Float(_)) | (Float(_), Rational(_)) => {
                self.to_f64().total_cmp(&other.to_f64())
            }
            _ => self.numeric_cmp(other),
        }
    }
}

/// Cross-multiplication with a fast path for equal denominators; graphs with
/// integer weights stay on the fast path during the O(V^2) minimal-freezing
/// scans.
fn cmp_rational(a: &BigRational, b: &BigRational) -> Ordering {
    if a.denom() == b.denom() {
        a.numer().cmp(b.numer())
    } else {
        a.cmp(b)
    }
}

/// Decimal literal (optional exponent) to an exact rational.
fn decimal_to_rational(s: &str) -> Option<WeightValue> {
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return None;
    }
    let num: BigInt = digits.parse().ok()?;
    let scale = frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if exp >= scale {
        BigRational::from_integer(num * ten.pow((exp - scale) as u32))
    } else {
        BigRational::new(num, ten.pow((scale - exp) as u32))
    };
    Some(WeightValue::Rational(value))
}

impl PartialEq for WeightValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for WeightValue {}

impl PartialOrd for WeightValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for WeightValue {
    /// Total order for containers: numeric within one kind, exact values
    /// below floats across kinds (the kinds never mix in a validated run).
    fn cmp(&self, other: &Self) -> Ordering {
        use WeightValue::*;
        match (self, other) {
            (Rational(_), Float(_)) => Ordering::Less,
            (Float(_), Rational(_)) => Ordering::Greater,
            _ => self.numeric_cmp(other),
        }
    }
}

impl fmt::Display for WeightValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Whether `⊑` is numeric `<=` or numeric `>=`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderDirection {
    Ascending,
    Descending,
}

/// The built-in carriers from the instance table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainId {
    /// `([0, inf], <=, 0)`
    NonnegRealsAsc,
    /// `(N u {inf}, <=, 0)`
    NaturalsAsc,
    /// `(N u {inf}, >=, 0)`
    NaturalsDesc,
    /// `([-inf, inf], <=, 0)`
    SignedReals,
    /// `([0, inf], >=, inf)`
    NonnegRealsDesc,
    /// `([0, 1], >=, 1)`
    UnitIntervalDesc,
    /// `({0, inf}, <=, 0)`
    ZeroInf,
}

impl fmt::Display for DomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DomainId::NonnegRealsAsc => "nonneg-reals",
            DomainId::NaturalsAsc => "naturals",
            DomainId::NaturalsDesc => "naturals-desc",
            DomainId::SignedReals => "signed-reals",
            DomainId::NonnegRealsDesc => "nonneg-reals-desc",
            DomainId::UnitIntervalDesc => "unit-interval-desc",
            DomainId::ZeroInf => "zero-inf",
        };
        f.write_str(name)
    }
}

/// A pointed weight domain: total order, extrema, and final weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightDomain {
    pub id: DomainId,
    pub direction: OrderDirection,
    pub bottom: WeightValue,
    pub top: WeightValue,
    pub xi: WeightValue,
}

impl WeightDomain {
    pub fn builtin(id: DomainId) -> WeightDomain {
        use DomainId::*;
        use OrderDirection::*;
        let (direction, bottom, top, xi) = match id {
            NonnegRealsAsc => (
                Ascending,
                WeightValue::int(0),
                WeightValue::PlusInf,
                WeightValue::int(0),
            ),
            NaturalsAsc => (
                Ascending,
                WeightValue::int(0),
                WeightValue::PlusInf,
                WeightValue::int(0),
            ),
            NaturalsDesc => (
                Descending,
                WeightValue::PlusInf,
                WeightValue::int(0),
                WeightValue::int(0),
            ),
            SignedReals => (
                Ascending,
                WeightValue::MinusInf,
                WeightValue::PlusInf,
                WeightValue::int(0),
            ),
            NonnegRealsDesc => (
                Descending,
                WeightValue::PlusInf,
                WeightValue::int(0),
                WeightValue::PlusInf,
            ),
            UnitIntervalDesc => (
                Descending,
                WeightValue::int(1),
                WeightValue::int(0),
                WeightValue::int(1),
            ),
            ZeroInf => (
                Ascending,
                WeightValue::int(0),
                WeightValue::PlusInf,
                WeightValue::int(0),
            ),
        };
        WeightDomain {
            id,
            direction,
            bottom,
            top,
            xi,
        }
    }

    /// Same carrier and order with a custom final weight (used by the
    /// discounted game family, whose final weight is a parameter).
    pub fn with_final_weight(id: DomainId, xi: WeightValue) -> Result<WeightDomain, DomainError> {
        let mut dom = WeightDomain::builtin(id);
        dom.check_carrier(&xi)?;
        dom.xi = xi;
        Ok(dom)
    }

    pub fn contains(&self, v: &WeightValue) -> bool {
        use WeightValue::*;
        match self.id {
            DomainId::SignedReals => true,
            DomainId::NonnegRealsAsc | DomainId::NonnegRealsDesc => match v {
                MinusInf => false,
                PlusInf => true,
                Rational(r) => !r.is_negative(),
                Float(x) => *x >= 0.0,
            },
            DomainId::NaturalsAsc | DomainId::NaturalsDesc => match v {
                MinusInf => false,
                PlusInf => true,
                Rational(r) => !r.is_negative() && r.is_integer(),
                Float(x) => *x >= 0.0 && x.fract() == 0.0,
            },
            DomainId::UnitIntervalDesc => match v {
                MinusInf | PlusInf => false,
                Rational(r) => !r.is_negative() && *r <= BigRational::one(),
                Float(x) => (0.0..=1.0).contains(x),
            },
            DomainId::ZeroInf => match v {
                PlusInf => true,
                Rational(r) => r.is_zero(),
                Float(x) => *x == 0.0,
                MinusInf => false,
            },
        }
    }

    pub fn check_carrier(&self, v: &WeightValue) -> Result<(), DomainError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(DomainError::CarrierViolation {
                domain: self.id.to_string(),
                value: v.render(),
            })
        }
    }

    /// The order `⊑`, carrier-checked.
    pub fn compare(&self, a: &WeightValue, b: &WeightValue) -> Result<Ordering, DomainError> {
        self.check_carrier(a)?;
        self.check_carrier(b)?;
        Ok(self.cmp_raw(a, b))
    }

    /// The order `⊑` without carrier checks; hot path for solvers operating
    /// on validated graphs.
    pub fn cmp_raw(&self, a: &WeightValue, b: &WeightValue) -> Ordering {
        let numeric = a.numeric_cmp(b);
        match self.direction {
            OrderDirection::Ascending => numeric,
            OrderDirection::Descending => numeric.reverse(),
        }
    }

    pub fn le(&self, a: &WeightValue, b: &WeightValue) -> bool {
        self.cmp_raw(a, b) != Ordering::Greater
    }

    pub fn lt(&self, a: &WeightValue, b: &WeightValue) -> bool {
        self.cmp_raw(a, b) == Ordering::Less
    }

    /// Infimum of a finite collection; the empty infimum is `top`.
    pub fn meet<'a>(
        &self,
        values: impl IntoIterator<Item = &'a WeightValue>,
    ) -> Result<WeightValue, DomainError> {
        let mut acc: Option<WeightValue> = None;
        for v in values {
            self.check_carrier(v)?;
            acc = Some(match acc {
                None => v.clone(),
                Some(cur) => self.meet2(&cur, v),
            });
        }
        Ok(acc.unwrap_or_else(|| self.top.clone()))
    }

    /// Binary meet: the `⊑`-smaller of the two (the order is total).
    pub fn meet2(&self, a: &WeightValue, b: &WeightValue) -> WeightValue {
        match self.cmp_raw(a, b) {
            Ordering::Greater => b.clone(),
            _ => a.clone(),
        }
    }

    /// The same domain with every designated value in float representation.
    pub fn to_float(&self) -> WeightDomain {
        WeightDomain {
            id: self.id,
            direction: self.direction,
            bottom: self.bottom.to_float_value(),
            top: self.top.to_float_value(),
            xi: self.xi.to_float_value(),
        }
    }
}
