use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use super::SpectraError;

/// A tabulated quantity in concise notation, e.g. `278.9(4)` or `355.3(4.4)`.
///
/// The original `value(stat)` text is kept so that a record can be written
/// back out exactly as it was read. An optional `[sys]` suffix carries a
/// systematic uncertainty in the same unit, e.g. `198(4)[20]`; it is not
/// part of [`Measured::text`].
#[derive(Clone, Debug, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub stat: f64,
    pub sys: f64,
    text: String,
}

impl Measured {
    /// An exact value with no uncertainty.
    pub fn exact(value: f64) -> Self {
        Measured {
            value,
            stat: 0.0,
            sys: 0.0,
            text: value.to_string(),
        }
    }

    pub fn with_systematic(mut self, sys: f64) -> Self {
        self.sys = sys;
        self
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// `stat` and `sys` added in quadrature.
    pub fn total_uncertainty(&self) -> f64 {
        libm::hypot(self.stat, self.sys)
    }
}

impl fmt::Display for Measured {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)?;
        if self.sys != 0.0 {
            write!(f, "[{}]", self.sys)?;
        }
        Ok(())
    }
}

fn decimals(number: &str) -> i32 {
    number
        .split_once('.')
        .map_or(0, |(_, frac)| frac.len() as i32)
}

fn parse_number(s: &str, whole: &str) -> Result<f64, SpectraError> {
    let ok = !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
    if !ok {
        return Err(SpectraError::BadNumber(whole.into()));
    }
    s.parse::<f64>()
        .map_err(|_| SpectraError::BadNumber(whole.into()))
}

impl FromStr for Measured {
    type Err = SpectraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        if text.is_empty() {
            return Err(SpectraError::BadNumber(s.into()));
        }

        let (body, sys) = match text.strip_suffix(']') {
            Some(rest) => {
                let (body, sys) = rest
                    .rsplit_once('[')
                    .ok_or_else(|| SpectraError::BadNumber(text.into()))?;
                (body, parse_number(sys, text)?)
            }
            None => (text, 0.0),
        };

        let (value_str, stat) = match body.strip_suffix(')') {
            Some(rest) => {
                let (value_str, unc) = rest
                    .split_once('(')
                    .ok_or_else(|| SpectraError::BadNumber(text.into()))?;
                let raw = parse_number(unc, text)?;
                // `278.9(4)` counts in the last digit; `355.3(4.4)` is literal.
                let stat = if unc.contains('.') {
                    raw
                } else {
                    raw * libm::pow(10.0, -f64::from(decimals(value_str)))
                };
                (value_str, stat)
            }
            None => (body, 0.0),
        };

        let value = parse_number(value_str, text)?;
        if stat < 0.0 || sys < 0.0 {
            return Err(SpectraError::BadNumber(text.into()));
        }
        Ok(Measured {
            value,
            stat,
            sys,
            text: body.trim().into(),
        })
    }
}
