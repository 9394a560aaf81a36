use core::fmt;
use core::str::FromStr;

/// Non-negative half-integer angular momentum, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt(u32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);
    pub const ONE: HalfInt = HalfInt(2);
    pub const THREE_HALVES: HalfInt = HalfInt(3);
    pub const TWO: HalfInt = HalfInt(4);

    pub const fn from_twice(twice: u32) -> Self {
        HalfInt(twice)
    }

    pub const fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// `x (x + 1)`.
    pub fn casimir(self) -> f64 {
        let x = self.value();
        x * (x + 1.0)
    }

    /// Number of magnetic sublevels, `2x + 1`.
    pub const fn multiplicity(self) -> u32 {
        self.0 + 1
    }

    /// Allowed couplings `|a - b| ..= a + b` in integer steps.
    pub fn couple(a: HalfInt, b: HalfInt) -> impl Iterator<Item = HalfInt> {
        let lo = a.0.abs_diff(b.0);
        let hi = a.0 + b.0;
        (lo..=hi).step_by(2).map(HalfInt)
    }

    /// True when `f` is reachable by coupling `a` and `b`.
    pub fn couples_to(a: HalfInt, b: HalfInt, f: HalfInt) -> bool {
        let lo = a.0.abs_diff(b.0);
        let hi = a.0 + b.0;
        f.0 >= lo && f.0 <= hi && (f.0 + a.0 + b.0).is_multiple_of(2)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a non-negative half-integer: {0:?}")]
pub struct ParseHalfIntError(pub alloc::string::String);

impl FromStr for HalfInt {
    type Err = ParseHalfIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let err = || ParseHalfIntError(t.into());
        if let Some((num, den)) = t.split_once('/') {
            if den.trim() != "2" {
                return Err(err());
            }
            let n: u32 = num.trim().parse().map_err(|_| err())?;
            if n.is_multiple_of(2) {
                return Err(err());
            }
            Ok(HalfInt(n))
        } else if let Ok(n) = t.parse::<u32>() {
            Ok(HalfInt(2 * n))
        } else {
            let v: f64 = t.parse().map_err(|_| err())?;
            let twice = v * 2.0;
            if !(0.0..=1e6).contains(&twice) || twice != libm::round(twice) {
                return Err(err());
            }
            Ok(HalfInt(twice as u32))
        }
    }
}
