use std::fmt;

use super::NumericsError;

/// An open interval of the extended real line. Either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, NumericsError> {
        if lo.is_nan() || hi.is_nan() || !(lo < hi) {
            return Err(NumericsError::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// The whole real line.
    pub const fn real_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    /// `(lo, +inf)`.
    pub const fn above(lo: f64) -> Self {
        Self {
            lo,
            hi: f64::INFINITY,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Length unit used for relative margins: the width of a finite interval,
    /// otherwise `max(1, |x|)` at the probed location.
    pub fn relative_unit(&self, x: f64) -> f64 {
        if self.is_finite() {
            self.width()
        } else {
            x.abs().max(1.0)
        }
    }

    /// Length unit for boundary clearance: the width of a finite interval,
    /// otherwise `max(1, |finite end|)`.
    pub fn margin_unit(&self) -> f64 {
        if self.is_finite() {
            self.width()
        } else if self.lo.is_finite() {
            self.lo.abs().max(1.0)
        } else if self.hi.is_finite() {
            self.hi.abs().max(1.0)
        } else {
            1.0
        }
    }

    /// True if `x` lies strictly inside with at least `margin` (relative
    /// units) of clearance from every finite end.
    pub fn contains_with_margin(&self, x: f64, margin: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        let pad = margin * self.margin_unit();
        x - self.lo > pad && self.hi - x > pad
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn end(x: f64) -> String {
            if x == f64::INFINITY {
                "inf".into()
            } else if x == f64::NEG_INFINITY {
                "-inf".into()
            } else {
                format!("{x}")
            }
        }
        write!(f, "({},{})", end(self.lo), end(self.hi))
    }
}

/// Axis-aligned box with finite, non-degenerate sides.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperRectangle {
    axes: Vec<Interval>,
}

impl HyperRectangle {
    pub fn new(axes: Vec<Interval>) -> Result<Self, NumericsError> {
        if axes.is_empty() {
            return Err(NumericsError::EmptyBox);
        }
        if let Some(axis) = axes.iter().position(|a| !a.is_finite()) {
            return Err(NumericsError::UnboundedAxis { axis });
        }
        Ok(Self { axes })
    }

    /// Build from `(lo, hi)` pairs.
    pub fn from_bounds(bounds: &[(f64, f64)]) -> Result<Self, NumericsError> {
        let axes = bounds
            .iter()
            .map(|&(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Interval] {
        &self.axes
    }

    pub fn volume(&self) -> f64 {
        self.axes.iter().map(Interval::width).product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.axes.iter().map(Interval::midpoint).collect()
    }

    /// Split along `axis` at its midpoint.
    pub fn bisect(&self, axis: usize) -> (Self, Self) {
        let a = self.axes[axis];
        let mid = a.midpoint();
        let mut left = self.axes.clone();
        let mut right = self.axes.clone();
        left[axis] = Interval { lo: a.lo, hi: mid };
        right[axis] = Interval { lo: mid, hi: a.hi };
        (Self { axes: left }, Self { axes: right })
    }

    /// Sub-box made of the listed axes, in order.
    pub fn select(&self, axes: &[usize]) -> Result<Self, NumericsError> {
        Self::new(axes.iter().map(|&k| self.axes[k]).collect())
    }
}

impl fmt::Display for HyperRectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .axes
            .iter()
            .map(|a| format!("[{}, {}]", a.lo, a.hi))
            .collect();
        f.write_str(&parts.join(" x "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_and_reversed() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        assert!(Interval::new(f64::NEG_INFINITY, f64::INFINITY).is_ok());
    }

    #[test]
    fn display_uses_inf_tokens() {
        assert_eq!(Interval::real_line().to_string(), "(-inf,inf)");
        assert_eq!(Interval::above(0.0).to_string(), "(0,inf)");
        assert_eq!(Interval::new(0.0, 1.0).unwrap().to_string(), "(0,1)");
    }

    #[test]
    fn margin_is_relative() {
        let unit = Interval::new(0.0, 1.0).unwrap();
        assert!(unit.contains_with_margin(0.5, 1e-9));
        assert!(!unit.contains_with_margin(1e-10, 1e-9));
        assert!(!unit.contains_with_margin(1.0, 1e-9));
        let half = Interval::above(0.0);
        assert!(half.contains_with_margin(1e-8, 1e-9));
        assert!(!half.contains_with_margin(0.0, 1e-9));
        assert!(Interval::real_line().contains_with_margin(-1e300, 1e-9));
        assert!(!Interval::real_line().contains_with_margin(f64::INFINITY, 1e-9));
    }

    #[test]
    fn box_requires_finite_axes() {
        assert!(HyperRectangle::new(vec![]).is_err());
        assert!(HyperRectangle::new(vec![Interval::above(0.0)]).is_err());
        let b = HyperRectangle::from_bounds(&[(0.0, 2.0), (1.0, 4.0)]).unwrap();
        assert_eq!(b.volume(), 6.0);
        let (l, r) = b.bisect(1);
        assert_eq!(l.axes()[1].hi(), 2.5);
        assert_eq!(r.axes()[1].lo(), 2.5);
    }
}
