use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Result, VoiError};

/// An inclusive, evenly spaced grid of information amounts, written
/// `start:end:count` on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaGrid {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl LambdaGrid {
    pub fn new(start: f64, end: f64, count: usize) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(VoiError::InvalidArgument("grid endpoints must be finite".into()));
        }
        if start < 0.0 {
            return Err(VoiError::InvalidArgument(format!("grid start {start} is negative")));
        }
        if count < 2 {
            return Err(VoiError::InvalidArgument(format!("grid needs at least 2 points, got {count}")));
        }
        if end <= start {
            return Err(VoiError::InvalidArgument(format!(
                "grid end {end} must exceed start {start}"
            )));
        }
        Ok(LambdaGrid { start, end, count })
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.end
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

impl FromStr for LambdaGrid {
    type Err = VoiError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, end, count] = parts.as_slice() else {
            return Err(VoiError::InvalidArgument(format!(
                "grid `{s}` is not of the form start:end:count"
            )));
        };
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| VoiError::InvalidArgument(format!("bad grid number `{x}`")))
        };
        let count = count
            .trim()
            .parse::<usize>()
            .map_err(|_| VoiError::InvalidArgument(format!("bad grid count `{count}`")))?;
        LambdaGrid::new(num(start)?, num(end)?, count)
    }
}

impl fmt::Display for LambdaGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.count)
    }
}

/// Checks that `grid` is a usable sweep: at least two finite, non-negative,
/// strictly increasing values.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(VoiError::TooFewPoints {
            needed: 2,
            found: grid.len(),
        });
    }
    if grid.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(VoiError::InvalidArgument(
            "grid values must be finite and non-negative".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(VoiError::InvalidArgument("grid must be strictly increasing".into()));
    }
    Ok(())
}
