//! Classical lotteries used to probe the expected-utility postulate.
//!
//! Infinite lotteries (St. Petersburg and its loss-side reflection) are
//! truncated to `n` tosses by conditioning on a head within the first `n`:
//! `P(head at k) = 2^-k / (1 - 2^-n)`, payoff `±2^k`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::decision::Lottery;
use crate::error::{Result, VoiError};

/// Default number of discretized urn compositions for the ambiguous urn.
pub const ELLSBERG_FAMILY_SIZE: usize = 101;

/// Largest truncation accepted for the coin-tossing lotteries (keeps `2^n` finite).
pub const MAX_TOSSES: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Paradox {
    Example1Variance,
    Ellsberg,
    StPetersburg,
    NorthernRock,
    AllaisGain,
    AllaisLoss,
}

impl Paradox {
    pub const ALL: [Paradox; 6] = [
        Paradox::Example1Variance,
        Paradox::Ellsberg,
        Paradox::StPetersburg,
        Paradox::NorthernRock,
        Paradox::AllaisGain,
        Paradox::AllaisLoss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Paradox::Example1Variance => "example1_variance",
            Paradox::Ellsberg => "ellsberg",
            Paradox::StPetersburg => "st_petersburg",
            Paradox::NorthernRock => "northern_rock",
            Paradox::AllaisGain => "allais_gain",
            Paradox::AllaisLoss => "allais_loss",
        }
    }

    pub fn is_truncated(self) -> bool {
        matches!(self, Paradox::StPetersburg | Paradox::NorthernRock)
    }
}

impl fmt::Display for Paradox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Paradox {
    type Err = VoiError;

    fn from_str(s: &str) -> Result<Self> {
        Paradox::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| VoiError::UnknownParadox(s.to_string()))
    }
}

/// The lotteries of one catalog entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParadoxFixture {
    pub paradox: Paradox,
    pub p: Lottery,
    /// The comparison lottery, absent for single-lottery examples.
    pub q: Option<Lottery>,
    /// Discretized compositions of the ambiguous urn (Ellsberg only).
    pub family: Vec<Lottery>,
    pub note: String,
}

pub fn paradox(which: Paradox, n: Option<u32>) -> Result<ParadoxFixture> {
    let fixture = match which {
        Paradox::Example1Variance => ParadoxFixture {
            paradox: which,
            p: Lottery::from_pairs(&[(0.0, -1000.0), (0.5, -1.0), (0.5, 1.0), (0.0, 1000.0)])?,
            q: Some(Lottery::from_pairs(&[
                (0.5, -1000.0),
                (0.0, -1.0),
                (0.0, 1.0),
                (0.5, 1000.0),
            ])?),
            family: Vec::new(),
            note: "equal means, very different spread".into(),
        },
        Paradox::Ellsberg => {
            let family = ellsberg_family(ELLSBERG_FAMILY_SIZE)?;
            ParadoxFixture {
                paradox: which,
                p: Lottery::from_pairs(&[(0.5, 100.0), (0.5, 0.0)])?,
                // Averaging Q($100) = t over t ~ U[0, 1] gives t = 1/2.
                q: Some(Lottery::from_pairs(&[(0.5, 100.0), (0.5, 0.0)])?),
                family,
                note: format!(
                    "unknown urn averaged over a uniform composition t in [0,1]; \
                     family holds t = i/{} for i = 0..={}",
                    ELLSBERG_FAMILY_SIZE - 1,
                    ELLSBERG_FAMILY_SIZE - 1
                ),
            }
        }
        Paradox::StPetersburg | Paradox::NorthernRock => {
            let n = n.ok_or_else(|| {
                VoiError::InvalidArgument(format!("{which} needs a truncation length n"))
            })?;
            let p = coin_tossing(n)?;
            let p = if which == Paradox::NorthernRock { p.negated() } else { p };
            ParadoxFixture {
                paradox: which,
                p,
                q: None,
                family: Vec::new(),
                note: format!(
                    "truncated to {n} tosses, P(head at k) = 2^-k / (1 - 2^-{n})"
                ),
            }
        }
        Paradox::AllaisGain => ParadoxFixture {
            paradox: which,
            p: Lottery::from_pairs(&[(1.0 / 3.0, 300.0), (2.0 / 3.0, 0.0)])?,
            q: Some(Lottery::certain(100.0)?),
            family: Vec::new(),
            note: "gain frame".into(),
        },
        Paradox::AllaisLoss => ParadoxFixture {
            paradox: which,
            p: Lottery::from_pairs(&[(1.0 / 3.0, -300.0), (2.0 / 3.0, 0.0)])?,
            q: Some(Lottery::certain(-100.0)?),
            family: Vec::new(),
            note: "loss frame".into(),
        },
    };
    Ok(fixture)
}

fn coin_tossing(n: u32) -> Result<Lottery> {
    if n == 0 || n > MAX_TOSSES {
        return Err(VoiError::InvalidArgument(format!(
            "truncation length must be in 1..={MAX_TOSSES}, got {n}"
        )));
    }
    let resolved = 1.0 - 0.5f64.powi(n as i32);
    let pairs: Vec<(f64, f64)> = (1..=n as i32)
        .map(|k| (0.5f64.powi(k) / resolved, 2f64.powi(k)))
        .collect();
    Lottery::from_pairs(&pairs)
}

fn ellsberg_family(size: usize) -> Result<Vec<Lottery>> {
    let steps = (size - 1) as f64;
    (0..size)
        .map(|i| {
            let t = i as f64 / steps;
            Lottery::from_pairs(&[(t, 100.0), (1.0 - t, 0.0)])
        })
        .collect()
}
