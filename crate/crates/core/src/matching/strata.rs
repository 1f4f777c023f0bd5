use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How size bands relate to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandMode {
    /// `< b` bands are cumulative: "< 4mm" contains the "< 2mm" lesions.
    #[default]
    Overlapping,
    /// Bands partition the diameter axis: "< 2mm", "2-4mm", "≥ 4mm".
    Disjoint,
}

impl std::str::FromStr for BandMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "overlapping" => Ok(BandMode::Overlapping),
            "disjoint" => Ok(BandMode::Disjoint),
            other => Err(Error::InvalidArgument(format!("band mode must be overlapping or disjoint, got {other:?}"))),
        }
    }
}

/// A diameter interval `[lower, upper)` in mm; open ends are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeBand {
    pub label: String,
    pub lower_mm: Option<f64>,
    pub upper_mm: Option<f64>,
}

impl SizeBand {
    pub fn all() -> Self {
        SizeBand { label: "all".into(), lower_mm: None, upper_mm: None }
    }

    #[inline]
    pub fn contains(&self, diameter_mm: f64) -> bool {
        self.lower_mm.is_none_or(|lo| diameter_mm >= lo) && self.upper_mm.is_none_or(|hi| diameter_mm < hi)
    }
}

/// Diameter boundaries that define the size strata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumSpec {
    boundaries_mm: Vec<f64>,
    mode: BandMode,
}

impl Default for StratumSpec {
    fn default() -> Self {
        StratumSpec { boundaries_mm: vec![2.0, 4.0], mode: BandMode::Overlapping }
    }
}

impl StratumSpec {
    pub fn new(boundaries_mm: Vec<f64>, mode: BandMode) -> Result<Self> {
        if boundaries_mm.is_empty() {
            return Err(Error::InvalidArgument("at least one stratum boundary is required".into()));
        }
        if boundaries_mm.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::InvalidArgument(format!("stratum boundaries must be positive: {boundaries_mm:?}")));
        }
        if boundaries_mm.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!("stratum boundaries must be strictly ascending: {boundaries_mm:?}")));
        }
        Ok(StratumSpec { boundaries_mm, mode })
    }

    /// Parses a comma-separated boundary list such as `"2,4"`.
    pub fn parse(list: &str, mode: BandMode) -> Result<Self> {
        let boundaries = list
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad stratum boundary {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(boundaries, mode)
    }

    pub fn boundaries_mm(&self) -> &[f64] {
        &self.boundaries_mm
    }

    pub fn mode(&self) -> BandMode {
        self.mode
    }

    /// Size bands in display order (the "all" row is not included).
    pub fn bands(&self) -> Vec<SizeBand> {
        let b = &self.boundaries_mm;
        let last = *b.last().expect("validated nonempty");
        let mut bands = Vec::with_capacity(b.len() + 1);
        match self.mode {
            BandMode::Overlapping => {
                for &upper in b {
                    bands.push(SizeBand { label: format!("< {}mm", fmt_mm(upper)), lower_mm: None, upper_mm: Some(upper) });
                }
            }
            BandMode::Disjoint => {
                bands.push(SizeBand { label: format!("< {}mm", fmt_mm(b[0])), lower_mm: None, upper_mm: Some(b[0]) });
                for w in b.windows(2) {
                    bands.push(SizeBand {
                        label: format!("{}-{}mm", fmt_mm(w[0]), fmt_mm(w[1])),
                        lower_mm: Some(w[0]),
                        upper_mm: Some(w[1]),
                    });
                }
            }
        }
        bands.push(SizeBand { label: format!("≥ {}mm", fmt_mm(last)), lower_mm: Some(last), upper_mm: None });
        bands
    }
}

fn fmt_mm(v: f64) -> String {
    let s = format!("{v}");
    s.strip_suffix(".0").map(str::to_owned).unwrap_or(s)
}
