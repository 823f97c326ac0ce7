use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{WindowLen, YearRange};
use crate::metrics::{CiteYearMode, ImpactWindow};
use crate::patterns::{BucketBounds, PatternConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::config(format!(
                "format must be json|csv, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Incoming view keeps journals with surviving incoming weight above this.
    pub in_threshold: i64,
    pub out_threshold: i64,
    pub self_loop_ratio: f64,
    pub bucket_high: f64,
    pub bucket_med: f64,
    pub peak_ratio: f64,
    pub peak_min_abs: f64,
    pub surge_factor: f64,
    pub cartel_min_donors: usize,
    pub cartel_back_max: u64,
    pub chain_min_len: usize,
    pub chain_max_len: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        let p = PatternConfig::default();
        Thresholds {
            in_threshold: 110,
            out_threshold: 109,
            self_loop_ratio: p.self_loop_ratio,
            bucket_high: p.buckets.high_min,
            bucket_med: p.buckets.med_min,
            peak_ratio: 1.5,
            peak_min_abs: 0.5,
            surge_factor: 2.0,
            cartel_min_donors: p.cartel_min_donors,
            cartel_back_max: p.cartel_back_weight_max,
            chain_min_len: p.chain_min_len,
            chain_max_len: p.chain_max_len,
        }
    }
}

/// Every knob of a run. Embedded verbatim in each JSON report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub period: YearRange,
    pub window: WindowLen,
    pub cite_year_mode: CiteYearMode,
    pub thresholds: Thresholds,
    pub top_authors: usize,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            period: YearRange::default(),
            window: WindowLen::Two,
            cite_year_mode: CiteYearMode::Current,
            thresholds: Thresholds::default(),
            top_authors: 5,
            format: OutputFormat::Json,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let t = &self.thresholds;
        if t.in_threshold <= 0 || t.out_threshold <= 0 {
            return Err(Error::config("vertex thresholds must be positive"));
        }
        self.pattern_config().validate()?;
        if !(t.peak_ratio > 1.0) {
            return Err(Error::config(format!(
                "peak ratio must be > 1, got {}",
                t.peak_ratio
            )));
        }
        if !(t.peak_min_abs >= 0.0) {
            return Err(Error::config(format!(
                "peak floor must be >= 0, got {}",
                t.peak_min_abs
            )));
        }
        if !(t.surge_factor > 1.0) {
            return Err(Error::config(format!(
                "surge factor must be > 1, got {}",
                t.surge_factor
            )));
        }
        if self.top_authors == 0 {
            return Err(Error::config("top-author count must be at least 1"));
        }
        Ok(())
    }

    pub fn pattern_config(&self) -> PatternConfig {
        let t = &self.thresholds;
        PatternConfig {
            self_loop_ratio: t.self_loop_ratio,
            buckets: BucketBounds {
                high_min: t.bucket_high,
                med_min: t.bucket_med,
            },
            chain_min_len: t.chain_min_len,
            chain_max_len: t.chain_max_len,
            cartel_min_donors: t.cartel_min_donors,
            cartel_back_weight_max: t.cartel_back_max,
        }
    }

    pub fn impact_window(&self) -> ImpactWindow {
        ImpactWindow::new(self.window, self.cite_year_mode)
    }
}
