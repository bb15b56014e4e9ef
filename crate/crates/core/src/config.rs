//! Run configuration. Files are flat TOML key-value lists:
//!
//! ```toml
//! kind = "fock"          # fock | poissonian | thermal | coherent-pure | custom
//! mean = 100             # N for fock, mean number otherwise
//! chi = 1.0
//! chi_t_min = 0.0
//! chi_t_max = 0.05
//! points = 400
//! criteria = "all"       # or a list of criterion names
//! truncation = 1e-10
//! lo_floor = 1e-6
//! memory_budget_bytes = 1073741824
//! output = "sweep.csv"
//! format = "csv"         # csv | json | both
//! # kind = "custom" takes weights = [[2, 0.5], [4, 0.5]] instead of mean
//! ```
//!
//! A size comparison uses `sizes = [10, 100, 1000]` and a grid in `N chi t`
//! given by `scaled_min`, `scaled_max` and `points`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::criteria::CriterionId;
use crate::dynamics::MemoryBudget;
use crate::ensembles::{build_distribution, DistributionKind, NumberDistribution, DEFAULT_TRUNCATION};
use crate::error::{Error, Result};
use crate::homodyne::DEFAULT_LO_FLOOR;

pub const DEFAULT_POINTS: usize = 400;

/// Upper end of the default grid in units of `1 / mean`: five e-foldings
/// of the pump-limit squeezing.
pub const DEFAULT_SCALED_SPAN: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "both" => Ok(OutputFormat::Both),
            _ => Err(Error::config("format", format!("expected csv, json or both, got `{s}`"))),
        }
    }
}

/// Uniform grid, strictly increasing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::config("points", format!("need at least 2, got {points}")));
        }
        if !(min.is_finite() && min >= 0.0) {
            return Err(Error::config("chi_t_min", format!("must be finite and >= 0, got {min}")));
        }
        if !(max.is_finite() && max > min) {
            return Err(Error::config(
                "chi_t_max",
                format!("must be finite and above the minimum {min}, got {max}"),
            ));
        }
        Ok(TimeGrid { min, max, points })
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| if k + 1 == self.points { self.max } else { self.min + step * k as f64 })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub kind: DistributionKind,
    pub mean: f64,
    pub weights: Option<Vec<(usize, f64)>>,
    pub chi: f64,
    /// In units of `chi t`.
    pub grid: TimeGrid,
    pub criteria: Vec<CriterionId>,
    pub truncation: f64,
    pub lo_floor: f64,
    pub memory_budget: MemoryBudget,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    /// Fock start with the default grid `[0, 5 / N]`.
    pub fn fock(n_total: usize) -> Self {
        RunConfig {
            kind: DistributionKind::Fock,
            mean: n_total as f64,
            weights: None,
            chi: 1.0,
            grid: default_grid(n_total as f64),
            criteria: CriterionId::ALL.to_vec(),
            truncation: DEFAULT_TRUNCATION,
            lo_floor: DEFAULT_LO_FLOOR,
            memory_budget: MemoryBudget::default(),
            output: None,
            format: OutputFormat::Csv,
        }
    }

    pub fn distribution(&self) -> Result<NumberDistribution> {
        match (&self.weights, self.kind) {
            (Some(w), DistributionKind::Custom) => NumberDistribution::custom(w.clone()),
            (Some(_), _) => Err(Error::config("weights", "only valid with kind = \"custom\"")),
            (None, kind) => build_distribution(kind, self.mean, self.truncation),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawRunConfig =
            toml::from_str(text).map_err(|e| Error::config(toml_field(&e), e.message().to_string()))?;
        raw.validate()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Canonical key-value form, re-readable by [`RunConfig::from_toml_str`].
    pub fn to_toml_string(&self) -> String {
        let raw = RawRunConfig {
            kind: Some(self.kind.name().to_string()),
            mean: self.weights.is_none().then_some(self.mean),
            weights: self.weights.clone(),
            chi: Some(self.chi),
            chi_t_min: Some(self.grid.min),
            chi_t_max: Some(self.grid.max),
            points: Some(self.grid.points),
            criteria: Some(CriteriaSelection::List(
                self.criteria.iter().map(|c| c.name().to_string()).collect(),
            )),
            truncation: Some(self.truncation),
            lo_floor: Some(self.lo_floor),
            memory_budget_bytes: Some(self.memory_budget.max_bytes),
            output: self.output.as_ref().map(|p| p.display().to_string()),
            format: Some(format_name(self.format).to_string()),
        };
        toml::to_string(&raw).expect("plain scalars always serialize")
    }
}

pub fn default_grid(mean: f64) -> TimeGrid {
    TimeGrid {
        min: 0.0,
        max: DEFAULT_SCALED_SPAN / mean.max(1.0),
        points: DEFAULT_POINTS,
    }
}

fn format_name(f: OutputFormat) -> &'static str {
    match f {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
        OutputFormat::Both => "both",
    }
}

fn toml_field(e: &toml::de::Error) -> String {
    // serde reports unknown or mistyped keys inside backticks
    let msg = e.message();
    msg.split('`').nth(1).unwrap_or("config").to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CriteriaSelection {
    Keyword(String),
    List(Vec<String>),
}

pub fn parse_criteria(sel: &CriteriaSelection) -> Result<Vec<CriterionId>> {
    let names: Vec<&str> = match sel {
        CriteriaSelection::Keyword(k) if k == "all" => return Ok(CriterionId::ALL.to_vec()),
        CriteriaSelection::Keyword(k) => k.split(',').map(str::trim).collect(),
        CriteriaSelection::List(v) => v.iter().map(String::as_str).collect(),
    };
    let mut out: Vec<CriterionId> = Vec::new();
    for n in names {
        let id: CriterionId = n
            .parse()
            .map_err(|_| Error::config("criteria", format!("unknown criterion `{n}`")))?;
        if !out.contains(&id) {
            out.push(id);
        }
    }
    if out.is_empty() {
        return Err(Error::config("criteria", "selection is empty"));
    }
    Ok(out)
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRunConfig {
    kind: Option<String>,
    mean: Option<f64>,
    weights: Option<Vec<(usize, f64)>>,
    chi: Option<f64>,
    chi_t_min: Option<f64>,
    chi_t_max: Option<f64>,
    points: Option<usize>,
    criteria: Option<CriteriaSelection>,
    truncation: Option<f64>,
    lo_floor: Option<f64>,
    memory_budget_bytes: Option<usize>,
    output: Option<String>,
    format: Option<String>,
}

impl RawRunConfig {
    fn validate(self) -> Result<RunConfig> {
        let kind: DistributionKind = match &self.kind {
            Some(k) => k.parse()?,
            None => return Err(Error::config("kind", "missing")),
        };
        let mean = match (kind, self.mean, &self.weights) {
            (DistributionKind::Custom, None, Some(w)) => {
                let total: f64 = w.iter().map(|&(_, p)| p).sum();
                w.iter().map(|&(n, p)| n as f64 * p).sum::<f64>() / total
            }
            (DistributionKind::Custom, _, None) => {
                return Err(Error::config("weights", "required for kind = \"custom\""))
            }
            (DistributionKind::Custom, Some(_), Some(_)) => {
                return Err(Error::config("mean", "not used with kind = \"custom\""))
            }
            (_, _, Some(_)) => {
                return Err(Error::config("weights", "only valid with kind = \"custom\""))
            }
            (_, Some(m), None) => m,
            (_, None, None) => return Err(Error::config("mean", "missing")),
        };
        let chi = self.chi.unwrap_or(1.0);
        if !(chi > 0.0 && chi.is_finite()) {
            return Err(Error::config("chi", format!("must be positive, got {chi}")));
        }
        let d = default_grid(mean);
        let grid = TimeGrid::new(
            self.chi_t_min.unwrap_or(d.min),
            self.chi_t_max.unwrap_or(d.max),
            self.points.unwrap_or(d.points),
        )?;
        let criteria = match &self.criteria {
            Some(sel) => parse_criteria(sel)?,
            None => CriterionId::ALL.to_vec(),
        };
        let truncation = self.truncation.unwrap_or(DEFAULT_TRUNCATION);
        if !(truncation > 0.0 && truncation < 1.0) {
            return Err(Error::config("truncation", format!("must lie in (0, 1), got {truncation}")));
        }
        let lo_floor = self.lo_floor.unwrap_or(DEFAULT_LO_FLOOR);
        if !(lo_floor > 0.0 && lo_floor.is_finite()) {
            return Err(Error::config("lo_floor", format!("must be positive, got {lo_floor}")));
        }
        let memory_budget = MemoryBudget {
            max_bytes: self.memory_budget_bytes.unwrap_or(MemoryBudget::default().max_bytes),
        };
        let format = match &self.format {
            Some(f) => f.parse()?,
            None => OutputFormat::Csv,
        };
        let config = RunConfig {
            kind,
            mean,
            weights: self.weights,
            chi,
            grid,
            criteria,
            truncation,
            lo_floor,
            memory_budget,
            output: self.output.map(PathBuf::from),
            format,
        };
        config.distribution()?;
        Ok(config)
    }
}

/// Fock runs at several `N` on a shared `N chi t` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CompareConfig {
    pub sizes: Vec<usize>,
    pub chi: f64,
    /// In units of `N chi t`.
    pub grid: TimeGrid,
    pub lo_floor: f64,
    pub memory_budget: MemoryBudget,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl CompareConfig {
    pub fn new(sizes: Vec<usize>, grid: TimeGrid) -> Result<Self> {
        let c = CompareConfig {
            sizes,
            chi: 1.0,
            grid,
            lo_floor: DEFAULT_LO_FLOOR,
            memory_budget: MemoryBudget::default(),
            output: None,
            format: OutputFormat::Csv,
        };
        c.check_sizes()?;
        Ok(c)
    }

    fn check_sizes(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::config("sizes", "need at least one N"));
        }
        if let Some(n) = self.sizes.iter().find(|&&n| n == 0) {
            return Err(Error::config("sizes", format!("N must be positive, got {n}")));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawCompareConfig =
            toml::from_str(text).map_err(|e| Error::config(toml_field(&e), e.message().to_string()))?;
        let sizes = raw.sizes.ok_or_else(|| Error::config("sizes", "missing"))?;
        let chi = raw.chi.unwrap_or(1.0);
        if !(chi > 0.0 && chi.is_finite()) {
            return Err(Error::config("chi", format!("must be positive, got {chi}")));
        }
        let grid = TimeGrid::new(
            raw.scaled_min.unwrap_or(0.0),
            raw.scaled_max.unwrap_or(8.0),
            raw.points.unwrap_or(DEFAULT_POINTS),
        )
        .map_err(|e| match e {
            Error::Config { field, reason } => Error::Config {
                field: field.replace("chi_t", "scaled"),
                reason,
            },
            e => e,
        })?;
        let lo_floor = raw.lo_floor.unwrap_or(DEFAULT_LO_FLOOR);
        if !(lo_floor > 0.0 && lo_floor.is_finite()) {
            return Err(Error::config("lo_floor", format!("must be positive, got {lo_floor}")));
        }
        let c = CompareConfig {
            sizes,
            chi,
            grid,
            lo_floor,
            memory_budget: MemoryBudget {
                max_bytes: raw.memory_budget_bytes.unwrap_or(MemoryBudget::default().max_bytes),
            },
            output: raw.output.map(PathBuf::from),
            format: match &raw.format {
                Some(f) => f.parse()?,
                None => OutputFormat::Csv,
            },
        };
        c.check_sizes()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        let raw = RawCompareConfig {
            sizes: Some(self.sizes.clone()),
            chi: Some(self.chi),
            scaled_min: Some(self.grid.min),
            scaled_max: Some(self.grid.max),
            points: Some(self.grid.points),
            lo_floor: Some(self.lo_floor),
            memory_budget_bytes: Some(self.memory_budget.max_bytes),
            output: self.output.as_ref().map(|p| p.display().to_string()),
            format: Some(format_name(self.format).to_string()),
        };
        toml::to_string(&raw).expect("plain scalars always serialize")
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCompareConfig {
    sizes: Option<Vec<usize>>,
    chi: Option<f64>,
    scaled_min: Option<f64>,
    scaled_max: Option<f64>,
    points: Option<usize>,
    lo_floor: Option<f64>,
    memory_budget_bytes: Option<usize>,
    output: Option<String>,
    format: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(e: Error) -> String {
        match e {
            Error::Config { field, .. } => field,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn minimal_fock_config() {
        let c = RunConfig::from_toml_str("kind = \"fock\"\nmean = 100\n").unwrap();
        assert_eq!(c.grid.points, 400);
        assert_eq!(c.grid.max, 0.05);
        assert_eq!(c.criteria.len(), 12);
        let v = c.grid.values();
        assert_eq!(v[0], 0.0);
        assert_eq!(*v.last().unwrap(), 0.05);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn echo_round_trips() {
        let text = "kind = \"thermal\"\nmean = 20.5\ncriteria = [\"epr_reid\", \"separability\"]\n\
                    chi_t_max = 0.3\npoints = 7\nformat = \"both\"\noutput = \"x.csv\"\n";
        let c = RunConfig::from_toml_str(text).unwrap();
        let again = RunConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(c, again);
        let custom = RunConfig::from_toml_str("kind = \"custom\"\nweights = [[2, 0.5], [4, 0.5]]\n").unwrap();
        assert_eq!(custom.mean, 3.0);
        assert_eq!(RunConfig::from_toml_str(&custom.to_toml_string()).unwrap(), custom);
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            ("mean = 3\n", "kind"),
            ("kind = \"fock\"\n", "mean"),
            ("kind = \"fock\"\nmean = 2.5\n", "mean"),
            ("kind = \"fock\"\nmean = 4\npoints = 1\n", "points"),
            ("kind = \"fock\"\nmean = 4\nchi_t_min = 0.2\nchi_t_max = 0.1\n", "chi_t_max"),
            ("kind = \"fock\"\nmean = 4\ncriteria = [\"bogus\"]\n", "criteria"),
            ("kind = \"fock\"\nmean = 4\nchi = -1\n", "chi"),
            ("kind = \"fock\"\nmean = 4\nformat = \"xml\"\n", "format"),
            ("kind = \"fock\"\nmean = 4\ncolour = 1\n", "colour"),
            ("kind = \"thermal\"\nmean = 4\ntruncation = 2\n", "truncation"),
            ("kind = \"custom\"\n", "weights"),
            ("kind = \"custom\"\nweights = [[1, -0.5]]\n", "weights"),
            ("kind = \"fock\"\nmean = 4\nweights = [[1, 1.0]]\n", "weights"),
        ];
        for (text, field) in cases {
            let e = RunConfig::from_toml_str(text).unwrap_err();
            assert_eq!(field_of(e), field, "{text}");
        }
    }

    #[test]
    fn compare_config() {
        let c = CompareConfig::from_toml_str("sizes = [10, 100]\npoints = 5\n").unwrap();
        assert_eq!(c.grid.max, 8.0);
        assert_eq!(CompareConfig::from_toml_str(&c.to_toml_string()).unwrap(), c);
        let e = CompareConfig::from_toml_str("sizes = [10]\nscaled_min = 3\nscaled_max = 1\n").unwrap_err();
        assert_eq!(field_of(e), "scaled_max");
        let e = CompareConfig::from_toml_str("sizes = []\n").unwrap_err();
        assert_eq!(field_of(e), "sizes");
    }
}
