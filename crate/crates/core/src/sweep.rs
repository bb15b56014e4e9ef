//! Sweep runners producing the result tables.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{CompareConfig, RunConfig};
use crate::criteria::{evaluate, undefined_report, CriteriaReport, CriterionEntry, CriterionId};
use crate::dynamics::MemoryBudget;
use crate::ensembles::{block_raw_moments, ensemble_raw_sweep};
use crate::error::{Error, Result};
use crate::homodyne::{QuadratureMoments, RawMoments};
use crate::pump::pump_criteria_curve;
use crate::table::{Cell, Table, TextTable};

pub const CRITERION_SUFFIXES: [&str; 7] =
    ["lhs", "rhs", "margin", "violated", "sign", "inference", "defined"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub chi_t: f64,
    pub n0: f64,
    pub n1: f64,
    pub n2: f64,
    /// `<b_1^dag b_1>`, the population of one local oscillator.
    pub lo_population: f64,
    /// `None` when a local oscillator fell below the floor.
    pub moments: Option<QuadratureMoments>,
    pub report: CriteriaReport,
}

impl SweepRow {
    pub fn from_raw(chi_t: f64, raw: &RawMoments, lo_floor: f64, selection: &[CriterionId]) -> Self {
        let moments = QuadratureMoments::from_raw(raw, lo_floor).ok();
        let report = match &moments {
            Some(m) => evaluate(m, selection),
            None => undefined_report(selection),
        };
        SweepRow {
            chi_t,
            n0: raw.pop_lo[0] + raw.pop_lo[1],
            n1: raw.pop_signal[0],
            n2: raw.pop_signal[1],
            lo_population: raw.pop_lo[0],
            moments,
            report,
        }
    }

    pub fn entry(&self, id: CriterionId) -> Option<&CriterionEntry> {
        self.report.get(id)
    }

    /// Moment values with NaN where undefined, populations always filled.
    fn moment_values(&self) -> [f64; 18] {
        match &self.moments {
            Some(m) => m.values(),
            None => {
                let mut v = [f64::NAN; 18];
                let idx = |name| QuadratureMoments::FIELDS.iter().position(|f| *f == name).unwrap();
                v[idx("pop_a1")] = self.n1;
                v[idx("pop_a2")] = self.n2;
                v[idx("pop_b1")] = self.lo_population;
                v[idx("pop_b2")] = self.n0 - self.lo_population;
                v
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub config: RunConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn table(&self) -> Table {
        let mut columns: Vec<String> =
            ["chi_t", "n0", "n1", "n2", "lo_population"].iter().map(|s| s.to_string()).collect();
        columns.extend(QuadratureMoments::FIELDS.iter().map(|s| s.to_string()));
        columns.extend(criterion_columns(&self.config.criteria));
        let mut t = Table::new("sweep", &self.config.to_toml_string(), columns);
        if self.config.criteria.iter().any(|c| c.assumes_coherent_lo()) {
            t.comments.push("coherent_lo_assumed = true".into());
        }
        for row in &self.rows {
            let mut cells: Vec<Cell> = [row.chi_t, row.n0, row.n1, row.n2, row.lo_population]
                .into_iter()
                .map(Cell::Float)
                .collect();
            cells.extend(row.moment_values().into_iter().map(Cell::Float));
            cells.extend(criterion_cells(&row.report));
            t.push(cells).expect("row matches header");
        }
        t
    }
}

pub fn criterion_columns(selection: &[CriterionId]) -> Vec<String> {
    selection
        .iter()
        .flat_map(|id| CRITERION_SUFFIXES.iter().map(move |s| format!("{}_{s}", id.name())))
        .collect()
}

pub fn criterion_cells(report: &CriteriaReport) -> Vec<Cell> {
    report
        .entries
        .iter()
        .flat_map(|e| {
            [
                Cell::Float(e.lhs),
                Cell::Float(e.rhs),
                Cell::Float(e.margin),
                Cell::Bool(e.violated),
                Cell::Text(e.sign.as_str().into()),
                Cell::Text(e.inference.as_str().into()),
                Cell::Bool(e.defined),
            ]
        })
        .collect()
}

/// Evolves the configured ensemble over the grid. Times are `chi_t / chi`.
pub fn run_sweep(config: &RunConfig) -> Result<SweepResult> {
    let dist = config.distribution()?;
    let chi_t = config.grid.values();
    let times: Vec<f64> = chi_t.iter().map(|x| x / config.chi).collect();
    let raw = ensemble_raw_sweep(&dist, config.chi, &times, &config.memory_budget)?;
    let rows = chi_t
        .par_iter()
        .zip(&raw)
        .map(|(&x, r)| SweepRow::from_raw(x, r, config.lo_floor, &config.criteria))
        .collect();
    Ok(SweepResult {
        config: config.clone(),
        rows,
    })
}

pub const COMPARE_CRITERIA: [CriterionId; 3] = [
    CriterionId::RescaledSeparability,
    CriterionId::RescaledEprSum,
    CriterionId::RescaledReid,
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub n_total: usize,
    pub scaled_time: f64,
    pub row: SweepRow,
    pub pump_duan: f64,
    pub pump_reid: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareResult {
    pub config: CompareConfig,
    pub rows: Vec<CompareRow>,
}

impl CompareResult {
    pub fn for_size(&self, n: usize) -> impl Iterator<Item = &CompareRow> {
        self.rows.iter().filter(move |r| r.n_total == n)
    }

    pub fn table(&self) -> Table {
        let mut columns: Vec<String> = [
            "n_total",
            "scaled_time",
            "chi_t",
            "n0",
            "n1",
            "n2",
            "lo_population",
            "depletion",
            "var_x_sum",
            "var_x_diff",
            "coherent_lo_floor",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        columns.extend(criterion_columns(&COMPARE_CRITERIA));
        columns.push("pump_duan".into());
        columns.push("pump_reid".into());
        let mut t = Table::new("compare", &self.config.to_toml_string(), columns);
        for r in &self.rows {
            let m = r.row.moments.as_ref();
            let mut cells = vec![Cell::Int(r.n_total)];
            cells.extend(
                [
                    r.scaled_time,
                    r.row.chi_t,
                    r.row.n0,
                    r.row.n1,
                    r.row.n2,
                    r.row.lo_population,
                    1.0 - r.row.n0 / r.n_total as f64,
                    m.map_or(f64::NAN, |m| m.var_x_sum),
                    m.map_or(f64::NAN, |m| m.var_x_diff),
                    m.map_or(f64::NAN, |m| m.coherent_lo_floor()),
                ]
                .into_iter()
                .map(Cell::Float),
            );
            cells.extend(criterion_cells(&r.row.report));
            cells.push(Cell::Float(r.pump_duan));
            cells.push(Cell::Float(r.pump_reid));
            t.push(cells).expect("row matches header");
        }
        t
    }
}

/// Fock runs on a shared `N chi t` grid, long format in the order of
/// `config.sizes`.
pub fn compare_sizes(config: &CompareConfig) -> Result<CompareResult> {
    let scaled = config.grid.values();
    let pump = scaled
        .iter()
        .map(|&s| pump_criteria_curve(s))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for &n in &config.sizes {
        let raw = size_sweep(n, config.chi, &scaled, &config.memory_budget)?;
        for ((&s, r), p) in scaled.iter().zip(&raw).zip(&pump) {
            rows.push(CompareRow {
                n_total: n,
                scaled_time: s,
                row: SweepRow::from_raw(s / n as f64, r, config.lo_floor, &COMPARE_CRITERIA),
                pump_duan: p.duan_lhs,
                pump_reid: p.reid_product,
            });
        }
    }
    Ok(CompareResult {
        config: config.clone(),
        rows,
    })
}

fn size_sweep(n: usize, chi: f64, scaled: &[f64], budget: &MemoryBudget) -> Result<Vec<RawMoments>> {
    let times: Vec<f64> = scaled.iter().map(|s| s / (n as f64 * chi)).collect();
    block_raw_moments(n, chi, &times, budget)
}

/// Re-evaluates criteria on a table carrying the 18 moment columns. Input
/// columns are kept, except old criterion columns, which are replaced.
pub fn criteria_from_table(input: &TextTable, selection: &[CriterionId]) -> Result<Table> {
    if selection.is_empty() {
        return Err(Error::config("criteria", "selection is empty"));
    }
    let moment_idx = QuadratureMoments::FIELDS
        .iter()
        .map(|f| input.column_index(f))
        .collect::<Result<Vec<_>>>()?;
    let old: Vec<String> = criterion_columns(&CriterionId::ALL);
    let kept: Vec<usize> = (0..input.columns.len())
        .filter(|&i| !old.contains(&input.columns[i]))
        .collect();
    let mut columns: Vec<String> = kept.iter().map(|&i| input.columns[i].clone()).collect();
    columns.extend(criterion_columns(selection));
    let echo = format!(
        "criteria = [{}]",
        selection.iter().map(|c| format!("\"{c}\"")).collect::<Vec<_>>().join(", ")
    );
    let mut t = Table::new("criteria", &echo, columns);
    for r in 0..input.rows.len() {
        let mut v = [0.0; 18];
        for (slot, &c) in v.iter_mut().zip(&moment_idx) {
            *slot = input.float(r, c)?;
        }
        let report = if v.iter().all(|x| x.is_finite()) {
            evaluate(&QuadratureMoments::from_values(v), selection)
        } else {
            undefined_report(selection)
        };
        let mut cells: Vec<Cell> = kept.iter().map(|&i| Cell::Text(input.rows[r][i].clone())).collect();
        cells.extend(criterion_cells(&report));
        t.push(cells)?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::TimeGrid;

    fn small_fock(n: usize, points: usize) -> RunConfig {
        let mut c = RunConfig::fock(n);
        c.grid = TimeGrid::new(0.0, 0.3, points).unwrap();
        c
    }

    #[test]
    fn rows_conserve_number() {
        let res = run_sweep(&small_fock(12, 25)).unwrap();
        assert_eq!(res.rows.len(), 25);
        for r in &res.rows {
            assert!((r.n0 + r.n1 + r.n2 - 12.0).abs() < 1e-9);
            assert!((r.n1 - r.n2).abs() < 1e-9);
        }
        let t = res.table();
        assert_eq!(t.columns.len(), 5 + 18 + 12 * 7);
        assert_eq!(t.columns[0], "chi_t");
        assert!(t.columns.contains(&"epr_reid_defined".to_string()));
    }

    #[test]
    fn empty_lo_gives_undefined_rows() {
        // N = 0: the LOs are empty from the start
        let res = run_sweep(&small_fock(0, 3)).unwrap();
        for r in &res.rows {
            assert!(r.moments.is_none());
            assert!(r.report.entries.iter().all(|e| !e.defined && !e.violated));
        }
        let text = res.table().to_csv_string();
        assert!(text.contains("NaN"));
    }

    #[test]
    fn criteria_verb_reproduces_margins() {
        let res = run_sweep(&small_fock(9, 30)).unwrap();
        let text = res.table().to_csv_string();
        let input = TextTable::parse(&text).unwrap();
        let again = criteria_from_table(&input, &CriterionId::ALL).unwrap();
        let back = TextTable::parse(&again.to_csv_string()).unwrap();
        for id in CriterionId::ALL {
            let col = format!("{}_margin", id.name());
            let a = input.float_column(&col).unwrap();
            let b = back.float_column(&col).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-12 || (x.is_nan() && y.is_nan()), "{col}: {x} vs {y}");
            }
        }
        assert_eq!(back.columns, input.columns);
    }

    #[test]
    fn compare_pump_column_starts_at_four() {
        let cfg = CompareConfig::new(vec![10, 20], TimeGrid::new(0.0, 2.0, 9).unwrap()).unwrap();
        let res = compare_sizes(&cfg).unwrap();
        assert_eq!(res.rows.len(), 18);
        assert_eq!(res.rows[0].pump_duan, 4.0);
        assert_eq!(res.rows[9].n_total, 20);
        assert!((res.rows[9 + 8].row.chi_t - 0.1).abs() < 1e-15);
        let t = res.table();
        assert_eq!(t.rows.len(), 18);
    }
}
