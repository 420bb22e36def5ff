//! Grid benchmark over random instances: sizes x completeness x seeds x
//! criteria, one solve per row.

use std::io;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::{solve_criterion, Criterion};
use crate::engine::{SearchConfig, Status};
use crate::model::{generate_random, RandomSpec};

/// Per-solve default time limit (50 minutes).
pub const DEFAULT_TIMEOUT: Duration = Duration::from_millis(3_000_000);

pub const DEFAULT_SEEDS: u64 = 5;

#[derive(Debug, Clone)]
pub struct BenchGrid {
    pub sizes: Vec<usize>,
    pub completeness: Vec<f64>,
    /// Seeds `0..seeds` for every cell.
    pub seeds: u64,
    pub criteria: Vec<Criterion>,
    pub timeout: Duration,
    /// Run rows on the rayon pool instead of one after another.
    pub parallel: bool,
}

impl Default for BenchGrid {
    fn default() -> Self {
        Self {
            sizes: vec![20, 40],
            completeness: vec![0.25, 0.5, 0.75, 1.0],
            seeds: DEFAULT_SEEDS,
            criteria: Criterion::ALL.to_vec(),
            timeout: DEFAULT_TIMEOUT,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Optimal,
    Unsat,
    Timeout,
}

impl From<Status> for RowStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Optimal => RowStatus::Optimal,
            Status::Unsat => RowStatus::Unsat,
            Status::BudgetExceeded => RowStatus::Timeout,
        }
    }
}

/// One CSV row; field order is the CSV header.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub criterion: Criterion,
    pub n: usize,
    pub completeness: f64,
    pub seed: u64,
    /// Empty unless optimal; profiles are `;`-separated.
    pub objective: String,
    pub nodes: u64,
    pub millis: u64,
    pub status: RowStatus,
}

pub const CSV_HEADER: &str = "criterion,n,completeness,seed,objective,nodes,millis,status";

fn run_one(criterion: Criterion, n: usize, completeness: f64, seed: u64, timeout: Duration) -> BenchRow {
    let inst = generate_random(&RandomSpec::new(n, completeness, seed).expect("completeness checked by caller"));
    let cfg = SearchConfig::default().with_time_limit(timeout);
    let started = Instant::now();
    let r = solve_criterion(&inst, criterion, &cfg);
    BenchRow {
        criterion,
        n,
        completeness,
        seed,
        objective: r.objective_text(),
        nodes: r.outcome.stats.nodes,
        millis: started.elapsed().as_millis() as u64,
        status: r.status().into(),
    }
}

/// Runs every row of the grid; rows come back in grid order
/// (size, completeness, seed, criterion).
pub fn run_grid(grid: &BenchGrid) -> Vec<BenchRow> {
    let jobs: Vec<(Criterion, usize, f64, u64)> = grid
        .sizes
        .iter()
        .flat_map(|&n| {
            grid.completeness.iter().flat_map(move |&c| {
                (0..grid.seeds).flat_map(move |s| grid.criteria.iter().map(move |&cr| (cr, n, c, s)))
            })
        })
        .collect();
    let run = |&(cr, n, c, s): &(Criterion, usize, f64, u64)| run_one(cr, n, c, s, grid.timeout);
    if grid.parallel {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    }
}

pub fn write_csv<W: io::Write>(rows: &[BenchRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

/// Mean over the seeds of one (criterion, n, completeness) cell; `None`
/// when any run in the cell timed out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub criterion: Criterion,
    pub n: usize,
    pub completeness: f64,
    pub runs: usize,
    pub mean_millis: Option<f64>,
    pub mean_nodes: Option<f64>,
}

impl CellSummary {
    pub fn millis_text(&self) -> String {
        self.mean_millis.map_or_else(|| "TO".to_string(), |m| format!("{m:.1}"))
    }
}

pub fn summarize(rows: &[BenchRow]) -> Vec<CellSummary> {
    let mut cells: Vec<CellSummary> = Vec::new();
    let mut sums: Vec<(u64, u64)> = Vec::new();
    for r in rows {
        let pos = cells
            .iter()
            .position(|c| c.criterion == r.criterion && c.n == r.n && c.completeness == r.completeness);
        let i = pos.unwrap_or_else(|| {
            cells.push(CellSummary {
                criterion: r.criterion,
                n: r.n,
                completeness: r.completeness,
                runs: 0,
                mean_millis: Some(0.0),
                mean_nodes: Some(0.0),
            });
            sums.push((0, 0));
            cells.len() - 1
        });
        cells[i].runs += 1;
        sums[i].0 += r.millis;
        sums[i].1 += r.nodes;
        if r.status == RowStatus::Timeout {
            cells[i].mean_millis = None;
            cells[i].mean_nodes = None;
        }
    }
    for (c, (ms, nodes)) in cells.iter_mut().zip(sums) {
        if c.mean_millis.is_some() {
            c.mean_millis = Some(ms as f64 / c.runs as f64);
            c.mean_nodes = Some(nodes as f64 / c.runs as f64);
        }
    }
    cells
}

pub const SUMMARY_HEADER: &str = "criterion,n,completeness,runs,mean_millis,mean_nodes";

/// Cell means as CSV, `TO` for cells with a timeout.
pub fn write_summary_csv<W: io::Write>(cells: &[CellSummary], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER.split(','))?;
    for c in cells {
        let nodes = c.mean_nodes.map_or_else(|| "TO".to_string(), |v| format!("{v:.1}"));
        w.write_record([
            c.criterion.name().to_string(),
            c.n.to_string(),
            c.completeness.to_string(),
            c.runs.to_string(),
            c.millis_text(),
            nodes,
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_row_count_and_csv() {
        let grid = BenchGrid {
            sizes: vec![6, 8],
            completeness: vec![0.25, 0.5],
            seeds: 2,
            criteria: vec![Criterion::AnyStable, Criterion::Egalitarian],
            ..BenchGrid::default()
        };
        let rows = run_grid(&grid);
        assert_eq!(rows.len(), 2 * 2 * 2 * 2);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.count(), rows.len());
        assert!(text.contains("any-stable,6,0.25,0,"));
        let cells = summarize(&rows);
        assert_eq!(cells.len(), 2 * 2 * 2);
        assert!(cells.iter().all(|c| c.runs == 2 && c.mean_millis.is_some()));
    }

    #[test]
    fn parallel_matches_sequential_results() {
        let grid = BenchGrid {
            sizes: vec![8],
            completeness: vec![0.5, 1.0],
            seeds: 3,
            criteria: Criterion::ALL.to_vec(),
            ..BenchGrid::default()
        };
        let strip = |rows: Vec<BenchRow>| -> Vec<(String, RowStatus)> {
            rows.into_iter().map(|r| (r.objective, r.status)).collect()
        };
        let seq = strip(run_grid(&grid));
        let par = strip(run_grid(&BenchGrid { parallel: true, ..grid }));
        assert_eq!(seq, par);
    }

    #[test]
    fn timeouts_mark_the_cell() {
        let row = |status, millis| BenchRow {
            criterion: Criterion::Generous,
            n: 10,
            completeness: 0.5,
            seed: 0,
            objective: String::new(),
            nodes: 1,
            millis,
            status,
        };
        let cells = summarize(&[row(RowStatus::Optimal, 4), row(RowStatus::Timeout, 9)]);
        assert_eq!(cells[0].millis_text(), "TO");
        let cells = summarize(&[row(RowStatus::Optimal, 4), row(RowStatus::Unsat, 2)]);
        assert_eq!(cells[0].millis_text(), "3.0");
        let mut buf = Vec::new();
        write_summary_csv(&summarize(&[row(RowStatus::Timeout, 9)]), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{SUMMARY_HEADER}\ngenerous,10,0.5,1,TO,TO\n"));
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), CSV_HEADER);
    }
}
