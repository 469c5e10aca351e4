//! Golden error tables for `cos x − x` from `x₀ = 3`.
//!
//! Each column is one solver run at 512 bits; cells are compared as error
//! magnitudes rounded to three significant figures.

use std::fmt::Write as _;
use std::thread;

use baryiter_core::corpus::{self, Problem};
use baryiter_core::root_search::{solve, Bootstrap, RootMethod, SolverConfig};
use baryiter_core::{BigReal, Error, Precision, Real};

use crate::references;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableId {
    Table4,
    Table6,
}

impl TableId {
    pub fn name(self) -> &'static str {
        match self {
            TableId::Table4 => "table4",
            TableId::Table6 => "table6",
        }
    }

    pub fn from_name(name: &str) -> Option<TableId> {
        match name {
            "table4" => Some(TableId::Table4),
            "table6" => Some(TableId::Table6),
            _ => None,
        }
    }

    pub fn columns(self) -> Vec<Column> {
        match self {
            TableId::Table4 => TABLE4.to_vec(),
            TableId::Table6 => TABLE6.to_vec(),
        }
    }

    /// Last tabulated row index.
    pub fn rows(self) -> usize {
        match self {
            TableId::Table4 => 9,
            TableId::Table6 => 6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Column {
    pub label: &'static str,
    pub method: RootMethod,
    pub window: usize,
    pub expected: &'static [&'static str],
}

const TABLE4: [Column; 5] = [
    Column {
        label: "picard",
        method: RootMethod::Picard,
        window: 1,
        expected: &[
            "2.26e+00", "1.73e+00", "1.90e-01", "1.14e-01", "8.15e-02", "5.24e-02", "3.63e-02",
            "2.40e-02", "1.63e-02", "1.09e-02",
        ],
    },
    Column {
        label: "n=1",
        method: RootMethod::ExactDF,
        window: 2,
        expected: &[
            "2.26e+00", "1.73e+00", "6.19e-01", "8.35e-01", "1.01e-01", "1.23e-02", "2.91e-04",
            "7.94e-07", "5.09e-11", "8.93e-18",
        ],
    },
    Column {
        label: "n=2",
        method: RootMethod::ExactDF,
        window: 3,
        expected: &[
            "2.26e+00", "1.73e+00", "6.19e-01", "3.47e-01", "6.61e-02", "1.73e-03", "4.27e-06",
            "5.60e-11", "4.80e-20", "1.33e-36",
        ],
    },
    Column {
        label: "n=3",
        method: RootMethod::ExactDF,
        window: 4,
        expected: &[
            "2.26e+00", "1.73e+00", "6.19e-01", "3.47e-01", "1.77e-02", "2.00e-04", "1.78e-08",
            "4.40e-16", "6.06e-31", "2.08e-59",
        ],
    },
    Column {
        label: "newton",
        method: RootMethod::Newton,
        window: 1,
        expected: &[
            "2.26e+00",
            "1.24e+00",
            "1.39e+00",
            "4.94e-02",
            "5.68e-04",
            "7.12e-08",
            "1.12e-15",
            "2.76e-31",
            "1.68e-62",
            "6.25e-125",
        ],
    },
];

const TABLE6: [Column; 5] = [
    Column {
        label: "n=0",
        method: RootMethod::ExactD1,
        window: 1,
        expected: &[
            "2.26e+00", "1.24e+00", "1.39e+00", "4.94e-02", "5.68e-04", "7.12e-08", "1.12e-15",
        ],
    },
    Column {
        label: "n=1",
        method: RootMethod::ExactD1,
        window: 2,
        expected: &[
            "2.26e+00", "1.24e+00", "1.18e-01", "6.85e-04", "1.35e-10", "1.88e-28", "1.41e-77",
        ],
    },
    Column {
        label: "n=2",
        method: RootMethod::ExactD1,
        window: 3,
        expected: &[
            "2.26e+00",
            "1.24e+00",
            "1.18e-01",
            "2.44e-05",
            "9.33e-15",
            "2.87e-43",
            "1.56e-126",
        ],
    },
    Column {
        label: "n=3",
        method: RootMethod::ExactD1,
        window: 4,
        expected: &[
            "2.26e+00",
            "1.24e+00",
            "1.18e-01",
            "2.44e-05",
            "4.76e-15",
            "6.73e-44",
            "7.76e-131",
        ],
    },
    Column {
        label: "halley",
        method: RootMethod::Halley,
        window: 1,
        expected: &[
            "2.26e+00",
            "8.72e-01",
            "5.27e-02",
            "1.65e-05",
            "5.19e-16",
            "1.62e-47",
            "4.93e-142",
        ],
    },
];

pub const TABLE_BITS: u32 = 512;

/// Solver settings shared by every column: one Picard step to bootstrap,
/// tolerances far below the smallest tabulated error.
pub fn column_config(column: &Column, rows: usize) -> SolverConfig<BigReal> {
    let prec = Precision::new(TABLE_BITS).expect("valid precision");
    let tol = BigReal::pow10(-150, prec);
    SolverConfig::new(column.method, prec)
        .with_window(column.window)
        .with_bootstrap(Bootstrap::PicardStep)
        .with_tolerances(tol.clone(), tol)
        .with_max_iter(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColumnResult {
    pub label: &'static str,
    /// Error magnitudes at three significant figures, one per row reached.
    pub computed: Vec<String>,
    pub expected: &'static [&'static str],
    pub error: Option<Error>,
}

impl ColumnResult {
    pub fn matches(&self) -> bool {
        self.error.is_none()
            && self.computed.len() == self.expected.len()
            && self.computed.iter().zip(self.expected).all(|(c, e)| c == e)
    }
}

fn problem() -> Problem {
    corpus::problem("cos_minus_x").expect("corpus problem")
}

pub fn run_column(problem: &Problem, column: &Column, rows: usize) -> ColumnResult {
    let config = column_config(column, rows);
    let reference = references::reference(problem, config.precision);
    let x0 = BigReal::from_i64(3, config.precision);
    let outcome = reference.and_then(|r| solve(problem, x0, &config, Some(r)).map_err(|e| e.error));
    match outcome {
        Ok(trace) => ColumnResult {
            label: column.label,
            computed: trace
                .abs_errors()
                .unwrap_or_default()
                .iter()
                .map(|e| e.to_decimal(3))
                .collect(),
            expected: column.expected,
            error: None,
        },
        Err(e) => ColumnResult {
            label: column.label,
            computed: Vec::new(),
            expected: column.expected,
            error: Some(e),
        },
    }
}

/// Runs every column of the table, one thread per column.
pub fn reproduce(table: TableId) -> Vec<ColumnResult> {
    let problem = problem();
    let columns = table.columns();
    let rows = table.rows();
    thread::scope(|s| {
        let handles: Vec<_> = columns
            .iter()
            .map(|c| s.spawn(|| run_column(&problem, c, rows)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("column thread"))
            .collect()
    })
}

/// Side-by-side layout: one row per iteration, computed value with a `*`
/// where it differs from the expected cell.
pub fn render(table: TableId, results: &[ColumnResult]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:>3}", "i");
    for r in results {
        let _ = write!(out, "  {:>11}", r.label);
    }
    out.push('\n');
    for i in 0..=table.rows() {
        let _ = write!(out, "{i:>3}");
        for r in results {
            let cell = match r.computed.get(i) {
                Some(c) if r.expected.get(i) == Some(&c.as_str()) => format!("{c} "),
                Some(c) => format!("{c}*"),
                None => "-".to_string(),
            };
            let _ = write!(out, "  {cell:>11}");
        }
        out.push('\n');
    }
    for r in results {
        if let Some(e) = &r.error {
            let _ = writeln!(out, "{}: {}", r.label, e.name());
        }
    }
    out
}
