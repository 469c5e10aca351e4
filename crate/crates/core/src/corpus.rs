//! Built-in test problems.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::Error;
use crate::expr::{parse, Analytic, ParseError};
use crate::function::ScalarFunction;
use crate::numerics::{BigReal, Precision, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Root,
    Optimisation,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Root => "root",
            ProblemKind::Optimisation => "optimisation",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    name: String,
    kind: ProblemKind,
    function: Analytic,
    default_x0: String,
    notes: String,
}

/// Derivatives kept for every problem; enough for the tabulated error
/// factors of the optimisation schemes.
pub const MAX_ORDER: usize = 8;

struct Entry {
    name: &'static str,
    kind: ProblemKind,
    expr: &'static str,
    fixed_point: Option<&'static str>,
    x0: &'static str,
    notes: &'static str,
}

const ENTRIES: [Entry; 8] = [
    Entry {
        name: "cos_minus_x",
        kind: ProblemKind::Root,
        expr: "cos(x)-x",
        fixed_point: Some("cos(x)"),
        x0: "3",
        notes: "f = cos x - x; fixed-point form x = cos x",
    },
    Entry {
        name: "x2_minus_2",
        kind: ProblemKind::Root,
        expr: "x^2-2",
        fixed_point: None,
        x0: "1",
        notes: "f = x^2 - 2; root sqrt 2",
    },
    Entry {
        name: "exp_root",
        kind: ProblemKind::Root,
        expr: "exp(x)-2*x-1",
        fixed_point: None,
        x0: "1.5",
        notes: "f = e^x - 2x - 1; simple root near 1.2564 (the other root is 0)",
    },
    Entry {
        name: "cubic_x3_minus_x_minus_2",
        kind: ProblemKind::Root,
        expr: "x^3-x-2",
        fixed_point: None,
        x0: "1.5",
        notes: "f = x^3 - x - 2; single real root near 1.5214",
    },
    Entry {
        name: "opt_quadratic",
        kind: ProblemKind::Optimisation,
        expr: "(x-2)^2+1",
        fixed_point: None,
        x0: "0",
        notes: "phi = (x - 2)^2 + 1; minimum 1 at x = 2",
    },
    Entry {
        name: "opt_xexp",
        kind: ProblemKind::Optimisation,
        expr: "x*exp(x)",
        fixed_point: None,
        x0: "0",
        notes: "phi = x e^x; minimum at x = -1",
    },
    Entry {
        name: "opt_cos",
        kind: ProblemKind::Optimisation,
        expr: "cos(x)",
        fixed_point: None,
        x0: "2.5",
        notes: "phi = cos x; minimum at x = pi",
    },
    Entry {
        name: "opt_quartic",
        kind: ProblemKind::Optimisation,
        expr: "x^4-2*x^2",
        fixed_point: None,
        x0: "0.8",
        notes: "phi = x^4 - 2x^2; minima at x = -1 and 1, x0 picks the basin",
    },
];

fn build(entry: &Entry) -> Problem {
    let expr = parse(entry.expr).expect("corpus expressions parse");
    let mut function = Analytic::new(expr, MAX_ORDER);
    if let Some(g) = entry.fixed_point {
        function = function.with_fixed_point(parse(g).expect("corpus expressions parse"));
    }
    Problem {
        name: entry.name.to_string(),
        kind: entry.kind,
        function,
        default_x0: entry.x0.to_string(),
        notes: entry.notes.to_string(),
    }
}

pub fn list_problems() -> Vec<Problem> {
    ENTRIES.iter().map(build).collect()
}

pub fn problem(name: &str) -> Option<Problem> {
    ENTRIES.iter().find(|e| e.name == name).map(build)
}

impl Problem {
    /// A problem from expression text, named after the expression. The
    /// default start point is 0.
    pub fn from_expression(
        kind: ProblemKind,
        expr: &str,
        fixed_point: Option<&str>,
    ) -> Result<Problem, ParseError> {
        let mut function = Analytic::new(parse(expr)?, MAX_ORDER);
        if let Some(g) = fixed_point {
            function = function.with_fixed_point(parse(g)?);
        }
        Ok(Problem {
            name: expr.to_string(),
            kind,
            function,
            default_x0: "0".to_string(),
            notes: String::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn notes(&self) -> &str {
        &self.notes
    }

    pub fn function(&self) -> &Analytic {
        &self.function
    }

    pub fn has_fixed_point_form(&self) -> bool {
        self.function.fixed_point().is_some()
    }

    pub fn default_x0<R: Real>(&self, precision: Precision) -> R {
        R::parse_decimal(&self.default_x0, precision).expect("corpus start points parse")
    }

    /// The quantity driven to zero: `f` for root problems, `φ′` otherwise.
    pub fn residual<R: Real>(&self, x: &R) -> Result<R, Error> {
        self.function.derivative(x, self.residual_order())
    }

    fn residual_order(&self) -> usize {
        match self.kind {
            ProblemKind::Root => 0,
            ProblemKind::Optimisation => 1,
        }
    }

    /// `f⁽¹⁾(x), …, f⁽ᵏ⁾(x)` (or the same for `φ`).
    pub fn derivatives_at<R: Real>(&self, x: &R, k: usize) -> Result<Vec<R>, Error> {
        (1..=k)
            .map(|order| self.function.derivative(x, order))
            .collect()
    }
}

impl<R: Real> ScalarFunction<R> for Problem {
    fn derivative(&self, x: &R, order: usize) -> Result<R, Error> {
        self.function.derivative(x, order)
    }

    fn max_order(&self) -> usize {
        MAX_ORDER
    }

    fn fixed_point_map(&self, x: &R) -> Option<Result<R, Error>> {
        self.function.fixed_point().map(|g| g.eval(x))
    }
}

/// Root (or stationary point) at 1024 bits by Newton refinement from the
/// default start point.
pub fn reference_root(problem: &Problem) -> Result<BigReal, Error> {
    let x0 = problem.default_x0(Precision::REFERENCE);
    refine(problem, x0)
}

/// Newton refinement of the residual from `x` at the precision of `x`,
/// until the residual is below `10⁻³⁰⁰` (or a few units of rounding at
/// the working precision, whichever is larger), with at most 200 steps.
pub fn refine<R: Real>(problem: &Problem, mut x: R) -> Result<R, Error> {
    let order = problem.residual_order();
    let floor = R::unit_roundoff(x.precision()) * x.int(64);
    let tol = R::parse_decimal("1e-300", x.precision())?;
    for _ in 0..200 {
        let r = problem.function.derivative(&x, order)?;
        if r.abs()
            < tol
                .clone()
                .max_of(floor.clone() * x.abs().max_of(x.one_like()))
        {
            return Ok(x);
        }
        let d = problem.function.derivative(&x, order + 1)?;
        if d.is_zero() {
            return Err(Error::ZeroDerivative { index: 0 });
        }
        let next = x.clone() - r / d;
        if !next.is_finite() {
            return Err(Error::NonConvergence);
        }
        x = next;
    }
    Err(Error::NonConvergence)
}
