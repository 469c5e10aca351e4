//! Step-by-step records of a solver run.

use alloc::vec::Vec;

use crate::numerics::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Ok,
    SingularStepFallback,
    Converged,
    Diverged,
    BudgetExhausted,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::SingularStepFallback => "singular-step-fallback",
            Status::Converged => "converged",
            Status::Diverged => "diverged",
            Status::BudgetExhausted => "budget-exhausted",
        }
    }

    pub fn parse(text: &str) -> Option<Status> {
        Some(match text {
            "ok" => Status::Ok,
            "singular-step-fallback" => Status::SingularStepFallback,
            "converged" => Status::Converged,
            "diverged" => Status::Diverged,
            "budget-exhausted" => Status::BudgetExhausted,
            _ => return None,
        })
    }

    /// True for the statuses that end a run.
    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            Status::Converged | Status::Diverged | Status::BudgetExhausted
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord<R> {
    pub index: usize,
    pub x: R,
    /// Residual: `f(x)` for root search, `φ(x)` for optimisation.
    pub f: R,
    pub f_prime: Option<R>,
    /// Curvature estimate used by the step that produced this iterate, if any.
    pub curvature: Option<R>,
    /// Signed error `x - reference`.
    pub error: Option<R>,
    pub status: Status,
}

impl<R: Real> StepRecord<R> {
    pub fn abs_error(&self) -> Option<R> {
        self.error.as_ref().map(Real::abs)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationTrace<R> {
    steps: Vec<StepRecord<R>>,
    reference: Option<R>,
}

impl<R: Real> IterationTrace<R> {
    pub fn new(reference: Option<R>) -> Self {
        IterationTrace {
            steps: Vec::new(),
            reference,
        }
    }

    /// Appends a step, assigning the next index and the error against the
    /// attached reference.
    pub fn push(&mut self, x: R, f: R, f_prime: Option<R>, curvature: Option<R>, status: Status) {
        let error = self.reference.as_ref().map(|r| x.clone() - r.clone());
        let index = self.steps.len();
        self.steps.push(StepRecord {
            index,
            x,
            f,
            f_prime,
            curvature,
            error,
            status,
        });
    }

    pub fn steps(&self) -> &[StepRecord<R>] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> Option<&StepRecord<R>> {
        self.steps.last()
    }

    pub fn reference(&self) -> Option<&R> {
        self.reference.as_ref()
    }

    /// Attaches (or replaces) the reference and recomputes every error.
    pub fn set_reference(&mut self, reference: R) {
        for step in &mut self.steps {
            step.error = Some(step.x.clone() - reference.clone());
        }
        self.reference = Some(reference);
    }

    pub fn status(&self) -> Option<Status> {
        self.steps.last().map(|s| s.status)
    }

    pub fn converged(&self) -> bool {
        self.status() == Some(Status::Converged)
    }

    pub(crate) fn set_last_status(&mut self, status: Status) {
        if let Some(last) = self.steps.last_mut() {
            last.status = status;
        }
    }

    /// Magnitudes of the errors, one per step, when a reference is attached.
    pub fn abs_errors(&self) -> Option<Vec<R>> {
        self.steps.iter().map(StepRecord::abs_error).collect()
    }

    /// Builds a trace from externally produced errors; used for analysing
    /// published sequences.
    pub fn from_errors(errors: &[R]) -> Self {
        let mut trace = IterationTrace::new(None);
        for (index, e) in errors.iter().enumerate() {
            trace.steps.push(StepRecord {
                index,
                x: e.clone(),
                f: e.zero_like(),
                f_prime: None,
                curvature: None,
                error: Some(e.clone()),
                status: Status::Ok,
            });
        }
        if let Some(first) = errors.first() {
            trace.reference = Some(first.zero_like());
        }
        trace
    }
}
