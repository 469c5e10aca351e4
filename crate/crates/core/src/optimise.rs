//! Stationary-point iterations built from direct interpolants of the
//! objective `φ`.
//!
//! Windows use [`Sample`] with the roles `(x, φ, φ′)`.

use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::function::ScalarFunction;
use crate::interpolants::Sample;
use crate::numerics::{Precision, Real};
use crate::root_search::{
    chebyshev_halley_update, default_tolerance, direct_slope_estimate, evaluate, perturbation,
    positive, second_derivative_f_interp, Bootstrap, SolveError,
};
use crate::trace::{IterationTrace, Status};
use crate::weights::{
    find_collision, hermite_product, omega_product, HermiteWeightSet, NodeSet, WeightSet,
};

pub type ObjectiveSample<R> = Sample<R>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OptMethod {
    /// Newton step on slope and curvature of the plain interpolant.
    NewtonDF,
    /// Chebyshev–Halley step on curvature and third derivative of the Hermite
    /// interpolant.
    CHD1,
}

impl OptMethod {
    pub fn name(self) -> &'static str {
        match self {
            OptMethod::NewtonDF => "newton-df",
            OptMethod::CHD1 => "ch-d1",
        }
    }

    pub fn from_name(name: &str) -> Option<OptMethod> {
        [OptMethod::NewtonDF, OptMethod::CHD1]
            .into_iter()
            .find(|m| m.name() == name)
    }

    /// With fewer points the curvature estimate vanishes identically.
    pub fn min_window(self) -> usize {
        match self {
            OptMethod::NewtonDF => 3,
            OptMethod::CHD1 => 2,
        }
    }

    pub fn needs_slope(self) -> bool {
        self == OptMethod::CHD1
    }
}

impl fmt::Display for OptMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptConfig<R> {
    pub method: OptMethod,
    pub window: usize,
    pub beta: R,
    /// Threshold on `|φ′|`, or on its estimate for `NewtonDF`.
    pub tol_g: R,
    pub tol_x: R,
    pub max_iter: usize,
    pub precision: Precision,
    /// `None` perturbs `x0` by `10⁻³·max(1, |x0|)`. `ExplicitSecond(x1)`
    /// adds `2·x1 − x0` when a third point is needed. Picard steps are not
    /// available.
    pub bootstrap: Option<Bootstrap<R>>,
}

impl<R: Real> OptConfig<R> {
    pub fn new(method: OptMethod, precision: Precision) -> Self {
        OptConfig {
            method,
            window: method.min_window(),
            beta: R::from_i64(1, precision),
            tol_g: default_tolerance(precision),
            tol_x: default_tolerance(precision),
            max_iter: 100,
            precision,
            bootstrap: None,
        }
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    pub fn with_bootstrap(mut self, bootstrap: Bootstrap<R>) -> Self {
        self.bootstrap = Some(bootstrap);
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_tolerances(mut self, tol_g: R, tol_x: R) -> Self {
        self.tol_g = tol_g;
        self.tol_x = tol_x;
        self
    }

    pub fn with_beta(mut self, beta: R) -> Self {
        self.beta = beta;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.window < self.method.min_window() {
            return Err(Error::InvalidConfig("window is too small for the method"));
        }
        let zero = R::from_i64(0, self.precision);
        if !positive(&self.tol_g, &zero) || !positive(&self.tol_x, &zero) {
            return Err(Error::InvalidConfig("tolerances must be positive"));
        }
        if !self.beta.is_finite() {
            return Err(Error::InvalidConfig("beta must be finite"));
        }
        if matches!(self.bootstrap, Some(Bootstrap::PicardStep)) {
            return Err(Error::InvalidConfig(
                "optimisation has no fixed-point bootstrap",
            ));
        }
        Ok(())
    }
}

/// Estimate of `φ_n′` from the plain interpolant with x-product weights.
pub fn phi_slope_df<R: Real>(
    window: &[ObjectiveSample<R>],
    weights: &WeightSet<R>,
) -> Result<R, Error> {
    direct_slope_estimate(window, weights)
}

/// Estimate of `φ_n″` given the slope estimate `phi_prime_n`.
pub fn phi_curvature_df<R: Real>(
    window: &[ObjectiveSample<R>],
    weights: &WeightSet<R>,
    phi_prime_n: &R,
) -> Result<R, Error> {
    if weights.len() != window.len() {
        return Err(Error::InvalidConfig("one weight per sample is required"));
    }
    let n = window.len().checked_sub(1).ok_or(Error::InsufficientData)?;
    let last = &window[n];
    let mut num = last.x.zero_like();
    let mut den = last.x.zero_like();
    for (s, w) in window[..n].iter().zip(weights.omega()) {
        let d = last.x.clone() - s.x.clone();
        if d.is_zero() {
            return Err(Error::SingularStep);
        }
        let excess = (last.f.clone() - s.f.clone()) - phi_prime_n.clone() * d.clone();
        num = num + w.clone() * excess / (d.clone() * d);
        den = den + w.clone();
    }
    if den.is_zero() {
        return Err(Error::SingularStep);
    }
    Ok(-(last.x.int(2) * num / den))
}

/// Slope, curvature and next iterate of the derivative-free scheme.
fn newton_df_parts<R: Real>(
    window: &[ObjectiveSample<R>],
    weights: &WeightSet<R>,
) -> Result<(R, R, R), Error> {
    let slope = phi_slope_df(window, weights)?;
    let curvature = phi_curvature_df(window, weights, &slope)?;
    if curvature.is_zero() {
        return Err(Error::SingularStep);
    }
    let x = &window[window.len() - 1].x;
    Ok((
        x.clone() - slope.clone() / curvature.clone(),
        slope,
        curvature,
    ))
}

/// `x_n − φ_n′/φ_n″` with both derivatives estimated from the window.
pub fn opt_step_df<R: Real>(
    window: &[ObjectiveSample<R>],
    weights: &WeightSet<R>,
) -> Result<R, Error> {
    newton_df_parts(window, weights).map(|(x, _, _)| x)
}

/// Estimate of `φ_n″` from the Hermite interpolant; `hweights` are the
/// x-based squared-product weights.
pub fn phi_curvature_d1<R: Real>(
    window: &[ObjectiveSample<R>],
    hweights: &HermiteWeightSet<R>,
) -> Result<R, Error> {
    second_derivative_f_interp(window, hweights)
}

/// Estimate of `φ_n‴` given the curvature estimate `phi_second_n`.
pub fn phi_third_d1<R: Real>(
    window: &[ObjectiveSample<R>],
    hweights: &HermiteWeightSet<R>,
    phi_second_n: &R,
) -> Result<R, Error> {
    if hweights.len() != window.len() {
        return Err(Error::InvalidConfig("one weight per sample is required"));
    }
    let n = window.len().checked_sub(1).ok_or(Error::InsufficientData)?;
    let last = &window[n];
    let lambda = hweights.lambda();
    let gamma = hweights.gamma();
    let dp_n = last.slope()?.clone();
    let two = last.x.int(2);
    let mut sum = gamma[n].clone() * phi_second_n.clone() / two.clone();
    for (k, s) in window[..n].iter().enumerate() {
        let d = last.x.clone() - s.x.clone();
        if d.is_zero() {
            return Err(Error::SingularStep);
        }
        let dphi = last.f.clone() - s.f.clone();
        let d2 = d.clone() * d.clone();
        let mixed = gamma[k].clone() * dphi.clone()
            - lambda[k].clone() * (dp_n.clone() + s.slope()?.clone());
        sum = sum + gamma[k].clone() * dp_n.clone() / d.clone()
            - mixed / d2.clone()
            - two.clone() * lambda[k].clone() * dphi / (d2 * d);
    }
    if lambda[n].is_zero() {
        return Err(Error::SingularStep);
    }
    Ok(-(last.x.int(6) / lambda[n].clone()) * sum)
}

/// Curvature, third derivative and next iterate of the Hermite scheme.
fn ch_d1_parts<R: Real>(
    window: &[ObjectiveSample<R>],
    hweights: &HermiteWeightSet<R>,
    beta: &R,
) -> Result<(R, R, R), Error> {
    let last = &window[window.len().checked_sub(1).ok_or(Error::InsufficientData)?];
    let second = phi_curvature_d1(window, hweights)?;
    let third = phi_third_d1(window, hweights, &second)?;
    let next = chebyshev_halley_update(&last.x, last.slope()?, &second, &third, beta).map_err(
        |e| match e {
            Error::ZeroDerivative { .. } => Error::SingularStep,
            e => e,
        },
    )?;
    Ok((next, second, third))
}

/// Chebyshev–Halley update with `(φ′, φ″, φ‴)` in place of `(f, f′, f″)`.
pub fn opt_step_d1<R: Real>(
    window: &[ObjectiveSample<R>],
    hweights: &HermiteWeightSet<R>,
    beta: &R,
) -> Result<R, Error> {
    ch_d1_parts(window, hweights, beta).map(|(x, _, _)| x)
}

struct Proposal<R> {
    next: R,
    slope_estimate: Option<R>,
    curvature: R,
}

fn propose<R: Real>(
    window: &[ObjectiveSample<R>],
    config: &OptConfig<R>,
) -> Result<Proposal<R>, Error> {
    let nodes = NodeSet::new(window.iter().map(|s| s.x.clone()).collect())?;
    match config.method {
        OptMethod::NewtonDF => {
            let (next, slope, curvature) = newton_df_parts(window, &omega_product(&nodes))?;
            Ok(Proposal {
                next,
                slope_estimate: Some(slope),
                curvature,
            })
        }
        OptMethod::CHD1 => {
            let (next, curvature, _) = ch_d1_parts(window, &hermite_product(&nodes), &config.beta)?;
            Ok(Proposal {
                next,
                slope_estimate: None,
                curvature,
            })
        }
    }
}

/// Runs `config.method` from `x0` towards a stationary point of `problem`.
///
/// Convergence is `|φ′| < tol_g` (the interpolant slope for `NewtonDF`) or
/// `|Δx| < tol_x`. Each record's `curvature` is the `φ″` estimate of the step
/// that produced it.
pub fn optimize<R: Real, F: ScalarFunction<R> + ?Sized>(
    problem: &F,
    x0: R,
    config: &OptConfig<R>,
    reference: Option<R>,
) -> Result<IterationTrace<R>, SolveError<R>> {
    let mut trace = IterationTrace::new(reference);
    macro_rules! bail {
        ($e:expr) => {
            return Err(SolveError { error: $e, trace })
        };
    }
    if let Err(e) = config.validate() {
        bail!(e);
    }
    if x0.precision() != config.precision {
        bail!(Error::InvalidConfig(
            "initial point precision differs from the configuration"
        ));
    }
    let method = config.method;
    let order = usize::from(method.needs_slope());
    if problem.max_order() < order {
        bail!(Error::MissingDerivative { order });
    }

    let first = match evaluate(problem, x0, order) {
        Ok(s) => s,
        Err(e) => bail!(e),
    };
    trace.push(
        first.x.clone(),
        first.f.clone(),
        first.f_prime.clone(),
        None,
        Status::Ok,
    );
    if first
        .f_prime
        .as_ref()
        .is_some_and(|g| g.abs() < config.tol_g)
    {
        trace.set_last_status(Status::Converged);
        return Ok(trace);
    }
    let x0 = first.x.clone();
    let mut memory = alloc::vec![first];

    let (x1, x2) = match &config.bootstrap {
        Some(Bootstrap::ExplicitSecond(x1)) => (x1.clone(), x1.int(2) * x1.clone() - x0.clone()),
        Some(Bootstrap::Perturb(h)) => (x0.clone() + h.clone(), x0.clone() + h.int(2) * h.clone()),
        _ => {
            let h = perturbation(&x0);
            (x0.clone() + h.clone(), x0.clone() + h.int(2) * h)
        }
    };
    let mut startup: Vec<R> = alloc::vec![x1];
    if method.min_window() > 2 {
        startup.push(x2);
    }
    for x in startup {
        if let Some(done) = accept(
            problem,
            &mut trace,
            &mut memory,
            x,
            None,
            Status::Ok,
            config,
            order,
        ) {
            return done;
        }
    }

    loop {
        if trace.len() > config.max_iter {
            trace.set_last_status(Status::BudgetExhausted);
            return Ok(trace);
        }
        let mut start = 0;
        let mut status = Status::Ok;
        let proposal = loop {
            match propose(&memory[start..], config) {
                Err(Error::SingularStep | Error::DegenerateNodes { .. })
                    if memory.len() - start > method.min_window() =>
                {
                    start += 1;
                    status = Status::SingularStepFallback;
                }
                other => break other,
            }
        };
        let proposal = match proposal {
            Ok(p) => p,
            Err(e) => bail!(e),
        };
        if proposal
            .slope_estimate
            .is_some_and(|g| g.abs() < config.tol_g)
        {
            trace.set_last_status(Status::Converged);
            return Ok(trace);
        }
        let curvature = Some(proposal.curvature);
        if let Some(done) = accept(
            problem,
            &mut trace,
            &mut memory,
            proposal.next,
            curvature,
            status,
            config,
            order,
        ) {
            return done;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn accept<R: Real, F: ScalarFunction<R> + ?Sized>(
    problem: &F,
    trace: &mut IterationTrace<R>,
    memory: &mut Vec<ObjectiveSample<R>>,
    x: R,
    curvature: Option<R>,
    status: Status,
    config: &OptConfig<R>,
    order: usize,
) -> Option<Result<IterationTrace<R>, SolveError<R>>> {
    let take = |trace: &mut IterationTrace<R>| core::mem::replace(trace, IterationTrace::new(None));
    if !x.is_finite() {
        trace.push(x.clone(), x, None, curvature, Status::Diverged);
        return Some(Ok(take(trace)));
    }
    let sample = match evaluate(problem, x, order) {
        Ok(s) => s,
        Err(error) => {
            return Some(Err(SolveError {
                error,
                trace: take(trace),
            }))
        }
    };
    if !sample.is_finite() {
        trace.push(
            sample.x,
            sample.f,
            sample.f_prime,
            curvature,
            Status::Diverged,
        );
        return Some(Ok(take(trace)));
    }
    let dx = (sample.x.clone() - memory[memory.len() - 1].x.clone()).abs();
    let flat = sample
        .f_prime
        .as_ref()
        .is_some_and(|g| g.abs() < config.tol_g);
    let done = flat || dx < config.tol_x;
    let status = if done { Status::Converged } else { status };
    trace.push(
        sample.x.clone(),
        sample.f.clone(),
        sample.f_prime.clone(),
        curvature,
        status,
    );
    if done {
        return Some(Ok(take(trace)));
    }
    memory.push(sample);
    while let Some((older, _)) =
        find_collision(&memory.iter().map(|s| s.x.clone()).collect::<Vec<_>>())
    {
        memory.remove(older);
    }
    while memory.len() > config.window {
        memory.remove(0);
    }
    None
}
