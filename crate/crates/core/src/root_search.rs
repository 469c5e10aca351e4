//! Root iterations with memory and the solver loop that drives them.
//!
//! The step functions take a memory window ordered oldest first; the last
//! sample is the newest, `(x_n, f_n)`.

use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::function::ScalarFunction;
use crate::interpolants::Sample;
use crate::numerics::{Precision, Real};
use crate::trace::{IterationTrace, Status};
use crate::weights::{
    find_collision, hermite_f, hermite_product, hermite_x, omega_alpha, omega_product,
    HermiteWeightSet, NodeSet, WeightSet,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RootMethod {
    /// Exact root of the inverse rational interpolant.
    ExactDF,
    /// Exact root of the inverse Hermite interpolant.
    ExactD1,
    /// Newton step with the slope of the inverse interpolant `x[f]`.
    NewtonXInterp,
    /// Newton step with the slope of the direct interpolant `f[x]`.
    NewtonFInterp,
    /// Chebyshev–Halley step with `f″` from the inverse Hermite interpolant.
    CHXInterp,
    /// Chebyshev–Halley step with `f″` from the direct Hermite interpolant.
    CHFInterp,
    Picard,
    Newton,
    Halley,
    Secant,
}

impl RootMethod {
    pub const ALL: [RootMethod; 10] = [
        RootMethod::ExactDF,
        RootMethod::ExactD1,
        RootMethod::NewtonXInterp,
        RootMethod::NewtonFInterp,
        RootMethod::CHXInterp,
        RootMethod::CHFInterp,
        RootMethod::Picard,
        RootMethod::Newton,
        RootMethod::Halley,
        RootMethod::Secant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RootMethod::ExactDF => "exact-df",
            RootMethod::ExactD1 => "exact-d1",
            RootMethod::NewtonXInterp => "newton-x-interp",
            RootMethod::NewtonFInterp => "newton-f-interp",
            RootMethod::CHXInterp => "ch-x-interp",
            RootMethod::CHFInterp => "ch-f-interp",
            RootMethod::Picard => "picard",
            RootMethod::Newton => "newton",
            RootMethod::Halley => "halley",
            RootMethod::Secant => "secant",
        }
    }

    pub fn from_name(name: &str) -> Option<RootMethod> {
        RootMethod::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Whether every sample must carry `f′`.
    pub fn needs_slope(self) -> bool {
        matches!(
            self,
            RootMethod::ExactD1
                | RootMethod::CHXInterp
                | RootMethod::CHFInterp
                | RootMethod::Newton
                | RootMethod::Halley
        )
    }

    /// Highest derivative order the method evaluates.
    pub fn derivative_order(self) -> usize {
        match self {
            RootMethod::Halley => 2,
            m if m.needs_slope() => 1,
            _ => 0,
        }
    }

    /// Smallest memory the step formula is defined for.
    pub fn min_window(self) -> usize {
        match self {
            RootMethod::ExactDF
            | RootMethod::NewtonXInterp
            | RootMethod::NewtonFInterp
            | RootMethod::Secant => 2,
            _ => 1,
        }
    }

    pub fn default_window(self) -> usize {
        match self {
            RootMethod::ExactDF | RootMethod::NewtonXInterp | RootMethod::NewtonFInterp => 3,
            RootMethod::ExactD1
            | RootMethod::CHXInterp
            | RootMethod::CHFInterp
            | RootMethod::Secant => 2,
            RootMethod::Picard | RootMethod::Newton | RootMethod::Halley => 1,
        }
    }

    /// Whether the run needs a second starting point.
    pub fn needs_bootstrap(self) -> bool {
        self.min_window() > 1
    }
}

impl fmt::Display for RootMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which coordinates the barycentric weights are built on.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightScheme<R> {
    XBased,
    FBased,
    AlphaShifted(R),
}

impl<R> WeightScheme<R> {
    pub fn name(&self) -> &'static str {
        match self {
            WeightScheme::XBased => "x",
            WeightScheme::FBased => "f",
            WeightScheme::AlphaShifted(_) => "alpha",
        }
    }
}

/// How the second starting point is produced for methods that need two.
#[derive(Clone, Debug, PartialEq)]
pub enum Bootstrap<R> {
    ExplicitSecond(R),
    PicardStep,
    /// `x1 = x0 + h`.
    Perturb(R),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig<R> {
    pub method: RootMethod,
    pub weight_scheme: WeightScheme<R>,
    /// Memory size `n + 1`.
    pub window: usize,
    /// Chebyshev–Halley parameter.
    pub beta: R,
    pub tol_f: R,
    pub tol_x: R,
    /// Index of the last iterate the loop may produce.
    pub max_iter: usize,
    pub precision: Precision,
    /// `None` selects a Picard step when the problem has a fixed-point form
    /// and a small perturbation otherwise.
    pub bootstrap: Option<Bootstrap<R>>,
}

/// `10^-floor(0.3 · bits · log10 2)`.
pub fn default_tolerance<R: Real>(precision: Precision) -> R {
    let digits = (0.3 * f64::from(precision.bits()) * core::f64::consts::LOG10_2) as i32;
    R::pow10(-digits, precision)
}

impl<R: Real> SolverConfig<R> {
    pub fn new(method: RootMethod, precision: Precision) -> Self {
        SolverConfig {
            method,
            weight_scheme: WeightScheme::XBased,
            window: method.default_window(),
            beta: R::from_i64(1, precision),
            tol_f: default_tolerance(precision),
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

    pub fn with_weights(mut self, scheme: WeightScheme<R>) -> Self {
        self.weight_scheme = scheme;
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

    pub fn with_tolerances(mut self, tol_f: R, tol_x: R) -> Self {
        self.tol_f = tol_f;
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
        if !positive(&self.tol_f, &zero) || !positive(&self.tol_x, &zero) {
            return Err(Error::InvalidConfig("tolerances must be positive"));
        }
        if !self.beta.is_finite() {
            return Err(Error::InvalidConfig("beta must be finite"));
        }
        if matches!(self.weight_scheme, WeightScheme::AlphaShifted(_))
            && matches!(self.method, RootMethod::ExactD1)
        {
            return Err(Error::InvalidConfig(
                "alpha-shifted weights apply to derivative-free methods only",
            ));
        }
        Ok(())
    }
}

/// A failed run together with the steps completed before the failure.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveError<R> {
    pub error: Error,
    pub trace: IterationTrace<R>,
}

impl<R> fmt::Display for SolveError<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.error)
    }
}

impl<R: fmt::Debug> core::error::Error for SolveError<R> {}

fn xs<R: Real>(window: &[Sample<R>]) -> Vec<R> {
    window.iter().map(|s| s.x.clone()).collect()
}

fn fs<R: Real>(window: &[Sample<R>]) -> Vec<R> {
    window.iter().map(|s| s.f.clone()).collect()
}

fn slopes<R: Real>(window: &[Sample<R>]) -> Result<Vec<R>, Error> {
    window.iter().map(|s| s.slope().cloned()).collect()
}

fn newest<R>(window: &[Sample<R>]) -> Result<(&Sample<R>, usize), Error> {
    let n = window.len().checked_sub(1).ok_or(Error::InsufficientData)?;
    Ok((&window[n], n))
}

fn exact_root_hit<R: Real>(window: &[Sample<R>]) -> Result<(), Error> {
    match window.iter().position(|s| s.f.is_zero()) {
        Some(index) => Err(Error::ExactRootHit { index }),
        None => Ok(()),
    }
}

fn check_len(len: usize, expected: usize) -> Result<(), Error> {
    if len == expected {
        Ok(())
    } else {
        Err(Error::InvalidConfig("one weight per sample is required"))
    }
}

/// Plain weights for the window under the given scheme.
pub fn plain_weights<R: Real>(
    window: &[Sample<R>],
    scheme: &WeightScheme<R>,
) -> Result<WeightSet<R>, Error> {
    match scheme {
        WeightScheme::XBased => Ok(omega_product(&NodeSet::new(xs(window))?)),
        WeightScheme::FBased => Ok(omega_product(&NodeSet::new(fs(window))?)),
        WeightScheme::AlphaShifted(alpha) => omega_alpha(&NodeSet::new(fs(window))?, alpha),
    }
}

/// Hermite weights for the exact-root scheme: `hermite_x` for the x-based
/// scheme, `hermite_f` for the f-based one.
pub fn exact_d1_weights<R: Real>(
    window: &[Sample<R>],
    scheme: &WeightScheme<R>,
) -> Result<HermiteWeightSet<R>, Error> {
    match scheme {
        WeightScheme::XBased => hermite_x(&NodeSet::new(xs(window))?, &slopes(window)?),
        WeightScheme::FBased => Ok(hermite_f(&NodeSet::new(fs(window))?)),
        WeightScheme::AlphaShifted(_) => Err(Error::InvalidConfig(
            "alpha-shifted weights apply to derivative-free methods only",
        )),
    }
}

/// `Σ ω_i x_i/f_i / Σ ω_i/f_i`.
pub fn step_exact_df<R: Real>(window: &[Sample<R>], weights: &WeightSet<R>) -> Result<R, Error> {
    check_len(weights.len(), window.len())?;
    exact_root_hit(window)?;
    let (last, _) = newest(window)?;
    let mut num = last.x.zero_like();
    let mut den = last.x.zero_like();
    for (s, w) in window.iter().zip(weights.omega()) {
        let t = w.clone() / s.f.clone();
        num = num + t.clone() * s.x.clone();
        den = den + t;
    }
    if den.is_zero() {
        return Err(Error::SingularStep);
    }
    Ok(num / den)
}

/// `Σ [λ_i(x_i − f_i/f_i′) − γ_i f_i x_i]/f_i² / Σ (λ_i − γ_i f_i)/f_i²`.
pub fn step_exact_d1<R: Real>(
    window: &[Sample<R>],
    hweights: &HermiteWeightSet<R>,
) -> Result<R, Error> {
    check_len(hweights.len(), window.len())?;
    exact_root_hit(window)?;
    let (last, _) = newest(window)?;
    let mut num = last.x.zero_like();
    let mut den = last.x.zero_like();
    for (i, (s, (l, g))) in window
        .iter()
        .zip(hweights.lambda().iter().zip(hweights.gamma()))
        .enumerate()
    {
        let fp = s.slope()?;
        if fp.is_zero() {
            return Err(Error::ZeroDerivative { index: i });
        }
        let f2 = s.f.clone() * s.f.clone();
        let newton = s.x.clone() - s.f.clone() / fp.clone();
        num = num + (l.clone() * newton - g.clone() * s.f.clone() * s.x.clone()) / f2.clone();
        den = den + (l.clone() - g.clone() * s.f.clone()) / f2;
    }
    if den.is_zero() {
        return Err(Error::SingularStep);
    }
    Ok(num / den)
}

// Σ_{k≠n} ω_k t_k / Σ_{k≠n} ω_k where t_k = a_k / b_k.
fn weighted_ratio<R: Real>(
    window: &[Sample<R>],
    weights: &WeightSet<R>,
    ratio: impl Fn(&Sample<R>, &Sample<R>) -> Result<R, Error>,
) -> Result<R, Error> {
    check_len(weights.len(), window.len())?;
    let (last, n) = newest(window)?;
    let mut num = last.x.zero_like();
    let mut den = last.x.zero_like();
    for (s, w) in window[..n].iter().zip(weights.omega()) {
        num = num + w.clone() * ratio(last, s)?;
        den = den + w.clone();
    }
    if den.is_zero() {
        return Err(Error::SingularStep);
    }
    Ok(num / den)
}

/// `v > zero`, false for NaN.
pub(crate) fn positive<R: Real>(v: &R, zero: &R) -> bool {
    v.partial_cmp(zero) == Some(core::cmp::Ordering::Greater)
}

fn nonzero<R: Real>(d: R) -> Result<R, Error> {
    if d.is_zero() {
        Err(Error::SingularStep)
    } else {
        Ok(d)
    }
}

/// Estimate of `1/f_n′` from the inverse interpolant.
pub fn inverse_slope_estimate<R: Real>(
    window: &[Sample<R>],
    weights: &WeightSet<R>,
) -> Result<R, Error> {
    weighted_ratio(window, weights, |n, k| {
        Ok((n.x.clone() - k.x.clone()) / nonzero(n.f.clone() - k.f.clone())?)
    })
}

/// Estimate of `f_n′` from the direct interpolant.
pub fn direct_slope_estimate<R: Real>(
    window: &[Sample<R>],
    weights: &WeightSet<R>,
) -> Result<R, Error> {
    weighted_ratio(window, weights, |n, k| {
        Ok((n.f.clone() - k.f.clone()) / nonzero(n.x.clone() - k.x.clone())?)
    })
}

/// `f_n″` estimate from the inverse Hermite interpolant; `hweights` are the
/// f-based weights of the window.
pub fn second_derivative_x_interp<R: Real>(
    window: &[Sample<R>],
    hweights: &HermiteWeightSet<R>,
) -> Result<R, Error> {
    check_len(hweights.len(), window.len())?;
    let (last, n) = newest(window)?;
    let fp_n = last.slope()?.clone();
    if fp_n.is_zero() {
        return Err(Error::ZeroDerivative { index: n });
    }
    let lambda = hweights.lambda();
    let gamma = hweights.gamma();
    let mut sum = gamma[n].clone() / fp_n.clone();
    for (k, s) in window[..n].iter().enumerate() {
        let fp_k = s.slope()?;
        if fp_k.is_zero() {
            return Err(Error::ZeroDerivative { index: k });
        }
        let dx = last.x.clone() - s.x.clone();
        let df = nonzero(last.f.clone() - s.f.clone())?;
        let term = lambda[k].clone() * dx.clone()
            + (gamma[k].clone() * dx - lambda[k].clone() / fp_k.clone()) * df.clone();
        sum = sum + term / (df.clone() * df);
    }
    let two = fp_n.int(2);
    Ok(two * fp_n.powi(3) / nonzero(lambda[n].clone())? * sum)
}

/// `f_n″` estimate from the direct Hermite interpolant; `hweights` are the
/// x-based squared-product weights of the window.
pub fn second_derivative_f_interp<R: Real>(
    window: &[Sample<R>],
    hweights: &HermiteWeightSet<R>,
) -> Result<R, Error> {
    check_len(hweights.len(), window.len())?;
    let (last, n) = newest(window)?;
    let lambda = hweights.lambda();
    let gamma = hweights.gamma();
    let mut sum = gamma[n].clone() * last.slope()?.clone();
    for (k, s) in window[..n].iter().enumerate() {
        let dx = nonzero(last.x.clone() - s.x.clone())?;
        let df = last.f.clone() - s.f.clone();
        let term = lambda[k].clone() * df.clone()
            + (gamma[k].clone() * df - lambda[k].clone() * s.slope()?.clone()) * dx.clone();
        sum = sum + term / (dx.clone() * dx);
    }
    let two = last.x.int(2);
    Ok(-(two / nonzero(lambda[n].clone())?) * sum)
}

/// `x − [(f′² + (½ − β) f f″)/(f′² − β f f″)] · f/f′`.
pub fn chebyshev_halley_update<R: Real>(
    x: &R,
    f: &R,
    fp: &R,
    fpp: &R,
    beta: &R,
) -> Result<R, Error> {
    if fp.is_zero() {
        return Err(Error::ZeroDerivative { index: 0 });
    }
    let fp2 = fp.clone() * fp.clone();
    let ffpp = f.clone() * fpp.clone();
    let half = x.one_like() / x.int(2);
    let den = fp2.clone() - beta.clone() * ffpp.clone();
    if den.is_zero() {
        return Err(Error::SingularStep);
    }
    let num = fp2 + (half - beta.clone()) * ffpp;
    Ok(x.clone() - num / den * (f.clone() / fp.clone()))
}

/// One step of a classical method: Picard, Newton, Halley or Secant.
///
/// Newton and Halley use the slope stored with the newest sample; Halley
/// evaluates the true `f″`; Secant uses the two newest samples.
pub fn baseline_step<R: Real, F: ScalarFunction<R> + ?Sized>(
    method: RootMethod,
    problem: &F,
    window: &[Sample<R>],
) -> Result<R, Error> {
    let (last, n) = newest(window)?;
    match method {
        RootMethod::Picard => problem
            .fixed_point_map(&last.x)
            .ok_or(Error::InvalidConfig("problem has no fixed-point form"))?,
        RootMethod::Newton => {
            let fp = last.slope()?;
            if fp.is_zero() {
                return Err(Error::ZeroDerivative { index: n });
            }
            Ok(last.x.clone() - last.f.clone() / fp.clone())
        }
        RootMethod::Halley => {
            let fp = last.slope()?.clone();
            if fp.is_zero() {
                return Err(Error::ZeroDerivative { index: n });
            }
            let fpp = problem.derivative(&last.x, 2)?;
            let two = last.x.int(2);
            let den = two.clone() * fp.clone() * fp.clone() - last.f.clone() * fpp;
            if den.is_zero() {
                return Err(Error::SingularStep);
            }
            Ok(last.x.clone() - two * last.f.clone() * fp / den)
        }
        RootMethod::Secant => {
            let prev = window
                .get(n.checked_sub(1).ok_or(Error::InsufficientData)?)
                .ok_or(Error::InsufficientData)?;
            let df = nonzero(last.f.clone() - prev.f.clone())?;
            Ok(last.x.clone() - last.f.clone() * (last.x.clone() - prev.x.clone()) / df)
        }
        _ => Err(Error::InvalidConfig("not a baseline method")),
    }
}

/// Proposed next iterate and the curvature estimate it used.
fn propose<R: Real, F: ScalarFunction<R> + ?Sized>(
    problem: &F,
    window: &[Sample<R>],
    config: &SolverConfig<R>,
) -> Result<(R, Option<R>), Error> {
    let (last, n) = newest(window)?;
    match config.method {
        RootMethod::ExactDF => {
            let w = plain_weights(window, &config.weight_scheme)?;
            Ok((step_exact_df(window, &w)?, None))
        }
        RootMethod::ExactD1 => {
            let w = exact_d1_weights(window, &config.weight_scheme)?;
            Ok((step_exact_d1(window, &w)?, None))
        }
        RootMethod::NewtonXInterp => {
            let w = plain_weights(window, &config.weight_scheme)?;
            let inv = inverse_slope_estimate(window, &w)?;
            Ok((last.x.clone() - last.f.clone() * inv, None))
        }
        RootMethod::NewtonFInterp => {
            let w = plain_weights(window, &config.weight_scheme)?;
            let slope = direct_slope_estimate(window, &w)?;
            if slope.is_zero() {
                return Err(Error::SingularStep);
            }
            Ok((last.x.clone() - last.f.clone() / slope, None))
        }
        RootMethod::CHXInterp | RootMethod::CHFInterp => {
            let fpp = if config.method == RootMethod::CHXInterp {
                let w = hermite_f(&NodeSet::new(fs(window))?);
                second_derivative_x_interp(window, &w)?
            } else {
                let w = hermite_product(&NodeSet::new(xs(window))?);
                second_derivative_f_interp(window, &w)?
            };
            let next = chebyshev_halley_update(&last.x, &last.f, last.slope()?, &fpp, &config.beta)
                .map_err(|e| match e {
                    Error::ZeroDerivative { .. } => Error::ZeroDerivative { index: n },
                    e => e,
                })?;
            Ok((next, Some(fpp)))
        }
        RootMethod::Halley => {
            let fpp = problem.derivative(&last.x, 2)?;
            Ok((
                baseline_step(RootMethod::Halley, problem, window)?,
                Some(fpp),
            ))
        }
        m => Ok((baseline_step(m, problem, window)?, None)),
    }
}

/// Drops the older member of any pair of samples whose `x` or `f`
/// coordinates collide.
pub(crate) fn evict_collisions<R: Real>(memory: &mut Vec<Sample<R>>) {
    loop {
        let hit = find_collision(&xs(memory)).or_else(|| find_collision(&fs(memory)));
        match hit {
            Some((older, _)) => {
                memory.remove(older);
            }
            None => break,
        }
    }
}

pub(crate) fn evaluate<R: Real, F: ScalarFunction<R> + ?Sized>(
    problem: &F,
    x: R,
    order: usize,
) -> Result<Sample<R>, Error> {
    let f = problem.value(&x)?;
    let f_prime = if order >= 1 {
        Some(problem.derivative(&x, 1)?)
    } else {
        None
    };
    Ok(Sample { x, f, f_prime })
}

pub(crate) fn perturbation<R: Real>(x0: &R) -> R {
    let scale = x0.abs().max_of(x0.one_like());
    scale / x0.int(1000)
}

/// Runs `config.method` from `x0` until convergence, divergence or the
/// iteration budget.
///
/// `reference` is attached to the trace so each step carries its error.
/// Step failures that the window-reduction fallback cannot absorb end the run
/// with a [`SolveError`] holding the partial trace.
pub fn solve<R: Real, F: ScalarFunction<R> + ?Sized>(
    problem: &F,
    x0: R,
    config: &SolverConfig<R>,
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
    let order = method.derivative_order().min(1);
    if problem.max_order() < method.derivative_order() {
        bail!(Error::MissingDerivative {
            order: method.derivative_order()
        });
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
    if first.f.abs() < config.tol_f {
        trace.set_last_status(Status::Converged);
        return Ok(trace);
    }
    let mut memory = alloc::vec![first];

    if method.needs_bootstrap() {
        let x0 = &memory[0].x;
        let x1 = match &config.bootstrap {
            Some(Bootstrap::ExplicitSecond(x1)) => Ok(x1.clone()),
            Some(Bootstrap::Perturb(h)) => Ok(x0.clone() + h.clone()),
            Some(Bootstrap::PicardStep) => problem
                .fixed_point_map(x0)
                .unwrap_or(Err(Error::InvalidConfig("problem has no fixed-point form"))),
            None => problem
                .fixed_point_map(x0)
                .unwrap_or_else(|| Ok(x0.clone() + perturbation(x0))),
        };
        let x1 = match x1 {
            Ok(x1) => x1,
            Err(e) => bail!(e),
        };
        if let Some(done) = accept(
            problem,
            &mut trace,
            &mut memory,
            x1,
            None,
            Status::Ok,
            config,
            order,
        ) {
            return done;
        }
    }

    loop {
        let reached = trace.len() - 1;
        if reached >= config.max_iter {
            trace.set_last_status(Status::BudgetExhausted);
            return Ok(trace);
        }
        let mut start = 0;
        let mut status = Status::Ok;
        let proposal = loop {
            match propose(problem, &memory[start..], config) {
                Err(Error::SingularStep | Error::DegenerateNodes { .. })
                    if memory.len() - start > method.min_window() =>
                {
                    start += 1;
                    status = Status::SingularStepFallback;
                }
                other => break other,
            }
        };
        let (next, curvature) = match proposal {
            Ok(p) => p,
            Err(Error::ExactRootHit { .. }) => {
                trace.set_last_status(Status::Converged);
                return Ok(trace);
            }
            Err(e) => bail!(e),
        };
        if let Some(done) = accept(
            problem,
            &mut trace,
            &mut memory,
            next,
            curvature,
            status,
            config,
            order,
        ) {
            return done;
        }
    }
}

/// Evaluates and records a new iterate. Returns the finished run when the
/// iterate ends it.
#[allow(clippy::too_many_arguments)]
fn accept<R: Real, F: ScalarFunction<R> + ?Sized>(
    problem: &F,
    trace: &mut IterationTrace<R>,
    memory: &mut Vec<Sample<R>>,
    x: R,
    curvature: Option<R>,
    status: Status,
    config: &SolverConfig<R>,
    order: usize,
) -> Option<Result<IterationTrace<R>, SolveError<R>>> {
    let finished = |trace: &mut IterationTrace<R>| {
        Some(Ok(core::mem::replace(trace, IterationTrace::new(None))))
    };
    if !x.is_finite() {
        trace.push(x.clone(), x, None, curvature, Status::Diverged);
        return finished(trace);
    }
    let sample = match evaluate(problem, x, order) {
        Ok(s) => s,
        Err(e) => {
            let trace = core::mem::replace(trace, IterationTrace::new(None));
            return Some(Err(SolveError { error: e, trace }));
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
        return finished(trace);
    }
    let dx = (sample.x.clone() - memory[memory.len() - 1].x.clone()).abs();
    let done = sample.f.abs() < config.tol_f || dx < config.tol_x;
    let status = if done { Status::Converged } else { status };
    trace.push(
        sample.x.clone(),
        sample.f.clone(),
        sample.f_prime.clone(),
        curvature,
        status,
    );
    if done {
        return finished(trace);
    }
    memory.push(sample);
    evict_collisions(memory);
    while memory.len() > config.window {
        memory.remove(0);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::FnFunction;
    use alloc::vec;

    fn s(x: f64, f: f64) -> Sample<f64> {
        Sample::new(x, f)
    }

    fn sd(x: f64, f: f64, fp: f64) -> Sample<f64> {
        Sample::with_slope(x, f, fp)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn exact_df_two_points_is_secant() {
        let w = vec![s(1.0, -1.0), s(2.0, 2.0)];
        let weights = plain_weights(&w, &WeightScheme::FBased).unwrap();
        assert!(close(
            step_exact_df(&w, &weights).unwrap(),
            4.0 / 3.0,
            1e-15
        ));
        let weights = plain_weights(&w, &WeightScheme::XBased).unwrap();
        assert!(close(
            step_exact_df(&w, &weights).unwrap(),
            4.0 / 3.0,
            1e-15
        ));
    }

    #[test]
    fn exact_df_reports_exact_roots() {
        let w = vec![s(1.0, -1.0), s(2.0, 0.0)];
        let weights = plain_weights(&w, &WeightScheme::XBased).unwrap();
        assert_eq!(
            step_exact_df(&w, &weights),
            Err(Error::ExactRootHit { index: 1 })
        );
    }

    #[test]
    fn exact_d1_single_sample_is_newton() {
        let w = vec![sd(1.0, -1.0, 2.0)];
        for scheme in [WeightScheme::XBased, WeightScheme::FBased] {
            let h = exact_d1_weights(&w, &scheme).unwrap();
            assert_eq!(step_exact_d1(&w, &h).unwrap(), 1.5);
        }
    }

    #[test]
    fn slope_estimates_on_lines_are_exact() {
        let w = vec![s(0.0, 1.0), s(0.5, 2.0), s(3.0, 7.0)];
        let weights = plain_weights(&w, &WeightScheme::XBased).unwrap();
        assert!(close(
            inverse_slope_estimate(&w, &weights).unwrap(),
            0.5,
            1e-15
        ));
        let w = vec![s(0.0, -5.0), s(1.0, -2.0), s(4.0, 7.0)];
        let weights = plain_weights(&w, &WeightScheme::FBased).unwrap();
        assert!(close(
            direct_slope_estimate(&w, &weights).unwrap(),
            3.0,
            1e-15
        ));
    }

    #[test]
    fn two_point_slopes_are_secant_slopes() {
        let w = vec![s(1.0, 1.0), s(3.0, 9.0)];
        let weights = plain_weights(&w, &WeightScheme::XBased).unwrap();
        assert!(close(
            direct_slope_estimate(&w, &weights).unwrap(),
            4.0,
            1e-15
        ));
        assert!(close(
            inverse_slope_estimate(&w, &weights).unwrap(),
            0.25,
            1e-15
        ));
    }

    #[test]
    fn direct_slope_of_cubic_matches_divided_differences() {
        // Quadratic through (1,1), (2,8), (3,27): p'(3) = f[2,3] + f[1,2,3]·(3−2).
        let w = vec![s(1.0, 1.0), s(2.0, 8.0), s(3.0, 27.0)];
        let weights = plain_weights(&w, &WeightScheme::XBased).unwrap();
        let f23 = 19.0;
        let f123 = (19.0 - 7.0) / 2.0;
        assert!(close(
            direct_slope_estimate(&w, &weights).unwrap(),
            f23 + f123,
            1e-14
        ));
    }

    #[test]
    fn chebyshev_halley_hand_values() {
        assert!(close(
            chebyshev_halley_update(&1.0, &-1.0, &2.0, &2.0, &0.5).unwrap(),
            1.4,
            1e-15
        ));
        assert!(close(
            chebyshev_halley_update(&1.0, &-1.0, &2.0, &2.0, &1.0).unwrap(),
            17.0 / 12.0,
            1e-15
        ));
        for beta in [0.0, 0.5, 1.0, 3.0] {
            assert_eq!(
                chebyshev_halley_update(&1.0, &-1.0, &2.0, &0.0, &beta).unwrap(),
                1.5
            );
        }
        assert_eq!(
            chebyshev_halley_update(&1.0, &-1.0, &0.0, &2.0, &1.0),
            Err(Error::ZeroDerivative { index: 0 })
        );
        assert_eq!(
            chebyshev_halley_update(&1.0, &-1.0, &1.0, &-1.0, &1.0),
            Err(Error::SingularStep)
        );
    }

    #[test]
    fn second_derivative_estimates_vanish_on_lines() {
        let w = vec![sd(0.0, 1.0, 2.0), sd(1.0, 3.0, 2.0), sd(2.5, 6.0, 2.0)];
        let hf = hermite_f(&NodeSet::new(fs(&w)).unwrap());
        assert!(second_derivative_x_interp(&w, &hf).unwrap().abs() < 1e-13);
        let hx = hermite_product(&NodeSet::new(xs(&w)).unwrap());
        assert!(second_derivative_f_interp(&w, &hx).unwrap().abs() < 1e-13);
    }

    #[test]
    fn second_derivative_f_interp_is_exact_on_quadratics() {
        let w = vec![sd(0.0, 0.0, 0.0), sd(1.0, 1.0, 2.0)];
        let hx = hermite_product(&NodeSet::new(xs(&w)).unwrap());
        assert!(close(
            second_derivative_f_interp(&w, &hx).unwrap(),
            2.0,
            1e-15
        ));
    }

    #[test]
    fn baselines() {
        let f = FnFunction::new(2, |x: &f64, k| match k {
            0 => x * x - 2.0,
            1 => 2.0 * x,
            _ => 2.0,
        });
        let w = vec![sd(1.0, -1.0, 2.0)];
        assert_eq!(baseline_step(RootMethod::Newton, &f, &w).unwrap(), 1.5);
        assert!(close(
            baseline_step(RootMethod::Halley, &f, &w).unwrap(),
            1.4,
            1e-15
        ));
        let w = vec![s(1.0, -1.0), s(2.0, 2.0)];
        assert!(close(
            baseline_step(RootMethod::Secant, &f, &w).unwrap(),
            4.0 / 3.0,
            1e-15
        ));
        assert!(matches!(
            baseline_step(RootMethod::Picard, &f, &w),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn linear_problem_converges_after_one_step() {
        let f = FnFunction::new(1, |x: &f64, k| if k == 0 { 7.0 * x - 3.0 } else { 7.0 });
        for window in 2..5 {
            let config = SolverConfig::new(RootMethod::ExactDF, Precision::DOUBLE)
                .with_window(window)
                .with_tolerances(1e-12, 1e-300);
            let trace = solve(&f, 0.0, &config, None).unwrap();
            assert!(trace.converged());
            assert_eq!(trace.len(), 3);
        }
    }

    #[test]
    fn too_small_window_is_rejected() {
        let f = FnFunction::new(1, |x: &f64, _| *x);
        let config = SolverConfig::new(RootMethod::ExactDF, Precision::DOUBLE).with_window(1);
        let err = solve(&f, 1.0, &config, None).unwrap_err();
        assert!(matches!(err.error, Error::InvalidConfig(_)));
        assert!(err.trace.is_empty());
    }

    #[test]
    fn missing_derivatives_are_reported() {
        let f = FnFunction::new(0, |x: &f64, _| *x - 1.0);
        let config = SolverConfig::new(RootMethod::Newton, Precision::DOUBLE);
        assert_eq!(
            solve(&f, 3.0, &config, None).unwrap_err().error,
            Error::MissingDerivative { order: 1 }
        );
    }

    #[test]
    fn overflow_is_diverged() {
        let config = SolverConfig::new(RootMethod::Newton, Precision::DOUBLE);
        let g = FnFunction::new(
            1,
            |x: &f64, k| if k == 0 { x.powi(3) - 1e308 } else { 1e-300 },
        );
        let trace = solve(&g, 1.0, &config, None).unwrap();
        assert_eq!(trace.status(), Some(Status::Diverged));
    }

    #[test]
    fn budget_is_respected() {
        let f = FnFunction::new(
            1,
            |x: &f64, k| if k == 0 { x.cos() - x } else { -x.sin() - 1.0 },
        );
        let config = SolverConfig::new(RootMethod::Newton, Precision::DOUBLE)
            .with_tolerances(1e-300, 1e-300)
            .with_max_iter(2);
        let trace = solve(&f, 3.0, &config, None).unwrap();
        assert_eq!(trace.len(), 3);
        assert_eq!(trace.status(), Some(Status::BudgetExhausted));
    }
}
