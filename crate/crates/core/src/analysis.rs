//! Convergence orders, theoretical and observed, and leading error factors.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::numerics::Real;
use crate::trace::IterationTrace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// `ℓ = (m + 1) − m·ℓ^-(n+1)`.
    Root,
    /// `ℓ² = 1 + m(ℓ − ℓ^-n)`.
    Opt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OrderQuery {
    pub family: Family,
    /// Number of coinciding conditions per node (1 values only, 2 with
    /// first derivatives, ...).
    pub m: u32,
    /// `None` asks for the limit `n → ∞`.
    pub n: Option<u32>,
}

impl OrderQuery {
    pub fn new(family: Family, m: u32, n: Option<u32>) -> Self {
        OrderQuery { family, m, n }
    }

    /// Closed-form limit as `n → ∞`.
    pub fn limit(&self) -> f64 {
        let m = f64::from(self.m);
        match self.family {
            Family::Root => m + 1.0,
            Family::Opt => (m + libm::sqrt(4.0 + m * m)) / 2.0,
        }
    }

    /// Left side minus right side of the defining equation at `l`.
    pub fn residual(&self, l: f64) -> f64 {
        let m = f64::from(self.m);
        let Some(n) = self.n else {
            return l - self.limit();
        };
        let n = n as i32;
        match self.family {
            Family::Root => l - (m + 1.0) + m * libm::pow(l, -f64::from(n + 1)),
            Family::Opt => l * l - 1.0 - m * (l - libm::pow(l, -f64::from(n))),
        }
    }
}

/// Convergence order `ℓ` of the scheme family with `n + 1` remembered points.
///
/// Returns the positive root of the defining equation that differs from the
/// trivial `ℓ = 1` (or 1 itself when that is the only root ≥ 1), found by
/// Newton's method safeguarded by bisection.
pub fn theoretical_order(q: OrderQuery) -> f64 {
    let Some(n) = q.n else {
        return q.limit();
    };
    if q.family == Family::Opt && n == 0 {
        return f64::max(1.0, f64::from(q.m) - 1.0);
    }
    // The defining equations always admit ℓ = 1. Clearing negative powers
    // and dividing out (ℓ − 1) leaves a polynomial with one sign change,
    // hence one positive root:
    //   Root: ℓ^(n+1) − m Σ_{i≤n} ℓ^i
    //   Opt:  ℓ^(n+1) − (m−1) ℓ^n − m Σ_{i<n} ℓ^i
    let eval = |l: f64| -> (f64, f64) {
        let m = f64::from(q.m);
        let mut value = 0.0;
        let mut slope = 0.0;
        for power in (0..=n + 1).rev() {
            let c = if power == n + 1 {
                1.0
            } else if q.family == Family::Opt && power == n {
                -(m - 1.0)
            } else {
                -m
            };
            slope = slope * l + value;
            value = value * l + c;
        }
        (value, slope)
    };
    let (mut lo, mut hi) = (0.0f64, q.limit() + 1.0);
    let mut l = q.limit();
    for _ in 0..200 {
        let (v, d) = eval(l);
        if v == 0.0 {
            return l;
        }
        if v < 0.0 {
            lo = l;
        } else {
            hi = l;
        }
        let newton = l - v / d;
        let next = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - l).abs() <= 4.0 * f64::EPSILON * l.abs() {
            return next;
        }
        l = next;
    }
    l
}

fn noise_floor<R: Real>(sample: &R) -> R {
    let bits = sample.precision().bits();
    sample.int(2).powi(-((bits as f64 * 0.9) as i32))
}

/// Mean of `ln|ε_{i+1}| / ln|ε_i|` over the last `k_last` usable pairs.
///
/// A pair is usable when both magnitudes lie in `(floor, 1)`, where the
/// floor `2^-(0.9·bits)` keeps rounding noise at the precision limit out.
pub fn empirical_order<R: Real>(trace: &IterationTrace<R>, k_last: usize) -> Result<f64, Error> {
    let errors = trace.abs_errors().ok_or(Error::InsufficientData)?;
    empirical_order_of(&errors, k_last)
}

/// [`empirical_order`] on a bare sequence of error magnitudes.
pub fn empirical_order_of<R: Real>(errors: &[R], k_last: usize) -> Result<f64, Error> {
    if k_last == 0 {
        return Err(Error::InsufficientData);
    }
    let first = errors.first().ok_or(Error::InsufficientData)?;
    let floor = noise_floor(first);
    let one = first.one_like();
    let usable = |e: &R| e.abs() > floor && e.abs() < one;
    let mut ratios = Vec::new();
    for pair in errors.windows(2) {
        if usable(&pair[0]) && usable(&pair[1]) {
            let num = pair[1].abs().ln()?.to_f64();
            let den = pair[0].abs().ln()?.to_f64();
            ratios.push(num / den);
        }
    }
    if ratios.len() < k_last {
        return Err(Error::InsufficientData);
    }
    let tail = &ratios[ratios.len() - k_last..];
    Ok(tail.iter().sum::<f64>() / k_last as f64)
}

/// Weight family a tabulated error cell refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeightFamily {
    X,
    F,
}

/// Scheme identifiers for the tabulated leading-error factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Exact root of the inverse interpolant (secant for two points).
    ExactDF(WeightFamily),
    /// Exact root of the inverse Hermite interpolant (Newton for one point).
    ExactD1(WeightFamily),
    /// Newton with the inverse-interpolant slope.
    NewtonXInterp(WeightFamily),
    /// Newton with the direct-interpolant slope.
    NewtonFInterp(WeightFamily),
    /// Chebyshev–Halley with the inverse Hermite curvature.
    CHXInterp,
    /// Chebyshev–Halley with the direct Hermite curvature.
    CHFInterp,
    /// Derivative-free optimisation.
    OptNewtonDF,
    /// First-derivative optimisation.
    OptCHD1,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorFactorSpec<R> {
    pub scheme: Scheme,
    /// Number of remembered points.
    pub n_plus_1: usize,
    /// `f⁽¹⁾, f⁽²⁾, …` (or `φ⁽¹⁾, φ⁽²⁾, …`) at the solution.
    pub derivatives: Vec<R>,
}

impl<R: Real> ErrorFactorSpec<R> {
    pub fn new(scheme: Scheme, n_plus_1: usize, derivatives: Vec<R>) -> Self {
        ErrorFactorSpec {
            scheme,
            n_plus_1,
            derivatives,
        }
    }

    /// Exponents of `ε_{k-n}, …, ε_k` in the dominant term of `ε_{k+1}`.
    pub fn exponents(&self) -> Result<Vec<u32>, Error> {
        let w = self.n_plus_1;
        if w == 0 {
            return Err(Error::UnsupportedCell);
        }
        Ok(match self.scheme {
            Scheme::ExactDF(_) | Scheme::NewtonXInterp(_) | Scheme::NewtonFInterp(_) => vec![1; w],
            Scheme::ExactD1(_) | Scheme::CHXInterp | Scheme::CHFInterp => vec![2; w],
            Scheme::OptNewtonDF => {
                let mut e = vec![1; w];
                e[w - 1] = 0;
                e
            }
            Scheme::OptCHD1 => {
                let mut e = vec![2; w];
                e[w - 1] = 1;
                e
            }
        })
    }
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

/// Leading error factor `E` in `ε_{n+1} ≈ E·Π ε_i^{e_i}` for a tabulated
/// scheme and memory size.
pub fn predicted_error_factor<R: Real>(spec: &ErrorFactorSpec<R>) -> Result<R, Error> {
    use Scheme::*;
    use WeightFamily::{F, X};
    let d = &spec.derivatives;
    let get =
        |k: usize| -> Result<R, Error> { d.get(k - 1).cloned().ok_or(Error::InsufficientData) };
    let f1 = get(1)?;
    let z = f1.zero_like();
    let int = |v: i64| f1.int(v);
    let order = |k: usize| get(k).unwrap_or_else(|_| z.clone());
    let need = |k: usize| get(k).map(|_| ());

    // Products of derivatives, written fABC for f^(A) f^(B) f^(C).
    let f2 = order(2);
    let f3 = order(3);
    let f4 = order(4);
    let f22 = f2.clone() * f2.clone();
    let f13 = f1.clone() * f3.clone();
    let f222 = f22.clone() * f2.clone();
    let f123 = f1.clone() * f2.clone() * f3.clone();
    let f114 = f1.clone() * f1.clone() * f4.clone();
    let f11 = f1.clone() * f1.clone();
    let f111 = f11.clone() * f1.clone();

    let half_ratio = || Ok::<_, Error>(f2.clone() / (int(2) * f1.clone()));
    let cubic = |c22: i64| -> Result<R, Error> {
        need(3)?;
        Ok((int(c22) * f22.clone() - int(2) * f13.clone()) / (int(12) * f11.clone()))
    };
    let quartic = |c222: i64, c123: i64| -> Result<R, Error> {
        need(4)?;
        Ok(
            (int(c222) * f222.clone() - int(c123) * f123.clone() + f114.clone())
                / (int(24) * f111.clone()),
        )
    };

    if matches!(spec.scheme, OptNewtonDF | OptCHD1) {
        let phi2 = get(2)?;
        if phi2.is_zero() {
            return Err(Error::ZeroDerivative { index: 2 });
        }
        let n1 = spec.n_plus_1;
        return match (spec.scheme, n1) {
            (OptNewtonDF, 2..) => {
                let n = n1 - 1;
                let sign = if n % 2 == 0 { 1 } else { -1 };
                Ok(int(sign) * get(n1)? / (int(factorial(n1)) * phi2))
            }
            (OptCHD1, 3 | 4) => {
                let k = 2 * n1;
                Ok(-(int(2) * get(k)?) / (int(factorial(k)) * phi2))
            }
            _ => Err(Error::UnsupportedCell),
        };
    }

    if f1.is_zero() {
        return Err(Error::ZeroDerivative { index: 1 });
    }
    match (spec.scheme, spec.n_plus_1) {
        (ExactDF(_) | NewtonXInterp(_) | NewtonFInterp(_), 2) => half_ratio(),
        (ExactDF(X) | NewtonXInterp(X), 3) => cubic(3),
        (ExactDF(F) | NewtonXInterp(F), 3) => cubic(6),
        (ExactDF(X) | NewtonXInterp(X), 4) => quartic(3, 4),
        (ExactDF(F) | NewtonXInterp(F), 4) => quartic(15, 10),
        (NewtonFInterp(X), 3) => Ok(-get(3)? / (int(6) * f1.clone())),
        (NewtonFInterp(X), 4) => Ok(get(4)? / (int(24) * f1.clone())),
        (NewtonFInterp(F), 3) => cubic(3),
        (NewtonFInterp(F), 4) => quartic(6, 6),
        (ExactD1(_) | CHXInterp | CHFInterp, 1) => half_ratio(),
        (ExactD1(X), 2) => quartic(3, 4),
        (ExactD1(F) | CHXInterp, 2) => quartic(15, 10),
        (CHFInterp, 2) => Ok(get(4)? / (int(24) * f1.clone())),
        _ => Err(Error::UnsupportedCell),
    }
}

/// Two-term prediction of `ε₂` for the first-derivative optimisation scheme
/// with two remembered points:
/// `−(2φ⁽⁴⁾/(4!φ″))·ε₀²ε₁ + (φ‴/(2φ″))·ε₁²`.
pub fn opt_ch_d1_two_point_error<R: Real>(
    derivatives: &[R],
    eps0: &R,
    eps1: &R,
) -> Result<R, Error> {
    let phi2 = derivatives.get(1).ok_or(Error::InsufficientData)?.clone();
    let phi3 = derivatives.get(2).ok_or(Error::InsufficientData)?.clone();
    let phi4 = derivatives.get(3).ok_or(Error::InsufficientData)?.clone();
    if phi2.is_zero() {
        return Err(Error::ZeroDerivative { index: 2 });
    }
    let two = phi2.int(2);
    let quartic = -(two.clone() * phi4) / (phi2.int(24) * phi2.clone())
        * eps0.clone()
        * eps0.clone()
        * eps1.clone();
    let cubic = phi3 / (two * phi2) * eps1.clone() * eps1.clone();
    Ok(quartic + cubic)
}

/// Largest relative deviation of `ε_{k+1} / Π ε_i^{e_i}` from the predicted
/// factor over the last `window_tail` usable steps.
///
/// Steps are usable while every error involved lies above the rounding
/// floor `2^-(0.9·bits)`. When the predicted factor is zero the absolute
/// deviation is returned.
pub fn verify_error_factor<R: Real>(
    trace: &IterationTrace<R>,
    spec: &ErrorFactorSpec<R>,
    window_tail: usize,
) -> Result<R, Error> {
    let predicted = predicted_error_factor(spec)?;
    let exponents = spec.exponents()?;
    let errors: Vec<R> = trace
        .steps()
        .iter()
        .map(|s| s.error.clone().ok_or(Error::InsufficientData))
        .collect::<Result<_, _>>()?;
    let w = exponents.len();
    if window_tail == 0 || errors.len() <= w {
        return Err(Error::InsufficientData);
    }
    let floor = noise_floor(&errors[0]);
    let usable = |e: &R| e.abs() > floor;
    let mut deviations = Vec::new();
    for k in (w - 1)..(errors.len() - 1) {
        let history = &errors[k + 1 - w..=k];
        if !usable(&errors[k + 1]) || !history.iter().all(usable) {
            continue;
        }
        let product = history
            .iter()
            .zip(&exponents)
            .fold(predicted.one_like(), |acc, (e, p)| acc * e.powi(*p as i32));
        let ratio = errors[k + 1].clone() / product;
        let deviation = if predicted.is_zero() {
            ratio.abs()
        } else {
            ((ratio - predicted.clone()) / predicted.clone()).abs()
        };
        deviations.push(deviation);
    }
    if deviations.len() < window_tail {
        return Err(Error::InsufficientData);
    }
    let tail = deviations.split_off(deviations.len() - window_tail);
    let first = tail[0].clone();
    Ok(tail.into_iter().fold(first, R::max_of))
}
