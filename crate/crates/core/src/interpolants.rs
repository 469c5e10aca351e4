//! Evaluation of barycentric interpolants, direct `f[x]` and inverse `x[f]`.
//!
//! These evaluators are not used by the iteration loops; they exist so the
//! derivative estimates can be checked against the interpolants they come
//! from, and for plotting.

use alloc::vec::Vec;

use crate::error::Error;
use crate::numerics::Real;
use crate::weights::{separation_threshold, HermiteWeightSet, WeightSet};

/// One evaluated point. For optimisation the roles are `(x, φ, φ′)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample<R> {
    pub x: R,
    pub f: R,
    pub f_prime: Option<R>,
}

impl<R: Real> Sample<R> {
    pub fn new(x: R, f: R) -> Self {
        Sample {
            x,
            f,
            f_prime: None,
        }
    }

    pub fn with_slope(x: R, f: R, f_prime: R) -> Self {
        Sample {
            x,
            f,
            f_prime: Some(f_prime),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.f.is_finite() && self.f_prime.as_ref().map_or(true, R::is_finite)
    }

    pub(crate) fn slope(&self) -> Result<&R, Error> {
        self.f_prime
            .as_ref()
            .ok_or(Error::MissingDerivative { order: 1 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// `f` as a function of `x`.
    Direct,
    /// `x` as a function of `f`.
    Inverse,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InterpolantWeights<R> {
    Plain(WeightSet<R>),
    Hermite(HermiteWeightSet<R>),
}

impl<R: Real> InterpolantWeights<R> {
    fn len(&self) -> usize {
        match self {
            InterpolantWeights::Plain(w) => w.len(),
            InterpolantWeights::Hermite(w) => w.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterpolantSpec<R> {
    samples: Vec<Sample<R>>,
    weights: InterpolantWeights<R>,
    orientation: Orientation,
}

impl<R: Real> InterpolantSpec<R> {
    pub fn new(
        samples: Vec<Sample<R>>,
        weights: InterpolantWeights<R>,
        orientation: Orientation,
    ) -> Result<Self, Error> {
        if samples.is_empty() {
            return Err(Error::InvalidConfig(
                "interpolant needs at least one sample",
            ));
        }
        if weights.len() != samples.len() {
            return Err(Error::InvalidConfig("one weight per sample is required"));
        }
        if !samples.iter().all(Sample::is_finite) {
            return Err(Error::InvalidConfig("samples must be finite"));
        }
        Ok(InterpolantSpec {
            samples,
            weights,
            orientation,
        })
    }

    pub fn plain(
        samples: Vec<Sample<R>>,
        weights: WeightSet<R>,
        orientation: Orientation,
    ) -> Result<Self, Error> {
        Self::new(samples, InterpolantWeights::Plain(weights), orientation)
    }

    pub fn hermite(
        samples: Vec<Sample<R>>,
        weights: HermiteWeightSet<R>,
        orientation: Orientation,
    ) -> Result<Self, Error> {
        Self::new(samples, InterpolantWeights::Hermite(weights), orientation)
    }

    pub fn samples(&self) -> &[Sample<R>] {
        &self.samples
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// (node, value) coordinates in the interpolant's orientation.
    fn coordinates(&self, sample: &Sample<R>) -> (R, R) {
        match self.orientation {
            Orientation::Direct => (sample.x.clone(), sample.f.clone()),
            Orientation::Inverse => (sample.f.clone(), sample.x.clone()),
        }
    }

    /// Index of the node within the separation threshold of `t`, if any.
    fn node_near(&self, t: &R) -> Option<usize> {
        let nodes: Vec<R> = self.samples.iter().map(|s| self.coordinates(s).0).collect();
        let mut scale = nodes.clone();
        scale.push(t.clone());
        let threshold = separation_threshold(&scale);
        nodes
            .iter()
            .position(|v| (t.clone() - v.clone()).abs() <= threshold)
    }
}

/// Value of `Σ ω_i y_i/(t − v_i) / Σ ω_i/(t − v_i)`.
///
/// Within the node-separation threshold of a node the paired coordinate is
/// returned directly.
pub fn eval_plain<R: Real>(spec: &InterpolantSpec<R>, t: &R) -> Result<R, Error> {
    let InterpolantWeights::Plain(weights) = &spec.weights else {
        return Err(Error::InvalidConfig("plain evaluation needs plain weights"));
    };
    if let Some(i) = spec.node_near(t) {
        return Ok(spec.coordinates(&spec.samples[i]).1);
    }
    let mut numerator = t.zero_like();
    let mut denominator = t.zero_like();
    for (sample, omega) in spec.samples.iter().zip(weights.omega()) {
        let (node, value) = spec.coordinates(sample);
        let term = omega.clone() / (t.clone() - node);
        numerator = numerator + term.clone() * value;
        denominator = denominator + term;
    }
    if denominator.is_zero() {
        return Err(Error::SingularDenominator);
    }
    Ok(numerator / denominator)
}

/// Value of the Hermite barycentric interpolant
/// `Σ [λ_i y_i + (γ_i y_i + λ_i y_i′) d_i]/d_i² / Σ [λ_i + γ_i d_i]/d_i²`
/// with `d_i = t − v_i`; `y′ = f′` (direct) or `1/f′` (inverse).
pub fn eval_hermite<R: Real>(spec: &InterpolantSpec<R>, t: &R) -> Result<R, Error> {
    let InterpolantWeights::Hermite(weights) = &spec.weights else {
        return Err(Error::InvalidConfig(
            "Hermite evaluation needs Hermite weights",
        ));
    };
    let mut slopes = Vec::with_capacity(spec.samples.len());
    for (index, sample) in spec.samples.iter().enumerate() {
        let d = sample.slope()?;
        slopes.push(match spec.orientation {
            Orientation::Direct => d.clone(),
            Orientation::Inverse => {
                if d.is_zero() {
                    return Err(Error::ZeroDerivative { index });
                }
                d.one_like() / d.clone()
            }
        });
    }
    if let Some(i) = spec.node_near(t) {
        return Ok(spec.coordinates(&spec.samples[i]).1);
    }
    let mut numerator = t.zero_like();
    let mut denominator = t.zero_like();
    for (i, sample) in spec.samples.iter().enumerate() {
        let (node, value) = spec.coordinates(sample);
        let lambda = weights.lambda()[i].clone();
        let gamma = weights.gamma()[i].clone();
        let d = t.clone() - node;
        let d2 = d.clone() * d.clone();
        numerator = numerator
            + (lambda.clone() * value.clone()
                + (gamma.clone() * value + lambda.clone() * slopes[i].clone()) * d.clone())
                / d2.clone();
        denominator = denominator + (lambda + gamma * d) / d2;
    }
    if denominator.is_zero() {
        return Err(Error::SingularDenominator);
    }
    Ok(numerator / denominator)
}
