//! Barycentric weight families.
//!
//! Weights are never normalised. The iteration formulas are ratios, so a
//! common factor cancels, and unnormalised product weights keep the
//! Vandermonde-kernel identities exact.

use alloc::vec::Vec;

use crate::error::Error;
use crate::numerics::Real;

/// Separation below which two node values are treated as coincident:
/// `2^-(bits - 8) * max |v|`.
pub fn separation_threshold<R: Real>(values: &[R]) -> R {
    let Some(first) = values.first() else {
        return R::from_i64(0, crate::Precision::DOUBLE);
    };
    let scale = values
        .iter()
        .fold(first.zero_like(), |acc, v| acc.max_of(v.abs()));
    let bits = first.precision().bits() as i32;
    first.int(2).powi(8 - bits) * scale
}

/// First pair `(i, j)`, `i < j`, whose values are closer than the
/// separation threshold.
pub fn find_collision<R: Real>(values: &[R]) -> Option<(usize, usize)> {
    let threshold = separation_threshold(values);
    for j in 1..values.len() {
        for i in 0..j {
            if (values[i].clone() - values[j].clone()).abs() <= threshold {
                return Some((i, j));
            }
        }
    }
    None
}

/// Pairwise-distinct, finite node coordinates (either the `x_i` or the `f_i`
/// of a memory window).
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSet<R> {
    values: Vec<R>,
}

impl<R: Real> NodeSet<R> {
    pub fn new(values: Vec<R>) -> Result<Self, Error> {
        if values.is_empty() {
            return Err(Error::InvalidConfig("node set is empty"));
        }
        if let Some((first, second)) = find_collision(&values) {
            return Err(Error::DegenerateNodes { first, second });
        }
        Ok(NodeSet { values })
    }

    pub fn values(&self) -> &[R] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Plain barycentric weights `ω_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSet<R> {
    omega: Vec<R>,
}

impl<R: Real> WeightSet<R> {
    pub fn from_values(omega: Vec<R>) -> Self {
        WeightSet { omega }
    }

    pub fn omega(&self) -> &[R] {
        &self.omega
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

/// Weights `(λ_i, γ_i)` of a barycentric interpolant that also matches first
/// derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteWeightSet<R> {
    lambda: Vec<R>,
    gamma: Vec<R>,
}

impl<R: Real> HermiteWeightSet<R> {
    pub fn from_values(lambda: Vec<R>, gamma: Vec<R>) -> Self {
        assert_eq!(lambda.len(), gamma.len(), "λ and γ lengths differ");
        HermiteWeightSet { lambda, gamma }
    }

    pub fn lambda(&self) -> &[R] {
        &self.lambda
    }

    pub fn gamma(&self) -> &[R] {
        &self.gamma
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }
}

/// `ω_i = Π_{j≠i} 1/(v_i − v_j)`: the Vandermonde-kernel weights, which
/// make the barycentric form the interpolating polynomial in `v`.
pub fn omega_product<R: Real>(nodes: &NodeSet<R>) -> WeightSet<R> {
    let v = nodes.values();
    let omega = (0..v.len())
        .map(|i| {
            let mut product = v[i].one_like();
            for (j, vj) in v.iter().enumerate() {
                if j != i {
                    product = product * (v[i].clone() - vj.clone());
                }
            }
            v[i].one_like() / product
        })
        .collect();
    WeightSet { omega }
}

/// α-shifted weights over f-nodes: the newest value `f_n` enters the other
/// weights as `α f_n`. `α = 1` reproduces [`omega_product`].
pub fn omega_alpha<R: Real>(f_nodes: &NodeSet<R>, alpha: &R) -> Result<WeightSet<R>, Error> {
    let f = f_nodes.values();
    let n = f.len() - 1;
    let shifted = alpha.clone() * f[n].clone();
    let threshold = separation_threshold(f);
    let nonzero = |value: R, i: usize, j: usize| -> Result<R, Error> {
        if value.abs() <= threshold {
            Err(Error::DegenerateNodes {
                first: i.min(j),
                second: i.max(j),
            })
        } else {
            Ok(value)
        }
    };
    let mut omega = Vec::with_capacity(f.len());
    for i in 0..n {
        let mut product = f[i].one_like();
        for (j, fj) in f.iter().enumerate() {
            if j == n {
                product = product * nonzero(f[i].clone() - shifted.clone(), i, n)?;
            } else if j != i {
                product = product * (f[i].clone() - fj.clone());
            }
        }
        omega.push(f[i].one_like() / product);
    }
    let mut product = f[n].one_like();
    for (j, fj) in f.iter().enumerate().take(n) {
        product = product * nonzero(shifted.clone() - fj.clone(), j, n)?;
    }
    omega.push(f[n].one_like() / product);
    Ok(WeightSet { omega })
}

/// Squared-product Hermite weights over arbitrary nodes:
/// `λ_i = Π_{j≠i} (v_i − v_j)^-2`, `γ_i = −2 λ_i Σ_{j≠i} 1/(v_i − v_j)`.
///
/// These are the partial-fraction coefficients of `Π (z − v_i)^-2`, so the
/// Hermite interpolant built from them is polynomial in `v`.
pub fn hermite_product<R: Real>(nodes: &NodeSet<R>) -> HermiteWeightSet<R> {
    let v = nodes.values();
    let mut lambda = Vec::with_capacity(v.len());
    let mut gamma = Vec::with_capacity(v.len());
    for i in 0..v.len() {
        let mut product = v[i].one_like();
        let mut reciprocal_sum = v[i].zero_like();
        for (j, vj) in v.iter().enumerate() {
            if j != i {
                let d = v[i].clone() - vj.clone();
                product = product * d.clone() * d.clone();
                reciprocal_sum = reciprocal_sum + v[i].one_like() / d;
            }
        }
        let l = v[i].one_like() / product;
        gamma.push(-(v[i].int(2) * l.clone() * reciprocal_sum));
        lambda.push(l);
    }
    HermiteWeightSet { lambda, gamma }
}

/// Hermite weights over f-nodes (inverse interpolation, polynomial in `f`).
pub fn hermite_f<R: Real>(f_nodes: &NodeSet<R>) -> HermiteWeightSet<R> {
    hermite_product(f_nodes)
}

/// Hermite weights over x-nodes scaled by the sampled slopes:
/// `λ_i = f_i′ Π_{j≠i} (x_i − x_j)^-2`, `γ_i = −(2 λ_i / f_i′) Σ_{j≠i} 1/(x_i − x_j)`.
pub fn hermite_x<R: Real>(
    x_nodes: &NodeSet<R>,
    f_primes: &[R],
) -> Result<HermiteWeightSet<R>, Error> {
    if f_primes.len() != x_nodes.len() {
        return Err(Error::InvalidConfig("one derivative per node is required"));
    }
    if let Some(index) = f_primes.iter().position(|d| d.is_zero()) {
        return Err(Error::ZeroDerivative { index });
    }
    let base = hermite_product(x_nodes);
    // The slope cancels from γ_i, leaving the squared-product value.
    let lambda = base
        .lambda
        .iter()
        .zip(f_primes)
        .map(|(l, d)| l.clone() * d.clone())
        .collect();
    Ok(HermiteWeightSet {
        lambda,
        gamma: base.gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{BigReal, Precision};
    use alloc::vec;

    fn prec() -> Precision {
        Precision::new(256).unwrap()
    }

    fn r(v: i64) -> BigReal {
        BigReal::from_i64(v, prec())
    }

    fn ratio(n: i64, d: i64) -> BigReal {
        r(n) / r(d)
    }

    fn close(a: &BigReal, b: &BigReal) -> bool {
        (a.clone() - b.clone()).abs() <= b.abs() * BigReal::pow10(-70, prec())
    }

    fn nodes(values: &[i64]) -> NodeSet<BigReal> {
        NodeSet::new(values.iter().map(|&v| r(v)).collect()).unwrap()
    }

    #[test]
    fn product_weights_by_hand() {
        assert_eq!(omega_product(&nodes(&[0, 1])).omega(), &[r(-1), r(1)]);
        assert_eq!(
            omega_product(&nodes(&[0, 1, 3])).omega(),
            &[ratio(1, 3), ratio(-1, 2), ratio(1, 6)]
        );
        let w = omega_product(&nodes(&[0, 1, 2]));
        assert_eq!(w.omega(), &[ratio(1, 2), r(-1), ratio(1, 2)]);
        let v = [r(0), r(1), r(2)];
        let moment = |k: i32| {
            w.omega()
                .iter()
                .zip(&v)
                .fold(r(0), |acc, (o, x)| acc + o.clone() * x.powi(k))
        };
        assert_eq!(moment(0), r(0));
        assert_eq!(moment(1), r(0));
        assert_eq!(moment(2), r(1));
    }

    #[test]
    fn duplicate_nodes_are_rejected() {
        let err = NodeSet::new(vec![r(1), r(2), r(1)]).unwrap_err();
        assert_eq!(
            err,
            Error::DegenerateNodes {
                first: 0,
                second: 2
            }
        );
        let almost = r(1) + BigReal::unit_roundoff(prec());
        assert!(NodeSet::new(vec![r(1), almost]).is_err());
        assert!(NodeSet::<BigReal>::new(vec![]).is_err());
    }

    #[test]
    fn alpha_one_is_the_product_form() {
        let f = NodeSet::new(vec![ratio(-3, 2), ratio(1, 7), r(5), ratio(2, 3)]).unwrap();
        assert_eq!(omega_alpha(&f, &r(1)).unwrap(), omega_product(&f));
    }

    #[test]
    fn alpha_zero_by_hand() {
        assert_eq!(
            omega_alpha(&nodes(&[1, 2]), &r(0)).unwrap().omega(),
            &[r(1), r(-1)]
        );
        // ω_0 = 1/((1−0)(1−2)), ω_1 = 1/((2−0)(2−1)), ω_2 = 1/((0−1)(0−2))
        assert_eq!(
            omega_alpha(&nodes(&[1, 2, 4]), &r(0)).unwrap().omega(),
            &[r(-1), ratio(1, 2), ratio(1, 2)]
        );
    }

    #[test]
    fn alpha_rejects_vanishing_factor() {
        // f_0 = α f_n with α = 1/2
        let err = omega_alpha(&nodes(&[1, 2]), &ratio(1, 2)).unwrap_err();
        assert!(matches!(err, Error::DegenerateNodes { .. }));
    }

    #[test]
    fn hermite_x_by_hand() {
        let w = hermite_x(&nodes(&[0, 1]), &[r(1), r(1)]).unwrap();
        assert_eq!(w.lambda(), &[r(1), r(1)]);
        assert_eq!(w.gamma(), &[r(2), r(-2)]);
        let w = hermite_x(&nodes(&[0, 1]), &[r(2), r(3)]).unwrap();
        assert_eq!(w.lambda(), &[r(2), r(3)]);
        assert_eq!(w.gamma(), &[r(2), r(-2)]);
        let single = hermite_x(&nodes(&[7]), &[r(5)]).unwrap();
        assert_eq!(single.lambda(), &[r(5)]);
        assert_eq!(single.gamma(), &[r(0)]);
        assert_eq!(
            hermite_x(&nodes(&[0, 1]), &[r(1), r(0)]).unwrap_err(),
            Error::ZeroDerivative { index: 1 }
        );
    }

    #[test]
    fn hermite_f_by_hand() {
        let w = hermite_f(&nodes(&[1, 2]));
        assert_eq!(w.lambda(), &[r(1), r(1)]);
        assert_eq!(w.gamma(), &[r(2), r(-2)]);
        let w = hermite_f(&nodes(&[0, 1, 3]));
        assert!(close(&w.lambda()[0], &ratio(1, 9)));
        assert!(close(&w.gamma()[0], &ratio(8, 27)));
    }

    #[test]
    fn squared_partial_fractions_at_probe() {
        let w = hermite_f(&nodes(&[1, 2]));
        let z = r(5);
        let sum = [r(1), r(2)].iter().enumerate().fold(r(0), |acc, (i, fi)| {
            let d = z.clone() - fi.clone();
            acc + (w.lambda()[i].clone() + w.gamma()[i].clone() * d.clone()) / (d.clone() * d)
        });
        assert!(close(&sum, &ratio(1, 144)));
    }

    #[test]
    fn f64_backend_works() {
        let w = omega_product(&NodeSet::new(vec![0.0, 1.0, 3.0]).unwrap());
        assert!((w.omega()[2] - 1.0 / 6.0).abs() < 1e-15);
    }
}
