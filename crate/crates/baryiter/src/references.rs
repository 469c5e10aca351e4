//! Reference solutions shipped as a text sidecar.
//!
//! One record per line, `name<TAB>decimal`, 320 significant digits. Values
//! are parsed at the requested precision; problems missing from the file are
//! refined on the spot.

use baryiter_core::corpus::{self, Problem};
use baryiter_core::{BigReal, Error, Precision, Real};

pub const SIDECAR: &str = include_str!("../data/references.tsv");

/// Significant digits written per record.
pub const DIGITS: usize = 320;

pub fn lookup(name: &str) -> Option<&'static str> {
    SIDECAR
        .lines()
        .filter_map(|line| line.split_once('\t'))
        .find(|(n, _)| *n == name)
        .map(|(_, value)| value.trim())
}

/// Reference for a corpus problem at `precision`.
pub fn reference(problem: &Problem, precision: Precision) -> Result<BigReal, Error> {
    match lookup(problem.name()) {
        Some(text) => Ok(BigReal::parse_decimal(text, precision)?),
        None => {
            let r = corpus::reference_root(problem)?;
            Ok(BigReal::parse_decimal(&r.to_decimal(DIGITS), precision)?)
        }
    }
}

/// The sidecar contents for the current corpus, recomputed from scratch.
pub fn render() -> Result<String, Error> {
    let mut out = String::new();
    for problem in corpus::list_problems() {
        let r = corpus::reference_root(&problem)?;
        out.push_str(problem.name());
        out.push('\t');
        out.push_str(&r.to_decimal(DIGITS));
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_problem_has_a_record() {
        for problem in corpus::list_problems() {
            assert!(lookup(problem.name()).is_some(), "{}", problem.name());
        }
    }

    #[test]
    fn sidecar_matches_recomputation() {
        assert_eq!(SIDECAR, render().unwrap());
    }

    #[test]
    fn records_satisfy_the_residual_bound() {
        let tol = BigReal::parse_decimal("1e-300", Precision::REFERENCE).unwrap();
        for problem in corpus::list_problems() {
            let r = reference(&problem, Precision::REFERENCE).unwrap();
            assert!(
                problem.residual(&r).unwrap().abs() < tol,
                "{}",
                problem.name()
            );
        }
    }
}
