//! Inter-annotator agreement.

use alloc::collections::BTreeMap;

use crate::{Error, Result};

/// Cohen's kappa from the contingency of two label sequences.
///
/// Undefined (an error) when chance agreement is 1, which happens when both
/// annotators used one and the same label throughout.
pub fn cohens_kappa<T: Ord>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("annotation labels"));
    }
    let n = a.len() as f64;
    let mut left: BTreeMap<&T, usize> = BTreeMap::new();
    let mut right: BTreeMap<&T, usize> = BTreeMap::new();
    let mut agree = 0usize;
    for (x, y) in a.iter().zip(b) {
        *left.entry(x).or_insert(0) += 1;
        *right.entry(y).or_insert(0) += 1;
        if x == y {
            agree += 1;
        }
    }
    let observed = agree as f64 / n;
    let expected: f64 = left
        .iter()
        .map(|(label, &ca)| ca as f64 / n * right.get(label).copied().unwrap_or(0) as f64 / n)
        .sum();
    if libm::fabs(1.0 - expected) < 1e-12 {
        return Err(Error::KappaUndefined);
    }
    Ok((observed - expected) / (1.0 - expected))
}
