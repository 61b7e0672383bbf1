use alloc::collections::BTreeMap;

use crate::error::Error;

/// Cohen's kappa between two annotators' aligned label lists.
pub fn cohens_kappa<T: Ord>(a1: &[T], a2: &[T]) -> Result<f64, Error> {
    if a1.len() != a2.len() {
        return Err(Error::LengthMismatch {
            left: a1.len(),
            right: a2.len(),
        });
    }
    if a1.is_empty() {
        return Err(Error::Empty("annotation lists"));
    }
    let n = a1.len() as f64;
    let mut m1: BTreeMap<&T, usize> = BTreeMap::new();
    let mut m2: BTreeMap<&T, usize> = BTreeMap::new();
    let mut agree = 0usize;
    for (x, y) in a1.iter().zip(a2) {
        *m1.entry(x).or_insert(0) += 1;
        *m2.entry(y).or_insert(0) += 1;
        if x == y {
            agree += 1;
        }
    }
    let p_o = agree as f64 / n;
    let p_e: f64 = m1
        .iter()
        .map(|(l, &c)| c as f64 * m2.get(l).copied().unwrap_or(0) as f64)
        .sum::<f64>()
        / (n * n);
    if p_e == 1.0 {
        return Ok(1.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}
