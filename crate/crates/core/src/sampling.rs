use rand::Rng;

/// Draws an index from a normalized probability vector.
pub(crate) fn draw<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the cumulative total: take the last non-zero entry
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}
