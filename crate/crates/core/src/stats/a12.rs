use crate::error::{Error, Result};

/// Vargha-Delaney A12: the probability that a value drawn from `xs` exceeds
/// one drawn from `ys`, counting ties as half.
pub fn a12(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Empty("A12 sample"));
    }
    let mut sorted = ys.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut twice_wins: u64 = 0;
    for &x in xs {
        let below = sorted.partition_point(|&y| y < x);
        let not_above = sorted.partition_point(|&y| y <= x);
        twice_wins += 2 * below as u64 + (not_above - below) as u64;
    }
    Ok(twice_wins as f64 / (2 * xs.len() * ys.len()) as f64)
}

/// Direction-free effect magnitude, `max(A12, 1 − A12)`.
pub fn a12_effect(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let a = a12(xs, ys)?;
    Ok(a.max(1.0 - a))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(a12(&[5.0, 6.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(a12(&[3.0], &[3.0]).unwrap(), 0.5);
        // pairs: (1,1) tie, (1,2) less, (2,1) greater, (2,2) tie
        assert_eq!(a12(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.5);
        assert_eq!(a12(&[1.0], &[2.0]).unwrap(), 0.0);
        assert!(a12(&[], &[1.0]).is_err());
        assert_eq!(a12_effect(&[1.0], &[2.0]).unwrap(), 1.0);
    }

    fn small_ints() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec((0i32..8).prop_map(f64::from), 1..15)
    }

    proptest! {
        #[test]
        fn complementary(xs in small_ints(), ys in small_ints()) {
            let s = a12(&xs, &ys).unwrap() + a12(&ys, &xs).unwrap();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn invariant_under_monotone_transform(xs in small_ints(), ys in small_ints()) {
            let f = |v: &Vec<f64>| v.iter().map(|x| (x * 0.7).exp() - 3.0).collect::<Vec<_>>();
            prop_assert_eq!(a12(&xs, &ys).unwrap(), a12(&f(&xs), &f(&ys)).unwrap());
        }
    }
}
