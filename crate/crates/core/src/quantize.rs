//! Integer quantizers.
//!
//! Normal agents push every convex combination through a quantizer before
//! committing it. The probabilistic kind rounds to an adjacent integer with
//! probabilities chosen so the result is unbiased; the deterministic floor
//! and ceil kinds replace the coin with a fixed direction and are what the
//! freezing counterexamples rely on.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantizerKind {
    Probabilistic,
    Floor,
    Ceil,
}

/// Rounds `y` to an adjacent integer.
///
/// The probabilistic kind draws exactly one uniform sample `u` in `[0, 1)`
/// and picks `⌊y⌋` when `u < ⌈y⌉ − y`, else `⌈y⌉`. Integer inputs and the
/// deterministic kinds consume no randomness, so trajectories that have
/// settled on integers replay bit-identically regardless of draw order.
pub fn quantize<R: Rng + ?Sized>(kind: QuantizerKind, y: f64, rng: &mut R) -> Result<i64> {
    if !y.is_finite() {
        return Err(Error::NonFinite);
    }
    let floor = y.floor();
    if floor < i64::MIN as f64 || y.ceil() >= i64::MAX as f64 {
        return Err(Error::OutOfRange(y));
    }
    if floor == y {
        return Ok(y as i64);
    }
    let lo = floor as i64;
    Ok(match kind {
        QuantizerKind::Floor => lo,
        QuantizerKind::Ceil => lo + 1,
        QuantizerKind::Probabilistic => {
            let p_floor = y.ceil() - y;
            let u: f64 = rng.random();
            if u < p_floor {
                lo
            } else {
                lo + 1
            }
        }
    })
}

/// Exact twin of [`quantize`] for the rational `num / den`.
///
/// State updates are ratios of integers; evaluating them here avoids the
/// float detour entirely. Draw convention and draw count match [`quantize`],
/// so the two can share one stream.
pub fn quantize_ratio<R: Rng + ?Sized>(
    kind: QuantizerKind,
    num: i128,
    den: i128,
    rng: &mut R,
) -> Result<i64> {
    assert!(den != 0, "quantize_ratio with zero denominator");
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    let floor = num.div_euclid(den);
    let rem = num.rem_euclid(den);
    let to_i64 = |v: i128| {
        i64::try_from(v).map_err(|_| Error::OutOfRange(num as f64 / den as f64))
    };
    if rem == 0 {
        return to_i64(floor);
    }
    match kind {
        QuantizerKind::Floor => to_i64(floor),
        QuantizerKind::Ceil => to_i64(floor + 1),
        QuantizerKind::Probabilistic => {
            let p_floor = (den - rem) as f64 / den as f64;
            let u: f64 = rng.random();
            to_i64(if u < p_floor { floor } else { floor + 1 })
        }
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn deterministic_kinds() {
        let mut r = rng(0);
        assert_eq!(quantize(QuantizerKind::Floor, 2.3, &mut r).unwrap(), 2);
        assert_eq!(quantize(QuantizerKind::Ceil, 2.3, &mut r).unwrap(), 3);
        assert_eq!(quantize(QuantizerKind::Floor, -1.5, &mut r).unwrap(), -2);
        assert_eq!(quantize(QuantizerKind::Ceil, -1.5, &mut r).unwrap(), -1);
    }

    #[test]
    fn integers_pass_through_every_kind() {
        for kind in [QuantizerKind::Probabilistic, QuantizerKind::Floor, QuantizerKind::Ceil] {
            for y in [-3.0, 0.0, 2.0, 9.0e15] {
                assert_eq!(quantize(kind, y, &mut rng(1)).unwrap(), y as i64);
            }
        }
    }

    #[test]
    fn probabilistic_hits_both_neighbors() {
        let mut r = rng(2);
        let mut seen = [false; 2];
        for _ in 0..200 {
            match quantize(QuantizerKind::Probabilistic, 2.3, &mut r).unwrap() {
                2 => seen[0] = true,
                3 => seen[1] = true,
                other => panic!("rounded 2.3 to {other}"),
            }
        }
        assert_eq!(seen, [true, true]);
    }

    #[test]
    fn probabilistic_frequencies_track_fraction() {
        // y = 2.3 rounds down w.p. 0.7; a loose window suffices here, the
        // tight unbiasedness bound is enforced by the acceptance suite.
        let mut r = rng(3);
        let n = 20_000;
        let downs = (0..n)
            .filter(|_| quantize(QuantizerKind::Probabilistic, 2.3, &mut r).unwrap() == 2)
            .count();
        let rate = downs as f64 / n as f64;
        assert!((rate - 0.7).abs() < 0.02, "down-rate {rate}");
    }

    #[test]
    fn integer_input_consumes_no_draws() {
        let mut a = rng(4);
        let untouched = rng(4);
        quantize(QuantizerKind::Probabilistic, 5.0, &mut a).unwrap();
        assert_eq!(a, untouched);
    }

    #[test]
    fn non_integer_consumes_exactly_one_draw() {
        let mut a = rng(5);
        let mut b = rng(5);
        quantize(QuantizerKind::Probabilistic, 5.25, &mut a).unwrap();
        let _: f64 = b.random();
        assert_eq!(a, b);
    }

    #[test]
    fn deterministic_kinds_consume_no_draws() {
        for kind in [QuantizerKind::Floor, QuantizerKind::Ceil] {
            let mut a = rng(6);
            let untouched = rng(6);
            quantize(kind, 5.25, &mut a).unwrap();
            assert_eq!(a, untouched);
        }
    }

    #[test]
    fn same_seed_same_result() {
        for y in [0.1, 0.5, 2.3, -1.5] {
            let a = quantize(QuantizerKind::Probabilistic, y, &mut rng(7)).unwrap();
            let b = quantize(QuantizerKind::Probabilistic, y, &mut rng(7)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let mut r = rng(8);
        assert_eq!(quantize(QuantizerKind::Floor, f64::NAN, &mut r), Err(Error::NonFinite));
        assert_eq!(
            quantize(QuantizerKind::Floor, f64::INFINITY, &mut r),
            Err(Error::NonFinite)
        );
        assert!(matches!(
            quantize(QuantizerKind::Floor, 1.0e300, &mut r),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn ratio_matches_float_on_exact_inputs() {
        // Denominators that divide a power of two make num/den exact in f64,
        // so both paths must agree draw for draw.
        for (num, den) in [(5i128, 2i128), (-3, 4), (7, 8), (11, 1), (-9, 2)] {
            for kind in [QuantizerKind::Probabilistic, QuantizerKind::Floor, QuantizerKind::Ceil] {
                let via_ratio = quantize_ratio(kind, num, den, &mut rng(9)).unwrap();
                let via_float =
                    quantize(kind, num as f64 / den as f64, &mut rng(9)).unwrap();
                assert_eq!(via_ratio, via_float, "{num}/{den} {kind:?}");
            }
        }
    }

    #[test]
    fn ratio_normalizes_negative_denominator() {
        let mut r = rng(10);
        assert_eq!(quantize_ratio(QuantizerKind::Floor, 5, -2, &mut r).unwrap(), -3);
        assert_eq!(quantize_ratio(QuantizerKind::Ceil, 5, -2, &mut r).unwrap(), -2);
        assert_eq!(quantize_ratio(QuantizerKind::Floor, -4, -2, &mut r).unwrap(), 2);
    }

    #[test]
    fn ratio_integer_consumes_no_draws() {
        let mut a = rng(11);
        let untouched = rng(11);
        quantize_ratio(QuantizerKind::Probabilistic, 12, 4, &mut a).unwrap();
        assert_eq!(a, untouched);
    }

    #[test]
    fn ratio_overflow_is_reported() {
        let mut r = rng(12);
        assert!(matches!(
            quantize_ratio(QuantizerKind::Floor, i128::from(i64::MAX) + 1, 1, &mut r),
            Err(Error::OutOfRange(_))
        ));
    }

    proptest! {
        #[test]
        fn result_is_adjacent_integer(y in -1.0e9..1.0e9f64, seed: u64, kind_idx in 0usize..3) {
            let kind = [QuantizerKind::Probabilistic, QuantizerKind::Floor, QuantizerKind::Ceil]
                [kind_idx];
            let q = quantize(kind, y, &mut rng(seed)).unwrap();
            prop_assert!(q == y.floor() as i64 || q == y.ceil() as i64);
            prop_assert!((q as f64 - y).abs() < 1.0);
            match kind {
                QuantizerKind::Floor => prop_assert_eq!(q, y.floor() as i64),
                QuantizerKind::Ceil => prop_assert_eq!(q, y.ceil() as i64),
                QuantizerKind::Probabilistic => {}
            }
        }

        #[test]
        fn ratio_result_is_adjacent(num in -1_000_000i128..1_000_000, den in 1i128..18, seed: u64) {
            let q = quantize_ratio(QuantizerKind::Probabilistic, num, den, &mut rng(seed)).unwrap();
            let floor = num.div_euclid(den);
            let hi = if num.rem_euclid(den) == 0 { floor } else { floor + 1 };
            prop_assert!(i128::from(q) == floor || i128::from(q) == hi);
        }
    }
}
