//! Equality of eventually periodic infinite words `u·p^ω`.

/// Letter at position `i` of `prefix · period^ω`.
fn letter_at<T: Copy>(prefix: &[T], period: &[T], i: usize) -> T {
    if i < prefix.len() {
        prefix[i]
    } else {
        period[(i - prefix.len()) % period.len()]
    }
}

/// Length of a common prefix after which two eventually periodic words are
/// known to agree everywhere: past both pre-periods the words are periodic
/// with periods `p` and `q`, and two such words agreeing on `p + q` letters
/// are equal. `p·q` is added as a generous margin.
pub fn comparison_bound(prefix_a: usize, period_a: usize, prefix_b: usize, period_b: usize) -> usize {
    prefix_a.max(prefix_b) + period_a * period_b + period_a + period_b
}

/// Decides `prefix_a · period_a^ω = prefix_b · period_b^ω`. Both periods must
/// be non-empty.
pub fn eventually_periodic_eq<T: Copy + Eq>(prefix_a: &[T], period_a: &[T], prefix_b: &[T], period_b: &[T]) -> bool {
    assert!(!period_a.is_empty() && !period_b.is_empty(), "empty period");
    let n = comparison_bound(prefix_a.len(), period_a.len(), prefix_b.len(), period_b.len());
    (0..n).all(|i| letter_at(prefix_a, period_a, i) == letter_at(prefix_b, period_b, i))
}

/// `uv = vu` holds iff both are powers of a common word.
pub fn commute<T: Eq + Clone>(u: &[T], v: &[T]) -> bool {
    let mut uv = u.to_vec();
    uv.extend_from_slice(v);
    let mut vu = v.to_vec();
    vu.extend_from_slice(u);
    uv == vu
}

/// Shortest `z` with `w = z^k`.
pub fn primitive_root<T: Eq + Clone>(w: &[T]) -> Vec<T> {
    let n = w.len();
    for d in 1..=n {
        if n.is_multiple_of(d) && (d..n).all(|i| w[i] == w[i - d]) {
            return w[..d].to_vec();
        }
    }
    w.to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unary_and_shifted_words() {
        assert!(eventually_periodic_eq(b"a", b"a", b"", b"a"));
        assert!(!eventually_periodic_eq(b"b", b"ab", b"", b"a"));
        // a·(ba)^ω = (ab)^ω
        assert!(eventually_periodic_eq(b"a", b"ba", b"", b"ab"));
        assert!(eventually_periodic_eq(b"", b"abab", b"", b"ab"));
        assert!(!eventually_periodic_eq(b"", b"aab", b"", b"ab"));
    }

    #[test]
    fn levi_examples() {
        assert!(commute(b"abab", b"ab"));
        assert!(!commute(b"ab", b"ba"));
        assert_eq!(primitive_root(b"ababab"), b"ab".to_vec());
        assert_eq!(primitive_root(b"aba"), b"aba".to_vec());
    }

    proptest! {
        // Oracle: compare a long explicit expansion.
        #[test]
        fn agrees_with_long_expansion(
            pa in proptest::collection::vec(0u8..2, 0..4),
            qa in proptest::collection::vec(0u8..2, 1..4),
            pb in proptest::collection::vec(0u8..2, 0..4),
            qb in proptest::collection::vec(0u8..2, 1..4),
        ) {
            let expand = |p: &[u8], q: &[u8]| (0..200).map(|i| letter_at(p, q, i)).collect::<Vec<_>>();
            prop_assert_eq!(
                eventually_periodic_eq(&pa, &qa, &pb, &qb),
                expand(&pa, &qa) == expand(&pb, &qb)
            );
        }

        #[test]
        fn commuting_words_share_a_root(
            u in proptest::collection::vec(0u8..2, 1..6),
            v in proptest::collection::vec(0u8..2, 1..6),
        ) {
            if commute(&u, &v) {
                prop_assert_eq!(primitive_root(&u), primitive_root(&v));
            }
        }
    }
}
