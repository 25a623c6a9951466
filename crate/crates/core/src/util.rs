use crate::Real;

#[inline]
pub(crate) fn real<R: Real>(x: f64) -> R {
    nalgebra::convert(x)
}

#[inline]
pub(crate) fn to_f64<R: Real>(x: R) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Pairwise (cascade) summation; result does not depend on thread scheduling.
pub(crate) fn pairwise_sum<R: Real>(xs: &[R]) -> R {
    match xs.len() {
        0 => R::zero(),
        1 => xs[0],
        n if n <= 8 => xs.iter().fold(R::zero(), |acc, &x| acc + x),
        n => {
            let (lo, hi) = xs.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// Groups sorted values into runs whose consecutive gaps are `<= threshold`.
/// Returns half-open index ranges into `sorted`.
pub(crate) fn group_sorted<R: Real>(sorted: &[R], threshold: R) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] > threshold {
            if i > start {
                groups.push(start..i);
            }
            start = i;
        }
    }
    groups
}
