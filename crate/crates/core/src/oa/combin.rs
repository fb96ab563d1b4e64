//! Lexicographic enumeration of t-subsets of `0..k`.

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

/// The `rank`-th t-subset of `0..k` in lexicographic order.
pub fn unrank(mut rank: u128, k: usize, t: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(t);
    let mut next = 0usize;
    for slot in 0..t {
        let remaining = (t - slot - 1) as u64;
        loop {
            let count = binomial((k - next - 1) as u64, remaining);
            if rank < count {
                break;
            }
            rank -= count;
            next += 1;
        }
        out.push(next);
        next += 1;
    }
    out
}

/// Advances to the lexicographic successor; `false` after the last subset.
pub fn next_subset(subset: &mut [usize], k: usize) -> bool {
    let t = subset.len();
    for i in (0..t).rev() {
        if subset[i] < k - t + i {
            subset[i] += 1;
            for j in i + 1..t {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(7, 4), 35);
        assert_eq!(binomial(31, 4), 31465);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(1295, 4), 116_641_700_245);
    }

    #[test]
    fn unrank_agrees_with_successor() {
        let (k, t) = (9, 4);
        let mut s: Vec<usize> = (0..t).collect();
        let mut rank = 0u128;
        loop {
            assert_eq!(unrank(rank, k, t), s);
            rank += 1;
            if !next_subset(&mut s, k) {
                break;
            }
        }
        assert_eq!(rank, binomial(9, 4));
    }
}
