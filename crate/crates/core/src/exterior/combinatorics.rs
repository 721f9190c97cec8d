//! Multi-index bookkeeping: lexicographic enumeration and ranking of strictly
//! increasing index tuples, permutation signs, and dense contraction tables.

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All strictly increasing `k`-tuples from `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // rightmost position that can still advance
        let mut pos = k;
        while pos > 0 {
            pos -= 1;
            if cur[pos] < n - k + pos {
                cur[pos] += 1;
                for t in pos + 1..k {
                    cur[t] = cur[t - 1] + 1;
                }
                break;
            }
            if pos == 0 {
                return out;
            }
        }
        if k == 0 {
            return out;
        }
    }
}

/// Lexicographic rank of a strictly increasing tuple among `combinations(n, k)`.
pub fn rank(combo: &[usize], n: usize) -> usize {
    let k = combo.len();
    let mut r = 0;
    let mut start = 0;
    for (t, &c) in combo.iter().enumerate() {
        for j in start..c {
            r += binomial(n - 1 - j, k - 1 - t);
        }
        start = c + 1;
    }
    r
}

/// Sorts `idx` in place and returns the sign of the sorting permutation, or
/// `None` when an index repeats (the alternating product vanishes).
pub fn sort_with_sign(idx: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    // insertion sort, counting transpositions
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// Sign of the shuffle that sorts `a ++ b` when `a` and `b` are disjoint
/// increasing tuples.
pub fn shuffle_sign(a: &[usize], b: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for &x in a {
        inversions += b.iter().filter(|&&y| y < x).count();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Precomputed interior-product pattern from degree `k` to `k - 1` on `R^n`,
/// stored flat: for every source tuple and every slot, the removed index,
/// the rank of the remaining tuple, and the sign `(-1)^slot`.
#[derive(Clone, Debug)]
pub struct ContractionTable {
    pub n: usize,
    pub k: usize,
    entries: Vec<(u32, u32, u32, f64)>,
}

impl ContractionTable {
    pub fn new(n: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= n);
        let mut entries = Vec::with_capacity(binomial(n, k) * k);
        for (src, combo) in combinations(n, k).iter().enumerate() {
            for slot in 0..k {
                let mut rest = combo.clone();
                let removed = rest.remove(slot);
                let sign = if slot % 2 == 0 { 1.0 } else { -1.0 };
                entries.push((src as u32, removed as u32, rank(&rest, n) as u32, sign));
            }
        }
        Self { n, k, entries }
    }

    /// `out = v ⌟ src` for dense coefficient arrays.
    #[inline]
    pub fn contract(&self, v: &[f64], src: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for &(s, i, t, sign) in &self.entries {
            let c = src[s as usize];
            if c != 0.0 {
                out[t as usize] += sign * v[i as usize] * c;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_matches_enumeration() {
        for n in 1..=8 {
            for k in 0..=n {
                let all = combinations(n, k);
                assert_eq!(all.len(), binomial(n, k));
                for (i, c) in all.iter().enumerate() {
                    assert_eq!(rank(c, n), i);
                }
            }
        }
    }

    #[test]
    fn sort_sign_detects_parity_and_repeats() {
        let mut a = vec![2, 0, 1];
        assert_eq!(sort_with_sign(&mut a), Some(1.0));
        assert_eq!(a, vec![0, 1, 2]);
        let mut b = vec![1, 0];
        assert_eq!(sort_with_sign(&mut b), Some(-1.0));
        let mut c = vec![3, 1, 3];
        assert_eq!(sort_with_sign(&mut c), None);
    }

    #[test]
    fn shuffle_sign_small_cases() {
        assert_eq!(shuffle_sign(&[0, 1], &[2, 3]), 1.0);
        assert_eq!(shuffle_sign(&[1], &[0]), -1.0);
        assert_eq!(shuffle_sign(&[0, 2], &[1, 3]), -1.0);
    }
}
