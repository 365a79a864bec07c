//! Fixed-shape pairwise summation.
//!
//! The reduction tree depends only on the number of terms, so a streaming
//! accumulation and a slice reduction of the same sequence agree bit for bit.

/// Streaming pairwise accumulator. Behaves like a binary counter: after `n`
/// pushes the partial sums on the stack correspond to the set bits of `n`.
#[derive(Clone, Debug)]
pub struct PairwiseSum {
    stack: [f64; 64],
    len: usize,
    count: u64,
}

impl Default for PairwiseSum {
    fn default() -> Self {
        Self::new()
    }
}

impl PairwiseSum {
    pub fn new() -> Self {
        Self {
            stack: [0.0; 64],
            len: 0,
            count: 0,
        }
    }

    #[inline]
    pub fn push(&mut self, v: f64) {
        let mut s = v;
        let mut c = self.count;
        let mut len = self.len;
        while c & 1 == 1 {
            len -= 1;
            s = self.stack[len] + s;
            c >>= 1;
        }
        self.stack[len] = s;
        self.len = len + 1;
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn total(&self) -> f64 {
        if self.len == 0 {
            return 0.0;
        }
        let mut t = self.stack[self.len - 1];
        for i in (0..self.len - 1).rev() {
            t = self.stack[i] + t;
        }
        t
    }
}

impl Extend<f64> for PairwiseSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.push(v);
        }
    }
}

pub fn pairwise_sum(values: &[f64]) -> f64 {
    let mut acc = PairwiseSum::new();
    acc.extend(values.iter().copied());
    acc.total()
}

pub fn pairwise_sum_iter<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = PairwiseSum::new();
    acc.extend(iter);
    acc.total()
}

/// Sum after sorting the terms, so the result does not depend on term order.
pub fn canonical_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    pairwise_sum(&values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recursive(v: &[f64]) -> f64 {
        // Independent oracle: the same tree built top-down from the binary
        // decomposition of the length, largest power of two first.
        if v.is_empty() {
            return 0.0;
        }
        let n = v.len();
        let top = 1usize << (usize::BITS - 1 - n.leading_zeros());
        if top == n {
            if n == 1 {
                return v[0];
            }
            let h = n / 2;
            return recursive(&v[..h]) + recursive(&v[h..]);
        }
        recursive(&v[..top]) + recursive(&v[top..])
    }

    #[test]
    fn matches_top_down_tree() {
        for n in 0..70 {
            let v: Vec<f64> = (0..n).map(|i| 1.0 / (i as f64 + 1.0).powi(3) + 1e-7 * i as f64).collect();
            assert_eq!(pairwise_sum(&v).to_bits(), recursive(&v).to_bits(), "n={n}");
        }
    }

    #[test]
    fn canonical_is_order_free() {
        let v = vec![1e16, 1.0, -1e16, 3.5, 0.1, 0.2];
        let mut w = v.clone();
        w.reverse();
        assert_eq!(canonical_sum(v).to_bits(), canonical_sum(w).to_bits());
    }
}
