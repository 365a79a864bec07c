use crate::error::{Error, Result};
use crate::geometry::Partition;

pub const MAX_ENUM_POINTS: usize = 14;
pub const MAX_ENUM_PARTS: usize = 4;

/// Number of partitions of `n` items into at most `k` nonempty parts.
pub fn partition_count(n: usize, k: usize) -> u128 {
    if n == 0 {
        return 1;
    }
    // Stirling numbers of the second kind by the usual recurrence.
    let mut s = vec![0u128; k + 1];
    s[0] = 1;
    for _ in 0..n {
        for j in (1..=k).rev() {
            s[j] = j as u128 * s[j] + s[j - 1];
        }
        s[0] = 0;
    }
    s[1..].iter().sum()
}

pub fn check_budget(n: usize, k: usize) -> Result<()> {
    if n > MAX_ENUM_POINTS {
        return Err(Error::Budget {
            what: "partition enumeration points",
            required: n as u128,
            allowed: MAX_ENUM_POINTS as u128,
        });
    }
    if k > MAX_ENUM_PARTS {
        return Err(Error::Budget {
            what: "partition enumeration parts",
            required: k as u128,
            allowed: MAX_ENUM_PARTS as u128,
        });
    }
    Ok(())
}

/// Restricted-growth strings of length `n` with values below `k`, in
/// lexicographic order. Each string is one partition into at most `k` parts.
#[derive(Clone, Debug)]
pub struct RgsIter {
    k: usize,
    cur: Vec<usize>,
    started: bool,
    done: bool,
}

impl RgsIter {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            k: k.max(1),
            cur: vec![0; n],
            started: false,
            done: false,
        }
    }

    /// Advances to the next string; returns it, or `None` when exhausted.
    pub fn next_rgs(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.cur);
        }
        let n = self.cur.len();
        let mut prefix_max = vec![0usize; n];
        for i in 1..n {
            prefix_max[i] = prefix_max[i - 1].max(self.cur[i - 1]);
        }
        for i in (1..n).rev() {
            let cap = (prefix_max[i] + 1).min(self.k - 1);
            if self.cur[i] < cap {
                self.cur[i] += 1;
                for v in &mut self.cur[i + 1..] {
                    *v = 0;
                }
                return Some(&self.cur);
            }
        }
        self.done = true;
        None
    }
}

pub struct PartitionIter {
    inner: RgsIter,
    k: usize,
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        let k = self.k;
        self.inner.next_rgs().map(|a| Partition {
            assignment: a.to_vec(),
            parts: k,
        })
    }
}

/// Every partition of `n` items into at most `k` nonempty parts, once each.
pub fn enumerate_partitions(n: usize, k: usize) -> Result<PartitionIter> {
    check_budget(n, k)?;
    Ok(PartitionIter {
        inner: RgsIter::new(n, k),
        k: k.max(1),
    })
}
