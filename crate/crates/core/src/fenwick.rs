//! Binary indexed occupancy tree over `1..=n`.
//!
//! Each slot holds 0 or 1. Supports prefix counts, point updates and
//! selection of the k-th occupied slot, all in O(log n).

#[derive(Clone, Debug)]
pub struct OccupancyTree {
    // 1-based; tree[0] unused
    tree: Vec<u32>,
    len: usize,
    top_bit: usize,
    occupied: usize,
}

impl OccupancyTree {
    /// All slots empty.
    pub fn empty(n: usize) -> Self {
        Self {
            tree: vec![0; n + 1],
            len: n,
            top_bit: top_bit(n),
            occupied: 0,
        }
    }

    /// All slots occupied, built in O(n).
    pub fn full(n: usize) -> Self {
        let mut tree = vec![0u32; n + 1];
        for (i, slot) in tree.iter_mut().enumerate().skip(1) {
            *slot = (i & i.wrapping_neg()) as u32;
        }
        Self {
            tree,
            len: n,
            top_bit: top_bit(n),
            occupied: n,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn occupied(&self) -> usize {
        self.occupied
    }

    /// Number of occupied slots in `1..=i`.
    pub fn prefix_count(&self, mut i: usize) -> usize {
        debug_assert!(i <= self.len);
        let mut sum = 0usize;
        while i > 0 {
            sum += self.tree[i] as usize;
            i &= i - 1;
        }
        sum
    }

    pub fn insert(&mut self, i: usize) {
        self.add(i, 1);
        self.occupied += 1;
    }

    pub fn remove(&mut self, i: usize) {
        self.add(i, -1);
        self.occupied -= 1;
    }

    fn add(&mut self, mut i: usize, delta: i32) {
        debug_assert!(i >= 1 && i <= self.len);
        while i <= self.len {
            self.tree[i] = (self.tree[i] as i64 + delta as i64) as u32;
            i += i & i.wrapping_neg();
        }
    }

    /// Slot holding the k-th occupied entry (k is 1-based), by binary lifting.
    pub fn select(&self, k: usize) -> Option<usize> {
        if k == 0 || k > self.occupied {
            return None;
        }
        let mut pos = 0usize;
        let mut remaining = k;
        let mut step = self.top_bit;
        while step > 0 {
            let next = pos + step;
            if next <= self.len && (self.tree[next] as usize) < remaining {
                pos = next;
                remaining -= self.tree[next] as usize;
            }
            step >>= 1;
        }
        Some(pos + 1)
    }

    /// Remove and return the k-th occupied slot.
    pub fn take(&mut self, k: usize) -> Option<usize> {
        let slot = self.select(k)?;
        self.remove(slot);
        Some(slot)
    }
}

fn top_bit(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        1 << (usize::BITS - 1 - n.leading_zeros())
    }
}
