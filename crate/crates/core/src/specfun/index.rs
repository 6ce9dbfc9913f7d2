use crate::error::{Error, Result};

/// Spherical-harmonic index pair: order `n` and degree `m` with `|m| <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderDegree {
    n: u32,
    m: i32,
}

impl OrderDegree {
    pub fn new(n: u32, m: i32) -> Result<Self> {
        if m.unsigned_abs() > n {
            return Err(Error::InvalidOrderDegree { n, m });
        }
        Ok(Self { n, m })
    }

    #[inline]
    pub fn n(self) -> u32 {
        self.n
    }

    #[inline]
    pub fn m(self) -> i32 {
        self.m
    }
}

/// Bijection between `(n, m)` with `n <= max_order` and flat indices
/// `0..(max_order + 1)^2`, ordered by `n` then `m` ascending.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModalIndexMap {
    max_order: usize,
}

impl ModalIndexMap {
    pub fn new(max_order: usize) -> Self {
        Self { max_order }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Number of modes, `(N + 1)^2`.
    pub fn len(&self) -> usize {
        (self.max_order + 1) * (self.max_order + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat index of `nm`, or `None` when its order exceeds the map.
    pub fn flat(&self, nm: OrderDegree) -> Option<usize> {
        if nm.n() as usize > self.max_order {
            return None;
        }
        Some(flat_index(nm.n() as usize, nm.m()))
    }

    pub fn order_degree(&self, index: usize) -> Option<OrderDegree> {
        if index >= self.len() {
            return None;
        }
        let n = (index as f64).sqrt() as usize;
        // guard against sqrt rounding for perfect squares
        let n = if (n + 1) * (n + 1) <= index { n + 1 } else if n * n > index { n - 1 } else { n };
        let m = index as i64 - (n * n + n) as i64;
        Some(OrderDegree { n: n as u32, m: m as i32 })
    }

    pub fn iter(&self) -> impl Iterator<Item = OrderDegree> {
        let max = self.max_order as u32;
        (0..=max).flat_map(|n| (-(n as i32)..=n as i32).map(move |m| OrderDegree { n, m }))
    }
}

/// `n^2 + n + m`; caller guarantees `|m| <= n`.
#[inline]
pub(crate) fn flat_index(n: usize, m: i32) -> usize {
    ((n * n + n) as i64 + m as i64) as usize
}
