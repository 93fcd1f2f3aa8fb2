//! Binary exposure patterns and the combinatorics of the Boolean lattice.
//!
//! A pattern of length `p` is stored as a bitmask with factor `j` (0-based)
//! at bit `j`. The public view is the ordered 0/1 sequence.
//!
//! The canonical order used for every list of patterns in this crate (and
//! for the coordinates of the structural parameter vector) sorts by
//! cardinality first and then lexicographically by the positions of the
//! ones, so marginal effects come before interactions:
//! `(1,0,0), (0,1,0), (0,0,1), (1,1,0), (1,0,1), (0,1,1), (1,1,1)`.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};

/// Largest supported number of binary risk factors.
pub const MAX_FACTORS: usize = 20;

/// A cell of risk-factor exposures: `p` binary levels.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExposurePattern {
    mask: u32,
    len: u8,
}

impl ExposurePattern {
    /// Builds a pattern from its 0/1 sequence.
    pub fn new(bits: &[u8]) -> Result<Self> {
        check_len(bits.len())?;
        let mut mask = 0u32;
        for (position, &value) in bits.iter().enumerate() {
            match value {
                0 => {}
                1 => mask |= 1 << position,
                _ => return Err(Error::NonBinaryPattern { position, value }),
            }
        }
        Ok(Self { mask, len: bits.len() as u8 })
    }

    pub fn from_mask(mask: u32, len: usize) -> Result<Self> {
        check_len(len)?;
        if mask >> len != 0 {
            return Err(Error::InvalidSplit(format!("mask {mask:#b} has bits beyond length {len}")));
        }
        Ok(Self { mask, len: len as u8 })
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::from_mask(0, len)
    }

    pub fn ones(len: usize) -> Result<Self> {
        check_len(len)?;
        Ok(Self { mask: full_mask(len), len: len as u8 })
    }

    /// The unit vector `e_j`.
    pub fn unit(len: usize, j: usize) -> Result<Self> {
        if j >= len {
            return Err(Error::InvalidSplit(format!("factor {j} out of range for length {len}")));
        }
        Self::from_mask(1 << j, len)
    }

    #[inline]
    pub fn mask(&self) -> u32 {
        self.mask
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.mask == 0
    }

    /// Number of factors switched on, `|v|`.
    #[inline]
    pub fn cardinality(&self) -> usize {
        self.mask.count_ones() as usize
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        self.mask >> j & 1 == 1
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len()).map(|j| self.get(j) as u8).collect()
    }

    /// Componentwise `self <= other`. Patterns of different length are never comparable.
    #[inline]
    pub fn is_le(&self, other: &ExposurePattern) -> bool {
        self.len == other.len && self.mask & !other.mask == 0
    }
}

impl fmt::Debug for ExposurePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExposurePattern{self}")
    }
}

impl fmt::Display for ExposurePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for j in 0..self.len() {
            if j > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", self.get(j) as u8)?;
        }
        f.write_str(")")
    }
}

fn check_len(len: usize) -> Result<()> {
    if len == 0 || len > MAX_FACTORS {
        Err(Error::TooManyFactors(len))
    } else {
        Ok(())
    }
}

#[inline]
pub(crate) fn full_mask(len: usize) -> u32 {
    if len >= 32 {
        u32::MAX
    } else {
        (1u32 << len) - 1
    }
}

/// Canonical comparison of two masks: cardinality, then positions of ones.
pub fn canonical_cmp(a: u32, b: u32) -> Ordering {
    a.count_ones().cmp(&b.count_ones()).then_with(|| {
        // Same cardinality: walk the ones from the lowest position.
        let (mut x, mut y) = (a, b);
        while x != 0 && y != 0 {
            let (i, j) = (x.trailing_zeros(), y.trailing_zeros());
            if i != j {
                return i.cmp(&j);
            }
            x &= x - 1;
            y &= y - 1;
        }
        Ordering::Equal
    })
}

/// All submasks of `mask` (including 0 and `mask`), in canonical order.
pub(crate) fn submasks_canonical(mask: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(1 << mask.count_ones());
    let mut sub = mask;
    loop {
        out.push(sub);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & mask;
    }
    out.sort_by(|&a, &b| canonical_cmp(a, b));
    out
}

/// Iterates all submasks of `mask` in descending numeric order (no allocation).
pub(crate) fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

/// All patterns `w <= v`, in canonical order; always `2^{|v|}` of them.
pub fn enumerate_le(v: &ExposurePattern) -> Vec<ExposurePattern> {
    submasks_canonical(v.mask)
        .into_iter()
        .map(|mask| ExposurePattern { mask, len: v.len })
        .collect()
}

/// Inclusion–exclusion coefficient `(-1)^{|v|-|w|}` for `w <= v`.
pub fn incl_excl_sign(v: &ExposurePattern, w: &ExposurePattern) -> Result<i32> {
    if !w.is_le(v) {
        return Err(Error::NotBelow);
    }
    Ok(parity_sign(v.cardinality() - w.cardinality()))
}

#[inline]
pub(crate) fn parity_sign(k: usize) -> i32 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Bijection between the nonzero patterns of length `p` and the
/// coordinates `0..2^p - 1` of the structural parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsiIndexMap {
    p: usize,
    order: Vec<u32>,
    // position[mask] = coordinate; position[0] is unused.
    position: Vec<usize>,
}

impl PsiIndexMap {
    pub fn new(p: usize) -> Result<Self> {
        check_len(p)?;
        let mut order: Vec<u32> = (1..=full_mask(p)).collect();
        order.sort_by(|&a, &b| canonical_cmp(a, b));
        let mut position = vec![usize::MAX; 1 << p];
        for (i, &m) in order.iter().enumerate() {
            position[m as usize] = i;
        }
        Ok(Self { p, order, position })
    }

    #[inline]
    pub fn factors(&self) -> usize {
        self.p
    }

    /// Number of coordinates, `2^p - 1`.
    #[inline]
    pub fn len(&self) -> usize {
        self.order.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn pattern(&self, index: usize) -> ExposurePattern {
        ExposurePattern { mask: self.order[index], len: self.p as u8 }
    }

    #[inline]
    pub fn mask_at(&self, index: usize) -> u32 {
        self.order[index]
    }

    /// Coordinate of a nonzero pattern; `None` for the zero pattern or a length mismatch.
    pub fn index_of(&self, w: &ExposurePattern) -> Option<usize> {
        if w.len() != self.p || w.is_zero() {
            None
        } else {
            Some(self.position[w.mask as usize])
        }
    }

    #[inline]
    pub(crate) fn index_of_mask(&self, mask: u32) -> usize {
        debug_assert!(mask != 0);
        self.position[mask as usize]
    }

    pub fn patterns(&self) -> impl Iterator<Item = ExposurePattern> + '_ {
        self.order.iter().map(move |&mask| ExposurePattern { mask, len: self.p as u8 })
    }

    /// The vector `1_{<=u}`: coordinate `w` is 1 iff `w <= u`.
    pub fn indicator_le(&self, u: &ExposurePattern) -> Result<Vec<u8>> {
        if u.len() != self.p {
            return Err(Error::LengthMismatch { expected: self.p, got: u.len() });
        }
        Ok(self.order.iter().map(|&w| (w & !u.mask == 0) as u8).collect())
    }
}

/// `1_{<=u}` under the canonical ordering for `p = u.len()`.
pub fn indicator_le(u: &ExposurePattern) -> Vec<u8> {
    PsiIndexMap::new(u.len())
        .and_then(|map| map.indicator_le(u))
        .expect("pattern length already validated")
}

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Both sides of `sum_{l=0}^{m} (-1)^l C(n, l) = (-1)^m C(n-1, m)` for `m < n`.
///
/// Returns `(left, right)`; they agree for every valid input.
pub fn pascal_alternating_sum(n: usize, m: usize) -> Result<(i64, i64)> {
    if m >= n {
        return Err(Error::PascalDomain { n, m });
    }
    let left = (0..=m).map(|l| parity_sign(l) as i64 * binomial(n, l) as i64).sum();
    let right = parity_sign(m) as i64 * binomial(n - 1, m) as i64;
    Ok((left, right))
}

/// In-place subset-sum (zeta) transform: `f[v] <- sum_{w <= v} f[w]`.
pub fn zeta_transform<T: Copy + Add<Output = T>>(values: &mut [T]) {
    let n = values.len();
    assert!(n.is_power_of_two(), "table length must be a power of two");
    let mut bit = 1;
    while bit < n {
        for v in 0..n {
            if v & bit != 0 {
                values[v] = values[v] + values[v ^ bit];
            }
        }
        bit <<= 1;
    }
}

/// In-place Möbius transform, the inverse of [`zeta_transform`]:
/// `f[v] <- sum_{w <= v} (-1)^{|v|-|w|} f[w]`.
pub fn mobius_transform<T: Copy + Sub<Output = T>>(values: &mut [T]) {
    let n = values.len();
    assert!(n.is_power_of_two(), "table length must be a power of two");
    let mut bit = 1;
    while bit < n {
        for v in 0..n {
            if v & bit != 0 {
                values[v] = values[v] - values[v ^ bit];
            }
        }
        bit <<= 1;
    }
}
