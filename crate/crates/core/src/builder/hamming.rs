//! Hamming geometry on blocks: disagreement counts and exact ball sizes.

use crate::error::{Error, Result};
use crate::shift::Block;

const LOW_BITS: u64 = 0x0101_0101_0101_0101;

/// Number of nonzero bytes in a word.
#[inline]
fn nonzero_bytes(x: u64) -> u32 {
    let y = x | (x >> 4);
    let y = y | (y >> 2);
    let y = y | (y >> 1);
    (y & LOW_BITS).count_ones()
}

/// Positions where two equal-length symbol slices differ, compared eight
/// symbols per word.
pub fn hamming_count_slices(a: &[u8], b: &[u8]) -> usize {
    debug_assert_eq!(a.len(), b.len());
    let mut count = 0usize;
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in (&mut ca).zip(&mut cb) {
        let x = u64::from_le_bytes(x.try_into().unwrap());
        let y = u64::from_le_bytes(y.try_into().unwrap());
        count += nonzero_bytes(x ^ y) as usize;
    }
    count
        + ca.remainder()
            .iter()
            .zip(cb.remainder())
            .filter(|(x, y)| x != y)
            .count()
}

/// Like [`hamming_count_slices`] but stops once the count reaches `limit`;
/// the result is exact whenever it is below `limit`.
pub fn hamming_count_capped(a: &[u8], b: &[u8], limit: usize) -> usize {
    const STRIDE: usize = 512;
    let mut count = 0;
    for (x, y) in a.chunks(STRIDE).zip(b.chunks(STRIDE)) {
        count += hamming_count_slices(x, y);
        if count >= limit {
            return count;
        }
    }
    count
}

pub fn hamming_count(a: &Block, b: &Block) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(hamming_count_slices(a.symbols(), b.symbols()))
}

/// Normalized Hamming distance (disagreements / length). Empty blocks are
/// at distance 0.
pub fn hamming_distance(a: &Block, b: &Block) -> Result<f64> {
    let count = hamming_count(a, b)?;
    Ok(if a.is_empty() { 0.0 } else { count as f64 / a.len() as f64 })
}

/// Disagreement count a candidate needs to stay outside the radius-3δ ball:
/// `⌈3δn⌉`, at least 1 so exact duplicates are always removed. Products
/// within 1e-9 (relative) of an integer are snapped to it first, so that
/// e.g. `3·0.05·11520` gives 1728 rather than 1729.
pub fn separation_count(n: usize, delta: f64) -> usize {
    let raw = 3.0 * delta * n as f64;
    let nearest = libm::round(raw);
    let snapped = if libm::fabs(raw - nearest) <= 1e-9 * libm::fmax(1.0, raw) {
        nearest
    } else {
        libm::ceil(raw)
    };
    if snapped < 1.0 {
        1
    } else {
        snapped as usize
    }
}

/// `Σ_{i ≤ r} C(n, i)(l-1)^i`, the number of blocks within `r` positions of
/// a fixed block.
pub fn ball_size_exact(n: usize, r: usize, l: usize) -> Result<u128> {
    if r > n {
        return Err(Error::DomainError(alloc::format!("radius {r} exceeds length {n}")));
    }
    if l < 2 {
        return Err(Error::DomainError(alloc::format!("alphabet size {l} < 2")));
    }
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    let mut power: u128 = 1;
    for i in 0..=r {
        if i > 0 {
            binom = binom
                .checked_mul((n - i + 1) as u128)
                .ok_or(Error::Overflow)?
                / i as u128;
            power = power.checked_mul((l - 1) as u128).ok_or(Error::Overflow)?;
        }
        let term = binom.checked_mul(power).ok_or(Error::Overflow)?;
        total = total.checked_add(term).ok_or(Error::Overflow)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn naive(a: &[u8], b: &[u8]) -> usize {
        a.iter().zip(b).filter(|(x, y)| x != y).count()
    }

    #[test]
    fn distance_examples() {
        let a = Block::new(vec![0, 0, 1, 1], 2).unwrap();
        let b = Block::new(vec![0, 1, 0, 1], 2).unwrap();
        assert_eq!(hamming_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(hamming_distance(&a, &b).unwrap(), 0.5);
        let c = Block::new(vec![1, 1, 0, 0], 2).unwrap();
        assert_eq!(hamming_distance(&a, &c).unwrap(), 1.0);
        let short = Block::new(vec![0], 2).unwrap();
        assert!(matches!(hamming_distance(&a, &short), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn word_kernel_matches_naive() {
        let a: Vec<u8> = (0..1037u32).map(|i| ((i * 7 + i / 3) % 5) as u8).collect();
        let b: Vec<u8> = (0..1037u32).map(|i| ((i * 11) % 5) as u8).collect();
        assert_eq!(hamming_count_slices(&a, &b), naive(&a, &b));
        assert_eq!(hamming_count_slices(&a[3..20], &b[3..20]), naive(&a[3..20], &b[3..20]));
        let capped = hamming_count_capped(&a, &b, 10);
        assert!(capped >= 10);
        assert_eq!(hamming_count_capped(&a, &b, usize::MAX), naive(&a, &b));
    }

    #[test]
    fn nonzero_byte_count() {
        assert_eq!(nonzero_bytes(0), 0);
        assert_eq!(nonzero_bytes(u64::MAX), 8);
        assert_eq!(nonzero_bytes(0x0080_0000_0100_0000), 2);
    }

    #[test]
    fn separation_count_values() {
        assert_eq!(separation_count(16, 0.05), 3);
        assert_eq!(separation_count(16, 0.0), 1);
        assert_eq!(separation_count(256, 0.05), 39);
        assert_eq!(separation_count(11520, 0.05), 1728);
        assert_eq!(separation_count(860160, 0.05), 129024);
    }

    #[test]
    fn ball_examples() {
        assert_eq!(ball_size_exact(4, 0, 2).unwrap(), 1);
        assert_eq!(ball_size_exact(8, 2, 2).unwrap(), 37);
        assert_eq!(ball_size_exact(8, 2, 3).unwrap(), 129);
        assert_eq!(ball_size_exact(10, 10, 2).unwrap(), 1024);
        assert!(ball_size_exact(3, 4, 2).is_err());
        assert_eq!(ball_size_exact(200, 200, 256), Err(Error::Overflow));
    }

    #[test]
    fn ball_matches_brute_force() {
        // every block of length 8 over 3 symbols, distance from the zero block
        let zero = [0u8; 8];
        let mut within = 0;
        for idx in 0..3u64.pow(8) {
            let b = Block::from_index(idx, 8, 3);
            if naive(b.symbols(), &zero) <= 2 {
                within += 1;
            }
        }
        assert_eq!(within, 129);
    }
}
