use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Default cap on the last schedule endpoint.
pub const DEFAULT_HORIZON_CAP: u64 = 1 << 31;

/// Half-open coordinate window `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: usize,
    pub end: usize,
}

impl Window {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Contiguous windows `[a_1,b_1), [a_2,b_2), ...` with `a_1 = 0`,
/// `a_{k+1} = b_k` and strictly increasing ratios `b_k / a_k` (k ≥ 2).
/// Windows are numbered from 1; odd windows carry tree levels, even
/// windows carry shared content.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalSchedule {
    windows: Vec<Window>,
}

impl IntervalSchedule {
    pub fn new(bounds: &[(usize, usize)]) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::Invalid("schedule has no windows".into()));
        }
        if bounds[0].0 != 0 {
            return Err(Error::Invalid(format!("first window starts at {}, not 0", bounds[0].0)));
        }
        for (k, &(a, b)) in bounds.iter().enumerate() {
            if b <= a {
                return Err(Error::Invalid(format!("window {} = [{a}, {b}) is empty", k + 1)));
            }
            if k > 0 && a != bounds[k - 1].1 {
                return Err(Error::Invalid(format!("window {} is not contiguous", k + 1)));
            }
        }
        // b_k / a_k < b_{k+1} / a_{k+1}, cross-multiplied
        for k in 1..bounds.len().saturating_sub(1) {
            let (a0, b0) = bounds[k];
            let (a1, b1) = bounds[k + 1];
            if (b0 as u128) * (a1 as u128) >= (b1 as u128) * (a0 as u128) {
                return Err(Error::Invalid(format!(
                    "ratio of window {} does not exceed that of window {}",
                    k + 2,
                    k + 1
                )));
            }
        }
        Ok(Self {
            windows: bounds.iter().map(|&(start, end)| Window { start, end }).collect(),
        })
    }

    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    /// Window `k`, numbered from 1.
    pub fn window(&self, k: usize) -> Window {
        self.windows[k - 1]
    }

    /// `b_k / a_k`, defined for `k ≥ 2`.
    pub fn ratio(&self, k: usize) -> Option<f64> {
        (k >= 2 && k <= self.len()).then(|| {
            let w = self.window(k);
            w.end as f64 / w.start as f64
        })
    }

    /// Last endpoint.
    pub fn horizon(&self) -> usize {
        self.windows.last().map_or(0, |w| w.end)
    }

    /// Window of tree level `level` (window `2·level + 1`).
    pub fn level_window(&self, level: usize) -> Window {
        self.window(2 * level + 1)
    }

    pub fn endpoints(&self) -> Vec<usize> {
        self.windows.iter().map(|w| w.end).collect()
    }
}

/// Schedule with `2K+1` windows, `b_1 = n1` and `b_k = (rho0 + k)·a_k`.
pub fn make_schedule(n1: usize, rho0: usize, levels: usize) -> Result<IntervalSchedule> {
    make_schedule_capped(n1, rho0, levels, DEFAULT_HORIZON_CAP)
}

pub fn make_schedule_capped(n1: usize, rho0: usize, levels: usize, cap: u64) -> Result<IntervalSchedule> {
    if n1 < 8 {
        return Err(Error::DomainError(format!("n1 = {n1} must be at least 8")));
    }
    if rho0 < 2 {
        return Err(Error::DomainError(format!("rho0 = {rho0} must be at least 2")));
    }
    let count = 2 * levels + 1;
    let mut bounds = Vec::with_capacity(count);
    let mut end = n1 as u128;
    bounds.push((0u128, end));
    for k in 2..=count {
        let start = end;
        end = start * (rho0 + k) as u128;
        if end > cap as u128 {
            return Err(Error::OverflowRisk { endpoint: end, cap });
        }
        bounds.push((start, end));
    }
    if n1 as u128 > cap as u128 {
        return Err(Error::OverflowRisk { endpoint: n1 as u128, cap });
    }
    let bounds: Vec<(usize, usize)> = bounds.into_iter().map(|(a, b)| (a as usize, b as usize)).collect();
    IntervalSchedule::new(&bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn recursion_example() {
        let s = make_schedule(16, 2, 3).unwrap();
        assert_eq!(s.endpoints(), vec![16, 64, 320, 1920, 13440, 107520, 967680]);
        assert_eq!(s.level_window(1), Window { start: 64, end: 320 });
    }

    #[test]
    fn minimal_schedule() {
        let s = make_schedule(16, 2, 1).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.ratio(1), None);
        assert_eq!(s.ratio(2), Some(4.0));
        assert_eq!(s.ratio(3), Some(5.0));
        let s = make_schedule(16, 2, 0).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn contiguity_and_ratios() {
        for (n1, rho0, k) in [(8, 2, 4), (20, 5, 3), (9, 3, 2)] {
            let s = make_schedule(n1, rho0, k).unwrap();
            for w in s.windows().windows(2) {
                assert_eq!(w[0].end, w[1].start);
            }
            for j in 2..s.len() {
                assert!(s.ratio(j).unwrap() < s.ratio(j + 1).unwrap());
            }
        }
    }

    #[test]
    fn preconditions() {
        assert!(make_schedule(7, 2, 1).is_err());
        assert!(make_schedule(16, 1, 1).is_err());
        assert!(matches!(make_schedule(16, 2, 5), Err(Error::OverflowRisk { .. })));
        assert!(make_schedule_capped(16, 2, 3, 1_000_000).is_ok());
        assert!(matches!(make_schedule_capped(16, 2, 3, 900_000), Err(Error::OverflowRisk { .. })));
    }

    #[test]
    fn rejects_bad_windows() {
        assert!(IntervalSchedule::new(&[(1, 4)]).is_err());
        assert!(IntervalSchedule::new(&[(0, 4), (5, 9)]).is_err());
        assert!(IntervalSchedule::new(&[(0, 4), (4, 4)]).is_err());
        // ratios 4, 3: not increasing
        assert!(IntervalSchedule::new(&[(0, 4), (4, 16), (16, 48)]).is_err());
        assert!(IntervalSchedule::new(&[(0, 4), (4, 16), (16, 96)]).is_ok());
    }
}
