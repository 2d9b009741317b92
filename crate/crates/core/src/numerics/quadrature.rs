use std::num::NonZeroUsize;

use gauss_quad::{GaussHermite, GaussLegendre};

use crate::error::{config, Result};

/// Discretization controls for the decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    /// Number of output-amplitude cells.
    pub amp_points: usize,
    /// Number of phase cells; a power of two, at least 64.
    pub phase_points: usize,
    /// Half-width of each amplitude window in noise standard deviations.
    pub amp_truncation_sigmas: f64,
    /// Sample count for Monte Carlo routines.
    pub mc_samples: usize,
    /// Seed for Monte Carlo routines.
    pub seed: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            amp_points: 512,
            phase_points: 4096,
            amp_truncation_sigmas: 8.0,
            mc_samples: 2_000_000,
            seed: 0x5EED,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.phase_points < 64 || !self.phase_points.is_power_of_two() {
            return Err(config(format!(
                "phase_points must be a power of two >= 64, got {}",
                self.phase_points
            )));
        }
        if self.amp_points < 16 {
            return Err(config(format!(
                "amp_points must be >= 16, got {}",
                self.amp_points
            )));
        }
        if !(self.amp_truncation_sigmas >= 3.0) || !self.amp_truncation_sigmas.is_finite() {
            return Err(config(format!(
                "amp_truncation_sigmas must be >= 3, got {}",
                self.amp_truncation_sigmas
            )));
        }
        if self.mc_samples == 0 {
            return Err(config("mc_samples must be positive"));
        }
        Ok(())
    }
}

/// Gauss–Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).expect("n >= 1"));
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut out: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect();
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    out
}

/// Gauss–Hermite nodes and weights for the weight `e^{-x²}`.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    let rule = GaussHermite::new(NonZeroUsize::new(n.max(2)).expect("n >= 2"));
    let mut out: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    out
}

/// Composite Gauss–Legendre grid (four nodes per panel) covering a union of
/// intervals with roughly uniform node density; overlapping intervals are
/// merged first.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl UnionGrid {
    pub fn new(intervals: &[(f64, f64)], total_points: usize) -> Self {
        const ORDER: usize = 4;
        let mut iv: Vec<(f64, f64)> = intervals.iter().copied().filter(|(a, b)| b > a).collect();
        iv.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (a, b) in iv {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        let span: f64 = merged.iter().map(|(a, b)| b - a).sum();
        let panel = span * ORDER as f64 / total_points.max(ORDER) as f64;
        let rule = gauss_legendre(ORDER, 0.0, 1.0);
        let mut nodes = Vec::with_capacity(total_points + ORDER * merged.len());
        let mut weights = Vec::with_capacity(total_points + ORDER * merged.len());
        for (a, b) in merged {
            let n = ((b - a) / panel).round().max(1.0) as usize;
            let h = (b - a) / n as f64;
            for i in 0..n {
                let lo = a + i as f64 * h;
                for &(u, w) in &rule {
                    nodes.push(lo + u * h);
                    weights.push(w * h);
                }
            }
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_is_valid() {
        QuadratureSpec::default().validate().unwrap();
        let bad = QuadratureSpec {
            phase_points: 1000,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureSpec {
            amp_points: 8,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let rule = gauss_legendre(8, 1.0, 3.0);
        let s: f64 = rule.iter().map(|(x, w)| w * x.powi(7)).sum();
        assert!((s - (3f64.powi(8) - 1.0) / 8.0).abs() < 1e-10);
    }

    #[test]
    fn hermite_integrates_gaussian_moments() {
        let rule = gauss_hermite(20);
        let m0: f64 = rule.iter().map(|(_, w)| w).sum();
        let m2: f64 = rule.iter().map(|(x, w)| w * x * x).sum();
        assert!((m0 - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((m2 - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn union_grid_merges_and_covers() {
        let g = UnionGrid::new(&[(0.0, 2.0), (1.0, 3.0), (10.0, 11.0)], 400);
        let total: f64 = g.weights.iter().sum();
        assert!((total - 4.0).abs() < 1e-12);
        assert!(g.nodes.windows(2).all(|w| w[1] > w[0]));
        assert!((g.len() as i64 - 400).abs() <= 8);
        // exact for low-degree polynomials on each interval
        let m2: f64 = g.nodes.iter().zip(&g.weights).map(|(x, w)| w * x * x).sum();
        assert!((m2 - (27.0 / 3.0 + (1331.0 - 1000.0) / 3.0)).abs() < 1e-9);
    }
}
