//! Finite constellation design on the reflection-coefficient unit disk:
//! the capacity-matched APSK layout plus PSK and QAM benchmarks.

use crate::capacity::optimize_dauip_fixed_k;
use crate::mi::{ApskMetadata, DauipDistribution, DiscreteConstellation};
use crate::{Error, Snr};
use num_complex::Complex64;
use std::f64::consts::PI;

/// An APSK design: K rings carrying M_k = 8(K−k)+4 symbols each (so that
/// M = 4K²), with ring radii and probabilities taken from the K-circle
/// capacity solution at the design SNR and every symbol on ring k weighted
/// q = P_k / M_k.
#[derive(Debug, Clone)]
pub struct ApskDesign {
    pub design_snr: Snr,
    pub ring_count: usize,
    pub ring_sizes: Vec<usize>,
    pub ring_radii: Vec<f64>,
    pub ring_probs: Vec<f64>,
    pub constellation: DiscreteConstellation,
}

impl ApskDesign {
    pub fn metadata(&self) -> ApskMetadata {
        ApskMetadata {
            design_snr_db: self.design_snr.db(),
            k: self.ring_count,
            ring_sizes: self.ring_sizes.clone(),
            ring_radii: self.ring_radii.clone(),
            ring_probs: self.ring_probs.clone(),
        }
    }
}

/// Ring sizes M_k = 8(K−k)+4 for k = 1..K; they always sum to 4K².
pub fn apsk_ring_sizes(k: usize) -> Vec<usize> {
    (1..=k).map(|i| 8 * (k - i) + 4).collect()
}

/// Design an M-ary APSK constellation for a target SNR. M must be 4K².
///
/// The K ring radii/probabilities come from the capacity solver with the
/// circle count pinned to K (the unconstrained optimum may prefer a
/// different K at this SNR). Ring k carries M_k symbols at constant angular
/// spacing 2π/M_k, first symbol at half-spacing π/M_k, matching the PSK
/// phase convention on the outer ring.
pub fn design_apsk(m: usize, design_snr: Snr) -> Result<ApskDesign, Error> {
    let k = integer_sqrt(m / 4);
    if m < 4 || 4 * k * k != m {
        return Err(Error::invalid(format!(
            "APSK size must be 4K² for integer K, got {m}"
        )));
    }
    let (law, _rate) = optimize_dauip_fixed_k(design_snr, k, None)?;
    design_apsk_from_law(&law, design_snr)
}

/// Assemble the APSK layout from an explicit K-circle law.
pub fn design_apsk_from_law(
    law: &DauipDistribution,
    design_snr: Snr,
) -> Result<ApskDesign, Error> {
    let k = law.circle_count();
    let sizes = apsk_ring_sizes(k);
    let mut points = Vec::with_capacity(4 * k * k);
    let mut probs = Vec::with_capacity(4 * k * k);
    for (ring, (&radius, &p_ring)) in law.radii().iter().zip(law.probs()).enumerate() {
        let mk = sizes[ring];
        let q = p_ring / mk as f64;
        for i in 0..mk {
            let angle = PI / mk as f64 + 2.0 * PI * i as f64 / mk as f64;
            points.push(Complex64::from_polar(radius, angle));
            probs.push(q);
        }
    }
    Ok(ApskDesign {
        design_snr,
        ring_count: k,
        ring_sizes: sizes,
        ring_radii: law.radii().to_vec(),
        ring_probs: law.probs().to_vec(),
        constellation: DiscreteConstellation::new(points, probs)?,
    })
}

/// Equiprobable M-PSK on the unit circle: Γ_m = exp(j2π(m − ½)/M).
pub fn design_psk(m: usize) -> Result<DiscreteConstellation, Error> {
    if m < 2 {
        return Err(Error::invalid("PSK needs at least 2 symbols"));
    }
    let points = (0..m)
        .map(|i| Complex64::from_polar(1.0, 2.0 * PI * (i as f64 + 0.5) / m as f64))
        .collect();
    DiscreteConstellation::uniform(points)
}

/// Equiprobable square QAM scaled so the bounding square is inscribed in
/// the unit disk (side √2, area 2, corners at |Γ| = 1). M must be a square
/// of an even power of two (4, 16, 64, 256, ...).
pub fn design_qam(m: usize) -> Result<DiscreteConstellation, Error> {
    let side = integer_sqrt(m);
    if side * side != m || side < 2 || !m.is_power_of_two() || m.trailing_zeros() % 2 != 0 {
        return Err(Error::invalid(format!(
            "QAM size must be an even power of two square (4, 16, 64, 256, ...), got {m}"
        )));
    }
    let scale = 1.0 / 2f64.sqrt();
    let coord = |i: usize| scale * (2.0 * i as f64 - (side as f64 - 1.0)) / (side as f64 - 1.0);
    let mut points = Vec::with_capacity(m);
    for row in 0..side {
        for col in 0..side {
            points.push(Complex64::new(coord(col), coord(row)));
        }
    }
    DiscreteConstellation::uniform(points)
}

fn integer_sqrt(n: usize) -> usize {
    (n as f64).sqrt().round() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mi::{mi_complex_discrete, source_entropy};

    #[test]
    fn ring_size_identity() {
        for k in 1..=16 {
            let sizes = apsk_ring_sizes(k);
            assert_eq!(sizes.iter().sum::<usize>(), 4 * k * k, "K = {k}");
        }
        assert_eq!(apsk_ring_sizes(4), vec![28, 20, 12, 4]);
        assert_eq!(apsk_ring_sizes(2), vec![12, 4]);
    }

    #[test]
    fn apsk_layout_from_fixed_law() {
        let law = DauipDistribution::new(vec![1.0, 0.62, 0.33, 0.12], vec![0.4, 0.3, 0.2, 0.1])
            .unwrap();
        let design = design_apsk_from_law(&law, Snr::from_db(15.0).unwrap()).unwrap();
        assert_eq!(design.constellation.len(), 64);
        assert_eq!(design.ring_sizes, vec![28, 20, 12, 4]);
        // Each ring's first symbol is rotated by exactly π/M_k off the
        // unrotated grid, and spacing is constant 2π/M_k.
        let mut idx = 0;
        for (ring, &mk) in design.ring_sizes.iter().enumerate() {
            let radius = design.ring_radii[ring];
            for i in 0..mk {
                let p = design.constellation.points()[idx];
                assert!((p.norm() - radius).abs() < 1e-12);
                let want = PI / mk as f64 + 2.0 * PI * i as f64 / mk as f64;
                let got = p.arg().rem_euclid(2.0 * PI);
                assert!(
                    (got - want.rem_euclid(2.0 * PI)).abs() < 1e-9,
                    "ring {ring} symbol {i}"
                );
                idx += 1;
            }
        }
        // All pairwise distances bounded by the disk diameter.
        let pts = design.constellation.points();
        for a in pts {
            for b in pts {
                assert!((a - b).norm() <= 2.0 + 1e-12);
            }
        }
        // Symbol probabilities are P_k/M_k.
        assert!(
            (design.constellation.probs()[0] - 0.4 / 28.0).abs() < 1e-12
        );
    }

    #[test]
    fn apsk_rejects_bad_sizes() {
        let rho = Snr::from_db(10.0).unwrap();
        assert!(design_apsk(15, rho).is_err());
        assert!(design_apsk(32, rho).is_err());
        assert!(design_apsk(0, rho).is_err());
    }

    #[test]
    fn psk_layout() {
        let c = design_psk(2).unwrap();
        // Offset convention puts 2-PSK at ±j.
        assert!((c.points()[0] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert!((c.points()[1] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        let c = design_psk(16).unwrap();
        assert_eq!(c.len(), 16);
        for p in c.points() {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
        assert!(design_psk(1).is_err());
    }

    #[test]
    fn psk16_is_near_reactive_capacity_at_12db() {
        let rho = Snr::from_db(12.0).unwrap();
        let c = design_psk(16).unwrap();
        let mi = mi_complex_discrete(&c, rho).unwrap();
        let cap = crate::capacity::capacity_reactive(rho).unwrap().rate;
        assert!(cap - mi < 0.05, "16-PSK {mi} vs reactive capacity {cap}");
        assert!(mi <= cap + 1e-6);
    }

    #[test]
    fn qam_layout() {
        let c = design_qam(4).unwrap();
        for p in c.points() {
            assert!((p.norm() - 1.0).abs() < 1e-12);
            assert!((p.re.abs() - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        }
        for &m in &[16usize, 64, 256] {
            let c = design_qam(m).unwrap();
            assert_eq!(c.len(), m);
            let max_norm = c.points().iter().map(|p| p.norm()).fold(0.0, f64::max);
            assert!((max_norm - 1.0).abs() < 1e-12, "corners must touch the circle");
            // Uniform grid spacing.
            let side = (m as f64).sqrt() as usize;
            let step = 2f64.sqrt() / (side as f64 - 1.0);
            let d01 = (c.points()[1] - c.points()[0]).norm();
            assert!((d01 - step).abs() < 1e-12);
            assert!((source_entropy(c.probs()) - (m as f64).log2()).abs() < 1e-12);
        }
        assert!(design_qam(8).is_err());
        assert!(design_qam(32).is_err());
        assert!(design_qam(9).is_err());
    }
}
