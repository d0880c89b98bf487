//! Rate loss when the reflection coefficient is confined to a subset of the
//! unit disk, including the reactance-band constraint of an inductive tag
//! whose tuning capacitor has a limited value range.

use crate::exec;
use crate::{Error, Snr, LOG2_E};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

/// Default grid resolution for region areas: 2048×2048 cells over the disk
/// bounding box keeps the discretization error near 0.05 % of π while the
/// evaluation stays uniformly conditioned (no blow-up near Γ = 1, unlike
/// quadrature in the impedance plane).
pub const AREA_GRID_N: usize = 2048;

/// A measurable subset of the closed unit disk with cached area and
/// maximum pairwise distance.
#[derive(Clone)]
pub struct GammaRegion {
    membership: Arc<dyn Fn(Complex64) -> bool + Send + Sync>,
    area: f64,
    d_max: f64,
}

impl std::fmt::Debug for GammaRegion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GammaRegion")
            .field("area", &self.area)
            .field("d_max", &self.d_max)
            .finish()
    }
}

impl GammaRegion {
    /// The whole unit disk.
    pub fn full_disk() -> Self {
        GammaRegion {
            membership: Arc::new(|_| true),
            area: PI,
            d_max: 2.0,
        }
    }

    /// Upper half disk Im(Γ) ≥ 0.
    pub fn half_disk() -> Self {
        GammaRegion {
            membership: Arc::new(|g: Complex64| g.im >= 0.0),
            area: PI / 2.0,
            d_max: 2.0,
        }
    }

    /// The axis-aligned square of area 2 inscribed in the disk.
    pub fn inscribed_square() -> Self {
        let h = 1.0 / 2f64.sqrt();
        GammaRegion {
            membership: Arc::new(move |g: Complex64| g.re.abs() <= h && g.im.abs() <= h),
            area: 2.0,
            d_max: 2.0,
        }
    }

    /// Build from an arbitrary membership predicate. Area comes from the
    /// standard grid; d_max from the diameter of the member-point hull.
    pub fn from_membership<F>(membership: F) -> Self
    where
        F: Fn(Complex64) -> bool + Send + Sync + 'static,
    {
        let membership = Arc::new(membership);
        let area = grid_area(membership.as_ref(), AREA_GRID_N, exec::parallel_available());
        let d_max = grid_diameter(membership.as_ref(), 512);
        GammaRegion {
            membership,
            area,
            d_max,
        }
    }

    pub fn contains(&self, g: Complex64) -> bool {
        g.norm() <= 1.0 + crate::EPS_TOL && (self.membership)(g)
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }
}

/// Value-range constraint of an inductive tag: the tuning capacitance may
/// vary by a fraction Δ around resonance, which restricts the normalized
/// reactance to −Δ/(1−Δ)·x_T ≤ x ≤ Δ/(1+Δ)·x_T while the resistance stays
/// free. `q_factor` is the coil Q, x_T = ωL_T/R_T.
#[derive(Debug, Clone, Copy)]
pub struct ReactanceBandConstraint {
    pub delta: f64,
    pub q_factor: f64,
}

impl ReactanceBandConstraint {
    pub fn new(delta: f64, q_factor: f64) -> Result<Self, Error> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!("Δ must be in (0,1), got {delta}")));
        }
        if !(q_factor > 0.0) {
            return Err(Error::invalid("Q-factor must be positive"));
        }
        Ok(ReactanceBandConstraint { delta, q_factor })
    }

    /// The attainable reactance interval (x_lo, x_hi); x_lo < 0 < x_hi.
    pub fn band(&self) -> (f64, f64) {
        (
            -self.delta / (1.0 - self.delta) * self.q_factor,
            self.delta / (1.0 + self.delta) * self.q_factor,
        )
    }
}

/// Normalized reactance of a disk point: x = Im((1+Γ)/(1−Γ)).
fn reactance_of(g: Complex64) -> f64 {
    let den = (1.0 - g.re) * (1.0 - g.re) + g.im * g.im;
    2.0 * g.im / den
}

/// Γ-plane region attainable under a reactance-band constraint. Contains
/// the whole real segment (x = 0 is always attainable), so d_max = 2.
pub fn region_from_reactance_band(c: ReactanceBandConstraint) -> GammaRegion {
    let (x_lo, x_hi) = c.band();
    let membership = Arc::new(move |g: Complex64| {
        if (g - Complex64::new(1.0, 0.0)).norm() < 1e-15 {
            // Open-circuit point: reached through r → ∞ at any reactance.
            return true;
        }
        let x = reactance_of(g);
        x >= x_lo && x <= x_hi
    });
    let area = grid_area(membership.as_ref(), AREA_GRID_N, exec::parallel_available());
    GammaRegion {
        membership,
        area,
        d_max: 2.0,
    }
}

/// Grid-quadrature area of a membership predicate over the unit disk:
/// n×n cell centers on [−1,1]², counting cells inside both disk and region.
pub fn grid_area<F>(membership: &F, n: usize, parallel: bool) -> f64
where
    F: Fn(Complex64) -> bool + Sync + ?Sized,
{
    let cell = 2.0 / n as f64;
    let count = exec::sum_indexed(n, parallel, |row| {
        let im = -1.0 + (row as f64 + 0.5) * cell;
        let mut c = 0usize;
        for col in 0..n {
            let re = -1.0 + (col as f64 + 0.5) * cell;
            if re * re + im * im <= 1.0 && membership(Complex64::new(re, im)) {
                c += 1;
            }
        }
        c as f64
    });
    count * cell * cell
}

/// Monte Carlo area estimate (seed-deterministic), for cross-checking the
/// grid quadrature.
pub fn monte_carlo_area(region: &GammaRegion, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let re = rng.gen_range(-1.0..1.0);
        let im = rng.gen_range(-1.0..1.0);
        let g = Complex64::new(re, im);
        if re * re + im * im <= 1.0 && (region.membership)(g) {
            hits += 1;
        }
    }
    4.0 * hits as f64 / samples as f64
}

fn grid_diameter<F>(membership: &F, n: usize) -> f64
where
    F: Fn(Complex64) -> bool + ?Sized,
{
    // Hull of member cell centers, then brute-force hull diameter.
    let cell = 2.0 / n as f64;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for row in 0..n {
        let im = -1.0 + (row as f64 + 0.5) * cell;
        let mut first: Option<f64> = None;
        let mut last: Option<f64> = None;
        for col in 0..n {
            let re = -1.0 + (col as f64 + 0.5) * cell;
            if re * re + im * im <= 1.0 && membership(Complex64::new(re, im)) {
                if first.is_none() {
                    first = Some(re);
                }
                last = Some(re);
            }
        }
        // Row extremes suffice for the diameter.
        if let (Some(a), Some(b)) = (first, last) {
            pts.push((a, im));
            if b > a {
                pts.push((b, im));
            }
        }
    }
    let mut best = 0.0_f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d2 = (pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2);
            best = best.max(d2);
        }
    }
    best.sqrt()
}

/// Exact area of the part of the unit disk excluded by the band, from the
/// circle geometry of constant-reactance contours: {x > c} is the lens
/// between the unit circle and the circle of center 1 + j/c, radius 1/|c|.
/// Serves as the calibration path and as an oracle for the grid.
pub fn excluded_band_area_exact(c: ReactanceBandConstraint) -> f64 {
    let (x_lo, x_hi) = c.band();
    lens_area(x_hi) + lens_area(-x_lo)
}

/// Area of {Γ : |Γ| ≤ 1, Im((1+Γ)/(1−Γ)) > c} for c > 0.
fn lens_area(c: f64) -> f64 {
    if c <= 1e-12 {
        return PI / 2.0;
    }
    if c > 1e12 {
        return 0.0;
    }
    let r2 = 1.0 / c;
    let d2 = 1.0 + r2 * r2;
    let d = d2.sqrt();
    // Circle-circle intersection, split at the radical line.
    let d1 = (d2 + 1.0 - r2 * r2) / (2.0 * d); // = 1/d
    let dd2 = d - d1;
    let a1 = (d1.clamp(-1.0, 1.0)).acos() - d1 * (1.0 - d1 * d1).max(0.0).sqrt();
    let t = (dd2 / r2).clamp(-1.0, 1.0);
    let a2 = r2 * r2 * t.acos() - dd2 * (r2 * r2 - dd2 * dd2).max(0.0).sqrt();
    a1 + a2
}

/// Absolute high-SNR rate loss log₂(π / area(G)) of confining Γ to G.
pub fn high_snr_rate_loss(region: &GammaRegion) -> Result<f64, Error> {
    if !(region.area() > 0.0) {
        return Err(Error::invalid("region area must be positive"));
    }
    Ok((PI / region.area()).log2().max(0.0))
}

/// Low-SNR rate approximation (d_max/2)²·ρ·log₂e; the rate is governed by
/// the largest realizable symbol distance in this regime.
pub fn low_snr_rate(region: &GammaRegion, rho: Snr) -> f64 {
    let half = region.d_max() / 2.0;
    half * half * rho.linear() * LOG2_E
}

/// Entropy-power lower bound log₂(1 + area(G)/π · ρ/e) on the rate of
/// uniform signaling over G.
pub fn constrained_rate_lower_bound(region: &GammaRegion, rho: Snr) -> Result<f64, Error> {
    if !(region.area() > 0.0) {
        return Err(Error::invalid("region area must be positive"));
    }
    Ok((1.0 + region.area() / PI * rho.linear() / std::f64::consts::E).log2())
}

/// Find the coil Q-factor x_T for which the Δ-band excludes the target
/// fraction of the disk area. Bisection on the closed-form lens area
/// (monotone decreasing in x_T).
pub fn calibrate_q_factor(delta: f64, target_excluded_fraction: f64) -> Result<f64, Error> {
    if !(target_excluded_fraction > 0.0 && target_excluded_fraction < 1.0) {
        return Err(Error::invalid("target fraction must be in (0,1)"));
    }
    let f = |q: f64| {
        let c = ReactanceBandConstraint { delta, q_factor: q };
        excluded_band_area_exact(c) / PI - target_excluded_fraction
    };
    let (mut lo, mut hi) = (1e-3, 1e6);
    if f(lo) < 0.0 || f(hi) > 0.0 {
        return Err(Error::invalid("target excluded fraction unreachable"));
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Seed-deterministic uniform sampler over a region (rejection from the
/// disk bounding box).
pub fn sample_uniform_region(region: &GammaRegion, n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let re = rng.gen_range(-1.0..1.0);
        let im = rng.gen_range(-1.0..1.0);
        let g = Complex64::new(re, im);
        if re * re + im * im <= 1.0 && (region.membership)(g) {
            out.push(g);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_region_areas() {
        assert!((GammaRegion::full_disk().area() - PI).abs() < 1e-12);
        assert!((GammaRegion::inscribed_square().area() - 2.0).abs() < 1e-12);
        assert!((GammaRegion::half_disk().area() - PI / 2.0).abs() < 1e-12);
        // Grid agrees with the exact values.
        let g = grid_area(&|p: Complex64| p.im >= 0.0, AREA_GRID_N, false);
        assert!((g - PI / 2.0).abs() / (PI / 2.0) < 2e-3);
    }

    #[test]
    fn rate_loss_examples() {
        assert_eq!(high_snr_rate_loss(&GammaRegion::full_disk()).unwrap(), 0.0);
        let sq = high_snr_rate_loss(&GammaRegion::inscribed_square()).unwrap();
        assert!((sq - (PI / 2.0).log2()).abs() < 1e-12);
        assert!((sq - 0.651).abs() < 1e-3);
    }

    #[test]
    fn low_snr_rate_examples() {
        let rho = Snr::from_linear(0.01).unwrap();
        let full = low_snr_rate(&GammaRegion::full_disk(), rho);
        assert!((full - 0.01 * LOG2_E).abs() < 1e-15);
        let half_d = GammaRegion {
            membership: Arc::new(|_| true),
            area: PI,
            d_max: 1.0,
        };
        assert!((low_snr_rate(&half_d, rho) - 0.01 * LOG2_E / 4.0).abs() < 1e-15);
    }

    #[test]
    fn epi_bound_examples() {
        let full = constrained_rate_lower_bound(
            &GammaRegion::full_disk(),
            Snr::from_linear(std::f64::consts::E).unwrap(),
        )
        .unwrap();
        assert!((full - 1.0).abs() < 1e-12);
        let half = GammaRegion::half_disk();
        let v = constrained_rate_lower_bound(&half, Snr::from_linear(std::f64::consts::E).unwrap())
            .unwrap();
        assert!((v - 1.5f64.log2()).abs() < 1e-12);
        let sq = constrained_rate_lower_bound(
            &GammaRegion::inscribed_square(),
            Snr::from_db(20.0).unwrap(),
        )
        .unwrap();
        assert!((sq - (1.0 + (2.0 / PI) * (100.0 / std::f64::consts::E)).log2()).abs() < 1e-12);
    }

    #[test]
    fn band_region_basics() {
        let c = ReactanceBandConstraint::new(0.25, 10.0).unwrap();
        let (lo, hi) = c.band();
        assert!((lo + 0.25 / 0.75 * 10.0).abs() < 1e-12);
        assert!((hi - 0.25 / 1.25 * 10.0).abs() < 1e-12);
        let region = region_from_reactance_band(c);
        // Γ = 0 (matched load, x = 0) always belongs.
        assert!(region.contains(Complex64::new(0.0, 0.0)));
        // The real segment belongs, so d_max = 2.
        for &re in &[-1.0, -0.5, 0.3, 0.99, 1.0] {
            assert!(region.contains(Complex64::new(re, 0.0)), "Γ = {re}");
        }
        assert_eq!(region.d_max(), 2.0);
        assert!(region.area() > 0.0 && region.area() < PI);
        assert!(ReactanceBandConstraint::new(0.0, 1.0).is_err());
        assert!(ReactanceBandConstraint::new(1.0, 1.0).is_err());
    }

    #[test]
    fn grid_matches_lens_oracle_and_monte_carlo() {
        for &delta in &[0.05, 0.15, 0.25, 0.5] {
            let c = ReactanceBandConstraint::new(delta, 12.0).unwrap();
            let region = region_from_reactance_band(c);
            let excluded_grid = PI - region.area();
            let excluded_exact = excluded_band_area_exact(c);
            assert!(
                (excluded_grid - excluded_exact).abs() / PI < 1.5e-3,
                "Δ = {delta}: grid {excluded_grid} vs lens {excluded_exact}"
            );
            let mc = monte_carlo_area(&region, 2_000_000, 99);
            assert!(
                (mc - region.area()).abs() / region.area() < 2e-3,
                "Δ = {delta}: Monte Carlo {mc} vs grid {}",
                region.area()
            );
        }
    }

    #[test]
    fn rate_loss_decreases_with_delta() {
        let q = 12.0;
        let mut prev = f64::INFINITY;
        for &delta in &[0.05, 0.15, 0.25, 0.5] {
            let region = region_from_reactance_band(
                ReactanceBandConstraint::new(delta, q).unwrap(),
            );
            let loss = high_snr_rate_loss(&region).unwrap();
            assert!(loss < prev, "loss not decreasing at Δ = {delta}");
            prev = loss;
        }
    }

    #[test]
    fn calibration_reproduces_target() {
        let q = calibrate_q_factor(0.05, 0.612).unwrap();
        let c = ReactanceBandConstraint::new(0.05, q).unwrap();
        let frac = excluded_band_area_exact(c) / PI;
        assert!((frac - 0.612).abs() < 1e-9, "q = {q}, fraction {frac}");
    }

    #[test]
    fn lens_area_limits() {
        assert!((lens_area(0.0) - PI / 2.0).abs() < 1e-12);
        assert!(lens_area(1e13) == 0.0);
        // x > c shrinks monotonically with c.
        let mut prev = PI / 2.0 + 1e-9;
        for i in 1..60 {
            let c = 0.2 * i as f64;
            let a = lens_area(c);
            assert!(a < prev);
            prev = a;
        }
    }

    #[test]
    fn region_sampler_is_deterministic_and_inside() {
        let region = GammaRegion::inscribed_square();
        let a = sample_uniform_region(&region, 1000, 5);
        let b = sample_uniform_region(&region, 1000, 5);
        assert_eq!(a, b);
        for g in &a {
            assert!(region.contains(*g));
        }
    }
}
