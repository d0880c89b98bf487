//! Distributions of the normalized load impedance z = (1+Γ)/(1−Γ) induced
//! by the signaling laws on the Γ-plane, with seed-deterministic samplers
//! for statistical testing.

use crate::region::GammaRegion;
use crate::{Error, Snr};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Image of the Γ-circle of radius a under the Möbius map: another circle,
/// center (1+a²)/(1−a²) and radius 2a/(1−a²), both real. Degenerates as
/// a → 1 (the unit circle maps to the imaginary axis).
pub fn z_circle_from_gamma_circle(a: f64) -> Result<(f64, f64), Error> {
    if !(0.0..1.0).contains(&a) {
        return Err(Error::invalid(format!(
            "circle radius must be in [0, 1), got {a}"
        )));
    }
    let den = 1.0 - a * a;
    Ok(((1.0 + a * a) / den, 2.0 * a / den))
}

/// z-domain angle β of the image of Γ = a·e^(jθ), unwrapped onto [0, 2π):
/// β(θ) = 2·arctan(sin θ / (cos θ − a)) − θ modulo branch.
///
/// For every a ∈ [0, 1) this is a monotone increasing bijection of [0, 2π)
/// onto itself with β(0) = 0 and β(π) = π.
pub fn beta_angle(theta: f64, a: f64) -> Result<f64, Error> {
    if !(0.0..1.0).contains(&a) {
        return Err(Error::invalid(format!(
            "circle radius must be in [0, 1), got {a}"
        )));
    }
    let theta = theta.rem_euclid(2.0 * PI);
    let raw = 2.0 * theta.sin().atan2(theta.cos() - a) - theta;
    Ok(raw.rem_euclid(2.0 * PI))
}

/// Numerical inverse θ(β) of the monotone angle map, by bisection.
pub fn theta_from_beta(beta: f64, a: f64) -> Result<f64, Error> {
    if !(0.0..1.0).contains(&a) {
        return Err(Error::invalid("circle radius must be in [0, 1)"));
    }
    let beta = beta.rem_euclid(2.0 * PI);
    let (mut lo, mut hi) = (0.0_f64, 2.0 * PI - 1e-15);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if beta_angle(mid, a)? <= beta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Conditional PDF of the z-domain angle given the circle radius,
/// f(β | a) = (1 − 2a·cos θ + a²) / (2π (1 − a²)),
/// stated implicitly through the Γ-domain angle θ (the paper's inverse map
/// has no closed form; combine with [`theta_from_beta`] for queries in β).
pub fn conditional_angle_pdf(theta: f64, a: f64) -> Result<f64, Error> {
    if !(0.0..1.0).contains(&a) {
        return Err(Error::invalid("circle radius must be in [0, 1)"));
    }
    Ok((1.0 - 2.0 * a * theta.cos() + a * a) / (2.0 * PI * (1.0 - a * a)))
}

/// f(β | a) evaluated directly at a z-domain angle β.
pub fn conditional_angle_pdf_at_beta(beta: f64, a: f64) -> Result<f64, Error> {
    conditional_angle_pdf(theta_from_beta(beta, a)?, a)
}

/// Reactance PDF for uniform signaling on the unit circle: x = cot(θ/2) is
/// standard Cauchy, f(x) = 1/(π(1+x²)).
pub fn reactance_pdf_unit_circle(x: f64) -> f64 {
    1.0 / (PI * (1.0 + x * x))
}

/// Resistance law for uniform real signaling Γ ~ U(−1,1): r = (1+Γ)/(1−Γ)
/// is standard Beta-prime with f(r) = 1/(1+r)² and F(r) = r/(1+r).
pub fn resistance_pdf_uniform_real(r: f64) -> Result<(f64, f64), Error> {
    if r < 0.0 {
        return Err(Error::invalid(format!("resistance must be nonnegative, got {r}")));
    }
    let den = 1.0 + r;
    Ok((1.0 / (den * den), r / den))
}

/// Impedance-plane PDF of uniform-disk signaling, via the polar change of
/// variables f_z(z) = (a/π)·|det ∂[r,x]/∂[a,θ]|⁻¹ with the determinant
/// expressed through the conformal stretch of the Möbius map,
/// |det| = a·|dz/dΓ|² = 4a/|1−Γ|⁴.
pub fn z_pdf_uniform_disk(z: Complex64) -> Result<f64, Error> {
    if !(z.re > 0.0) {
        return Err(Error::invalid("impedance must lie in the open right half-plane"));
    }
    let gamma = (z - 1.0) / (z + 1.0);
    let a = gamma.norm();
    let one_minus = Complex64::new(1.0, 0.0) - gamma;
    let det = 4.0 * a / one_minus.norm_sqr().powi(2);
    if det == 0.0 {
        // a = 0 (z = 1): cancel the a/a limit explicitly.
        return Ok(one_minus.norm_sqr().powi(2) / (4.0 * PI));
    }
    Ok(a / PI / det)
}

/// Maximum differential entropy attainable on a region: log₂(area), reached
/// by the uniform distribution.
pub fn max_entropy_reference(region: &GammaRegion) -> Result<f64, Error> {
    let area = region.area();
    if !(area > 0.0) || !area.is_finite() {
        return Err(Error::invalid("region must have positive finite area"));
    }
    Ok(area.log2())
}

// ---------------------------------------------------------------------------
// Samplers (all seed-deterministic)
// ---------------------------------------------------------------------------

/// Uniform angles θ ~ U(0, 2π).
pub fn sample_theta_uniform(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect()
}

/// Reactances x = cot(θ/2) of uniform unit-circle signaling.
pub fn sample_reactance_unit_circle(n: usize, seed: u64) -> Vec<f64> {
    sample_theta_uniform(n, seed)
        .into_iter()
        .map(|t| 1.0 / (t / 2.0).tan())
        .collect()
}

/// Resistances r = (1+Γ)/(1−Γ) of uniform real signaling Γ ~ U(−1, 1).
pub fn sample_resistance_uniform_real(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let g: f64 = rng.gen_range(-1.0..1.0);
            (1.0 + g) / (1.0 - g)
        })
        .collect()
}

/// z-domain angles β of Γ uniform on the circle of radius a.
pub fn sample_beta_given_radius(a: f64, n: usize, seed: u64) -> Result<Vec<f64>, Error> {
    sample_theta_uniform(n, seed)
        .into_iter()
        .map(|t| beta_angle(t, a))
        .collect()
}

/// Uniform points on the unit disk.
pub fn sample_uniform_disk(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let re = rng.gen_range(-1.0..1.0);
        let im = rng.gen_range(-1.0..1.0);
        if re * re + im * im <= 1.0 {
            out.push(Complex64::new(re, im));
        }
    }
    out
}

/// Sampled radius mixture of the received amplitude: used by plot-data
/// exports; kept here so the CLI needs no RNG of its own.
pub fn radius_pdf_grid<F>(pdf: F, rho: Snr, n: usize) -> Vec<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let hi = crate::mi::radius_integration_limit(rho);
    (0..n)
        .map(|i| {
            let b = hi * i as f64 / (n - 1) as f64;
            (b, pdf(b))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_gk;

    #[test]
    fn circle_map_examples() {
        let (c, r) = z_circle_from_gamma_circle(0.0).unwrap();
        assert_eq!((c, r), (1.0, 0.0));
        let (c, r) = z_circle_from_gamma_circle(0.5).unwrap();
        assert!((c - 5.0 / 3.0).abs() < 1e-14);
        assert!((r - 4.0 / 3.0).abs() < 1e-14);
        // The circle stays in the right half-plane: center − radius > 0.
        for &a in &[0.1, 0.5, 0.9, 0.999] {
            let (c, r) = z_circle_from_gamma_circle(a).unwrap();
            let gap = c - r;
            assert!(gap > 0.0);
            assert!((gap - (1.0 - a) / (1.0 + a)).abs() < 1e-9 * gap.max(1.0));
        }
        assert!(z_circle_from_gamma_circle(1.0).is_err());
    }

    #[test]
    fn beta_angle_identity_and_symmetry() {
        // a = 0: β = θ exactly.
        for i in 0..32 {
            let t = 2.0 * PI * i as f64 / 32.0;
            assert!((beta_angle(t, 0.0).unwrap() - t).abs() < 1e-12);
        }
        // θ = π maps to β = π for any radius.
        for &a in &[0.1, 0.5, 0.9] {
            assert!((beta_angle(PI, a).unwrap() - PI).abs() < 1e-12);
        }
        assert!((beta_angle(0.0, 0.7).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn beta_angle_matches_geometric_oracle() {
        // arg(z − center) of the mapped point, against the formula.
        for &a in &[0.3, 0.6, 0.9] {
            let (center, _radius) = z_circle_from_gamma_circle(a).unwrap();
            for i in 1..48 {
                let theta = 2.0 * PI * i as f64 / 48.0;
                let gamma = Complex64::from_polar(a, theta);
                let z = (1.0 + gamma) / (1.0 - gamma);
                let want = (z - center).arg().rem_euclid(2.0 * PI);
                let got = beta_angle(theta, a).unwrap();
                assert!(
                    (got - want).abs() < 1e-10,
                    "a = {a}, θ = {theta}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn beta_angle_is_monotone_bijection() {
        for &a in &[0.2, 0.5, 0.95] {
            let mut prev = -1e-12;
            for i in 0..=2000 {
                let t = 2.0 * PI * i as f64 / 2000.0 * (1.0 - 1e-12);
                let b = beta_angle(t, a).unwrap();
                assert!(b >= prev, "non-monotone at a = {a}, θ = {t}");
                prev = b;
            }
            assert!(prev > 2.0 * PI - 1e-3);
            // Inverse round-trip.
            for i in 1..20 {
                let beta = 2.0 * PI * i as f64 / 20.0;
                let theta = theta_from_beta(beta, a).unwrap();
                assert!((beta_angle(theta, a).unwrap() - beta).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn conditional_angle_pdf_normalizes() {
        // ∫ f(β|a) dβ = ∫ f(θ) β'(θ) dθ = 1; integrate in θ with the exact
        // Jacobian β'(θ) = (1−a²)/(1−2a cos θ+a²).
        for &a in &[0.2, 0.5, 0.9] {
            let total = adaptive_gk(
                |theta| {
                    let f = conditional_angle_pdf(theta, a).unwrap();
                    let jac = (1.0 - a * a) / (1.0 - 2.0 * a * theta.cos() + a * a);
                    f * jac
                },
                0.0,
                2.0 * PI,
                1e-10,
                1e-10,
            )
            .unwrap()
            .value;
            assert!((total - 1.0).abs() < 1e-8, "a = {a}: ∫ = {total}");
        }
        // a = 0 is uniform.
        assert!((conditional_angle_pdf(1.0, 0.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn mass_concentrates_near_beta_pi_for_large_radius() {
        // Density of β near π (θ = π) dwarfs the density near β = 0 as
        // a → 1: the impedance distribution piles up near z ≈ 0.
        let a = 0.99;
        let near_zero = conditional_angle_pdf(0.0, a).unwrap();
        let near_pi = conditional_angle_pdf(PI, a).unwrap();
        assert!(near_pi > 50.0 * near_zero);
    }

    #[test]
    fn beta_pushforward_chi_square() {
        // 10⁶ uniform θ samples through β(θ), 100 equal-width β bins; the
        // expected bin masses are Δθ/2π by the change of variables. The
        // χ² statistic must clear the α = 0.01 critical value (99 dof).
        let a = 0.5;
        let n = 1_000_000;
        let betas = sample_beta_given_radius(a, n, 1234).unwrap();
        let bins = 100;
        let mut observed = vec![0usize; bins];
        for b in &betas {
            let idx = ((b / (2.0 * PI) * bins as f64) as usize).min(bins - 1);
            observed[idx] += 1;
        }
        let mut chi2 = 0.0;
        for i in 0..bins {
            let b_lo = 2.0 * PI * i as f64 / bins as f64;
            let b_hi = 2.0 * PI * (i + 1) as f64 / bins as f64;
            let t_lo = theta_from_beta(b_lo, a).unwrap();
            let t_hi = if i == bins - 1 {
                2.0 * PI
            } else {
                theta_from_beta(b_hi, a).unwrap()
            };
            let expected = n as f64 * (t_hi - t_lo) / (2.0 * PI);
            chi2 += (observed[i] as f64 - expected).powi(2) / expected;
        }
        // χ²(0.99; 99) = 134.64.
        assert!(chi2 < 134.64, "χ² = {chi2}");
    }

    #[test]
    fn cauchy_reactance_ks() {
        let n = 1_000_000;
        let mut xs = sample_reactance_unit_circle(n, 777);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d = 0.0_f64;
        for (i, &x) in xs.iter().enumerate() {
            let cdf = 0.5 + x.atan() / PI;
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            d = d.max((cdf - lo).abs()).max((cdf - hi).abs());
        }
        // Kolmogorov critical value at α = 0.01: 1.6276/√n.
        assert!(d < 1.6276 / (n as f64).sqrt(), "KS distance {d}");
        // Density values.
        assert!((reactance_pdf_unit_circle(0.0) - 1.0 / PI).abs() < 1e-15);
        assert!((reactance_pdf_unit_circle(1.0) - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn beta_prime_resistance_ks() {
        let n = 1_000_000;
        let mut rs = sample_resistance_uniform_real(n, 4242);
        rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d = 0.0_f64;
        for (i, &r) in rs.iter().enumerate() {
            let cdf = r / (1.0 + r);
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            d = d.max((cdf - lo).abs()).max((cdf - hi).abs());
        }
        assert!(d < 1.6276 / (n as f64).sqrt(), "KS distance {d}");
        // Median at r = 1, density 1 at r = 0, CDF(∞) → 1.
        let (pdf0, _) = resistance_pdf_uniform_real(0.0).unwrap();
        assert_eq!(pdf0, 1.0);
        let (_, cdf1) = resistance_pdf_uniform_real(1.0).unwrap();
        assert_eq!(cdf1, 0.5);
        assert!(resistance_pdf_uniform_real(-0.5).is_err());
        let (_, far) = resistance_pdf_uniform_real(1e12).unwrap();
        assert!((far - 1.0).abs() < 1e-11);
    }

    #[test]
    fn z_pdf_matches_conformal_oracle() {
        // Independent route: f_z(z) = (1/π)·4/|z+1|⁴.
        let mut rng = ChaCha8Rng::seed_from_u64(5150);
        for _ in 0..100 {
            let re = 10f64.powf(rng.gen_range(-2.0..1.5));
            let im = 10f64.powf(rng.gen_range(-2.0..1.5))
                * if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let z = Complex64::new(re, im);
            let got = z_pdf_uniform_disk(z).unwrap();
            let want = 4.0 / (PI * (z + 1.0).norm_sqr().powi(2));
            assert!(
                (got - want).abs() <= 1e-10 * want,
                "z = {z}: {got} vs {want}"
            );
        }
        // Matched point z = 1 → 1/(4π).
        let got = z_pdf_uniform_disk(Complex64::new(1.0, 0.0)).unwrap();
        assert!((got - 1.0 / (4.0 * PI)).abs() < 1e-15);
        // Conjugation symmetry.
        let z = Complex64::new(0.7, 1.3);
        assert_eq!(
            z_pdf_uniform_disk(z).unwrap(),
            z_pdf_uniform_disk(z.conj()).unwrap()
        );
        assert!(z_pdf_uniform_disk(Complex64::new(-0.1, 0.0)).is_err());
    }

    #[test]
    fn z_pdf_normalizes_over_half_plane() {
        // ∫∫ f_z over the right half-plane = 1, checked to ~1e−3 with tail
        // truncation: f_z ~ 4/(π|z|⁴) far out, so the tail beyond |z| = R
        // carries ≈ 4/R² of mass... integrate radially to R = 2000.
        let total = adaptive_gk(
            |re| {
                adaptive_gk(
                    |im| z_pdf_uniform_disk(Complex64::new(re, im)).unwrap(),
                    -300.0,
                    300.0,
                    1e-9,
                    1e-7,
                )
                .unwrap()
                .value
            },
            1e-6,
            300.0,
            1e-7,
            1e-5,
        )
        .unwrap()
        .value;
        assert!((total - 1.0).abs() < 1e-2, "half-plane mass {total}");
    }

    #[test]
    fn max_entropy_references() {
        use crate::region::GammaRegion;
        let disk = max_entropy_reference(&GammaRegion::full_disk()).unwrap();
        assert!((disk - PI.log2()).abs() < 1e-12);
        let sq = max_entropy_reference(&GammaRegion::inscribed_square()).unwrap();
        assert!((sq - 1.0).abs() < 1e-12);
        let half = max_entropy_reference(&GammaRegion::half_disk()).unwrap();
        assert!((half - (PI / 2.0).log2()).abs() < 1e-12);
    }

    #[test]
    fn uniform_sampler_entropy_hits_reference() {
        // Kozachenko–Leonenko nearest-neighbor entropy of uniform samples
        // vs log₂(area), within estimator error.
        use crate::region::{sample_uniform_region, GammaRegion};
        for (region, name) in [
            (GammaRegion::full_disk(), "disk"),
            (GammaRegion::inscribed_square(), "square"),
        ] {
            let n = 4000;
            let pts = sample_uniform_region(&region, n, 2024);
            let mut sum_ln = 0.0;
            for i in 0..n {
                let mut best = f64::INFINITY;
                for j in 0..n {
                    if i != j {
                        let d = (pts[i] - pts[j]).norm_sqr();
                        if d < best {
                            best = d;
                        }
                    }
                }
                sum_ln += 0.5 * best.max(1e-300).ln();
            }
            // h ≈ (d/n)Σln r_i + ln(V_d) + γ + ln(n−1), d = 2, in nats.
            let gamma = 0.577_215_664_901_532_9;
            let h_nats =
                2.0 * sum_ln / n as f64 + PI.ln() + gamma + ((n - 1) as f64).ln();
            let h_bits = h_nats * crate::LOG2_E;
            let want = max_entropy_reference(&region).unwrap();
            assert!(
                (h_bits - want).abs() < 0.1,
                "{name}: kNN entropy {h_bits} vs log2(area) {want}"
            );
        }
    }

    #[test]
    fn samplers_are_seed_deterministic() {
        assert_eq!(sample_theta_uniform(100, 9), sample_theta_uniform(100, 9));
        assert_eq!(
            sample_resistance_uniform_real(100, 9),
            sample_resistance_uniform_real(100, 9)
        );
        assert_eq!(sample_uniform_disk(100, 9), sample_uniform_disk(100, 9));
    }
}
