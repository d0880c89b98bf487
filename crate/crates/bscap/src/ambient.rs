//! Ergodic and outage capacity of ambient backscatter links.
//!
//! A modulated ambient source makes the effective link gain fluctuate; after
//! maximum-ratio combining over the N_A ambient symbols spanned by one load
//! symbol, the channel is y = a·Γ + w with the scalar combined gain
//! a = ‖ψ‖/√N_A, E[a²] = 1. The ergodic capacity is E_a[C(a²ρ)] with C the
//! static general-load capacity, evaluated through the interpolation table.

use crate::capacity::CapacityTable;
use crate::exec;
use crate::{Error, Snr};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Samples per RNG stream; batching pins the sample-to-stream assignment so
/// results are identical for any thread count.
const BATCH: usize = 8192;

/// Fading law of the normalized ambient factor ψ with E[|ψ|²] = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingModel {
    /// |ψ| = 1 (PSK-modulated ambient source, static channels).
    ConstantEnvelope,
    /// ψ ~ CN(0, 1).
    CircularGaussian,
    /// |ψ|² ∈ {0, 1/p} with P[on] = p: bursty/on-off ambient activity.
    OnOff { on_probability: f64 },
}

impl FadingModel {
    fn validate(&self) -> Result<(), Error> {
        if let FadingModel::OnOff { on_probability } = self {
            if !(*on_probability > 0.0 && *on_probability <= 1.0) {
                return Err(Error::invalid("on-probability must be in (0,1]"));
            }
        }
        Ok(())
    }

    /// One ψ draw (unit mean-square by construction).
    fn sample(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        match self {
            FadingModel::ConstantEnvelope => {
                let phi = rng.gen_range(0.0..2.0 * PI);
                (phi.cos(), phi.sin())
            }
            FadingModel::CircularGaussian => {
                // Box-Muller; each quadrature has variance 1/2.
                let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let v: f64 = rng.gen_range(0.0..2.0 * PI);
                let r = (-u.ln()).sqrt();
                (r * v.cos(), r * v.sin())
            }
            FadingModel::OnOff { on_probability } => {
                let on = rng.gen_range(0.0..1.0) < *on_probability;
                if on {
                    let phi = rng.gen_range(0.0..2.0 * PI);
                    let amp = (1.0 / on_probability).sqrt();
                    (amp * phi.cos(), amp * phi.sin())
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }
}

/// Draw `n_samples` combined gains a = ‖ψ-vector‖/√N_A.
///
/// Deterministic in `seed` regardless of parallelism: sample i always comes
/// from stream i/BATCH at offset i%BATCH.
pub fn combined_gain_samples(
    model: FadingModel,
    n_ambient: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<f64>, Error> {
    combined_gain_samples_with(model, n_ambient, n_samples, seed, exec::parallel_available())
}

/// [`combined_gain_samples`] with explicit control over batch parallelism
/// (the result is identical either way).
pub fn combined_gain_samples_with(
    model: FadingModel,
    n_ambient: usize,
    n_samples: usize,
    seed: u64,
    parallel: bool,
) -> Result<Vec<f64>, Error> {
    model.validate()?;
    if n_ambient == 0 {
        return Err(Error::invalid("ambient ratio N_A must be at least 1"));
    }
    if n_samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let n_batches = n_samples.div_ceil(BATCH);
    let batches = exec::map_indexed(n_batches, parallel, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let count = BATCH.min(n_samples - b * BATCH);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let mut norm_sq = 0.0;
            for _ in 0..n_ambient {
                let (re, im) = model.sample(&mut rng);
                norm_sq += re * re + im * im;
            }
            out.push((norm_sq / n_ambient as f64).sqrt());
        }
        out
    });
    Ok(batches.into_iter().flatten().collect())
}

/// Ergodic rate estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy)]
pub struct ErgodicCapacity {
    pub rate_bpcu: f64,
    pub std_error: f64,
}

/// Ergodic capacity R_A(ρ) = E_a[C(a²ρ)] by seed-deterministic Monte Carlo
/// over the combined gain, with C taken from the capacity table.
pub fn ergodic_capacity(
    table: &CapacityTable,
    model: FadingModel,
    n_ambient: usize,
    rho: Snr,
    n_samples: usize,
    seed: u64,
) -> Result<ErgodicCapacity, Error> {
    let gains = combined_gain_samples(model, n_ambient, n_samples, seed)?;
    // Kahan-compensated accumulation: the merge order is fixed, so the
    // result does not depend on batching or thread count.
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    let mut sum_sq = 0.0_f64;
    let r = rho.linear();
    for a in &gains {
        let c = table.rate_at_linear(a * a * r);
        let yc = c - comp;
        let t = sum + yc;
        comp = (t - sum) - yc;
        sum = t;
        sum_sq += c * c;
    }
    let n = gains.len() as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok(ErgodicCapacity {
        rate_bpcu: mean,
        std_error: (var / n).sqrt(),
    })
}

/// ε-outage capacity C(ρ·q_ε) where q_ε is the empirical ε-quantile of the
/// squared combined gain.
pub fn outage_capacity(
    table: &CapacityTable,
    model: FadingModel,
    n_ambient: usize,
    rho: Snr,
    epsilon: f64,
    n_samples: usize,
    seed: u64,
) -> Result<f64, Error> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("outage probability must be in (0,1)"));
    }
    let mut gains_sq: Vec<f64> = combined_gain_samples(model, n_ambient, n_samples, seed)?
        .iter()
        .map(|a| a * a)
        .collect();
    gains_sq.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Interpolated empirical quantile.
    let pos = epsilon * (gains_sq.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    let q = if i + 1 < gains_sq.len() {
        gains_sq[i] * (1.0 - frac) + gains_sq[i + 1] * frac
    } else {
        gains_sq[i]
    };
    Ok(table.rate_at_linear(q * rho.linear()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn test_table() -> &'static CapacityTable {
        static TABLE: OnceLock<CapacityTable> = OnceLock::new();
        TABLE.get_or_init(|| CapacityTable::build_general(-25.0, 4.0, 0.25).unwrap())
    }

    #[test]
    fn gain_normalization() {
        for model in [
            FadingModel::ConstantEnvelope,
            FadingModel::CircularGaussian,
            FadingModel::OnOff {
                on_probability: 0.4,
            },
        ] {
            let gains = combined_gain_samples(model, 4, 1_000_000, 77).unwrap();
            let mean_sq: f64 = gains.iter().map(|a| a * a).sum::<f64>() / gains.len() as f64;
            assert!(
                (mean_sq - 1.0).abs() < 0.01,
                "{model:?}: E[a²] = {mean_sq}"
            );
            assert!(gains.iter().all(|&a| a >= 0.0));
        }
    }

    #[test]
    fn constant_envelope_gains_are_unity() {
        let gains = combined_gain_samples(FadingModel::ConstantEnvelope, 7, 10_000, 3).unwrap();
        for a in gains {
            assert!((a - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rayleigh_single_symbol() {
        // N_A = 1 circular Gaussian: a is Rayleigh with E[a²] = 1,
        // so a² is Exp(1): variance of a² equals 1.
        let gains = combined_gain_samples(FadingModel::CircularGaussian, 1, 500_000, 12).unwrap();
        let m2: f64 = gains.iter().map(|a| a * a).sum::<f64>() / gains.len() as f64;
        let m4: f64 = gains.iter().map(|a| a.powi(4)).sum::<f64>() / gains.len() as f64;
        assert!((m2 - 1.0).abs() < 0.01);
        assert!((m4 - m2 * m2 - 1.0).abs() < 0.05);
    }

    #[test]
    fn large_n_ambient_concentrates() {
        // N_A = 1024: Var[a²] = 1/1024 ≪ 0.01 by the law of large numbers.
        let gains =
            combined_gain_samples(FadingModel::CircularGaussian, 1024, 20_000, 5).unwrap();
        let m2: f64 = gains.iter().map(|a| a * a).sum::<f64>() / gains.len() as f64;
        let var: f64 = gains
            .iter()
            .map(|a| (a * a - m2) * (a * a - m2))
            .sum::<f64>()
            / gains.len() as f64;
        assert!(var < 0.01, "Var[a²] = {var}");
    }

    #[test]
    fn constant_envelope_ergodic_equals_static() {
        let table = test_table();
        let rho = Snr::from_db(0.0).unwrap();
        let erg = ergodic_capacity(table, FadingModel::ConstantEnvelope, 16, rho, 10_000, 9)
            .unwrap();
        let want = table.rate_at(rho);
        assert!((erg.rate_bpcu - want).abs() < 1e-12);
        assert!(erg.std_error < 1e-12);
        // Outage too, at any ε.
        for &eps in &[0.01, 0.5, 0.99] {
            let out =
                outage_capacity(table, FadingModel::ConstantEnvelope, 16, rho, eps, 10_000, 9)
                    .unwrap();
            assert!((out - want).abs() < 1e-12);
        }
    }

    #[test]
    fn jensen_ordering() {
        let table = test_table();
        let rho = Snr::from_db(0.0).unwrap();
        for model in [
            FadingModel::CircularGaussian,
            FadingModel::OnOff {
                on_probability: 0.5,
            },
        ] {
            let erg = ergodic_capacity(table, model, 4, rho, 200_000, 21).unwrap();
            let cap = table.rate_at(rho);
            assert!(
                erg.rate_bpcu <= cap + 3.0 * erg.std_error,
                "{model:?}: {} vs {cap}",
                erg.rate_bpcu
            );
        }
    }

    #[test]
    fn low_snr_all_models_linear() {
        let table = test_table();
        let rho = Snr::from_db(-15.0).unwrap();
        let want = rho.linear() * crate::LOG2_E;
        for model in [
            FadingModel::ConstantEnvelope,
            FadingModel::CircularGaussian,
        ] {
            let erg = ergodic_capacity(table, model, 8, rho, 100_000, 4).unwrap();
            assert!(
                (erg.rate_bpcu - want).abs() < 0.05 * want,
                "{model:?}: {} vs {want}",
                erg.rate_bpcu
            );
        }
    }

    #[test]
    fn rayleigh_median_outage_oracle() {
        // N_A = 1 Rayleigh: a² ~ Exp(1) has median ln 2, so the ε = 0.5
        // outage capacity is C(ρ·ln 2).
        let table = test_table();
        let rho = Snr::from_db(0.0).unwrap();
        let got = outage_capacity(
            table,
            FadingModel::CircularGaussian,
            1,
            rho,
            0.5,
            400_000,
            31,
        )
        .unwrap();
        let want = table.rate_at_linear(rho.linear() * 2f64.ln());
        assert!((got - want).abs() < 0.01, "{got} vs {want}");
    }

    #[test]
    fn outage_monotone_in_epsilon() {
        let table = test_table();
        let rho = Snr::from_db(2.0).unwrap();
        let mut prev = -1.0;
        for &eps in &[0.05, 0.1, 0.25, 0.5, 0.75, 0.95] {
            let v = outage_capacity(
                table,
                FadingModel::CircularGaussian,
                2,
                rho,
                eps,
                100_000,
                8,
            )
            .unwrap();
            assert!(v >= prev, "outage not monotone at ε = {eps}");
            prev = v;
        }
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let a = combined_gain_samples(FadingModel::CircularGaussian, 8, 50_000, 123).unwrap();
        let b = combined_gain_samples(FadingModel::CircularGaussian, 8, 50_000, 123).unwrap();
        assert_eq!(a, b);
        let c = combined_gain_samples(FadingModel::CircularGaussian, 8, 50_000, 124).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(combined_gain_samples(
            FadingModel::OnOff {
                on_probability: 0.0
            },
            4,
            10,
            1
        )
        .is_err());
        assert!(combined_gain_samples(FadingModel::ConstantEnvelope, 0, 10, 1).is_err());
        let table = test_table();
        assert!(outage_capacity(
            table,
            FadingModel::ConstantEnvelope,
            1,
            Snr::from_db(0.0).unwrap(),
            0.0,
            10,
            1
        )
        .is_err());
    }
}
