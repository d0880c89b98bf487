//! Mutual information I(y; Γ) of the unit-disk channel y = Γ + w,
//! w ~ CN(0, 1/ρ), for every input family used by the solvers:
//! circle mixtures with uniform independent phase (UIP), continuous
//! uniform-disk signaling, complex finite constellations, and real
//! (purely resistive) constellations.
//!
//! All internal arithmetic runs in nats with log-domain mixture densities
//! (max-shifted, so nothing underflows before 40 dB); results convert to
//! bits per channel use at the end.

use crate::exec;
use crate::quad::{adaptive_gk_split, adaptive_gk_vec, GaussHermite};
use crate::special::{i0e_unchecked, i1e_unchecked, marcum_q1_unchecked};
use crate::{Error, Snr, EPS_TOL, LOG2_E};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Terms whose log falls this far below the running maximum are dropped from
/// log-sum-exp accumulations; exp(−40) ≈ 4e−18 is below f64 resolution of
/// the dominant term.
const LSE_CUTOFF: f64 = 40.0;

/// Probability vectors must sum to one within this tolerance on input
/// (file format tolerance); they are rescaled to machine precision after
/// validation.
const PROB_SUM_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Input distributions
// ---------------------------------------------------------------------------

/// Discrete-amplitude uniform-independent-phase input law: the radius is
/// drawn from finitely many circle radii a₁ > a₂ > … > a_K with
/// probabilities p_k, the phase uniform on [0, 2π). The outermost circle is
/// always the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct DauipDistribution {
    radii: Vec<f64>,
    probs: Vec<f64>,
}

impl DauipDistribution {
    /// `radii` must start at 1 and be strictly descending within [0, 1];
    /// `probs` must be positive and sum to one.
    pub fn new(radii: Vec<f64>, probs: Vec<f64>) -> Result<Self, Error> {
        if radii.is_empty() || radii.len() != probs.len() {
            return Err(Error::invalid("radii/probs must be equal-length and non-empty"));
        }
        if (radii[0] - 1.0).abs() > EPS_TOL {
            return Err(Error::invalid("outermost circle radius must be 1"));
        }
        for w in radii.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::invalid("circle radii must be strictly descending"));
            }
        }
        if radii[radii.len() - 1] < 0.0 {
            return Err(Error::invalid("circle radii must be nonnegative"));
        }
        let mut radii = radii;
        radii[0] = 1.0;
        let probs = validate_probs(probs)?;
        Ok(DauipDistribution { radii, probs })
    }

    /// The K = 1 law: all mass on the unit circle (uniform ∞-PSK).
    pub fn unit_circle() -> Self {
        DauipDistribution {
            radii: vec![1.0],
            probs: vec![1.0],
        }
    }

    pub fn circle_count(&self) -> usize {
        self.radii.len()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Lateral probability densities p_k / (2π a_k) along the circle
    /// circumferences; `None` for a center point (a_k = 0).
    pub fn lateral_densities(&self) -> Vec<Option<f64>> {
        self.radii
            .iter()
            .zip(&self.probs)
            .map(|(&a, &p)| {
                if a > 0.0 {
                    Some(p / (2.0 * std::f64::consts::PI * a))
                } else {
                    None
                }
            })
            .collect()
    }
}

/// Finite complex constellation on the closed unit disk.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteConstellation {
    points: Vec<Complex64>,
    probs: Vec<f64>,
}

impl DiscreteConstellation {
    pub fn new(points: Vec<Complex64>, probs: Vec<f64>) -> Result<Self, Error> {
        if points.is_empty() || points.len() != probs.len() {
            return Err(Error::invalid("points/probs must be equal-length and non-empty"));
        }
        for p in &points {
            if p.norm() > 1.0 + EPS_TOL {
                return Err(Error::invalid(format!(
                    "constellation point {p} lies outside the unit disk"
                )));
            }
        }
        let probs = validate_probs(probs)?;
        Ok(DiscreteConstellation { points, probs })
    }

    /// Uniform probabilities over the given points.
    pub fn uniform(points: Vec<Complex64>) -> Result<Self, Error> {
        let n = points.len();
        DiscreteConstellation::new(points, vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Rotate every point by the given angle (rad). MI is invariant under
    /// this map because the noise is circularly symmetric.
    pub fn rotated(&self, angle: f64) -> Self {
        let rot = Complex64::from_polar(1.0, angle);
        DiscreteConstellation {
            points: self.points.iter().map(|p| p * rot).collect(),
            probs: self.probs.clone(),
        }
    }
}

/// Finite real constellation on [−1, 1] (purely resistive loads).
#[derive(Debug, Clone, PartialEq)]
pub struct RealConstellation {
    points: Vec<f64>,
    probs: Vec<f64>,
}

impl RealConstellation {
    /// Points must be strictly ascending within [−1, 1].
    pub fn new(points: Vec<f64>, probs: Vec<f64>) -> Result<Self, Error> {
        if points.is_empty() || points.len() != probs.len() {
            return Err(Error::invalid("points/probs must be equal-length and non-empty"));
        }
        for w in points.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::invalid("real constellation points must be ascending and distinct"));
            }
        }
        if points[0] < -1.0 - EPS_TOL || points[points.len() - 1] > 1.0 + EPS_TOL {
            return Err(Error::invalid("real constellation points must lie in [-1, 1]"));
        }
        let probs = validate_probs(probs)?;
        Ok(RealConstellation { points, probs })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

fn validate_probs(mut probs: Vec<f64>) -> Result<Vec<f64>, Error> {
    let mut sum = 0.0;
    for &p in &probs {
        if !(p > 0.0) || p > 1.0 + PROB_SUM_TOL {
            return Err(Error::invalid(format!("probability {p} outside (0, 1]")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::invalid(format!("probabilities sum to {sum}, not 1")));
    }
    for p in &mut probs {
        *p /= sum;
    }
    Ok(probs)
}

/// Source entropy H(Γ) = −Σ q log₂ q in bits; caps the information rate of
/// any finite constellation.
pub fn source_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .map(|&q| if q > 0.0 { -q * q.log2() } else { 0.0 })
        .sum()
}

// ---------------------------------------------------------------------------
// Received-radius PDFs under UIP inputs
// ---------------------------------------------------------------------------

/// Rician mixture PDF of the received radius b = |Γ + w| for a DAUIP input:
/// f_b(b) = 2ρb Σ_k p_k e^(−ρ(b−a_k)²) g(2ρ a_k b), g(x) = I₀(x)e^(−x).
pub fn radius_pdf_dauip(b: f64, d: &DauipDistribution, rho: Snr) -> f64 {
    if b < 0.0 {
        return 0.0;
    }
    let r = rho.linear();
    let mut mix = 0.0;
    for (&a, &p) in d.radii().iter().zip(d.probs()) {
        let e = -r * (b - a) * (b - a);
        if e > -746.0 {
            mix += p * e.exp() * i0e_unchecked(2.0 * r * a * b);
        }
    }
    2.0 * r * b * mix
}

/// ln f_b for the same mixture, max-shifted so it stays finite out to the
/// far tails; −inf where the density underflows to zero.
fn radius_log_pdf_dauip(b: f64, radii: &[f64], probs: &[f64], r: f64) -> f64 {
    if b <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let term = |a: f64, p: f64| p.ln() - r * (b - a) * (b - a) + i0e_unchecked(2.0 * r * a * b).ln();
    let mut max = f64::NEG_INFINITY;
    for (&a, &p) in radii.iter().zip(probs) {
        let t = term(a, p);
        if t > max {
            max = t;
        }
    }
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut s = 0.0;
    for (&a, &p) in radii.iter().zip(probs) {
        let t = term(a, p);
        if t > max - LSE_CUTOFF {
            s += (t - max).exp();
        }
    }
    (2.0 * r * b).ln() + max + s.ln()
}

/// Received-radius PDF for a uniform distribution over the unit disk:
/// f_b(b) = 2b (1 − Q₁(b√(2ρ), √(2ρ))).
pub fn radius_pdf_uniform_disk(b: f64, rho: Snr) -> f64 {
    if b < 0.0 {
        return 0.0;
    }
    let s = (2.0 * rho.linear()).sqrt();
    2.0 * b * (1.0 - marcum_q1_unchecked(b * s, s))
}

/// Integration upper limit for radius densities; the paper's truncation
/// rule b ∈ [0, 1 + 5/√ρ] leaves only ~e^(−25) of tail mass.
pub fn radius_integration_limit(rho: Snr) -> f64 {
    1.0 + 5.0 / rho.linear().sqrt()
}

// ---------------------------------------------------------------------------
// Mutual information, UIP inputs (1-D radial integrals)
// ---------------------------------------------------------------------------

/// I(y; Γ) in bpcu for any UIP input, from its received-radius density:
/// I = log₂(2ρ/e) − ∫ f_b(b) log₂(f_b(b)/b) db.
///
/// `radius_pdf` must be the valid density of b = |y| under the input law.
pub fn mi_uip<F>(radius_pdf: F, rho: Snr) -> Result<f64, Error>
where
    F: Fn(f64) -> f64,
{
    mi_uip_split(radius_pdf, rho, &[])
}

fn mi_uip_split<F>(radius_pdf: F, rho: Snr, breakpoints: &[f64]) -> Result<f64, Error>
where
    F: Fn(f64) -> f64,
{
    let hi = radius_integration_limit(rho);
    let q = adaptive_gk_split(
        |b| {
            let f = radius_pdf(b);
            if f <= 0.0 || b <= 0.0 {
                0.0
            } else {
                f * (f / b).ln()
            }
        },
        0.0,
        hi,
        1e-9,
        1e-11,
        breakpoints,
    )?;
    let nats = (2.0 * rho.linear() / std::f64::consts::E).ln() - q.value;
    Ok(nats * LOG2_E)
}

/// I(y; Γ) in bpcu for a DAUIP input (log-domain integrand, split at the
/// circle radii).
pub fn mi_dauip(d: &DauipDistribution, rho: Snr) -> Result<f64, Error> {
    let r = rho.linear();
    let hi = radius_integration_limit(rho);
    let q = adaptive_gk_split(
        |b| {
            let lf = radius_log_pdf_dauip(b, d.radii(), d.probs(), r);
            if lf == f64::NEG_INFINITY {
                0.0
            } else {
                lf.exp() * (lf - b.ln())
            }
        },
        0.0,
        hi,
        1e-11,
        1e-13,
        d.radii(),
    )?;
    let nats = (2.0 * r / std::f64::consts::E).ln() - q.value;
    Ok(nats * LOG2_E)
}

/// MI plus its gradient with respect to every circle radius and circle
/// probability, all from one adaptive pass over the shared integrand.
///
/// Returns (mi_bpcu, dI/da in bpcu per unit radius, dI/dp in bpcu per unit
/// probability). The probability gradient ignores the simplex constraint;
/// apply the appropriate chain rule on top.
pub fn mi_dauip_grad(d: &DauipDistribution, rho: Snr) -> Result<(f64, Vec<f64>, Vec<f64>), Error> {
    mi_dauip_grad_raw(d.radii(), d.probs(), rho)
}

/// Same as [`mi_dauip_grad`] for raw circle slices: the mixture formulas
/// need no ordering, and the capacity solver's iterates keep circles in
/// their optimization-variable order (possibly unsorted or coincident).
pub(crate) fn mi_dauip_grad_raw(
    radii: &[f64],
    probs: &[f64],
    rho: Snr,
) -> Result<(f64, Vec<f64>, Vec<f64>), Error> {
    let r = rho.linear();
    let k = radii.len();
    let radii = radii.to_vec();
    let probs = probs.to_vec();
    let hi = radius_integration_limit(rho);
    let dim = 1 + 2 * k;

    // out[0]: entropy-type integrand; out[1..1+k]: ∂f/∂p_k weighted;
    // out[1+k..]: ∂f/∂a_k weighted. The common weight is (ln(f/b) + 1).
    let (vals, _err) = adaptive_gk_vec(
        |b, out| {
            out.fill(0.0);
            if b <= 0.0 {
                return;
            }
            let lf = radius_log_pdf_dauip(b, &radii, &probs, r);
            if lf == f64::NEG_INFINITY {
                return;
            }
            let w = lf - b.ln();
            out[0] = lf.exp() * w;
            let wg = w + 1.0;
            for i in 0..k {
                let a = radii[i];
                let e = -r * (b - a) * (b - a);
                if e <= -746.0 {
                    continue;
                }
                let x = 2.0 * r * a * b;
                let g = i0e_unchecked(x);
                let comp = 2.0 * r * b * e.exp();
                // ∂f/∂p_i
                out[1 + i] = comp * g * wg;
                // ∂f/∂a_i: d/da [e^(−ρ(b−a)²) g(2ρab)]
                let gp = i1e_unchecked(x) - g;
                out[1 + k + i] = probs[i] * comp * (2.0 * r * (b - a) * g + 2.0 * r * b * gp) * wg;
            }
        },
        0.0,
        hi,
        dim,
        3e-12,
        1e-13,
        &radii,
    )?;

    let nats = (2.0 * r / std::f64::consts::E).ln() - vals[0];
    let mi = nats * LOG2_E;
    let dp: Vec<f64> = (0..k).map(|i| -vals[1 + i] * LOG2_E).collect();
    let da: Vec<f64> = (0..k).map(|i| -vals[1 + k + i] * LOG2_E).collect();
    Ok((mi, da, dp))
}

// ---------------------------------------------------------------------------
// Mutual information, complex finite constellations (2-D)
// ---------------------------------------------------------------------------

/// Options for the two-dimensional entropy cubature.
#[derive(Debug, Clone, Copy)]
pub struct MiOptions {
    /// Gauss–Hermite nodes per axis for the per-symbol expectation.
    pub gh_nodes: usize,
    /// Evaluate the per-symbol expectations on the rayon pool.
    pub parallel: bool,
}

impl Default for MiOptions {
    fn default() -> Self {
        MiOptions {
            gh_nodes: 64,
            parallel: exec::parallel_available(),
        }
    }
}

/// ln f_y(y) of the received-signal mixture
/// f_y(y) = (ρ/π) Σ_m q_m exp(−ρ|y−Γ_m|²), max-shifted. Two passes over
/// the mixture: the exponent arithmetic is cheap, the exp calls are not,
/// and terms below the cutoff never reach one.
fn log_receive_pdf_complex(y: Complex64, points: &[Complex64], ln_probs: &[f64], r: f64) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for (p, &lq) in points.iter().zip(ln_probs) {
        let dr = y.re - p.re;
        let di = y.im - p.im;
        let e = lq - r * (dr * dr + di * di);
        if e > max {
            max = e;
        }
    }
    let mut s = 0.0;
    let cutoff = max - LSE_CUTOFF;
    for (p, &lq) in points.iter().zip(ln_probs) {
        let dr = y.re - p.re;
        let di = y.im - p.im;
        let e = lq - r * (dr * dr + di * di);
        if e > cutoff {
            s += (e - max).exp();
        }
    }
    (r / std::f64::consts::PI).ln() + max + s.ln()
}

/// I(y; Γ) in bpcu of a complex finite constellation, by the 2-D receive
/// entropy integral I = h(y) + log₂(ρ/(πe)).
///
/// The entropy decomposes over mixture components,
/// h(y) = −Σ_m q_m E_{y~N(Γ_m)}[ln f_y], and each expectation is a tensor
/// Gauss–Hermite cubature in the noise variables, which handles the
/// truncation scale 1/√ρ automatically.
pub fn mi_complex_discrete(c: &DiscreteConstellation, rho: Snr) -> Result<f64, Error> {
    mi_complex_discrete_with(c, rho, &MiOptions::default())
}

pub fn mi_complex_discrete_with(
    c: &DiscreteConstellation,
    rho: Snr,
    opts: &MiOptions,
) -> Result<f64, Error> {
    if c.is_empty() {
        return Err(Error::invalid("empty constellation"));
    }
    let r = rho.linear();
    let gh = GaussHermite::new(opts.gh_nodes);
    let points = c.points().to_vec();
    let ln_probs: Vec<f64> = c.probs().iter().map(|&q| q.ln()).collect();
    let sigma = 1.0 / r.sqrt();
    let inv_pi = 1.0 / std::f64::consts::PI;

    // −q_m E_m[ln f], accumulated per component in deterministic order.
    let contributions = exec::map_indexed(points.len(), opts.parallel, |m| {
        let mut acc = 0.0;
        for (i, &s) in gh.nodes.iter().enumerate() {
            let wi = gh.weights[i];
            for (j, &t) in gh.nodes.iter().enumerate() {
                let y = points[m] + Complex64::new(s * sigma, t * sigma);
                acc += wi * gh.weights[j] * log_receive_pdf_complex(y, &points, &ln_probs, r);
            }
        }
        -c.probs()[m] * acc * inv_pi
    });
    let h: f64 = contributions.iter().sum();
    let nats = h + (r / (std::f64::consts::PI * std::f64::consts::E)).ln();
    Ok(nats * LOG2_E)
}

/// MI of a complex constellation plus gradients with respect to each point
/// (∂I/∂Re Γ_m, ∂I/∂Im Γ_m) and each raw probability, sharing the cubature
/// nodes of the MI evaluation. Used by the circuit optimizer.
#[allow(clippy::type_complexity)]
pub fn mi_complex_discrete_grad(
    c: &DiscreteConstellation,
    rho: Snr,
    opts: &MiOptions,
) -> Result<(f64, Vec<Complex64>, Vec<f64>), Error> {
    if c.is_empty() {
        return Err(Error::invalid("empty constellation"));
    }
    let r = rho.linear();
    let gh = GaussHermite::new(opts.gh_nodes);
    let points = c.points().to_vec();
    let probs = c.probs().to_vec();
    let ln_probs: Vec<f64> = probs.iter().map(|&q| q.ln()).collect();
    let sigma = 1.0 / r.sqrt();
    let inv_pi = 1.0 / std::f64::consts::PI;
    let sqrt_r = r.sqrt();

    // Per component: (E[ln f], E[2√ρ s (ln f + 1)], E[2√ρ t (ln f + 1)]).
    let per_symbol = exec::map_indexed(points.len(), opts.parallel, |m| {
        let mut e_lf = 0.0;
        let mut e_gs = 0.0;
        let mut e_gt = 0.0;
        for (i, &s) in gh.nodes.iter().enumerate() {
            let wi = gh.weights[i];
            for (j, &t) in gh.nodes.iter().enumerate() {
                let w = wi * gh.weights[j];
                let y = points[m] + Complex64::new(s * sigma, t * sigma);
                let lf = log_receive_pdf_complex(y, &points, &ln_probs, r);
                e_lf += w * lf;
                e_gs += w * s * (lf + 1.0);
                e_gt += w * t * (lf + 1.0);
            }
        }
        (e_lf * inv_pi, e_gs * inv_pi, e_gt * inv_pi)
    });

    let mut h = 0.0;
    let mut grad_points = Vec::with_capacity(points.len());
    let mut grad_probs = Vec::with_capacity(points.len());
    for (m, &(e_lf, e_gs, e_gt)) in per_symbol.iter().enumerate() {
        h -= probs[m] * e_lf;
        // ∂h/∂Γ_m = −q_m E[2ρ(y−Γ_m)(ln f + 1)] with (y−Γ_m) = node/√ρ.
        let gre = -probs[m] * 2.0 * sqrt_r * e_gs * LOG2_E;
        let gim = -probs[m] * 2.0 * sqrt_r * e_gt * LOG2_E;
        grad_points.push(Complex64::new(gre, gim));
        // ∂h/∂q_m = −E[ln f] − 1.
        grad_probs.push((-e_lf - 1.0) * LOG2_E);
    }
    let nats = h + (r / (std::f64::consts::PI * std::f64::consts::E)).ln();
    Ok((nats * LOG2_E, grad_points, grad_probs))
}

// ---------------------------------------------------------------------------
// Mutual information, real constellations (1-D)
// ---------------------------------------------------------------------------

fn log_receive_pdf_real(y: f64, points: &[f64], ln_probs: &[f64], r: f64) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for (&p, &lq) in points.iter().zip(ln_probs) {
        let e = lq - r * (y - p) * (y - p);
        if e > max {
            max = e;
        }
    }
    let mut s = 0.0;
    let cutoff = max - LSE_CUTOFF;
    for (&p, &lq) in points.iter().zip(ln_probs) {
        let e = lq - r * (y - p) * (y - p);
        if e > cutoff {
            s += (e - max).exp();
        }
    }
    0.5 * (r / std::f64::consts::PI).ln() + max + s.ln()
}

/// I(y_re; Γ_re) in bpcu over the real channel y = Γ + w,
/// w ~ N(0, 1/(2ρ)): I = ½ log₂(ρ/(πe)) − ∫ f_y log₂ f_y dy with
/// f_y(y) = √(ρ/π) Σ q_m exp(−ρ(y−Γ_m)²).
pub fn mi_real_discrete(c: &RealConstellation, rho: Snr) -> Result<f64, Error> {
    let r = rho.linear();
    let points = c.points().to_vec();
    let ln_probs: Vec<f64> = c.probs().iter().map(|&q| q.ln()).collect();
    let pad = 9.0 / r.sqrt();
    let (lo, hi) = (points[0] - pad, points[points.len() - 1] + pad);
    let q = adaptive_gk_split(
        |y| {
            let lf = log_receive_pdf_real(y, &points, &ln_probs, r);
            let f = lf.exp();
            if f <= 0.0 {
                0.0
            } else {
                f * lf
            }
        },
        lo,
        hi,
        3e-12,
        1e-13,
        &points,
    )?;
    let nats = 0.5 * (r / (std::f64::consts::PI * std::f64::consts::E)).ln() - q.value;
    Ok(nats * LOG2_E)
}

/// MI of a real constellation plus gradients with respect to the point
/// positions and raw probabilities. Used by the resistive-capacity solver.
pub fn mi_real_discrete_grad(
    c: &RealConstellation,
    rho: Snr,
) -> Result<(f64, Vec<f64>, Vec<f64>), Error> {
    mi_real_discrete_grad_raw(c.points(), c.probs(), rho)
}

/// Gradient path for raw (possibly unsorted or coincident) point slices,
/// used on solver iterates.
pub(crate) fn mi_real_discrete_grad_raw(
    points: &[f64],
    probs: &[f64],
    rho: Snr,
) -> Result<(f64, Vec<f64>, Vec<f64>), Error> {
    let r = rho.linear();
    let m = points.len();
    let points = points.to_vec();
    let probs = probs.to_vec();
    let ln_probs: Vec<f64> = probs.iter().map(|&q| q.ln()).collect();
    let pad = 9.0 / r.sqrt();
    let lo = points.iter().cloned().fold(f64::INFINITY, f64::min) - pad;
    let hi = points.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + pad;
    let dim = 1 + 2 * m;

    let (vals, _err) = adaptive_gk_vec(
        |y, out| {
            out.fill(0.0);
            let lf = log_receive_pdf_real(y, &points, &ln_probs, r);
            let f = lf.exp();
            if f <= 0.0 {
                return;
            }
            out[0] = f * lf;
            let wg = lf + 1.0;
            let norm = (r / std::f64::consts::PI).sqrt();
            for i in 0..m {
                let d = y - points[i];
                let e = -r * d * d;
                if e <= -746.0 {
                    continue;
                }
                let n = norm * e.exp();
                // ∂f/∂q_i and ∂f/∂Γ_i, each times (ln f + 1).
                out[1 + i] = n * wg;
                out[1 + m + i] = probs[i] * n * 2.0 * r * d * wg;
            }
        },
        lo,
        hi,
        dim,
        3e-12,
        1e-13,
        &points,
    )?;

    let nats = 0.5 * (r / (std::f64::consts::PI * std::f64::consts::E)).ln() - vals[0];
    let dq: Vec<f64> = (0..m).map(|i| -vals[1 + i] * LOG2_E).collect();
    let dpos: Vec<f64> = (0..m).map(|i| -vals[1 + m + i] * LOG2_E).collect();
    Ok((nats * LOG2_E, dpos, dq))
}

// ---------------------------------------------------------------------------
// Constellation file format
// ---------------------------------------------------------------------------

/// One symbol of the constellation interchange format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstellationPointRecord {
    pub re: f64,
    pub im: f64,
    pub prob: f64,
}

/// Ring-layout metadata attached to APSK design files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApskMetadata {
    pub design_snr_db: f64,
    pub k: usize,
    pub ring_sizes: Vec<usize>,
    pub ring_radii: Vec<f64>,
    pub ring_probs: Vec<f64>,
}

/// JSON schema of constellation files consumed and produced by the CLI:
/// `{"points": [{"re", "im", "prob"}, …]}` with probabilities summing to
/// 1 ± 1e−9, plus an optional design-metadata block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstellationFile {
    pub points: Vec<ConstellationPointRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<ApskMetadata>,
}

impl ConstellationFile {
    pub fn from_constellation(c: &DiscreteConstellation) -> Self {
        ConstellationFile {
            points: c
                .points()
                .iter()
                .zip(c.probs())
                .map(|(p, &q)| ConstellationPointRecord {
                    re: p.re,
                    im: p.im,
                    prob: q,
                })
                .collect(),
            metadata: None,
        }
    }

    pub fn to_constellation(&self) -> Result<DiscreteConstellation, Error> {
        let points = self
            .points
            .iter()
            .map(|r| Complex64::new(r.re, r.im))
            .collect();
        let probs = self.points.iter().map(|r| r.prob).collect();
        DiscreteConstellation::new(points, probs)
    }
}
