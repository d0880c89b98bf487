//! Switched lumped-element load synthesis: enumerate the 2^L reflection
//! coefficients realized by a bank of switched parallel capacitors in series
//! with switched resistors, and jointly optimize all component values and
//! symbol probabilities for maximum rate at a design SNR.

use crate::exec;
use crate::mi::{
    mi_complex_discrete_grad, mi_complex_discrete_with, DiscreteConstellation, MiOptions,
};
use crate::opt::{self, LbfgsOptions};
use crate::{Error, Snr};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Load circuit shape: `n_caps` parallel switched capacitors (plus the
/// always-present fixed reactive element that tunes the bank near
/// resonance) in series with a chain of `n_res` switched resistors. L
/// switches give 2^L load states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchedLoadTopology {
    pub n_caps: usize,
    pub n_res: usize,
}

impl SwitchedLoadTopology {
    pub fn new(n_caps: usize, n_res: usize) -> Result<Self, Error> {
        if n_caps + n_res == 0 {
            return Err(Error::invalid("need at least one switched element"));
        }
        if n_caps + n_res > 16 {
            return Err(Error::invalid("more than 2^16 load states is not practical"));
        }
        Ok(SwitchedLoadTopology { n_caps, n_res })
    }

    pub fn switch_count(&self) -> usize {
        self.n_caps + self.n_res
    }

    pub fn state_count(&self) -> usize {
        1 << self.switch_count()
    }
}

/// Normalized component values: susceptances in units of 1/R_T, resistances
/// in units of R_T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentValues {
    pub cap_susceptances: Vec<f64>,
    pub res_resistances: Vec<f64>,
    pub fixed_susceptance: f64,
}

impl ComponentValues {
    fn validate(&self, t: &SwitchedLoadTopology) -> Result<(), Error> {
        if self.cap_susceptances.len() != t.n_caps || self.res_resistances.len() != t.n_res {
            return Err(Error::invalid("component count does not match topology"));
        }
        for &r in &self.res_resistances {
            if !(r >= 0.0) {
                return Err(Error::invalid(format!("negative resistance {r}")));
            }
        }
        for &b in &self.cap_susceptances {
            if !b.is_finite() {
                return Err(Error::invalid("susceptance must be finite"));
            }
        }
        if !self.fixed_susceptance.is_finite() {
            return Err(Error::invalid("fixed susceptance must be finite"));
        }
        Ok(())
    }
}

/// Reflection coefficient of one switch word. Bits 0..n_caps select
/// capacitors, the remaining bits resistors. A vanishing total susceptance
/// opens the series branch: Γ = 1 regardless of the resistor chain.
fn gamma_of_state(word: usize, t: &SwitchedLoadTopology, v: &ComponentValues) -> Complex64 {
    let mut b = v.fixed_susceptance;
    for (i, &bi) in v.cap_susceptances.iter().enumerate() {
        if word >> i & 1 == 1 {
            b += bi;
        }
    }
    let mut r = 0.0;
    for (j, &rj) in v.res_resistances.iter().enumerate() {
        if word >> (t.n_caps + j) & 1 == 1 {
            r += rj;
        }
    }
    if b.abs() < 1e-12 {
        return Complex64::new(1.0, 0.0);
    }
    let z = Complex64::new(r, -1.0 / b);
    (z - 1.0) / (z + 1.0)
}

/// Enumerate all 2^L load states as a uniform-probability constellation.
pub fn enumerate_constellation(
    t: &SwitchedLoadTopology,
    v: &ComponentValues,
) -> Result<DiscreteConstellation, Error> {
    v.validate(t)?;
    let m = t.state_count();
    let points: Vec<Complex64> = (0..m).map(|w| gamma_of_state(w, t, v)).collect();
    DiscreteConstellation::uniform(points)
}

/// A synthesized switched-load design.
#[derive(Debug, Clone)]
pub struct CircuitDesign {
    pub topology: SwitchedLoadTopology,
    pub values: ComponentValues,
    /// Per-state symbol probabilities (index = switch word).
    pub probs: Vec<f64>,
    pub constellation: DiscreteConstellation,
    pub design_snr: Snr,
    pub mi_bpcu: f64,
    pub converged: bool,
}

/// Knobs of the joint optimization. The main phase runs on a coarse
/// cubature (the rate surface is already accurate to ~1e−5 there), a short
/// polish phase refines on a finer one, and the reported rate uses the full
/// reference rule.
#[derive(Debug, Clone, Copy)]
pub struct CircuitOptimizeOptions {
    /// Gauss–Hermite nodes per axis during the main phase.
    pub gh_nodes: usize,
    pub max_iters: usize,
    /// Nodes and iteration budget of the polish phase (0 iters to skip).
    pub polish_gh_nodes: usize,
    pub polish_max_iters: usize,
    /// Gauss–Hermite nodes for the reported (final) rate.
    pub report_gh_nodes: usize,
}

impl Default for CircuitOptimizeOptions {
    fn default() -> Self {
        CircuitOptimizeOptions {
            gh_nodes: 16,
            max_iters: 400,
            polish_gh_nodes: 32,
            polish_max_iters: 80,
            report_gh_nodes: 64,
        }
    }
}

/// Jointly optimize component values and symbol probabilities from a given
/// starting point. Component magnitudes are optimized in the log domain
/// (they stay positive), the fixed susceptance freely, probabilities
/// through softmax. Each call is single-threaded and deterministic.
pub fn optimize_circuit_from(
    t: &SwitchedLoadTopology,
    design_snr: Snr,
    init_values: &ComponentValues,
    init_probs: &[f64],
    opts: &CircuitOptimizeOptions,
) -> Result<CircuitDesign, Error> {
    init_values.validate(t)?;
    let m = t.state_count();
    if init_probs.len() != m {
        return Err(Error::invalid("probability vector must cover every state"));
    }
    let (nc, nr) = (t.n_caps, t.n_res);
    let dim = nc + nr + 1 + m;

    let mut x0 = Vec::with_capacity(dim);
    for &b in &init_values.cap_susceptances {
        x0.push(b.max(1e-9).ln());
    }
    for &r in &init_values.res_resistances {
        x0.push(r.max(1e-9).ln());
    }
    x0.push(init_values.fixed_susceptance);
    for &q in init_probs {
        x0.push(q.max(1e-12).ln());
    }

    let topology = *t;
    let objective_at = |nodes: usize| {
        let mi_opts = MiOptions {
            gh_nodes: nodes,
            parallel: false,
        };
        move |x: &[f64], grad: &mut [f64]| -> f64 {
            let (values, probs) = decode_params(x, &topology);
            let points: Vec<Complex64> =
                (0..m).map(|w| gamma_of_state(w, &topology, &values)).collect();
            let c = match DiscreteConstellation::new(points.clone(), probs.clone()) {
                Ok(c) => c,
                Err(_) => {
                    grad.fill(0.0);
                    return f64::NEG_INFINITY;
                }
            };
            match mi_complex_discrete_grad(&c, design_snr, &mi_opts) {
                Ok((mi, dgamma, dq)) => {
                    circuit_chain_gradient(&topology, &values, &probs, &dgamma, &dq, grad);
                    mi
                }
                Err(_) => {
                    grad.fill(0.0);
                    f64::NEG_INFINITY
                }
            }
        }
    };

    let mut result = opt::maximize(
        objective_at(opts.gh_nodes),
        &x0,
        &LbfgsOptions {
            max_iters: opts.max_iters,
            grad_tol: 1e-6,
            ..Default::default()
        },
    );
    if opts.polish_max_iters > 0 && opts.polish_gh_nodes != opts.gh_nodes {
        result = opt::maximize(
            objective_at(opts.polish_gh_nodes),
            &result.x,
            &LbfgsOptions {
                max_iters: opts.polish_max_iters,
                grad_tol: 1e-6,
                ..Default::default()
            },
        );
    }

    let (values, probs) = decode_params(&result.x, t);
    let points: Vec<Complex64> = (0..m).map(|w| gamma_of_state(w, t, &values)).collect();
    let constellation = DiscreteConstellation::new(points, probs.clone())?;
    let report_opts = MiOptions {
        gh_nodes: opts.report_gh_nodes,
        parallel: false,
    };
    let mi_bpcu = mi_complex_discrete_with(&constellation, design_snr, &report_opts)?;
    Ok(CircuitDesign {
        topology: *t,
        values,
        probs,
        constellation,
        design_snr,
        mi_bpcu,
        converged: result.converged,
    })
}

fn decode_params(x: &[f64], t: &SwitchedLoadTopology) -> (ComponentValues, Vec<f64>) {
    let (nc, nr) = (t.n_caps, t.n_res);
    let m = t.state_count();
    let values = ComponentValues {
        cap_susceptances: x[..nc].iter().map(|&v| v.exp()).collect(),
        res_resistances: x[nc..nc + nr].iter().map(|&v| v.exp()).collect(),
        fixed_susceptance: x[nc + nr],
    };
    let logits = &x[nc + nr + 1..nc + nr + 1 + m];
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits
        .iter()
        .map(|&v| (v - max).max(-700.0).exp())
        .collect();
    let total: f64 = exps.iter().sum();
    (values, exps.iter().map(|&e| e / total).collect())
}

/// Pull (∂I/∂Γ_s, ∂I/∂q_s) back onto the circuit parameters through the
/// Möbius map Γ = (z−1)/(z+1), z = R − j/B.
fn circuit_chain_gradient(
    t: &SwitchedLoadTopology,
    values: &ComponentValues,
    probs: &[f64],
    dgamma: &[Complex64],
    dq: &[f64],
    grad: &mut [f64],
) {
    let (nc, nr) = (t.n_caps, t.n_res);
    let m = t.state_count();
    grad.fill(0.0);
    for word in 0..m {
        let mut b = values.fixed_susceptance;
        for (i, &bi) in values.cap_susceptances.iter().enumerate() {
            if word >> i & 1 == 1 {
                b += bi;
            }
        }
        let mut r = 0.0;
        for (j, &rj) in values.res_resistances.iter().enumerate() {
            if word >> (nc + j) & 1 == 1 {
                r += rj;
            }
        }
        // Clamp away from the open-circuit pole; the composite derivative
        // dΓ/dB stays bounded (→ −2j) across B = 0.
        let b_safe = if b.abs() < 1e-12 {
            if b >= 0.0 {
                1e-12
            } else {
                -1e-12
            }
        } else {
            b
        };
        let z = Complex64::new(r, -1.0 / b_safe);
        let dgamma_dz = 2.0 / ((z + 1.0) * (z + 1.0));
        let dz_db = Complex64::new(0.0, 1.0 / (b_safe * b_safe));
        let dg = dgamma[word];
        // Real inner product <∂I/∂Γ, dΓ/dparam>.
        let apply = |dgamma_dparam: Complex64| -> f64 {
            dg.re * dgamma_dparam.re + dg.im * dgamma_dparam.im
        };
        let d_db = apply(dgamma_dz * dz_db);
        for i in 0..nc {
            if word >> i & 1 == 1 {
                // Chain through the log parameterization.
                grad[i] += d_db * values.cap_susceptances[i];
            }
        }
        for j in 0..nr {
            if word >> (nc + j) & 1 == 1 {
                grad[nc + j] += apply(dgamma_dz) * values.res_resistances[j];
            }
        }
        grad[nc + nr] += d_db;
    }
    // Softmax chain for the probabilities.
    let mean: f64 = probs.iter().zip(dq).map(|(&p, &d)| p * d).sum();
    for s in 0..m {
        grad[nc + nr + 1 + s] = probs[s] * (dq[s] - mean);
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let v: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
    (-2.0 * u.ln()).sqrt() * v.cos()
}

/// Random starting point: a geometric susceptance/resistance ladder with
/// log-normal jitter and a negative fixed susceptance, so the reachable
/// reactances straddle resonance.
pub fn random_initial_values(
    t: &SwitchedLoadTopology,
    seed: u64,
) -> (ComponentValues, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let caps: Vec<f64> = (0..t.n_caps)
        .map(|i| 0.25 * 2f64.powi(i as i32) * (0.5 * standard_normal(&mut rng)).exp())
        .collect();
    let res: Vec<f64> = (0..t.n_res)
        .map(|j| 0.3 * 2f64.powi(j as i32) * (0.5 * standard_normal(&mut rng)).exp())
        .collect();
    let cap_sum: f64 = caps.iter().sum();
    let fixed = -cap_sum * rng.gen_range(0.3..0.8);
    let values = ComponentValues {
        cap_susceptances: caps,
        res_resistances: res,
        fixed_susceptance: fixed,
    };
    let probs = vec![1.0 / t.state_count() as f64; t.state_count()];
    (values, probs)
}

/// One optimization run from a seeded random start.
pub fn optimize_circuit(
    t: &SwitchedLoadTopology,
    design_snr: Snr,
    seed: u64,
) -> Result<CircuitDesign, Error> {
    let (values, probs) = random_initial_values(t, seed);
    optimize_circuit_from(t, design_snr, &values, &probs, &CircuitOptimizeOptions::default())
}

/// Multi-start optimization: seeds run concurrently (each run itself
/// single-threaded and deterministic), best final rate wins.
pub fn optimize_circuit_multi(
    t: &SwitchedLoadTopology,
    design_snr: Snr,
    seeds: &[u64],
    opts: &CircuitOptimizeOptions,
) -> Result<CircuitDesign, Error> {
    if seeds.is_empty() {
        return Err(Error::invalid("need at least one seed"));
    }
    let results = exec::map_indexed(seeds.len(), exec::parallel_available(), |i| {
        let (values, probs) = random_initial_values(t, seeds[i]);
        optimize_circuit_from(t, design_snr, &values, &probs, opts)
    });
    let mut best: Option<CircuitDesign> = None;
    for r in results {
        let d = r?;
        if best.as_ref().map_or(true, |b| d.mi_bpcu > b.mi_bpcu) {
            best = Some(d);
        }
    }
    Ok(best.expect("at least one seed"))
}

// ---------------------------------------------------------------------------
// Design interchange format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateRecord {
    pub switch_word: String,
    pub gamma_re: f64,
    pub gamma_im: f64,
    pub prob: f64,
}

/// JSON schema of emitted circuit designs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircuitDesignFile {
    pub topology: SwitchedLoadTopology,
    pub normalized_values: ComponentValues,
    pub state_table: Vec<StateRecord>,
    pub mi_bpcu: f64,
    pub design_snr_db: f64,
    pub converged: bool,
}

impl CircuitDesignFile {
    pub fn from_design(d: &CircuitDesign) -> Self {
        let l = d.topology.switch_count();
        let state_table = d
            .constellation
            .points()
            .iter()
            .zip(d.constellation.probs())
            .enumerate()
            .map(|(w, (g, &q))| StateRecord {
                switch_word: format!("{w:0l$b}"),
                gamma_re: g.re,
                gamma_im: g.im,
                prob: q,
            })
            .collect();
        CircuitDesignFile {
            topology: d.topology,
            normalized_values: d.values.clone(),
            state_table,
            mi_bpcu: d.mi_bpcu,
            design_snr_db: d.design_snr.db(),
            converged: d.converged,
        }
    }
}
