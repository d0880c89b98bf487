//! Numerical integration kernels: a QUADPACK-style adaptive 21-point
//! Gauss–Kronrod rule for finite intervals and Gauss–Hermite rules for
//! Gaussian-weighted expectations.

use crate::Error;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

// 21-point Kronrod abscissae (positive half) and weights, with the embedded
// 10-point Gauss weights. QUADPACK DQK21 constants.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quad {
    pub value: f64,
    pub abs_error: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

/// One 21-point Kronrod pass over `[a, b]` for an n-component integrand.
/// Returns per-component results and a shared error estimate.
fn qk21_vec<F>(f: &F, a: f64, b: f64, dim: usize, out: &mut [f64], scratch: &mut [f64]) -> f64
where
    F: Fn(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let mut res_kronrod = vec![0.0; dim];
    let mut res_gauss = vec![0.0; dim];
    let mut res_abs = 0.0;
    // Flat storage of the 21 evaluations for the asc estimate.
    let mut evals: Vec<f64> = Vec::with_capacity(21 * dim);
    let mut weights: Vec<f64> = Vec::with_capacity(21);

    f(center, scratch);
    for d in 0..dim {
        res_kronrod[d] = WGK[10] * scratch[d];
    }
    res_abs += WGK[10] * scratch.iter().take(dim).map(|v| v.abs()).sum::<f64>();
    evals.extend_from_slice(&scratch[..dim]);
    weights.push(WGK[10]);

    for (j, &wg) in WG.iter().enumerate() {
        let i = 2 * j + 1;
        let dx = half * XGK[i];
        for &x in &[center - dx, center + dx] {
            f(x, scratch);
            for d in 0..dim {
                res_kronrod[d] += WGK[i] * scratch[d];
                res_gauss[d] += wg * scratch[d];
            }
            res_abs += WGK[i] * scratch.iter().take(dim).map(|v| v.abs()).sum::<f64>();
            evals.extend_from_slice(&scratch[..dim]);
            weights.push(WGK[i]);
        }
    }
    for j in 0..5 {
        let i = 2 * j;
        let dx = half * XGK[i];
        for &x in &[center - dx, center + dx] {
            f(x, scratch);
            for d in 0..dim {
                res_kronrod[d] += WGK[i] * scratch[d];
            }
            res_abs += WGK[i] * scratch.iter().take(dim).map(|v| v.abs()).sum::<f64>();
            evals.extend_from_slice(&scratch[..dim]);
            weights.push(WGK[i]);
        }
    }

    let mut err_sum = 0.0;
    let mut res_asc = 0.0;
    for d in 0..dim {
        let mean = res_kronrod[d] / 2.0;
        let asc: f64 = weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * (evals[k * dim + d] - mean).abs())
            .sum();
        res_asc += asc;
        err_sum += (res_kronrod[d] - res_gauss[d]).abs();
    }

    for d in 0..dim {
        out[d] = res_kronrod[d] * half;
    }
    rescale_error(err_sum * half, res_abs * half.abs(), res_asc * half.abs())
}

struct Segment {
    a: f64,
    b: f64,
    values: Vec<f64>,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// Adaptively integrate an n-component integrand over `[a, b]`, subdividing
/// the worst segment until the summed error estimate drops below
/// `max(abs_tol, rel_tol · |result|)` (componentwise on the L1 norm).
///
/// `breakpoints` seeds the initial partition; useful when the integrand has
/// known ridges (constellation points, circle radii).
pub fn adaptive_gk_vec<F>(
    f: F,
    a: f64,
    b: f64,
    dim: usize,
    abs_tol: f64,
    rel_tol: f64,
    breakpoints: &[f64],
) -> Result<(Vec<f64>, f64), Error>
where
    F: Fn(f64, &mut [f64]),
{
    const MAX_SEGMENTS: usize = 4096;
    if !(b > a) {
        return Err(Error::invalid(format!("bad interval [{a}, {b}]")));
    }
    let mut edges: Vec<f64> = std::iter::once(a)
        .chain(breakpoints.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    edges.sort_by(|p, q| p.partial_cmp(q).unwrap());
    edges.dedup();

    let mut scratch = vec![0.0; dim];
    let mut heap: BinaryHeap<Segment> = BinaryHeap::new();
    for w in edges.windows(2) {
        let mut values = vec![0.0; dim];
        let error = qk21_vec(&f, w[0], w[1], dim, &mut values, &mut scratch);
        heap.push(Segment {
            a: w[0],
            b: w[1],
            values,
            error,
        });
    }

    loop {
        let total_err: f64 = heap.iter().map(|s| s.error).sum();
        let mut totals = vec![0.0; dim];
        for s in &heap {
            for d in 0..dim {
                totals[d] += s.values[d];
            }
        }
        let scale: f64 = totals.iter().map(|v| v.abs()).sum();
        if total_err <= abs_tol.max(rel_tol * scale) {
            return Ok((totals, total_err));
        }
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::IntegrationFailure(format!(
                "error estimate {total_err:.3e} above tolerance after {MAX_SEGMENTS} segments on [{a}, {b}]"
            )));
        }
        let worst = heap.pop().expect("heap cannot be empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::IntegrationFailure(format!(
                "interval [{}, {}] cannot be subdivided further",
                worst.a, worst.b
            )));
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let mut values = vec![0.0; dim];
            let error = qk21_vec(&f, lo, hi, dim, &mut values, &mut scratch);
            heap.push(Segment {
                a: lo,
                b: hi,
                values,
                error,
            });
        }
    }
}

/// Scalar adaptive Gauss–Kronrod integration over `[a, b]`.
pub fn adaptive_gk<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Quad, Error>
where
    F: Fn(f64) -> f64,
{
    let (values, err) = adaptive_gk_vec(|x, out| out[0] = f(x), a, b, 1, abs_tol, rel_tol, &[])?;
    Ok(Quad {
        value: values[0],
        abs_error: err,
    })
}

/// Scalar adaptive integration with an initial partition at `breakpoints`.
pub fn adaptive_gk_split<F>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    breakpoints: &[f64],
) -> Result<Quad, Error>
where
    F: Fn(f64) -> f64,
{
    let (values, err) =
        adaptive_gk_vec(|x, out| out[0] = f(x), a, b, 1, abs_tol, rel_tol, breakpoints)?;
    Ok(Quad {
        value: values[0],
        abs_error: err,
    })
}

/// Gauss–Hermite rule: ∫ e^(−t²) f(t) dt ≈ Σ wᵢ f(tᵢ).
///
/// Nodes are the roots of the physicists' Hermite polynomial H_n, found by
/// Newton iteration on the orthonormal recurrence.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        let nf = n as f64;
        let mut z = 0.0_f64;
        for i in 0..m {
            // Initial guesses from Numerical Recipes' gauher.
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..200 {
                // Orthonormal Hermite recurrence.
                let mut p1 = std::f64::consts::PI.powf(-0.25);
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        // Store ascending.
        nodes.reverse();
        GaussHermite { nodes, weights }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gk_polynomials_and_transcendentals() {
        let q = adaptive_gk(|x| x * x, 0.0, 1.0, 1e-12, 0.0).unwrap();
        assert!((q.value - 1.0 / 3.0).abs() < 1e-14);

        let q = adaptive_gk(|x| (-x).exp(), 0.0, 30.0, 1e-12, 0.0).unwrap();
        assert!((q.value - (1.0 - (-30.0f64).exp())).abs() < 1e-12);

        // A Gaussian ridge needs the adaptivity.
        let s = 0.02;
        let q = adaptive_gk(
            |x| (-(x - 0.37) * (x - 0.37) / (2.0 * s * s)).exp(),
            0.0,
            1.0,
            1e-13,
            1e-13,
        )
        .unwrap();
        let want = s * (2.0 * PI).sqrt();
        assert!((q.value - want).abs() < 1e-11 * want);

        // A very sharp ridge can hide between the initial rule's nodes;
        // a breakpoint at the ridge makes it visible.
        let s = 1e-3;
        let q = adaptive_gk_split(
            |x| (-(x - 0.37) * (x - 0.37) / (2.0 * s * s)).exp(),
            0.0,
            1.0,
            1e-13,
            1e-13,
            &[0.37],
        )
        .unwrap();
        let want = s * (2.0 * PI).sqrt();
        assert!((q.value - want).abs() < 1e-11 * want);
    }

    #[test]
    fn gk_vector_integrand() {
        let (v, _) = adaptive_gk_vec(
            |x, out| {
                out[0] = x.sin();
                out[1] = x.cos();
            },
            0.0,
            PI,
            2,
            1e-12,
            0.0,
            &[1.0],
        )
        .unwrap();
        assert!((v[0] - 2.0).abs() < 1e-13);
        assert!(v[1].abs() < 1e-13);
    }

    #[test]
    fn gauss_hermite_moments() {
        for n in [1, 2, 5, 16, 31, 48, 64, 96] {
            let gh = GaussHermite::new(n);
            let total: f64 = gh.weights.iter().sum();
            assert!(
                (total - PI.sqrt()).abs() < 1e-12,
                "weight sum off at n = {n}"
            );
            if n >= 2 {
                let m2: f64 = gh
                    .nodes
                    .iter()
                    .zip(&gh.weights)
                    .map(|(t, w)| w * t * t)
                    .sum();
                assert!((m2 - 0.5 * PI.sqrt()).abs() < 1e-11);
            }
            if n >= 8 {
                // ∫ e^(−t²) cos t dt = √π e^(−1/4)
                let c: f64 = gh
                    .nodes
                    .iter()
                    .zip(&gh.weights)
                    .map(|(t, w)| w * t.cos())
                    .sum();
                assert!((c - PI.sqrt() * (-0.25f64).exp()).abs() < 1e-12);
            }
        }
    }
}
