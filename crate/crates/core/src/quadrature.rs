//! Adaptive Gauss–Kronrod (7/15) integration and Gauss–Hermite rules.

use num_complex::Complex64 as C64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::expr::EvalError;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5 and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Deepest allowed bisection level.
pub const MAX_DEPTH: u32 = 40;
/// Smallest absolute tolerance honoured.
pub const ABS_TOL_FLOOR: f64 = 1e-13;
/// Error floor relative to `int |f|`, below which rounding dominates.
pub const ROUNDOFF_FLOOR: f64 = 50.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: ABS_TOL_FLOOR, rel: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("adaptive quadrature hit depth cap {depth} with error estimate {error:e}")]
    DepthExceeded { depth: u32, error: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone)]
pub struct VecQuad {
    pub values: Vec<C64>,
    pub errors: Vec<f64>,
    pub intervals: usize,
}

struct Panel {
    a: f64,
    b: f64,
    depth: u32,
    values: Vec<C64>,
    errors: Vec<f64>,
    magnitudes: Vec<f64>,
    worst: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.worst == other.worst
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.worst.total_cmp(&other.worst)
    }
}

fn gk15<F>(f: &mut F, a: f64, b: f64, dim: usize, depth: u32) -> Result<Panel, EvalError>
where
    F: FnMut(f64) -> Result<Vec<C64>, EvalError>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = vec![C64::new(0.0, 0.0); dim];
    let mut gauss = vec![C64::new(0.0, 0.0); dim];
    let mut mag = vec![0.0; dim];
    let centre = f(c)?;
    for d in 0..dim {
        kron[d] = centre[d] * WGK[7];
        gauss[d] = centre[d] * WG[3];
        mag[d] = centre[d].norm() * WGK[7];
    }
    for (i, (&xk, &wk)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let lo = f(c - h * xk)?;
        let hi = f(c + h * xk)?;
        for d in 0..dim {
            let s = lo[d] + hi[d];
            kron[d] += s * wk;
            mag[d] += (lo[d].norm() + hi[d].norm()) * wk;
            if i % 2 == 1 {
                gauss[d] += s * WG[i / 2];
            }
        }
    }
    let mut values = Vec::with_capacity(dim);
    let mut errors = Vec::with_capacity(dim);
    let mut magnitudes = Vec::with_capacity(dim);
    let mut worst: f64 = 0.0;
    for d in 0..dim {
        let k = kron[d] * h;
        let m = mag[d] * h.abs();
        let e = ((kron[d] - gauss[d]) * h).norm();
        worst = worst.max(e);
        values.push(k);
        errors.push(e);
        magnitudes.push(m);
    }
    Ok(Panel { a, b, depth, values, errors, magnitudes, worst })
}

/// Integrates a vector-valued integrand over `[a, b]`.
///
/// The interval is first split into `initial_panels` equal pieces; panels are
/// then bisected globally in order of their largest component error until
/// every component meets `max(tol.abs, tol.rel * |I_d|)`.
pub fn integrate_vec<F>(
    mut f: F,
    a: f64,
    b: f64,
    dim: usize,
    tol: Tolerance,
    initial_panels: usize,
) -> Result<VecQuad, QuadratureError>
where
    F: FnMut(f64) -> Result<Vec<C64>, EvalError>,
{
    let abs_tol = tol.abs.max(ABS_TOL_FLOOR);
    if a == b {
        return Ok(VecQuad {
            values: vec![C64::new(0.0, 0.0); dim],
            errors: vec![0.0; dim],
            intervals: 0,
        });
    }
    let n0 = initial_panels.max(1);
    let mut heap = BinaryHeap::new();
    let mut total = vec![C64::new(0.0, 0.0); dim];
    let mut err = vec![0.0; dim];
    let mut mag = vec![0.0; dim];
    let add = |p: &Panel, total: &mut [C64], err: &mut [f64], mag: &mut [f64], sign: f64| {
        for d in 0..dim {
            total[d] += p.values[d] * sign;
            err[d] += p.errors[d] * sign;
            mag[d] += p.magnitudes[d] * sign;
        }
    };
    for i in 0..n0 {
        let lo = a + (b - a) * i as f64 / n0 as f64;
        let hi = if i + 1 == n0 { b } else { a + (b - a) * (i + 1) as f64 / n0 as f64 };
        let p = gk15(&mut f, lo, hi, dim, 0)?;
        add(&p, &mut total, &mut err, &mut mag, 1.0);
        heap.push(p);
    }
    // running sums drift; the exact sums are recomputed before returning
    let resum = |heap: &BinaryHeap<Panel>| {
        let (mut t, mut e) = (vec![C64::new(0.0, 0.0); dim], vec![0.0; dim]);
        for p in heap.iter() {
            for d in 0..dim {
                t[d] += p.values[d];
                e[d] += p.errors[d];
            }
        }
        (t, e)
    };
    loop {
        // errors below the rounding level of int |f| carry no information
        let target = |d: usize, t: &[C64], m: &[f64]| abs_tol.max(tol.rel * t[d].norm()).max(ROUNDOFF_FLOOR * m[d]);
        if (0..dim).all(|d| err[d] <= target(d, &total, &mag)) {
            let (t, e) = resum(&heap);
            if (0..dim).all(|d| e[d] <= target(d, &t, &mag)) {
                return Ok(VecQuad { values: t, errors: e, intervals: heap.len() });
            }
            total = t;
            err = e;
        }
        let worst = heap.pop().expect("at least one panel");
        if worst.depth >= MAX_DEPTH {
            let e = err.iter().cloned().fold(0.0, f64::max);
            return Err(QuadratureError::DepthExceeded { depth: MAX_DEPTH, error: e });
        }
        let mid = 0.5 * (worst.a + worst.b);
        add(&worst, &mut total, &mut err, &mut mag, -1.0);
        for p in [gk15(&mut f, worst.a, mid, dim, worst.depth + 1)?, gk15(&mut f, mid, worst.b, dim, worst.depth + 1)?] {
            add(&p, &mut total, &mut err, &mut mag, 1.0);
            heap.push(p);
        }
    }
}

/// Scalar complex integral with its error estimate.
pub fn integrate<F>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
    initial_panels: usize,
) -> Result<(C64, f64), QuadratureError>
where
    F: FnMut(f64) -> Result<C64, EvalError>,
{
    let r = integrate_vec(|x| f(x).map(|v| vec![v]), a, b, 1, tol, initial_panels)?;
    Ok((r.values[0], r.errors[0]))
}

/// Scalar real integral with its error estimate.
pub fn integrate_real<F>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<(f64, f64), QuadratureError>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    let (v, e) = integrate(|x| f(x).map(|v| C64::new(v, 0.0)), a, b, tol, 1)?;
    Ok((v.re, e))
}

/// Nodes and weights of the `n`-point Gauss–Hermite rule for weight `exp(-u^2)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}
