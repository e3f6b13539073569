//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights on the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kron += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    Panel {
        a,
        b,
        value: kron * h,
        error: ((kron - gauss) * h).norm(),
    }
}

/// Settings for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct Adaptive {
    /// Absolute error target for the whole integral.
    pub abs_tol: f64,
    /// Number of equal panels to start from; pick it so each panel holds
    /// at most a couple of oscillations.
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Adaptive {
            abs_tol: 1e-13,
            initial_panels: 1,
            max_panels: 20_000,
        }
    }
}

/// Integrates `f` over `[a, b]`, returning the value and the error estimate.
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    opts: Adaptive,
    what: &str,
) -> Result<(Complex64, f64)> {
    if b <= a {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let n0 = opts.initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut panels: Vec<Panel> = (0..n0)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == n0 { b } else { lo + width };
            gk15(&f, lo, hi)
        })
        .collect();
    loop {
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        if total_err <= opts.abs_tol {
            break;
        }
        if panels.len() >= opts.max_panels {
            return Err(Error::Quadrature {
                what: what.to_string(),
                achieved: total_err,
                tolerance: opts.abs_tol,
            });
        }
        // bisect every panel carrying more than its share of the budget
        let share = opts.abs_tol / panels.len() as f64;
        let mut next = Vec::with_capacity(panels.len() * 2);
        let mut split_any = false;
        for p in panels {
            if p.error > share {
                let mid = 0.5 * (p.a + p.b);
                if mid <= p.a || mid >= p.b {
                    next.push(p);
                    continue;
                }
                next.push(gk15(&f, p.a, mid));
                next.push(gk15(&f, mid, p.b));
                split_any = true;
            } else {
                next.push(p);
            }
        }
        panels = next;
        if !split_any {
            let achieved: f64 = panels.iter().map(|p| p.error).sum();
            return Err(Error::Quadrature {
                what: what.to_string(),
                achieved,
                tolerance: opts.abs_tol,
            });
        }
    }
    // fixed left-to-right summation order keeps results reproducible
    let value = panels.iter().fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.value);
    let error = panels.iter().map(|p| p.error).sum();
    Ok((value, error))
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: Adaptive,
    what: &str,
) -> Result<(f64, f64)> {
    integrate(|x| Complex64::new(f(x), 0.0), a, b, opts, what).map(|(v, e)| (v.re, e))
}
