//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::util::compensated_sum;

/// Kronrod nodes on [0, 1] (symmetric; index 7 is the center).
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
    0.209_482_141_084_727_8,
];

/// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Total error estimates at or below this are always accepted.
    pub floor: f64,
    pub abs: f64,
    pub rel: f64,
    /// Panels are not bisected more than this many times.
    pub max_depth: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            floor: 1e-20,
            abs: 1e-10,
            rel: 1e-9,
            max_depth: 20,
        }
    }
}

impl Tolerance {
    /// Met when the error is within the absolute target and also relatively
    /// small, so tiny integrals still get relative accuracy.
    fn accepts(&self, err: f64, value: f64) -> bool {
        err <= self.floor || (err <= self.abs && err <= self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    /// True when the tolerance was not met before every remaining panel
    /// reached `max_depth`.
    pub depth_limited: bool,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (k, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]`, always bisecting the panel with the largest
/// error estimate until the total error meets `tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Estimate {
    let mut est = Estimate::default();
    if b <= a {
        return est;
    }
    let (value, error) = gk15(&mut f, a, b);
    est.evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        a,
        b,
        value,
        error,
        depth: 0,
    });
    let mut settled = Vec::new();
    let (mut total, mut total_err) = (value, error);
    while !tol.accepts(total_err, total) {
        let Some(worst) = heap.pop() else {
            est.depth_limited = true;
            break;
        };
        if worst.depth >= tol.max_depth {
            settled.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = gk15(&mut f, worst.a, mid);
        let (rv, re) = gk15(&mut f, mid, worst.b);
        est.evaluations += 30;
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        for (pa, pb, v, e) in [(worst.a, mid, lv, le), (mid, worst.b, rv, re)] {
            heap.push(Panel {
                a: pa,
                b: pb,
                value: v,
                error: e,
                depth: worst.depth + 1,
            });
        }
    }
    // Re-sum from the panels so the running update's rounding does not leak.
    let panels: Vec<Panel> = heap.into_iter().chain(settled).collect();
    let mut ordered = panels;
    ordered.sort_by(|p, q| p.a.total_cmp(&q.a));
    est.value = compensated_sum(ordered.iter().map(|p| p.value));
    est.error = ordered.iter().map(|p| p.error).sum();
    est
}
