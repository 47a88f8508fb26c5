//! Independent reference implementations used as test oracles. Everything
//! here is written as plainly as possible, in `f64`, without touching the
//! library's kernels.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use thermocrack::model::{ArchitectureSpec, LayerKind, ModelParams};
use thermocrack::tensor::Tensor;

pub fn rng(seed: u64) -> ChaCha8Rng {
    thermocrack::rng::seeded_rng(seed)
}

pub fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize], scale: f32) -> Tensor {
    let n = shape.iter().product();
    let data = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
    Tensor::new(shape.to_vec(), data).unwrap()
}

pub fn to_f64(t: &Tensor) -> Vec<f64> {
    t.data().iter().map(|&v| f64::from(v)).collect()
}

/// 3×3 convolution with zero padding, one output at a time.
pub fn conv_oracle(
    x: &[f64],
    (c, h, w): (usize, usize, usize),
    wt: &[f64],
    filters: usize,
    b: &[f64],
) -> Vec<f64> {
    let mut out = vec![0.0; filters * h * w];
    for f in 0..filters {
        for y in 0..h {
            for xo in 0..w {
                let mut s = b[f];
                for ch in 0..c {
                    for ky in 0..3 {
                        for kx in 0..3 {
                            let iy = y as isize + ky as isize - 1;
                            let ix = xo as isize + kx as isize - 1;
                            if iy < 0 || ix < 0 || iy >= h as isize || ix >= w as isize {
                                continue;
                            }
                            let v = x[(ch * h + iy as usize) * w + ix as usize];
                            s += wt[((f * c + ch) * 3 + ky) * 3 + kx] * v;
                        }
                    }
                }
                out[(f * h + y) * w + xo] = s;
            }
        }
    }
    out
}

/// 2×2/2 max pooling; the first maximum in reading order wins.
pub fn pool_oracle(x: &[f64], (c, h, w): (usize, usize, usize)) -> Vec<f64> {
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for y in 0..oh {
            for xo in 0..ow {
                let window = [
                    x[(ch * h + 2 * y) * w + 2 * xo],
                    x[(ch * h + 2 * y) * w + 2 * xo + 1],
                    x[(ch * h + 2 * y + 1) * w + 2 * xo],
                    x[(ch * h + 2 * y + 1) * w + 2 * xo + 1],
                ];
                let mut best = window[0];
                for &v in &window[1..] {
                    if v > best {
                        best = v;
                    }
                }
                out.push(best);
            }
        }
    }
    out
}

/// Index (within the input plane stack) of each pooled maximum.
pub fn pool_argmax_oracle(x: &[f64], (c, h, w): (usize, usize, usize)) -> Vec<usize> {
    let mut idx = Vec::new();
    for ch in 0..c {
        for y in 0..h / 2 {
            for xo in 0..w / 2 {
                let cand = [
                    (ch * h + 2 * y) * w + 2 * xo,
                    (ch * h + 2 * y) * w + 2 * xo + 1,
                    (ch * h + 2 * y + 1) * w + 2 * xo,
                    (ch * h + 2 * y + 1) * w + 2 * xo + 1,
                ];
                let mut best = cand[0];
                for &i in &cand[1..] {
                    if x[i] > x[best] {
                        best = i;
                    }
                }
                idx.push(best);
            }
        }
    }
    idx
}

pub fn dense_oracle(x: &[f64], wt: &[f64], b: &[f64]) -> Vec<f64> {
    let n_in = x.len();
    (0..b.len())
        .map(|o| b[o] + (0..n_in).map(|i| wt[o * n_in + i] * x[i]).sum::<f64>())
        .collect()
}

pub fn relu(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

pub fn xent_oracle(logits: &[f64], class: usize) -> f64 {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|&z| (z - m).exp()).sum::<f64>().ln();
    lse - logits[class]
}

/// The network re-expressed as a list of steps over `f64` buffers.
#[derive(Clone)]
pub enum Step {
    Conv { filters: usize, relu: bool, p: usize },
    Pool,
    Dense { units: usize, relu: bool, p: usize },
}

pub struct NetOracle {
    pub input: (usize, usize, usize),
    pub steps: Vec<Step>,
    /// `(weights, bias)` per parameterised layer, as `f64`.
    pub params: Vec<(Vec<f64>, Vec<f64>)>,
}

impl NetOracle {
    pub fn new(spec: &ArchitectureSpec, params: &ModelParams) -> Self {
        let mut steps = Vec::new();
        let mut p = 0;
        for l in &spec.layers {
            let relu = l.activation == thermocrack::model::Activation::Relu;
            match l.kind {
                LayerKind::Input | LayerKind::Flatten => {}
                LayerKind::Conv { filters } => {
                    steps.push(Step::Conv { filters, relu, p });
                    p += 1;
                }
                LayerKind::MaxPool => steps.push(Step::Pool),
                LayerKind::Dense { units } => {
                    steps.push(Step::Dense { units, relu, p });
                    p += 1;
                }
                LayerKind::Output { classes } => {
                    steps.push(Step::Dense { units: classes, relu: false, p });
                    p += 1;
                }
            }
        }
        NetOracle {
            input: (spec.input.channels, spec.input.height, spec.input.width),
            steps,
            params: params
                .layers
                .iter()
                .map(|l| (to_f64(&l.weights), to_f64(&l.bias)))
                .collect(),
        }
    }

    /// Activations entering each step, plus the final logits.
    pub fn trace(&self, x: &[f64]) -> Vec<(Vec<f64>, (usize, usize, usize))> {
        let mut out = vec![(x.to_vec(), self.input)];
        for i in 0..self.steps.len() {
            let (cur, dims) = out.last().unwrap();
            out.push(self.apply(i, cur, *dims));
        }
        out
    }

    fn apply(&self, i: usize, x: &[f64], dims: (usize, usize, usize)) -> (Vec<f64>, (usize, usize, usize)) {
        self.apply_noting(i, x, dims, &mut Vec::new())
    }

    /// Like `apply`, appending every ReLU sign and pool argmax to `pattern`.
    fn apply_noting(
        &self,
        i: usize,
        x: &[f64],
        (c, h, w): (usize, usize, usize),
        pattern: &mut Vec<usize>,
    ) -> (Vec<f64>, (usize, usize, usize)) {
        let mut rectify = |y: &mut Vec<f64>, r: bool| {
            if r {
                pattern.extend(y.iter().map(|&v| usize::from(v > 0.0)));
                relu(y);
            }
        };
        match self.steps[i] {
            Step::Conv { filters, relu: r, p } => {
                let (wt, b) = &self.params[p];
                let mut y = conv_oracle(x, (c, h, w), wt, filters, b);
                rectify(&mut y, r);
                (y, (filters, h, w))
            }
            Step::Pool => {
                pattern.extend(pool_argmax_oracle(x, (c, h, w)));
                (pool_oracle(x, (c, h, w)), (c, h / 2, w / 2))
            }
            Step::Dense { units, relu: r, p } => {
                let (wt, b) = &self.params[p];
                let mut y = dense_oracle(x, wt, b);
                rectify(&mut y, r);
                (y, (units, 1, 1))
            }
        }
    }

    /// Logits, starting from the activation entering step `from`.
    pub fn logits_from(&self, from: usize, x: &[f64], dims: (usize, usize, usize)) -> Vec<f64> {
        let mut cur = (x.to_vec(), dims);
        for i in from..self.steps.len() {
            cur = self.apply(i, &cur.0, cur.1);
        }
        cur.0
    }

    /// Logits from step `from`, plus the piecewise-linear region they lie in.
    pub fn logits_and_region(&self, from: usize, x: &[f64], dims: (usize, usize, usize)) -> (Vec<f64>, Vec<usize>) {
        let mut pattern = Vec::new();
        let mut cur = (x.to_vec(), dims);
        for i in from..self.steps.len() {
            cur = self.apply_noting(i, &cur.0, cur.1, &mut pattern);
        }
        (cur.0, pattern)
    }

    pub fn step_of_param(&self, p: usize) -> usize {
        self.steps
            .iter()
            .position(|s| matches!(s, Step::Conv { p: q, .. } | Step::Dense { p: q, .. } if *q == p))
            .unwrap()
    }
}

/// Central-difference gradient agreement rule: relative error at most
/// `1e-3`, or absolute error at most `1e-4` near zero.
pub fn grads_agree(analytic: f64, numeric: f64) -> bool {
    let diff = (analytic - numeric).abs();
    diff <= 1e-4 || diff <= 1e-3 * analytic.abs().max(numeric.abs())
}

pub struct GradCheck {
    pub checked: usize,
    /// Partials whose `±h` probe crossed a ReLU or pooling boundary and were
    /// re-measured with a step small enough to stay inside one region.
    pub kinked: usize,
    pub failures: Vec<String>,
    pub worst_rel: f64,
    pub worst_abs: f64,
}

fn param_mut(net: &mut NetOracle, p: usize, bias: bool, j: usize) -> &mut f64 {
    let (w, b) = &mut net.params[p];
    if bias {
        &mut b[j]
    } else {
        &mut w[j]
    }
}

/// Compare every parameter partial of `loss_and_grad` against central
/// differences of the oracle network.
///
/// The network is piecewise smooth. A central difference is only a valid
/// reference when `θ ± h` stay in the same ReLU/argmax region as `θ`; when a
/// probe crosses a boundary, `h` is divided by 10 (down to `1e-9`) until
/// neither side does, and such partials are counted in `kinked`.
pub fn check_network_gradients(
    spec: &ArchitectureSpec,
    params: &ModelParams,
    x: &Tensor,
    class: usize,
    h: f64,
) -> GradCheck {
    let (_, grads) = thermocrack::model::loss_and_grad(spec, params, x, class).unwrap();
    let mut net = NetOracle::new(spec, params);
    let trace = net.trace(&to_f64(x));
    let mut report = GradCheck {
        checked: 0,
        kinked: 0,
        failures: Vec::new(),
        worst_rel: 0.0,
        worst_abs: 0.0,
    };
    for (p, g) in grads.layers.iter().enumerate() {
        let step = net.step_of_param(p);
        let (input, dims) = trace[step].clone();
        let (_, region) = net.logits_and_region(step, &input, dims);
        for (is_bias, analytic) in [(false, &g.weights), (true, &g.bias)] {
            for (j, &a) in analytic.data().iter().enumerate() {
                let orig = *param_mut(&mut net, p, is_bias, j);
                let mut step_h = h;
                let numeric = loop {
                    *param_mut(&mut net, p, is_bias, j) = orig + step_h;
                    let (lp, rp) = net.logits_and_region(step, &input, dims);
                    *param_mut(&mut net, p, is_bias, j) = orig - step_h;
                    let (lm, rm) = net.logits_and_region(step, &input, dims);
                    *param_mut(&mut net, p, is_bias, j) = orig;
                    let smooth = rp == region && rm == region;
                    if smooth || step_h < 1e-9 {
                        if step_h < h {
                            report.kinked += 1;
                        }
                        break (xent_oracle(&lp, class) - xent_oracle(&lm, class)) / (2.0 * step_h);
                    }
                    step_h /= 10.0;
                };
                let a = f64::from(a);
                report.checked += 1;
                let diff = (a - numeric).abs();
                report.worst_abs = report.worst_abs.max(diff);
                if diff > 1e-4 {
                    report.worst_rel = report.worst_rel.max(diff / a.abs().max(numeric.abs()));
                }
                if !grads_agree(a, numeric) {
                    report.failures.push(format!(
                        "layer {p} {} [{j}]: analytic {a:.6e} numeric {numeric:.6e} (h {step_h:.0e})",
                        if is_bias { "bias" } else { "weights" }
                    ));
                }
            }
        }
    }
    report
}

/// Per-class and macro metrics computed by literally counting cells.
pub struct MetricsOracle {
    pub accuracy: f64,
    pub per_class: Vec<[f64; 4]>, // accuracy, precision, recall, f1
    pub macro_avg: [f64; 4],
    pub counts: Vec<[u64; 4]>, // tp, fp, fn, tn
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn metrics_oracle(m: &[[u64; 3]; 3]) -> MetricsOracle {
    let total: u64 = m.iter().flatten().sum();
    let mut correct = 0;
    let mut per_class = Vec::new();
    let mut counts = Vec::new();
    for k in 0..3 {
        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for (actual, row) in m.iter().enumerate() {
            for (pred, &n) in row.iter().enumerate() {
                match (actual == k, pred == k) {
                    (true, true) => tp += n,
                    (false, true) => fp += n,
                    (true, false) => fn_ += n,
                    (false, false) => tn += n,
                }
                if k == 0 && actual == pred {
                    correct += n;
                }
            }
        }
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        // F1 = 2TP / (2TP + FP + FN), the exact rational form of 2PR/(P+R).
        let f1 = ratio(2 * tp, 2 * tp + fp + fn_);
        per_class.push([ratio(tp + tn, total), precision, recall, f1]);
        counts.push([tp, fp, fn_, tn]);
    }
    let mut macro_avg = [0.0; 4];
    for c in &per_class {
        for i in 0..4 {
            macro_avg[i] += c[i] / 3.0;
        }
    }
    MetricsOracle {
        accuracy: ratio(correct, total),
        per_class,
        macro_avg,
        counts,
    }
}
