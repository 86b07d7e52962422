use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Logistic,
    Identity,
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Logistic => 1.0 / (1.0 + (-z).exp()),
            Activation::Identity => z,
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation output `a`.
    #[inline]
    fn slope(self, a: f64) -> f64 {
        match self {
            Activation::Logistic => a * (1.0 - a),
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => f64::from(u8::from(a > 0.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpParams {
    pub hidden: (usize, usize),
    pub activation: Activation,
    pub alpha: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

/// Two hidden layers and one logistic output unit, trained full-batch with
/// L-BFGS on the mean log-loss plus `alpha / (2n) * sum(W^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub sizes: [usize; 3],
    pub activation: Activation,
    /// Flattened parameters: W1, b1, W2, b2, W3, b3 (weights row-major, fan-in major).
    pub params: Vec<f64>,
    pub iterations: usize,
    pub loss: f64,
}

struct Layout {
    d: usize,
    h1: usize,
    h2: usize,
}

impl Layout {
    fn len(&self) -> usize {
        self.d * self.h1 + self.h1 + self.h1 * self.h2 + self.h2 + self.h2 + 1
    }
    fn offsets(&self) -> [usize; 6] {
        let w1 = 0;
        let b1 = w1 + self.d * self.h1;
        let w2 = b1 + self.h1;
        let b2 = w2 + self.h1 * self.h2;
        let w3 = b2 + self.h2;
        let b3 = w3 + self.h2;
        [w1, b1, w2, b2, w3, b3]
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// `out[r][j] = act(bias[j] + sum_k inp[r][k] * w[k][j])`.
fn dense(inp: &[f64], rows: usize, fan_in: usize, w: &[f64], bias: &[f64], act: Activation, out: &mut Vec<f64>) {
    let fan_out = bias.len();
    out.clear();
    out.resize(rows * fan_out, 0.0);
    for r in 0..rows {
        let o = &mut out[r * fan_out..(r + 1) * fan_out];
        o.copy_from_slice(bias);
        for (k, &v) in inp[r * fan_in..(r + 1) * fan_in].iter().enumerate() {
            if v != 0.0 {
                for (oj, wj) in o.iter_mut().zip(&w[k * fan_out..(k + 1) * fan_out]) {
                    *oj += v * wj;
                }
            }
        }
        o.iter_mut().for_each(|z| *z = act.apply(*z));
    }
}

struct Objective<'a> {
    x: &'a Matrix,
    y: Vec<f64>,
    layout: Layout,
    act: Activation,
    alpha: f64,
    a1: Vec<f64>,
    a2: Vec<f64>,
    z3: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl Objective<'_> {
    fn eval(&mut self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let n = self.x.rows();
        let Layout { d, h1, h2 } = self.layout;
        let [w1, b1, w2, b2, w3, b3] = self.layout.offsets();
        let x = self.x.as_slice();
        dense(x, n, d, &theta[w1..b1], &theta[b1..w2], self.act, &mut self.a1);
        dense(&self.a1, n, h1, &theta[w2..b2], &theta[b2..w3], self.act, &mut self.a2);
        dense(&self.a2, n, h2, &theta[w3..b3], &theta[b3..], Activation::Identity, &mut self.z3);

        let nf = n as f64;
        let penalty: f64 = [&theta[w1..b1], &theta[w2..b2], &theta[w3..b3]]
            .iter()
            .flat_map(|w| w.iter())
            .map(|v| v * v)
            .sum();
        let mut loss = 0.0;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut dz3 = vec![0.0; n];
        for r in 0..n {
            let z = self.z3[r];
            loss += softplus(z) - self.y[r] * z;
            dz3[r] = (1.0 / (1.0 + (-z).exp()) - self.y[r]) / nf;
        }
        loss = loss / nf + 0.5 * self.alpha * penalty / nf;

        self.d2.clear();
        self.d2.resize(n * h2, 0.0);
        for r in 0..n {
            grad[b3] += dz3[r];
            let a2 = &self.a2[r * h2..(r + 1) * h2];
            for j in 0..h2 {
                grad[w3 + j] += a2[j] * dz3[r];
                self.d2[r * h2 + j] = dz3[r] * theta[w3 + j] * self.act.slope(a2[j]);
            }
        }
        self.d1.clear();
        self.d1.resize(n * h1, 0.0);
        for r in 0..n {
            let a1 = &self.a1[r * h1..(r + 1) * h1];
            let d2 = &self.d2[r * h2..(r + 1) * h2];
            for (j, g) in grad[b2..w3].iter_mut().enumerate() {
                *g += d2[j];
            }
            for k in 0..h1 {
                let wk = &theta[w2 + k * h2..w2 + (k + 1) * h2];
                let gk = &mut grad[w2 + k * h2..w2 + (k + 1) * h2];
                let mut back = 0.0;
                for j in 0..h2 {
                    gk[j] += a1[k] * d2[j];
                    back += wk[j] * d2[j];
                }
                self.d1[r * h1 + k] = back * self.act.slope(a1[k]);
            }
        }
        for r in 0..n {
            let xr = self.x.row(r);
            let d1 = &self.d1[r * h1..(r + 1) * h1];
            for (j, g) in grad[b1..w2].iter_mut().enumerate() {
                *g += d1[j];
            }
            for (k, &v) in xr.iter().enumerate() {
                if v != 0.0 {
                    for (g, dj) in grad[w1 + k * h1..w1 + (k + 1) * h1].iter_mut().zip(d1) {
                        *g += v * dj;
                    }
                }
            }
        }
        for (lo, hi) in [(w1, b1), (w2, b2), (w3, b3)] {
            for i in lo..hi {
                grad[i] += self.alpha * theta[i] / nf;
            }
        }
        loss
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limited-memory BFGS (memory 10) with a backtracking Armijo line search.
/// Returns (theta, loss, iterations).
fn lbfgs(
    mut f: impl FnMut(&[f64], &mut [f64]) -> f64,
    mut theta: Vec<f64>,
    gtol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64, usize) {
    const MEMORY: usize = 10;
    let n = theta.len();
    let mut grad = vec![0.0; n];
    let mut loss = f(&theta, &mut grad);
    let mut hist: std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)> = Default::default();
    let mut trial = vec![0.0; n];
    let mut trial_grad = vec![0.0; n];
    let mut iter = 0;
    while iter < max_iter {
        if grad.iter().fold(0.0f64, |m, g| m.max(g.abs())) < gtol {
            break;
        }
        let mut dir: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut coef = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &dir);
            dir.iter_mut().zip(y).for_each(|(q, yi)| *q -= a * yi);
            coef.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            let scale = dot(s, y) / dot(y, y);
            dir.iter_mut().for_each(|q| *q *= scale);
        }
        for ((s, y, rho), a) in hist.iter().zip(coef.iter().rev()) {
            let b = rho * dot(y, &dir);
            dir.iter_mut().zip(s).for_each(|(r, si)| *r += (a - b) * si);
        }
        let mut slope = dot(&grad, &dir);
        if slope >= 0.0 {
            hist.clear();
            dir = grad.iter().map(|g| -g).collect();
            slope = dot(&grad, &dir);
        }
        let mut step = if hist.is_empty() {
            (1.0 / grad.iter().map(|g| g.abs()).sum::<f64>()).min(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..40 {
            for i in 0..n {
                trial[i] = theta[i] + step * dir[i];
            }
            let l = f(&trial, &mut trial_grad);
            if l.is_finite() && l <= loss + 1e-4 * step * slope {
                accepted = Some(l);
                break;
            }
            step *= 0.5;
        }
        let Some(new_loss) = accepted else { break };
        iter += 1;
        let s: Vec<f64> = (0..n).map(|i| trial[i] - theta[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| trial_grad[i] - grad[i]).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 {
            if hist.len() == MEMORY {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        std::mem::swap(&mut theta, &mut trial);
        std::mem::swap(&mut grad, &mut trial_grad);
        let improvement = loss - new_loss;
        loss = new_loss;
        if improvement <= 1e-12 * loss.abs().max(1.0) {
            break;
        }
    }
    (theta, loss, iter)
}

impl Mlp {
    pub fn fit(x: &Matrix, y: &[bool], params: MlpParams, seed: u64) -> Mlp {
        let layout = Layout {
            d: x.cols(),
            h1: params.hidden.0.max(1),
            h2: params.hidden.1.max(1),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let factor = if params.activation == Activation::Logistic { 2.0 } else { 6.0 };
        let mut theta = vec![0.0; layout.len()];
        let offsets = layout.offsets();
        let shapes = [(layout.d, layout.h1), (layout.h1, layout.h2), (layout.h2, 1)];
        for (layer, &(fan_in, fan_out)) in shapes.iter().enumerate() {
            let bound = (factor / (fan_in + fan_out) as f64).sqrt();
            let start = offsets[2 * layer];
            let end = if layer == 2 { theta.len() } else { offsets[2 * layer + 2] };
            for v in &mut theta[start..end] {
                *v = rng.gen_range(-bound..bound);
            }
        }
        let mut obj = Objective {
            x,
            y: y.iter().map(|&b| f64::from(u8::from(b))).collect(),
            layout,
            act: params.activation,
            alpha: params.alpha,
            a1: Vec::new(),
            a2: Vec::new(),
            z3: Vec::new(),
            d1: Vec::new(),
            d2: Vec::new(),
        };
        let (theta, loss, iterations) = lbfgs(|t, g| obj.eval(t, g), theta, params.tolerance, params.max_iter);
        Mlp {
            sizes: [obj.layout.d, obj.layout.h1, obj.layout.h2],
            activation: params.activation,
            params: theta,
            iterations,
            loss,
        }
    }

    /// Pre-sigmoid output (log-odds of the internal class).
    pub fn decision(&self, row: &[f64]) -> f64 {
        let layout = Layout {
            d: self.sizes[0],
            h1: self.sizes[1],
            h2: self.sizes[2],
        };
        let [w1, b1, w2, b2, w3, b3] = layout.offsets();
        let t = &self.params;
        let (mut a1, mut a2, mut z) = (Vec::new(), Vec::new(), Vec::new());
        dense(row, 1, layout.d, &t[w1..b1], &t[b1..w2], self.activation, &mut a1);
        dense(&a1, 1, layout.h1, &t[w2..b2], &t[b2..w3], self.activation, &mut a2);
        dense(&a2, 1, layout.h2, &t[w3..b3], &t[b3..], Activation::Identity, &mut z);
        z[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor_like(n: usize) -> (Matrix, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let y = rows.iter().map(|r| r[0] * r[1] > 0.0).collect();
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (x, y) = xor_like(15);
        for act in [Activation::Logistic, Activation::Tanh, Activation::Identity] {
            let layout = Layout { d: 2, h1: 4, h2: 3 };
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            let theta: Vec<f64> = (0..layout.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut obj = Objective {
                x: &x,
                y: y.iter().map(|&b| f64::from(u8::from(b))).collect(),
                layout,
                act,
                alpha: 0.3,
                a1: Vec::new(),
                a2: Vec::new(),
                z3: Vec::new(),
                d1: Vec::new(),
                d2: Vec::new(),
            };
            let mut g = vec![0.0; theta.len()];
            obj.eval(&theta, &mut g);
            let mut scratch = vec![0.0; theta.len()];
            for i in 0..theta.len() {
                let h = 1e-6;
                let mut tp = theta.clone();
                tp[i] += h;
                let lp = obj.eval(&tp, &mut scratch);
                tp[i] -= 2.0 * h;
                let lm = obj.eval(&tp, &mut scratch);
                let fd = (lp - lm) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-7, "{act:?} {i}: {fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn learns_xor() {
        let (x, y) = xor_like(200);
        let params = MlpParams {
            hidden: (16, 8),
            activation: Activation::Tanh,
            alpha: 1e-4,
            tolerance: 1e-4,
            max_iter: 500,
        };
        let m = Mlp::fit(&x, &y, params, 0);
        let acc = (0..200).filter(|&i| (m.decision(x.row(i)) > 0.0) == y[i]).count();
        assert!(acc >= 190, "{acc}");
        assert_eq!(m, Mlp::fit(&x, &y, params, 0));
    }
}
