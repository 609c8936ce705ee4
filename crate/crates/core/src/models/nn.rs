//! The recurrent classifier: frozen token embeddings feed a bidirectional
//! LSTM, a global max over time, a rectified dense layer with dropout, and a
//! single sigmoid output unit. Training is mini-batch adaptive-moment
//! gradient descent on binary cross-entropy; the encoder is never updated.
//!
//! Everything is f64 and single-threaded per model, so a fixed seed
//! reproduces training bit-for-bit.

use ndarray::{s, Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encode::EmbeddingSequence;
use crate::error::{Error, Result};
use crate::revisions::DesirabilityLabel;
use crate::seeding;

use super::{AssembledInstance, HyperParams};

/// Input width and recurrent hidden size. The dense layer reuses the hidden
/// size as its unit count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub input_dim: usize,
    pub hidden: usize,
}

/// Trainable-parameter count implied by the architecture, kept as explicit
/// layer arithmetic: per direction the four gates each hold a kernel over
/// the input, a recurrent kernel, and a bias; the dense head sees the
/// concatenated per-direction maxima.
pub fn expected_param_count(dims: ModelDims) -> usize {
    let (d, h) = (dims.input_dim, dims.hidden);
    let per_direction = 4 * (h * (d + h) + h);
    let dense1 = (2 * h) * h + h;
    let dense2 = h + 1;
    2 * per_direction + dense1 + dense2
}

#[derive(Debug, Clone)]
struct LstmParams {
    /// Input kernel, gates stacked as [input, forget, cell, output]: (4h, d).
    w: Array2<f64>,
    /// Recurrent kernel: (4h, h).
    u: Array2<f64>,
    /// Gate biases: (4h,).
    b: Array1<f64>,
}

impl LstmParams {
    fn zeros(dims: ModelDims) -> Self {
        let (d, h) = (dims.input_dim, dims.hidden);
        LstmParams {
            w: Array2::zeros((4 * h, d)),
            u: Array2::zeros((4 * h, h)),
            b: Array1::zeros(4 * h),
        }
    }

    fn init(dims: ModelDims, rng: &mut ChaCha8Rng) -> Self {
        let (d, h) = (dims.input_dim, dims.hidden);
        let mut p = Self::zeros(dims);
        fill_uniform(&mut p.w, fan_limit(d, 4 * h), rng);
        fill_uniform(&mut p.u, fan_limit(h, 4 * h), rng);
        // Forget-gate bias starts at one so early training does not flush
        // the cell state.
        p.b.slice_mut(s![h..2 * h]).fill(1.0);
        p
    }

    fn count(&self) -> usize {
        self.w.len() + self.u.len() + self.b.len()
    }
}

fn fan_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

fn fill_uniform(arr: &mut Array2<f64>, limit: f64, rng: &mut ChaCha8Rng) {
    for v in arr.iter_mut() {
        *v = rng.random_range(-limit..limit);
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub struct BiLstmClassifier {
    dims: ModelDims,
    fwd: LstmParams,
    bwd: LstmParams,
    dense1_w: Array2<f64>,
    dense1_b: Array1<f64>,
    dense2_w: Array1<f64>,
    dense2_b: f64,
}

/// Build the classifier with seeded fan-scaled uniform initialization.
pub fn build_model(dims: ModelDims, seed: u64) -> BiLstmClassifier {
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::mix(seed, 0xb11d));
    let (h,) = (dims.hidden,);
    let fwd = LstmParams::init(dims, &mut rng);
    let bwd = LstmParams::init(dims, &mut rng);
    let mut dense1_w = Array2::zeros((h, 2 * h));
    fill_uniform(&mut dense1_w, fan_limit(2 * h, h), &mut rng);
    let mut dense2_w = Array1::zeros(h);
    let lim = fan_limit(h, 1);
    for v in dense2_w.iter_mut() {
        *v = rng.random_range(-lim..lim);
    }
    BiLstmClassifier {
        dims,
        fwd,
        bwd,
        dense1_w,
        dense1_b: Array1::zeros(h),
        dense2_w,
        dense2_b: 0.0,
    }
}

/// Per-sequence dropout masks, shared across time steps (inverted dropout:
/// kept units are scaled by 1/keep so inference needs no rescaling).
struct Masks {
    input_f: Option<Array1<f64>>,
    rec_f: Option<Array1<f64>>,
    input_b: Option<Array1<f64>>,
    rec_b: Option<Array1<f64>>,
    dense: Option<Array1<f64>>,
}

impl Masks {
    fn inference() -> Self {
        Masks {
            input_f: None,
            rec_f: None,
            input_b: None,
            rec_b: None,
            dense: None,
        }
    }

    fn sample(dims: ModelDims, hyper: &HyperParams, rng: &mut ChaCha8Rng) -> Self {
        let draw = |len: usize, rate: f64, rng: &mut ChaCha8Rng| -> Option<Array1<f64>> {
            if rate <= 0.0 {
                return None;
            }
            let keep = 1.0 - rate;
            Some(Array1::from_iter((0..len).map(|_| {
                if rng.random_range(0.0..1.0) < keep {
                    1.0 / keep
                } else {
                    0.0
                }
            })))
        };
        Masks {
            input_f: draw(dims.input_dim, hyper.lstm_dropout, rng),
            rec_f: draw(dims.hidden, hyper.recurrent_dropout, rng),
            input_b: draw(dims.input_dim, hyper.lstm_dropout, rng),
            rec_b: draw(dims.hidden, hyper.recurrent_dropout, rng),
            dense: draw(dims.hidden, hyper.dense_dropout, rng),
        }
    }
}

fn masked(v: &Array1<f64>, mask: &Option<Array1<f64>>) -> Array1<f64> {
    match mask {
        Some(m) => v * m,
        None => v.clone(),
    }
}

/// Cached activations of one LSTM direction, in processing order.
struct DirectionPass {
    xs: Vec<Array1<f64>>,
    h_prevs: Vec<Array1<f64>>,
    gates_i: Vec<Array1<f64>>,
    gates_f: Vec<Array1<f64>>,
    gates_g: Vec<Array1<f64>>,
    gates_o: Vec<Array1<f64>>,
    c_prevs: Vec<Array1<f64>>,
    tanh_cs: Vec<Array1<f64>>,
    /// Hidden states indexed by *time*, not processing order.
    hs_by_time: Vec<Array1<f64>>,
    reverse: bool,
}

struct ForwardPass {
    f: DirectionPass,
    b: DirectionPass,
    /// Index of the winning time step per pooled feature.
    argmax: Vec<usize>,
    pooled: Array1<f64>,
    pre1: Array1<f64>,
    a1_dropped: Array1<f64>,
    prob: f64,
}

struct Gradients {
    fwd: LstmParams,
    bwd: LstmParams,
    dense1_w: Array2<f64>,
    dense1_b: Array1<f64>,
    dense2_w: Array1<f64>,
    dense2_b: f64,
}

impl Gradients {
    fn zeros(dims: ModelDims) -> Self {
        let h = dims.hidden;
        Gradients {
            fwd: LstmParams::zeros(dims),
            bwd: LstmParams::zeros(dims),
            dense1_w: Array2::zeros((h, 2 * h)),
            dense1_b: Array1::zeros(h),
            dense2_w: Array1::zeros(h),
            dense2_b: 0.0,
        }
    }
}

impl BiLstmClassifier {
    pub fn dims(&self) -> ModelDims {
        self.dims
    }

    pub fn param_count(&self) -> usize {
        self.fwd.count()
            + self.bwd.count()
            + self.dense1_w.len()
            + self.dense1_b.len()
            + self.dense2_w.len()
            + 1
    }

    fn run_direction(
        &self,
        params: &LstmParams,
        x: &Array2<f64>,
        input_mask: &Option<Array1<f64>>,
        rec_mask: &Option<Array1<f64>>,
        reverse: bool,
    ) -> DirectionPass {
        let time = x.nrows();
        let h = self.dims.hidden;
        let mut pass = DirectionPass {
            xs: Vec::with_capacity(time),
            h_prevs: Vec::with_capacity(time),
            gates_i: Vec::with_capacity(time),
            gates_f: Vec::with_capacity(time),
            gates_g: Vec::with_capacity(time),
            gates_o: Vec::with_capacity(time),
            c_prevs: Vec::with_capacity(time),
            tanh_cs: Vec::with_capacity(time),
            hs_by_time: vec![Array1::zeros(h); time],
            reverse,
        };
        let mut h_state = Array1::zeros(h);
        let mut c_state = Array1::zeros(h);
        for step in 0..time {
            let t = if reverse { time - 1 - step } else { step };
            let xt = masked(&x.row(t).to_owned(), input_mask);
            let h_prev = masked(&h_state, rec_mask);
            let mut z = params.w.dot(&xt) + params.u.dot(&h_prev) + &params.b;
            let gi = z.slice(s![0..h]).mapv(sigmoid);
            let gf = z.slice(s![h..2 * h]).mapv(sigmoid);
            let gg = z.slice_mut(s![2 * h..3 * h]).mapv(f64::tanh);
            let go = z.slice(s![3 * h..4 * h]).mapv(sigmoid);
            let c_new = &gf * &c_state + &gi * &gg;
            let tanh_c = c_new.mapv(f64::tanh);
            let h_new = &go * &tanh_c;
            pass.xs.push(xt);
            pass.h_prevs.push(h_prev);
            pass.gates_i.push(gi);
            pass.gates_f.push(gf);
            pass.gates_g.push(gg);
            pass.gates_o.push(go);
            pass.c_prevs.push(c_state.clone());
            pass.tanh_cs.push(tanh_c);
            pass.hs_by_time[t] = h_new.clone();
            h_state = h_new;
            c_state = c_new;
        }
        pass
    }

    fn forward(&self, x: &Array2<f64>, masks: &Masks) -> ForwardPass {
        let h = self.dims.hidden;
        let f = self.run_direction(&self.fwd, x, &masks.input_f, &masks.rec_f, false);
        let b = self.run_direction(&self.bwd, x, &masks.input_b, &masks.rec_b, true);
        // Global max over time of the concatenated direction outputs.
        let time = x.nrows();
        let mut pooled = Array1::from_elem(2 * h, f64::NEG_INFINITY);
        let mut argmax = vec![0usize; 2 * h];
        for t in 0..time {
            for k in 0..h {
                if f.hs_by_time[t][k] > pooled[k] {
                    pooled[k] = f.hs_by_time[t][k];
                    argmax[k] = t;
                }
                if b.hs_by_time[t][k] > pooled[h + k] {
                    pooled[h + k] = b.hs_by_time[t][k];
                    argmax[h + k] = t;
                }
            }
        }
        let pre1 = self.dense1_w.dot(&pooled) + &self.dense1_b;
        let a1 = pre1.mapv(|v| v.max(0.0));
        let a1_dropped = masked(&a1, &masks.dense);
        let logit = self.dense2_w.dot(&a1_dropped) + self.dense2_b;
        ForwardPass {
            f,
            b,
            argmax,
            pooled,
            pre1,
            a1_dropped,
            prob: sigmoid(logit),
        }
    }

    /// Backpropagate `dlogit` (loss gradient at the output unit) into
    /// parameter gradients. The embedding input is frozen, so no input
    /// gradient is produced.
    fn backward(&self, pass: &ForwardPass, masks: &Masks, dlogit: f64, grads: &mut Gradients) {
        let h = self.dims.hidden;
        // Output layer.
        grads.dense2_b += dlogit;
        grads.dense2_w.scaled_add(dlogit, &pass.a1_dropped);
        let mut d_a1 = self.dense2_w.mapv(|w| w * dlogit);
        if let Some(m) = &masks.dense {
            d_a1 *= m;
        }
        let d_pre1 =
            Array1::from_iter(d_a1.iter().zip(pass.pre1.iter()).map(
                |(&g, &pre)| {
                    if pre > 0.0 {
                        g
                    } else {
                        0.0
                    }
                },
            ));
        for (r, &g) in d_pre1.iter().enumerate() {
            grads.dense1_w.row_mut(r).scaled_add(g, &pass.pooled);
        }
        grads.dense1_b += &d_pre1;
        let d_pooled = self.dense1_w.t().dot(&d_pre1);

        // Route the pooled gradient back to the winning time steps.
        let time = pass.f.hs_by_time.len();
        let mut dh_f_by_time = vec![Array1::zeros(h); time];
        let mut dh_b_by_time = vec![Array1::zeros(h); time];
        for k in 0..h {
            dh_f_by_time[pass.argmax[k]][k] += d_pooled[k];
            dh_b_by_time[pass.argmax[h + k]][k] += d_pooled[h + k];
        }
        backward_direction(&self.fwd, &pass.f, &dh_f_by_time, &masks.rec_f, &mut grads.fwd);
        backward_direction(&self.bwd, &pass.b, &dh_b_by_time, &masks.rec_b, &mut grads.bwd);
    }

    /// Probability that the instance is a desirable revision.
    pub fn predict_proba(&self, input: &EmbeddingSequence) -> f64 {
        self.forward(&input.data, &Masks::inference()).prob
    }

    /// Mini-batch training with the adaptive-moment optimizer on binary
    /// cross-entropy. Requires both classes in the training set.
    pub fn train(
        &mut self,
        data: &[AssembledInstance],
        hyper: &HyperParams,
        seed: u64,
    ) -> Result<TrainHistory> {
        if data.is_empty() {
            return Err(Error::TooFewInstances { have: 0, need: 1 });
        }
        let positives = data
            .iter()
            .filter(|d| d.label == DesirabilityLabel::Desirable)
            .count();
        if positives == 0 || positives == data.len() {
            return Err(Error::SingleClass);
        }
        let (weight_pos, weight_neg) = if hyper.class_weights {
            let n = data.len() as f64;
            let negatives = (data.len() - positives) as f64;
            (n / (2.0 * positives as f64), n / (2.0 * negatives))
        } else {
            (1.0, 1.0)
        };

        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(seeding::mix(seed, 0x5f1e));
        let mut dropout_rng = ChaCha8Rng::seed_from_u64(seeding::mix(seed, 0xd801));
        let mut adam = Adam::new(self.dims, hyper.learning_rate);
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut history = TrainHistory {
            epoch_losses: Vec::with_capacity(hyper.epochs),
        };

        for _epoch in 0..hyper.epochs {
            order.shuffle(&mut shuffle_rng);
            let mut epoch_loss = 0.0;
            for batch in order.chunks(hyper.batch_size.max(1)) {
                let mut grads = Gradients::zeros(self.dims);
                let scale = 1.0 / batch.len() as f64;
                for &idx in batch {
                    let inst = &data[idx];
                    let masks = Masks::sample(self.dims, hyper, &mut dropout_rng);
                    let pass = self.forward(&inst.input.data, &masks);
                    let target = match inst.label {
                        DesirabilityLabel::Desirable => 1.0,
                        DesirabilityLabel::Undesirable => 0.0,
                    };
                    let weight = if target > 0.5 { weight_pos } else { weight_neg };
                    let p = pass.prob.clamp(1e-12, 1.0 - 1e-12);
                    epoch_loss -=
                        weight * (target * p.ln() + (1.0 - target) * (1.0 - p).ln());
                    let dlogit = weight * (pass.prob - target) * scale;
                    self.backward(&pass, &masks, dlogit, &mut grads);
                }
                adam.step(self, &grads);
            }
            history.epoch_losses.push(epoch_loss / data.len() as f64);
        }
        Ok(history)
    }

    /// All parameters flattened in a fixed order, for serialization.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for part in [&self.fwd, &self.bwd] {
            out.extend(part.w.iter());
            out.extend(part.u.iter());
            out.extend(part.b.iter());
        }
        out.extend(self.dense1_w.iter());
        out.extend(self.dense1_b.iter());
        out.extend(self.dense2_w.iter());
        out.push(self.dense2_b);
        out
    }

    pub fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::Training(format!(
                "expected {} parameters, found {}",
                self.param_count(),
                values.len()
            )));
        }
        let mut iter = values.iter().copied();
        let fill1 = |arr: &mut Array1<f64>, iter: &mut dyn Iterator<Item = f64>| {
            for v in arr.iter_mut() {
                *v = iter.next().unwrap();
            }
        };
        for part in [&mut self.fwd, &mut self.bwd] {
            for v in part.w.iter_mut() {
                *v = iter.next().unwrap();
            }
            for v in part.u.iter_mut() {
                *v = iter.next().unwrap();
            }
            fill1(&mut part.b, &mut iter);
        }
        for v in self.dense1_w.iter_mut() {
            *v = iter.next().unwrap();
        }
        fill1(&mut self.dense1_b, &mut iter);
        fill1(&mut self.dense2_w, &mut iter);
        self.dense2_b = iter.next().unwrap();
        Ok(())
    }
}

/// Per-epoch mean training loss.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epoch_losses: Vec<f64>,
}

fn backward_direction(
    params: &LstmParams,
    pass: &DirectionPass,
    dh_by_time: &[Array1<f64>],
    rec_mask: &Option<Array1<f64>>,
    grads: &mut LstmParams,
) {
    let time = dh_by_time.len();
    let h = params.u.ncols();
    let mut dh_carry = Array1::zeros(h);
    let mut dc_carry = Array1::zeros(h);
    // Iterate processing steps in reverse.
    for step in (0..time).rev() {
        let t = if pass.reverse { time - 1 - step } else { step };
        let dh = &dh_by_time[t] + &dh_carry;
        let gi = &pass.gates_i[step];
        let gf = &pass.gates_f[step];
        let gg = &pass.gates_g[step];
        let go = &pass.gates_o[step];
        let tanh_c = &pass.tanh_cs[step];
        let dc = &dc_carry + &(&dh * go * &tanh_c.mapv(|v| 1.0 - v * v));
        let d_zo = &dh * tanh_c * go * &go.mapv(|v| 1.0 - v);
        let d_zi = &dc * gg * gi * &gi.mapv(|v| 1.0 - v);
        let d_zf = &dc * &pass.c_prevs[step] * gf * &gf.mapv(|v| 1.0 - v);
        let d_zg = &dc * gi * &gg.mapv(|v| 1.0 - v * v);
        dc_carry = &dc * gf;

        let mut dz = Array1::zeros(4 * h);
        dz.slice_mut(s![0..h]).assign(&d_zi);
        dz.slice_mut(s![h..2 * h]).assign(&d_zf);
        dz.slice_mut(s![2 * h..3 * h]).assign(&d_zg);
        dz.slice_mut(s![3 * h..4 * h]).assign(&d_zo);

        for (r, &g) in dz.iter().enumerate() {
            grads.w.row_mut(r).scaled_add(g, &pass.xs[step]);
            grads.u.row_mut(r).scaled_add(g, &pass.h_prevs[step]);
        }
        grads.b += &dz;

        let mut dh_prev = params.u.t().dot(&dz);
        if let Some(m) = rec_mask {
            dh_prev *= m;
        }
        dh_carry = dh_prev;
    }
}

/// Adaptive-moment optimizer with the usual decay constants.
struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: i32,
    m: Gradients,
    v: Gradients,
}

impl Adam {
    fn new(dims: ModelDims, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: Gradients::zeros(dims),
            v: Gradients::zeros(dims),
        }
    }

    fn step(&mut self, model: &mut BiLstmClassifier, grads: &Gradients) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        let (lr, b1, b2, eps) = (self.lr, self.beta1, self.beta2, self.eps);
        let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        };
        for ((p, g), (m, v)) in [
            (&mut model.fwd.w, &grads.fwd.w),
            (&mut model.fwd.u, &grads.fwd.u),
            (&mut model.bwd.w, &grads.bwd.w),
            (&mut model.bwd.u, &grads.bwd.u),
            (&mut model.dense1_w, &grads.dense1_w),
        ]
        .into_iter()
        .zip([
            (&mut self.m.fwd.w, &mut self.v.fwd.w),
            (&mut self.m.fwd.u, &mut self.v.fwd.u),
            (&mut self.m.bwd.w, &mut self.v.bwd.w),
            (&mut self.m.bwd.u, &mut self.v.bwd.u),
            (&mut self.m.dense1_w, &mut self.v.dense1_w),
        ]) {
            for ((p, &g), (m, v)) in p.iter_mut().zip(g.iter()).zip(m.iter_mut().zip(v.iter_mut()))
            {
                update(p, g, m, v);
            }
        }
        for ((p, g), (m, v)) in [
            (&mut model.fwd.b, &grads.fwd.b),
            (&mut model.bwd.b, &grads.bwd.b),
            (&mut model.dense1_b, &grads.dense1_b),
            (&mut model.dense2_w, &grads.dense2_w),
        ]
        .into_iter()
        .zip([
            (&mut self.m.fwd.b, &mut self.v.fwd.b),
            (&mut self.m.bwd.b, &mut self.v.bwd.b),
            (&mut self.m.dense1_b, &mut self.v.dense1_b),
            (&mut self.m.dense2_w, &mut self.v.dense2_w),
        ]) {
            for ((p, &g), (m, v)) in p.iter_mut().zip(g.iter()).zip(m.iter_mut().zip(v.iter_mut()))
            {
                update(p, g, m, v);
            }
        }
        update(
            &mut model.dense2_b,
            grads.dense2_b,
            &mut self.m.dense2_b,
            &mut self.v.dense2_b,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::EmbeddingSequence;

    fn toy_input(time: usize, dim: usize, seed: u64) -> EmbeddingSequence {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = Array2::from_shape_fn((time, dim), |_| rng.random_range(-1.0..1.0));
        EmbeddingSequence { data }
    }

    fn toy_instance(id: usize, label: DesirabilityLabel, dims: ModelDims) -> AssembledInstance {
        AssembledInstance {
            id: format!("i{id}"),
            student_id: format!("s{id}"),
            input: toy_input(4 + id % 3, dims.input_dim, id as u64),
            label,
        }
    }

    #[test]
    fn reference_dims_hit_the_reported_count() {
        let dims = ModelDims {
            input_dim: 768,
            hidden: 64,
        };
        let model = build_model(dims, 1);
        assert_eq!(model.param_count(), 434_817);
        assert_eq!(expected_param_count(dims), 434_817);
    }

    #[test]
    fn toy_dims_match_the_layer_arithmetic() {
        let dims = ModelDims {
            input_dim: 4,
            hidden: 2,
        };
        let model = build_model(dims, 1);
        // 2·4·(2·(4+2)+2) + (4·2+2) + (2+1) = 125
        assert_eq!(expected_param_count(dims), 125);
        assert_eq!(model.param_count(), 125);
    }

    #[test]
    fn zero_epochs_leave_weights_at_initialization() {
        let dims = ModelDims {
            input_dim: 6,
            hidden: 3,
        };
        let mut model = build_model(dims, 3);
        let before = model.flat_params();
        let data = vec![
            toy_instance(0, DesirabilityLabel::Desirable, dims),
            toy_instance(1, DesirabilityLabel::Undesirable, dims),
        ];
        let hyper = HyperParams {
            epochs: 0,
            ..HyperParams::default()
        };
        model.train(&data, &hyper, 9).unwrap();
        assert_eq!(model.flat_params(), before);
    }

    #[test]
    fn single_class_training_is_rejected() {
        let dims = ModelDims {
            input_dim: 6,
            hidden: 3,
        };
        let mut model = build_model(dims, 3);
        let data = vec![
            toy_instance(0, DesirabilityLabel::Desirable, dims),
            toy_instance(1, DesirabilityLabel::Desirable, dims),
        ];
        let res = model.train(&data, &HyperParams::default(), 9);
        assert!(matches!(res, Err(Error::SingleClass)));
    }

    #[test]
    fn inference_is_deterministic_and_bounded() {
        let dims = ModelDims {
            input_dim: 6,
            hidden: 3,
        };
        let model = build_model(dims, 3);
        let x = toy_input(5, 6, 11);
        let p1 = model.predict_proba(&x);
        let p2 = model.predict_proba(&x);
        assert_eq!(p1, p2);
        assert!((0.0..=1.0).contains(&p1));
    }

    #[test]
    fn flat_params_roundtrip() {
        let dims = ModelDims {
            input_dim: 5,
            hidden: 4,
        };
        let model = build_model(dims, 7);
        let params = model.flat_params();
        let mut other = build_model(dims, 8);
        assert_ne!(other.flat_params(), params);
        other.set_flat_params(&params).unwrap();
        assert_eq!(other.flat_params(), params);
        let x = toy_input(6, 5, 2);
        assert_eq!(model.predict_proba(&x), other.predict_proba(&x));
    }

    /// Central-difference gradient check on a tiny model, dropout disabled.
    #[test]
    fn analytic_gradients_match_finite_differences() {
        let dims = ModelDims {
            input_dim: 3,
            hidden: 2,
        };
        let mut model = build_model(dims, 5);
        let x = toy_input(4, 3, 21);
        let target = 1.0;
        let masks = Masks::inference();

        let pass = model.forward(&x.data, &masks);
        let mut grads = Gradients::zeros(dims);
        model.backward(&pass, &masks, pass.prob - target, &mut grads);
        let mut analytic = Vec::new();
        for part in [&grads.fwd, &grads.bwd] {
            analytic.extend(part.w.iter());
            analytic.extend(part.u.iter());
            analytic.extend(part.b.iter());
        }
        analytic.extend(grads.dense1_w.iter());
        analytic.extend(grads.dense1_b.iter());
        analytic.extend(grads.dense2_w.iter());
        analytic.push(grads.dense2_b);

        let loss = |model: &BiLstmClassifier| -> f64 {
            let p = model
                .forward(&x.data, &Masks::inference())
                .prob
                .clamp(1e-15, 1.0 - 1e-15);
            -(target * p.ln() + (1.0 - target) * (1.0 - p).ln())
        };

        let params = model.flat_params();
        let eps = 1e-6;
        for idx in 0..params.len() {
            let mut plus = params.clone();
            plus[idx] += eps;
            model.set_flat_params(&plus).unwrap();
            let lp = loss(&model);
            let mut minus = params.clone();
            minus[idx] -= eps;
            model.set_flat_params(&minus).unwrap();
            let lm = loss(&model);
            let numeric = (lp - lm) / (2.0 * eps);
            let abs_err = (numeric - analytic[idx]).abs();
            let rel = abs_err / numeric.abs().max(analytic[idx].abs()).max(1e-8);
            // Central differences bottom out near 1e-10 for O(1) losses.
            assert!(
                abs_err < 1e-9 || rel < 1e-5,
                "param {idx}: analytic {} vs numeric {numeric}",
                analytic[idx]
            );
        }
    }

    #[test]
    fn training_reduces_loss_on_a_learnable_set() {
        let dims = ModelDims {
            input_dim: 8,
            hidden: 4,
        };
        let mut model = build_model(dims, 13);
        // Class signal: a constant offset in the first input dimension.
        let mut data = Vec::new();
        for i in 0..20 {
            let label = if i % 2 == 0 {
                DesirabilityLabel::Desirable
            } else {
                DesirabilityLabel::Undesirable
            };
            let mut input = toy_input(5, 8, 100 + i);
            let shift = if i % 2 == 0 { 1.5 } else { -1.5 };
            input.data.column_mut(0).mapv_inplace(|v| v + shift);
            data.push(AssembledInstance {
                id: format!("i{i}"),
                student_id: format!("s{i}"),
                input,
                label,
            });
        }
        let hyper = HyperParams {
            epochs: 40,
            batch_size: 4,
            learning_rate: 5e-3,
            lstm_dropout: 0.0,
            recurrent_dropout: 0.0,
            dense_dropout: 0.0,
            ..HyperParams::default()
        };
        let history = model.train(&data, &hyper, 3).unwrap();
        assert!(history.epoch_losses.last().unwrap() < &history.epoch_losses[0]);
        let correct = data
            .iter()
            .filter(|inst| {
                let p = model.predict_proba(&inst.input);
                (p >= 0.5) == (inst.label == DesirabilityLabel::Desirable)
            })
            .count();
        assert!(correct >= 18, "only {correct}/20 correct");
    }

    #[test]
    fn training_is_reproducible_under_a_seed() {
        let dims = ModelDims {
            input_dim: 6,
            hidden: 3,
        };
        let data: Vec<_> = (0..10)
            .map(|i| {
                toy_instance(
                    i,
                    if i % 2 == 0 {
                        DesirabilityLabel::Desirable
                    } else {
                        DesirabilityLabel::Undesirable
                    },
                    dims,
                )
            })
            .collect();
        let hyper = HyperParams {
            epochs: 3,
            ..HyperParams::default()
        };
        let mut m1 = build_model(dims, 4);
        m1.train(&data, &hyper, 17).unwrap();
        let mut m2 = build_model(dims, 4);
        m2.train(&data, &hyper, 17).unwrap();
        assert_eq!(m1.flat_params(), m2.flat_params());
    }
}
