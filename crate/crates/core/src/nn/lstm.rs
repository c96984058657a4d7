//! Single LSTM cell: forget, input and output gates plus the tanh candidate.

use serde::{Deserialize, Serialize};

use super::tensor::{add_outer, Tensor};
use crate::error::{Error, Result};
use crate::scalar::{all_finite, Scalar};

/// Gate parameters. Every weight matrix has shape
/// `hidden_dim × (hidden_dim + input_dim)` and multiplies `[h_prev, x]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCellParams<S> {
    pub w_f: Tensor<S>,
    pub b_f: Tensor<S>,
    pub w_i: Tensor<S>,
    pub b_i: Tensor<S>,
    pub w_o: Tensor<S>,
    pub b_o: Tensor<S>,
    pub w_c: Tensor<S>,
    pub b_c: Tensor<S>,
}

/// Intermediates kept by [`lstm_forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct LstmCache<S> {
    /// `[h_prev, x]`
    pub concat: Vec<S>,
    pub c_prev: Vec<S>,
    pub forget: Vec<S>,
    pub input: Vec<S>,
    pub output: Vec<S>,
    pub candidate: Vec<S>,
    pub cell: Vec<S>,
    pub tanh_cell: Vec<S>,
}

/// Gradients flowing out of the cell towards its inputs.
#[derive(Debug, Clone)]
pub struct LstmInputGrads<S> {
    pub dx: Vec<S>,
    pub dh_prev: Vec<S>,
    pub dc_prev: Vec<S>,
}

impl<S: Scalar> LstmCellParams<S> {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        let w = || Tensor::zeros(vec![hidden_dim, hidden_dim + input_dim]);
        let b = || Tensor::zeros(vec![hidden_dim]);
        LstmCellParams {
            w_f: w(),
            b_f: b(),
            w_i: w(),
            b_i: b(),
            w_o: w(),
            b_o: b(),
            w_c: w(),
            b_c: b(),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.b_f.len()
    }

    pub fn input_dim(&self) -> usize {
        self.w_f.cols() - self.hidden_dim()
    }

    /// Canonical (weight, bias) order: f, i, o, c.
    pub fn gates(&self) -> [(&Tensor<S>, &Tensor<S>); 4] {
        [
            (&self.w_f, &self.b_f),
            (&self.w_i, &self.b_i),
            (&self.w_o, &self.b_o),
            (&self.w_c, &self.b_c),
        ]
    }

    pub fn gates_mut(&mut self) -> [(&mut Tensor<S>, &mut Tensor<S>); 4] {
        [
            (&mut self.w_f, &mut self.b_f),
            (&mut self.w_i, &mut self.b_i),
            (&mut self.w_o, &mut self.b_o),
            (&mut self.w_c, &mut self.b_c),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let hidden = self.hidden_dim();
        if hidden == 0 {
            return Err(Error::structural("lstm hidden_dim must be positive"));
        }
        let w_shape = self.w_f.shape().to_vec();
        if w_shape.len() != 2 || w_shape[0] != hidden || w_shape[1] <= hidden {
            return Err(Error::structural(format!(
                "lstm weight shape {:?} inconsistent with hidden_dim {}",
                w_shape, hidden
            )));
        }
        for (w, b) in self.gates() {
            if w.shape() != w_shape.as_slice() || b.shape() != [hidden] {
                return Err(Error::structural("lstm gates disagree on shape"));
            }
        }
        Ok(())
    }
}

/// One step of the cell:
///
/// ```text
/// f = σ(W_f·[h,x] + b_f)     i = σ(W_i·[h,x] + b_i)     o = σ(W_o·[h,x] + b_o)
/// c̃ = tanh(W_c·[h,x] + b_c)  c = f⊙c_prev + i⊙c̃         h = o⊙tanh(c)
/// ```
pub fn lstm_forward<S: Scalar>(
    x: &[S],
    h_prev: &[S],
    c_prev: &[S],
    p: &LstmCellParams<S>,
) -> Result<(Vec<S>, Vec<S>, LstmCache<S>)> {
    let hidden = p.hidden_dim();
    if x.len() != p.input_dim() || h_prev.len() != hidden || c_prev.len() != hidden {
        return Err(Error::structural(format!(
            "lstm expects x[{}], h[{hidden}], c[{hidden}]; got x[{}], h[{}], c[{}]",
            p.input_dim(),
            x.len(),
            h_prev.len(),
            c_prev.len()
        )));
    }
    if !(all_finite(x) && all_finite(h_prev) && all_finite(c_prev)) {
        return Err(Error::numeric("non-finite lstm input"));
    }

    let mut concat = Vec::with_capacity(h_prev.len() + x.len());
    concat.extend_from_slice(h_prev);
    concat.extend_from_slice(x);

    let gate = |w: &Tensor<S>, b: &Tensor<S>| w.affine(&concat, b.values());
    let forget: Vec<S> = gate(&p.w_f, &p.b_f).into_iter().map(S::sigmoid).collect();
    let input: Vec<S> = gate(&p.w_i, &p.b_i).into_iter().map(S::sigmoid).collect();
    let output: Vec<S> = gate(&p.w_o, &p.b_o).into_iter().map(S::sigmoid).collect();
    let candidate: Vec<S> = gate(&p.w_c, &p.b_c).into_iter().map(S::tanh).collect();

    let cell: Vec<S> = (0..hidden)
        .map(|j| forget[j] * c_prev[j] + input[j] * candidate[j])
        .collect();
    let tanh_cell: Vec<S> = cell.iter().map(|c| c.tanh()).collect();
    let h: Vec<S> = output
        .iter()
        .zip(&tanh_cell)
        .map(|(&o, &t)| o * t)
        .collect();

    if !(all_finite(&h) && all_finite(&cell)) {
        return Err(Error::numeric("non-finite lstm output"));
    }

    let cache = LstmCache {
        concat,
        c_prev: c_prev.to_vec(),
        forget,
        input,
        output,
        candidate,
        cell: cell.clone(),
        tanh_cell,
    };
    Ok((h, cell, cache))
}

/// Backpropagates `dh` (and `dc`, the gradient arriving at the cell state from
/// a later step) through one cell step. Parameter gradients are accumulated
/// into `grads`, which has the same shape as the parameters.
pub fn lstm_backward<S: Scalar>(
    cache: &LstmCache<S>,
    p: &LstmCellParams<S>,
    dh: &[S],
    dc_next: &[S],
    grads: &mut LstmCellParams<S>,
) -> LstmInputGrads<S> {
    let hidden = p.hidden_dim();
    let one = S::one();

    let mut dz_f = vec![S::zero(); hidden];
    let mut dz_i = vec![S::zero(); hidden];
    let mut dz_o = vec![S::zero(); hidden];
    let mut dz_c = vec![S::zero(); hidden];
    let mut dc_prev = vec![S::zero(); hidden];

    for j in 0..hidden {
        let (f, i, o, g, t) = (
            cache.forget[j],
            cache.input[j],
            cache.output[j],
            cache.candidate[j],
            cache.tanh_cell[j],
        );
        let d_out = dh[j] * t;
        let dc = dh[j] * o * (one - t * t) + dc_next[j];
        dz_f[j] = dc * cache.c_prev[j] * f * (one - f);
        dz_i[j] = dc * g * i * (one - i);
        dz_o[j] = d_out * o * (one - o);
        dz_c[j] = dc * i * (one - g * g);
        dc_prev[j] = dc * f;
    }

    let mut d_concat = vec![S::zero(); cache.concat.len()];
    let dzs = [&dz_f, &dz_i, &dz_o, &dz_c];
    for ((w, _), ((gw, gb), dz)) in p
        .gates()
        .into_iter()
        .zip(grads.gates_mut().into_iter().zip(dzs))
    {
        add_outer(gw.values_mut(), dz, &cache.concat);
        for (b, &d) in gb.values_mut().iter_mut().zip(dz.iter()) {
            *b += d;
        }
        for (acc, v) in d_concat.iter_mut().zip(w.transpose_mul(dz)) {
            *acc += v;
        }
    }

    let dx = d_concat.split_off(hidden);
    LstmInputGrads {
        dx,
        dh_prev: d_concat,
        dc_prev,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_params_give_half_gates_and_zero_state() {
        let p = LstmCellParams::<f64>::zeros(16, 16);
        let x: Vec<f64> = (0..16).map(|k| k as f64 - 3.0).collect();
        let (h, c, cache) = lstm_forward(&x, &[0.0; 16], &[0.0; 16], &p).unwrap();
        assert!(cache.forget.iter().all(|&v| v == 0.5));
        assert!(cache.input.iter().all(|&v| v == 0.5));
        assert!(cache.output.iter().all(|&v| v == 0.5));
        assert!(cache.candidate.iter().all(|&v| v == 0.0));
        assert!(c.iter().all(|&v| v == 0.0));
        assert!(h.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn saturated_forget_gate_carries_cell_state() {
        let mut p = LstmCellParams::<f64>::zeros(16, 16);
        p.b_f.values_mut().iter_mut().for_each(|b| *b = 20.0);
        let c_prev: Vec<f64> = (0..16).map(|k| 0.1 * k as f64 - 0.7).collect();
        let (_, c, _) = lstm_forward(&[1.0; 16], &[0.0; 16], &c_prev, &p).unwrap();
        for (a, b) in c.iter().zip(&c_prev) {
            // σ(20) = 1 - 2.06e-9
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let p = LstmCellParams::<f64>::zeros(16, 16);
        let err = lstm_forward(&[0.0; 15], &[0.0; 16], &[0.0; 16], &p).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn non_finite_input_is_numeric() {
        let p = LstmCellParams::<f64>::zeros(16, 16);
        let mut x = [0.0; 16];
        x[3] = f64::NAN;
        let err = lstm_forward(&x, &[0.0; 16], &[0.0; 16], &p).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }

    #[test]
    fn cell_backward_matches_finite_differences() {
        // Small cell with nonzero h_prev/c_prev so every gate path is exercised.
        let (input, hidden) = (3, 2);
        let mut p = LstmCellParams::<f64>::zeros(input, hidden);
        let mut k = 0.0_f64;
        for (w, b) in p.gates_mut() {
            for v in w.values_mut().iter_mut().chain(b.values_mut().iter_mut()) {
                k += 1.0;
                *v = (k * 0.37).sin() * 0.8;
            }
        }
        let x = [0.3, -0.5, 0.9];
        let h0 = [0.2, -0.1];
        let c0 = [0.4, -0.6];
        // loss = Σ h_j·a_j + Σ c_j·b_j
        let a = [0.7, -1.3];
        let bw = [0.5, 0.25];
        let loss = |p: &LstmCellParams<f64>| {
            let (h, c, _) = lstm_forward(&x, &h0, &c0, p).unwrap();
            h.iter().zip(&a).map(|(h, a)| h * a).sum::<f64>()
                + c.iter().zip(&bw).map(|(c, b)| c * b).sum::<f64>()
        };
        let (_, _, cache) = lstm_forward(&x, &h0, &c0, &p).unwrap();
        let mut g = LstmCellParams::<f64>::zeros(input, hidden);
        lstm_backward(&cache, &p, &a, &bw, &mut g);

        let delta = 1e-6;
        for gate in 0..4 {
            let n_w = p.gates()[gate].0.len();
            for idx in 0..n_w {
                let mut plus = p.clone();
                plus.gates_mut()[gate].0.values_mut()[idx] += delta;
                let mut minus = p.clone();
                minus.gates_mut()[gate].0.values_mut()[idx] -= delta;
                let fd = (loss(&plus) - loss(&minus)) / (2.0 * delta);
                let an = g.gates()[gate].0.values()[idx];
                assert!((fd - an).abs() < 1e-8, "gate {gate} w[{idx}]: {fd} vs {an}");
            }
        }
    }
}
