//! Accuracy, cross-entropy, Cohen's kappa and ROC area for the binary
//! God-Class task.

pub mod bands;

use serde::{Deserialize, Serialize};

pub use bands::{interpret_kappa, interpret_roc, KappaBand, RocBand};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{argmax, cross_entropy, Architecture, ModelParams, ParamVector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        ConfusionMatrix { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn record(&mut self, predicted: usize, actual: usize) {
        match (predicted, actual) {
            (1, 1) => self.tp += 1,
            (0, 0) => self.tn += 1,
            (1, 0) => self.fp += 1,
            _ => self.fn_ += 1,
        }
    }

    fn nonempty(&self) -> Result<f64> {
        match self.total() {
            0 => Err(Error::structural("confusion matrix is empty")),
            n => Ok(n as f64),
        }
    }
}

/// Percentage of correct predictions.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let n = cm.nonempty()?;
    Ok((cm.tp + cm.tn) as f64 / n * 100.0)
}

/// Chance-corrected agreement `(P_o - P_e) / (1 - P_e)`. When `P_e = 1` the
/// ratio is undefined; that case returns 1 for perfect agreement and 0
/// otherwise.
pub fn cohen_kappa(cm: &ConfusionMatrix) -> Result<f64> {
    let n = cm.nonempty()?;
    let (tp, tn, fp, fn_) = (cm.tp as f64, cm.tn as f64, cm.fp as f64, cm.fn_ as f64);
    let p_o = (tp + tn) / n;
    let p_e = ((tp + fp) * (tp + fn_) + (fn_ + tn) * (fp + tn)) / (n * n);
    if p_e >= 1.0 {
        return Ok(if p_o >= 1.0 { 1.0 } else { 0.0 });
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredPrediction<S = f64> {
    /// Probability assigned to the God-Class label.
    pub score: S,
    pub label: u8,
}

/// Area under the ROC curve via the Mann-Whitney statistic: the probability
/// a random positive outscores a random negative, ties counting one half.
pub fn roc_auc<S: Scalar>(preds: &[ScoredPrediction<S>]) -> Result<f64> {
    if preds.iter().any(|p| !p.score.is_finite()) {
        return Err(Error::numeric("non-finite score"));
    }
    let positives = preds.iter().filter(|p| p.label == 1).count();
    let negatives = preds.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::structural(format!(
            "ROC area needs both classes (positives {positives}, negatives {negatives})"
        )));
    }
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[a].score.partial_cmp(&preds[b].score).expect("finite"));

    // Sum of midranks (1-based) of the positives.
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && preds[order[end]].score == preds[order[start]].score {
            end += 1;
        }
        let midrank = (start + 1 + end) as f64 / 2.0;
        let tied_pos = order[start..end]
            .iter()
            .filter(|&&i| preds[i].label == 1)
            .count();
        rank_sum += midrank * tied_pos as f64;
        start = end;
    }
    let p = positives as f64;
    let u = rank_sum - p * (p + 1.0) / 2.0;
    Ok(u / (p * negatives as f64))
}

/// Evaluation summary; field names are part of the JSON output format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy_pct: f64,
    pub mean_loss: f64,
    pub kappa: f64,
    pub roc_auc: f64,
    pub kappa_band: String,
    pub roc_band: String,
}

impl MetricReport {
    pub fn from_predictions(
        cm: &ConfusionMatrix,
        mean_loss: f64,
        scored: &[ScoredPrediction<f64>],
    ) -> Result<Self> {
        let accuracy_pct = accuracy(cm)?;
        let kappa = cohen_kappa(cm)?;
        let roc_auc = roc_auc(scored)?;
        Ok(MetricReport {
            accuracy_pct,
            mean_loss,
            kappa,
            roc_auc,
            kappa_band: interpret_kappa(kappa)?.to_string(),
            roc_band: interpret_roc(roc_auc)?.to_string(),
        })
    }
}

/// Scores a model on a dataset: argmax predictions (ties → class 0) for the
/// confusion matrix, `probs[1]` as the ROC score.
pub fn evaluate_params<S: Scalar>(
    model: &ModelParams<S>,
    test: &Dataset<S>,
) -> Result<MetricReport> {
    if test.is_empty() {
        return Err(Error::structural("evaluation set is empty"));
    }
    let mut cm = ConfusionMatrix::default();
    let mut scored = Vec::with_capacity(test.len());
    let mut loss = 0.0;
    for (x, label) in test.examples() {
        let (probs, _) = model.forward(x)?;
        cm.record(argmax(&probs), label);
        loss += cross_entropy(&probs, label)?.to_f64_lossy();
        scored.push(ScoredPrediction {
            score: probs[1].to_f64_lossy(),
            label: label as u8,
        });
    }
    MetricReport::from_predictions(&cm, loss / test.len() as f64, &scored)
}

pub fn evaluate_model<S: Scalar>(w: &ParamVector<S>, test: &Dataset<S>) -> Result<MetricReport> {
    let model = ModelParams::unflatten(&Architecture::default(), w)?;
    evaluate_params(&model, test)
}
