use serde::Serialize;

use super::cv::{EtrReport, ModelKind};
use crate::error::{Error, Result};

/// Ranks starting at 1; tied values share the average of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's ρ as the Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Validation("spearman inputs differ in length".into()));
    }
    if x.len() < 3 {
        return Err(Error::UndefinedMetric(format!(
            "Spearman correlation needs at least 3 points, got {}",
            x.len()
        )));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedMetric(
            "Spearman correlation of a constant series".into(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelCorrelation {
    pub model: ModelKind,
    pub points: usize,
    /// `None` when undefined (fewer than 3 points or a constant series).
    pub rho: Option<f64>,
}

/// Spearman ρ between Focus(K) and mean ETR accuracy, per model kind.
/// `reports` pairs each report with its schema's Focus(K).
pub fn focus_accuracy_correlation(reports: &[(f64, EtrReport)]) -> Vec<ModelCorrelation> {
    let mut out = Vec::new();
    for model in [ModelKind::Tree, ModelKind::Knn] {
        let (focus, acc): (Vec<f64>, Vec<f64>) = reports
            .iter()
            .filter(|(_, r)| r.model == model)
            .map(|(f, r)| (*f, r.mean_accuracy))
            .unzip();
        if focus.is_empty() {
            continue;
        }
        out.push(ModelCorrelation {
            model,
            points: focus.len(),
            rho: spearman(&focus, &acc).ok(),
        });
    }
    out
}
