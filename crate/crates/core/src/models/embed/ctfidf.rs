use crate::error::{Error, Result};

/// Class-based TF-IDF: `tf(w,c) · ln(1 + A / f(w))`, where `A` is the mean
/// number of words per class and `f(w)` the count of `w` over all classes.
pub fn compute_ctfidf(class_term_counts: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n_classes = class_term_counts.len();
    let vocab = class_term_counts.first().map_or(0, Vec::len);
    if class_term_counts.iter().any(|r| r.len() != vocab) {
        return Err(Error::Validation("class rows differ in length".into()));
    }
    if class_term_counts.iter().flatten().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::Validation("class term counts must be finite and non-negative".into()));
    }
    let total: f64 = class_term_counts.iter().flatten().sum();
    if total <= 0.0 {
        return Err(Error::Degenerate("class term counts are all zero".into()));
    }
    let avg = total / n_classes as f64;
    let mut freq = vec![0.0; vocab];
    for row in class_term_counts {
        freq.iter_mut().zip(row).for_each(|(f, x)| *f += x);
    }
    Ok(class_term_counts
        .iter()
        .map(|row| {
            row.iter()
                .zip(&freq)
                .map(|(&tf, &f)| if tf > 0.0 { tf * (1.0 + avg / f).ln() } else { 0.0 })
                .collect()
        })
        .collect())
}
