use statrs::distribution::{ContinuousCDF, StudentsT};

use super::baseline::label_counts;
use crate::{Error, Result};

/// Sample Pearson correlation and its two-sided p-value.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "pearson inputs".into(),
            expected: x.len(),
            found: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Numeric(format!("pearson needs at least 3 points, got {n}")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Numeric("pearson of a constant series".into()));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok((r, pearson_p_value(r, n)))
}

/// Two-sided p-value of `r` under the null of zero correlation, from
/// `t = r·√(n−2)/√(1−r²)` with `n − 2` degrees of freedom.
pub fn pearson_p_value(r: f64, n: usize) -> f64 {
    let one_minus = 1.0 - r * r;
    if one_minus <= 0.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = r * df.sqrt() / one_minus.sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

/// Shannon entropy of the empirical label distribution, in bits.
pub fn label_entropy(labels: &[usize]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptySamples("entropy of an empty label list".into()));
    }
    let n = labels.len() as f64;
    let h = label_counts(labels)
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>();
    Ok(h.max(0.0))
}
