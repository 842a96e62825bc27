use super::{ExperimentReport, HarnessError};
use crate::perturbation::Form;

/// Fewest unmasked rows a slope is fitted from.
pub const MIN_FIT_ROWS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    /// Least-squares slope of `log max_k|R_k|` against `log ε`.
    pub slope: f64,
    /// Two standard errors of the slope.
    pub half_width: f64,
    /// Slope of each member's own remainder, where enough rows are unmasked.
    pub per_k_slopes: Vec<Option<f64>>,
    /// `(ε, max_k|R_k|/ε)` over the unmasked rows, in report order.
    pub ratios: Vec<(f64, f64)>,
}

impl OrderFit {
    pub fn ratios_strictly_decreasing(&self) -> bool {
        self.ratios.windows(2).all(|w| w[1].1 < w[0].1)
    }

    pub fn min_ratio(&self) -> f64 {
        self.ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min)
    }
}

/// Slope and half-width of a least-squares line through `(x, y)`.
fn regression(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = points
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum();
    let se = if points.len() > 2 { (ssr / (n - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    (slope, 2.0 * se)
}

/// [`fit_order_for`] on the report's primary form.
pub fn fit_order(report: &ExperimentReport) -> Result<OrderFit, HarnessError> {
    fit_order_for(report, report.primary_form())
}

/// Fits the remainder order of one form over the unmasked rows.
pub fn fit_order_for(report: &ExperimentReport, form: Form) -> Result<OrderFit, HarnessError> {
    let pooled: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter_map(|r| r.pooled_remainder(form).map(|rem| (r.epsilon, rem)))
        .filter(|&(_, rem)| rem > 0.0)
        .collect();
    if pooled.len() < MIN_FIT_ROWS {
        return Err(HarnessError::InsufficientData {
            usable: pooled.len(),
            required: MIN_FIT_ROWS,
        });
    }
    let logs: Vec<(f64, f64)> = pooled.iter().map(|&(e, r)| (e.ln(), r.ln())).collect();
    let (slope, half_width) = regression(&logs);

    let members = report.rows.iter().map(|r| r.entries.len()).max().unwrap_or(0);
    let per_k_slopes = (0..members)
        .map(|k| {
            let pts: Vec<(f64, f64)> = report
                .rows
                .iter()
                .filter_map(|r| {
                    let e = r.entries.get(k)?.estimate(form)?;
                    (!e.masked && e.remainder != 0.0).then(|| (r.epsilon.ln(), e.remainder.abs().ln()))
                })
                .collect();
            (pts.len() >= MIN_FIT_ROWS).then(|| regression(&pts).0)
        })
        .collect();
    Ok(OrderFit {
        slope,
        half_width,
        per_k_slopes,
        ratios: pooled.iter().map(|&(e, r)| (e, r / e)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{FormEstimate, ReportRow, RowEntry};

    fn synthetic(law: impl Fn(f64) -> f64, masked_at: Option<usize>) -> ExperimentReport {
        let rows = (0..6)
            .map(|i| {
                let eps = 0.1 * 0.5f64.powi(i);
                let est = |sign: f64| FormEstimate {
                    kappa: 0.0,
                    remainder: sign * law(eps),
                    fem_floor: 0.0,
                    masked: masked_at == Some(i as usize),
                };
                ReportRow {
                    epsilon: eps,
                    d: eps,
                    resolution: (4, 32),
                    lambda_m: 1.0,
                    multiplicity: 2,
                    ambiguous: false,
                    entries: vec![
                        RowEntry { k: 0, lambda_prime: 1.0, boundary: Some(est(-1.0)), volume: None },
                        RowEntry { k: 1, lambda_prime: 1.0, boundary: Some(est(0.5)), volume: None },
                    ],
                }
            })
            .collect();
        ExperimentReport { label: "synthetic".into(), cluster_target: 1.0, rows }
    }

    #[test]
    fn exact_power_laws() {
        let fit = fit_order(&synthetic(|e| 3.0 * e * e, None)).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-6);
        assert!(fit.half_width < 1e-6);
        assert!(fit.ratios_strictly_decreasing());
        for s in &fit.per_k_slopes {
            assert!((s.unwrap() - 2.0).abs() < 1e-6);
        }
        let fit = fit_order(&synthetic(|e| 0.7 * e.powf(1.5), None)).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-6);
        let fit = fit_order(&synthetic(|e| 0.2 * e, None)).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-6);
        assert!(fit.ratios.iter().all(|r| (r.1 - 0.2).abs() < 1e-12));
        assert!((fit.min_ratio() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn masked_rows_are_left_out() {
        let fit = fit_order(&synthetic(|e| e * e, Some(2))).unwrap();
        assert_eq!(fit.ratios.len(), 5);
        let mut few = synthetic(|e| e * e, None);
        few.rows.truncate(3);
        assert!(matches!(
            fit_order(&few),
            Err(HarnessError::InsufficientData { usable: 3, required: 4 })
        ));
    }

    #[test]
    fn noisy_data_widens_the_interval() {
        let fit = fit_order(&synthetic(|e| e * e * (1.0 + 0.3 * (1.0 / e).ln().sin()), None)).unwrap();
        assert!(fit.half_width > 0.01);
    }
}
