use crate::perturbation::Form;

/// Rows whose FEM error floor reaches this fraction of `|R_k|` are masked.
pub const MASK_RATIO: f64 = 0.1;

/// One form's prediction for one cluster member, Richardson-extrapolated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormEstimate {
    pub kappa: f64,
    /// `R_k = Λ'_k − Λ_m − κ_k`.
    pub remainder: f64,
    /// Estimated discretization error of the fine-mesh remainder.
    pub fem_floor: f64,
    pub masked: bool,
}

impl FormEstimate {
    /// Extrapolates from coarse and fine values of `(κ, R)` with error `O(h²)`.
    pub fn richardson(coarse: (f64, f64), fine: (f64, f64), force_mask: bool) -> Self {
        let kappa = (4.0 * fine.0 - coarse.0) / 3.0;
        let remainder = (4.0 * fine.1 - coarse.1) / 3.0;
        let fem_floor = (fine.1 - coarse.1).abs() / 3.0;
        FormEstimate {
            kappa,
            remainder,
            fem_floor,
            masked: force_mask || !(fem_floor < MASK_RATIO * remainder.abs()),
        }
    }
}

/// Per-member results of one amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct RowEntry {
    /// Rank within the cluster, from 0.
    pub k: usize,
    /// Extrapolated perturbed eigenvalue `Λ'_k`.
    pub lambda_prime: f64,
    pub boundary: Option<FormEstimate>,
    pub volume: Option<FormEstimate>,
}

impl RowEntry {
    pub fn estimate(&self, form: Form) -> Option<&FormEstimate> {
        match form {
            Form::Volume => self.volume.as_ref(),
            _ => self.boundary.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub epsilon: f64,
    /// Hausdorff distance between the reference and perturbed domains.
    pub d: f64,
    /// Coarse mesh resolution; the fine mesh doubles both counts.
    pub resolution: (usize, usize),
    /// Extrapolated `Λ_m`.
    pub lambda_m: f64,
    pub multiplicity: usize,
    /// The perturbed eigenvalues could not be attributed to the cluster.
    pub ambiguous: bool,
    pub entries: Vec<RowEntry>,
}

impl ReportRow {
    /// `max_k |R_k|` over unmasked members, if any.
    pub fn pooled_remainder(&self, form: Form) -> Option<f64> {
        self.entries
            .iter()
            .filter_map(|e| e.estimate(form))
            .filter(|e| !e.masked)
            .map(|e| e.remainder.abs())
            .reduce(f64::max)
    }
}

/// Results of an amplitude sweep, rows in decreasing `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub label: String,
    pub cluster_target: f64,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    /// The form the report was primarily computed for.
    pub fn primary_form(&self) -> Form {
        let has_boundary = self
            .rows
            .iter()
            .flat_map(|r| &r.entries)
            .any(|e| e.boundary.is_some());
        if has_boundary || self.rows.is_empty() { Form::Boundary } else { Form::Volume }
    }

    pub fn has_form(&self, form: Form) -> bool {
        self.rows.iter().flat_map(|r| &r.entries).any(|e| e.estimate(form).is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_cancels_quadratic_error() {
        // R(h) = R + c h² at h and h/2
        let est = FormEstimate::richardson((1.0, 0.5 + 0.04), (1.0, 0.5 + 0.01), false);
        assert!((est.remainder - 0.5).abs() < 1e-15);
        assert!((est.fem_floor - 0.01).abs() < 1e-15);
        assert!(!est.masked);
        let noisy = FormEstimate::richardson((0.0, 0.5), (0.0, 0.2), false);
        assert!(noisy.masked);
        assert!(FormEstimate::richardson((0.0, 0.0), (0.0, 0.0), false).masked);
        assert!(FormEstimate::richardson((1.0, 0.5), (1.0, 0.5), true).masked);
    }

    #[test]
    fn pooled_remainder_skips_masked_members() {
        let est = |r: f64, masked| FormEstimate { kappa: 0.0, remainder: r, fem_floor: 0.0, masked };
        let row = ReportRow {
            epsilon: 0.1,
            d: 0.1,
            resolution: (4, 32),
            lambda_m: 1.0,
            multiplicity: 2,
            ambiguous: false,
            entries: vec![
                RowEntry { k: 0, lambda_prime: 1.0, boundary: Some(est(-3.0, true)), volume: None },
                RowEntry { k: 1, lambda_prime: 1.0, boundary: Some(est(-2.0, false)), volume: None },
            ],
        };
        assert_eq!(row.pooled_remainder(Form::Boundary), Some(2.0));
        assert_eq!(row.pooled_remainder(Form::Volume), None);
    }
}
