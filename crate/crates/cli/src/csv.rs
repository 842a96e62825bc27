//! Versioned CSV tables of experiment reports.

use std::io::{self, Write};

use hadamard_core::harness::ExperimentReport;
use hadamard_core::perturbation::Form;

pub const SCHEMA_VERSION: u32 = 1;
pub const HEADER: &str = "epsilon,d,Lambda_m,J_m,k,Lambda_prime_k,kappa_k,remainder_k,fem_floor,masked";

fn form_name(form: Form) -> &'static str {
    match form {
        Form::Boundary => "boundary",
        Form::Volume => "volume",
        Form::OperatorBoundary => "operator-boundary",
    }
}

/// One line per cluster member and amplitude; `k` counts from 1.
pub fn write_report<W: Write>(mut out: W, report: &ExperimentReport, form: Form) -> io::Result<()> {
    writeln!(
        out,
        "# hadamard report schema {SCHEMA_VERSION}; form={}; case={}; target={:.17e}",
        form_name(form),
        report.label,
        report.cluster_target
    )?;
    writeln!(out, "{HEADER}")?;
    for row in &report.rows {
        for entry in &row.entries {
            let Some(est) = entry.estimate(form) else { continue };
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{}",
                row.epsilon,
                row.d,
                row.lambda_m,
                row.multiplicity,
                entry.k + 1,
                entry.lambda_prime,
                est.kappa,
                est.remainder,
                est.fem_floor,
                est.masked
            )?;
        }
    }
    Ok(())
}
