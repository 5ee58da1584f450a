use std::fmt::Write as _;
use std::path::PathBuf;

use clap::ValueEnum;
use vqc_spectrum::data_spectrum::DataSpectrumRecord;
use vqc_spectrum::sim::EpochRecord;
use vqc_spectrum::spectrum::SpectrumRecord;
use vqc_spectrum::RankReport;

use crate::commands::{Failure, VerifyResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// The JSON artifact (CSV for datasets).
    Structured,
    /// Human-readable summary.
    Table,
}

#[derive(Clone, Debug)]
pub struct OutputOptions {
    pub out: Option<PathBuf>,
    pub format: Format,
    pub plot: bool,
}

impl OutputOptions {
    pub fn validate(&self) -> Result<(), Failure> {
        if self.plot && self.out.is_none() {
            return Err(Failure::input("--plot needs --out"));
        }
        Ok(())
    }
}

/// Everything one command produces.
pub struct Run {
    /// File name and text of the main artifact.
    pub primary: (String, String),
    pub table: String,
    pub files: Vec<(String, String)>,
    pub plots: Vec<(String, String)>,
    pub passed: Option<bool>,
}

impl Run {
    pub fn verdict(&self) -> Result<(), Failure> {
        match self.passed {
            Some(false) => Err(Failure::compute("verification failed")),
            _ => Ok(()),
        }
    }
}

pub fn emit(run: &Run, opts: &OutputOptions) -> Result<(), Failure> {
    if let Some(dir) = &opts.out {
        let write_err = |e: std::io::Error| Failure::compute(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(write_err)?;
        let mut files: Vec<&(String, String)> = vec![&run.primary];
        files.extend(&run.files);
        if opts.plot {
            files.extend(&run.plots);
        }
        for (name, text) in files {
            std::fs::write(dir.join(name), text).map_err(write_err)?;
        }
    }
    match opts.format {
        Format::Structured => print!("{}", run.primary.1),
        Format::Table => print!("{}", run.table),
    }
    Ok(())
}

fn freq(f: &vqc_spectrum::Frequency) -> String {
    let parts: Vec<String> = f.0.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(","))
}

fn list(v: &[usize]) -> String {
    let parts: Vec<String> = v.iter().map(|n| n.to_string()).collect();
    format!("[{}]", parts.join(","))
}

pub fn spectrum_table(records: &[SpectrumRecord]) -> String {
    let mut s = String::new();
    let width = records.iter().map(|r| r.circuit_id.len()).max().unwrap_or(0).max(7);
    let _ = writeln!(
        s,
        "{:<width$}  {:>6}  {:>3}  {:>3}  {:>10}  {:>10}  {:>8}  {:>8}",
        "circuit", "qubits", "d", "w", "encodings", "naive", "|Ω|", "leaves"
    );
    for r in records {
        let _ = writeln!(
            s,
            "{:<width$}  {:>6}  {:>3}  {:>3}  {:>10}  {:>10}  {:>8}  {:>8}",
            r.circuit_id,
            r.n_qubits,
            r.d,
            r.w,
            list(&r.encoding_counts),
            r.naive_grid_size,
            r.spectrum_size,
            r.leaf_count
        );
    }
    for r in records {
        const SHOWN: usize = 64;
        let head: Vec<String> = r.spectrum.iter().take(SHOWN).map(freq).collect();
        let more = if r.spectrum.len() > SHOWN {
            format!(" ... ({} more)", r.spectrum.len() - SHOWN)
        } else {
            String::new()
        };
        let _ = writeln!(s, "\nΩ({}) = {{{}}}{more}", r.circuit_id, head.join(", "));
    }
    s
}

pub fn rank_table(report: &RankReport) -> String {
    let mut s = String::new();
    let width = report.architectures.iter().map(|a| a.id.len()).max().unwrap_or(0).max(12);
    let _ = writeln!(s, "grid {}", list(&report.grid_sizes));
    let _ = writeln!(
        s,
        "{:>4}  {:<width$}  {:>6}  {:>10}  {:>10}  {:>10}  {:>10}",
        "rank", "architecture", "|Ω|", "R_Ω", "R_corr", "R_punish", "score"
    );
    for a in &report.architectures {
        let _ = writeln!(
            s,
            "{:>4}  {:<width$}  {:>6}  {:>10.4}  {:>10.4}  {:>10.4}  {:>10.4}",
            a.rank, a.id, a.spectrum_size, a.r_omega_normalized, a.r_corr_normalized, a.r_punish, a.score
        );
    }
    s
}

pub fn verify_table(r: &VerifyResult, tolerance: f64) -> String {
    let verdict = match (r.passed, r.vacuous) {
        (true, true) => "PASS (vacuous)",
        (true, false) => "PASS",
        (false, _) => "FAIL",
    };
    format!(
        "{}: {} trials, |Ω| = {}, max deviation {:.3e}, max imaginary part {:.3e}, tolerance {:.1e}: {verdict}\n",
        r.circuit_id, r.trials, r.spectrum_size, r.max_deviation, r.max_imaginary, tolerance
    )
}

pub fn data_spectrum_table(r: &DataSpectrumRecord) -> String {
    let mut s = String::new();
    let regime = serde_json::to_value(r.regime)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    let _ = writeln!(
        s,
        "grid {}  {regime}  residual {:.3e}  regularization {:.3e}",
        list(&r.grid_sizes),
        r.residual,
        r.regularization
    );
    let mut order: Vec<usize> = (0..r.coefficients.len()).collect();
    let mag = |i: usize| r.coefficients[i].re.hypot(r.coefficients[i].im);
    order.sort_by(|&a, &b| mag(b).total_cmp(&mag(a)).then(a.cmp(&b)));
    let _ = writeln!(s, "{:>16}  {:>12}  {:>12}  {:>12}", "frequency", "re", "im", "|f|");
    for &i in order.iter().take(12) {
        let c = &r.coefficients[i];
        let _ = writeln!(s, "{:>16}  {:>12.4e}  {:>12.4e}  {:>12.4e}", freq(&c.frequency), c.re, c.im, mag(i));
    }
    s
}

pub fn train_table(id: &str, history: &[EpochRecord], theta: &[f64]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{id}: {} epochs", history.len());
    let _ = writeln!(s, "{:>6}  {:>12}  {:>12}", "epoch", "train MSE", "test MSE");
    let step = (history.len() / 10).max(1);
    for (i, h) in history.iter().enumerate() {
        if i % step == 0 || i + 1 == history.len() {
            let test = h.test_mse.map(|v| format!("{v:.4e}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(s, "{:>6}  {:>12.4e}  {:>12}", h.epoch, h.train_mse, test);
        }
    }
    let parts: Vec<String> = theta.iter().map(|t| format!("{t:.6}")).collect();
    let _ = writeln!(s, "θ = [{}]", parts.join(", "));
    s
}
