//! Gnuplot scripts for the figures a manifest can support. Scripts sit next
//! to the manifest and refer to the CSVs by relative path, so the run
//! directory can be moved as a whole.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::manifest::Manifest;
use crate::CliError;

const PREAMBLE: &str = "set datafile separator ','\nset terminal pngcairo size 900,600\n";

fn num(v: &Value, key: &str) -> Option<f64> {
    v.get(key).and_then(Value::as_f64)
}

fn transition_script(data: &str, fit: Option<(f64, f64, f64)>) -> String {
    let mut s = String::from(PREAMBLE);
    s.push_str("set output 'transition.png'\nset xlabel 'lambda'\nset ylabel 'mu(A_lambda)'\nset key left top\n");
    match fit {
        Some((lambda_c, mu_c, eps)) => {
            let _ = writeln!(s, "lc = {lambda_c:.17e}\nmc = {mu_c:.17e}\ncap = {:.17e}", 1.0 + eps);
            s.push_str("shape(x) = 1.5*x**2 - 0.5*x**3\n");
            s.push_str("f(l) = mc*shape(l/lc < cap ? l/lc : cap)\n");
            let _ = writeln!(
                s,
                "plot '{data}' skip 1 using 1:2:3 with yerrorbars title 'measured', \\\n     f(x) with lines title 'cubic fit'"
            );
        }
        None => {
            let _ = writeln!(s, "plot '{data}' skip 1 using 1:2:6 with yerrorbars title 'measured'");
        }
    }
    s
}

fn localization_script(data: &str, fit: Option<(f64, f64)>) -> String {
    let mut s = String::from(PREAMBLE);
    s.push_str("set output 'localization.png'\nset xlabel '|k|'\nset ylabel 'ln p(k)'\n");
    let points = format!("'{data}' skip 1 using (abs($1)):($2 > 0 ? log($2) : NaN) with points pt 7 ps 0.4 title 'ln p'");
    match fit {
        Some((slope, intercept)) => {
            let _ = writeln!(s, "g(x) = {intercept:.17e} + {slope:.17e}*x");
            let _ = writeln!(s, "plot {points}, \\\n     g(x) with lines title 'bulk fit'");
        }
        None => {
            let _ = writeln!(s, "plot {points}");
        }
    }
    s
}

fn correlation_script(data: &str) -> String {
    let mut s = String::from(PREAMBLE);
    s.push_str("set output 'correlation.png'\nset xlabel 't'\nset ylabel 'C_Q'\n");
    let _ = writeln!(
        s,
        "plot '{data}' skip 1 using 1:2 with lines title 'c_q', \\\n     '{data}' skip 1 using 1:3 with lines lw 2 title 'cesaro'"
    );
    s
}

fn theorem2_script(data: &str) -> String {
    let mut s = String::from(PREAMBLE);
    s.push_str("set output 'theorem2.png'\nset xlabel 'mu/N'\nset ylabel 'd^2 mu'\n");
    let _ = writeln!(
        s,
        "plot '{data}' skip 1 using ($2/$1):($3*$2) with points title 'd^2 mu', \\\n     1 - x with lines title '1 - mu/N'"
    );
    s
}

fn spectrum_script(data: &str) -> String {
    let mut s = String::from(PREAMBLE);
    s.push_str("set output 'spectrum.png'\nset xlabel 'k'\nset ylabel 'phi_k'\n");
    let _ = writeln!(s, "plot '{data}' skip 1 using 1:2 with points pt 7 ps 0.3 title 'quasi-energies'");
    s
}

fn volume_script(data: &str, tol: Option<f64>) -> String {
    let mut s = String::from(PREAMBLE);
    s.push_str("set output 'volume.png'\nset xlabel 'state'\nset ylabel 'tail deviation'\nset logscale y\n");
    match tol {
        Some(t) => {
            let _ = writeln!(
                s,
                "plot '{data}' skip 1 using 1:2 with points title 'deviation', \\\n     {t:.17e} with lines title 'tol'"
            );
        }
        None => {
            let _ = writeln!(s, "plot '{data}' skip 1 using 1:2 with points title 'deviation'");
        }
    }
    s
}

/// Writes one script per figure supported by the manifest's artifacts and
/// returns their paths. Every referenced CSV must exist; an empty manifest
/// is a no-op.
pub fn emit_plot_scripts(manifest_path: &Path) -> Result<Vec<PathBuf>, CliError> {
    let manifest = Manifest::load(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    if manifest.artifacts.is_empty() {
        log::warn!("manifest {} lists no artifacts; nothing to plot", manifest_path.display());
        return Ok(Vec::new());
    }
    for a in manifest.artifacts.iter().filter(|a| a.path.ends_with(".csv")) {
        if !dir.join(&a.path).is_file() {
            return Err(CliError::Config(format!(
                "manifest references missing CSV {}",
                dir.join(&a.path).display()
            )));
        }
    }

    let summary = &manifest.summary;
    let mut scripts: Vec<(&str, String)> = Vec::new();
    for a in &manifest.artifacts {
        let data = a.path.as_str();
        match a.role.as_str() {
            "region-estimates" => scripts.push(("plot_transition.gp", transition_script(data, None))),
            "fit-overlay" => {
                let fit = summary.get("fit").and_then(|f| {
                    Some((num(f, "lambda_c")?, num(f, "mu_c")?, num(summary, "epsilon_fraction")?))
                });
                scripts.push(("plot_transition.gp", transition_script(data, fit)));
            }
            "momentum-distribution" => {
                let fit = summary
                    .get("localization")
                    .and_then(|l| Some((num(l, "slope")?, num(l, "intercept")?)));
                scripts.push(("plot_localization.gp", localization_script(data, fit)));
            }
            "correlation-series" => scripts.push(("plot_correlation.gp", correlation_script(data))),
            "theorem2" => scripts.push(("plot_theorem2.gp", theorem2_script(data))),
            "spectrum" => scripts.push(("plot_spectrum.gp", spectrum_script(data))),
            "volume-deviations" => scripts.push(("plot_volume.gp", volume_script(data, num(summary, "tol")))),
            _ => {}
        }
    }
    let mut written = Vec::with_capacity(scripts.len());
    for (name, body) in scripts {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}
