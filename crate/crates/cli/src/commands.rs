use std::io::Write;
use std::path::Path;

use serde::Serialize;
use spearfact::corrmat::build;
use spearfact::{
    eigen_sym, gamma_mc, run_scenario, BulkDistribution, EstimateResult, FrequencyTable, MatrixKind, Method,
    Population, SignificanceReport, SpikeModel, TiePolicy,
};

use crate::config::parse_config;
use crate::csvio::{explain, read_data};
use crate::error::{CliError, CliResult};
use crate::ingest::{ingest_fredmd, write_matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Serialize)]
pub struct EstimateReport {
    pub n: usize,
    pub p: usize,
    pub results: Vec<EstimateResult>,
}

pub fn tie_policy(name: &str, seed: u64) -> CliResult<TiePolicy> {
    match name {
        "midrank" => Ok(TiePolicy::Midrank),
        "jitter" => Ok(TiePolicy::Jitter { seed }),
        other => Err(CliError::input(format!("unknown tie policy '{other}' (expected midrank or jitter)"))),
    }
}

/// `all` expands to every estimator in canonical order.
pub fn parse_methods(s: &str) -> CliResult<Vec<Method>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Method::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in s.split(',') {
        let m: Method = part.trim().parse().map_err(CliError::Input)?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(out)
}

pub fn estimate(
    input: &Path,
    methods: &[Method],
    k_max: usize,
    ties: TiePolicy,
    transpose: bool,
) -> CliResult<EstimateReport> {
    let (table, data) = read_data(input, transpose)?;
    let results = methods
        .iter()
        .map(|m| m.estimate_with(&data, k_max, ties).map_err(|e| explain(&table, e)))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(EstimateReport { n: data.n_obs(), p: data.n_vars(), results })
}

pub fn write_estimate<W: Write>(mut out: W, report: &EstimateReport, format: OutputFormat) -> CliResult<()> {
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, report).map_err(|e| CliError::input(e.to_string()))?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "method,k_hat,k_max")?;
            for r in &report.results {
                writeln!(out, "{},{},{}", r.method, r.k_hat, r.k_max)?;
            }
        }
    }
    Ok(())
}

/// Leading eigenvalues, descending. `top` beyond `p` is clipped with a
/// warning on stderr.
pub fn spectrum(
    input: &Path,
    kind: MatrixKind,
    top: Option<usize>,
    ties: TiePolicy,
    transpose: bool,
) -> CliResult<Vec<f64>> {
    let (table, data) = read_data(input, transpose)?;
    let m = build(&data, kind, ties).map_err(|e| explain(&table, e))?;
    let s = eigen_sym(&m)?;
    let p = s.p();
    let count = match top {
        Some(t) if t > p => {
            eprintln!("warning: --top {t} exceeds p = {p}; emitting all {p} eigenvalues");
            p
        }
        Some(t) => t,
        None => p,
    };
    Ok(s.eigenvalues()[..count].to_vec())
}

pub fn write_spectrum<W: Write>(mut out: W, eigenvalues: &[f64]) -> CliResult<()> {
    writeln!(out, "index,eigenvalue")?;
    for (i, v) in eigenvalues.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, v)?;
    }
    Ok(())
}

/// Runs the scenario in `config_path`; `seed` overrides the configured seed.
pub fn simulate(config_path: &Path, seed: Option<u64>) -> CliResult<FrequencyTable> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", config_path.display())))?;
    let mut config = parse_config(&text)?;
    if let Some(s) = seed {
        config.scenario.seed = s;
    }
    Ok(run_scenario(&config.scenario, &config.estimators)?)
}

/// One row per estimator with fixed precision, stable for diffing.
pub fn write_frequency_table<W: Write>(mut out: W, table: &FrequencyTable) -> CliResult<()> {
    writeln!(out, "method,correct_pct,over_pct,under_pct,failed_pct,mean_k_hat")?;
    for r in &table.rows {
        let mean = if r.mean_k_hat.is_nan() { "NaN".to_string() } else { format!("{:.4}", r.mean_k_hat) };
        writeln!(
            out,
            "{},{:.2},{:.2},{:.2},{:.2},{mean}",
            r.method, r.correct_pct, r.over_pct, r.under_pct, r.failed_pct
        )?;
    }
    Ok(())
}

fn parse_real(s: &str, what: &str) -> CliResult<f64> {
    let v: f64 = s.trim().parse().map_err(|_| CliError::input(format!("{what}: '{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::input(format!("{what}: '{s}' is not finite")));
    }
    Ok(v)
}

/// Comma-separated reals.
pub fn parse_spikes(s: &str) -> CliResult<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| parse_real(x, "--spikes")).collect()
}

/// Comma-separated `location:weight` atoms, or bare locations for equal
/// weights.
pub fn parse_atoms(s: &str) -> CliResult<BulkDistribution> {
    let parts: Vec<&str> = s.split(',').collect();
    let weighted = parts.iter().filter(|p| p.contains(':')).count();
    let atoms = if weighted == 0 {
        let w = 1.0 / parts.len() as f64;
        parts.iter().map(|t| Ok((parse_real(t, "--bulk-atoms")?, w))).collect::<CliResult<Vec<_>>>()?
    } else if weighted == parts.len() {
        parts
            .iter()
            .map(|p| {
                let (t, w) = p.split_once(':').expect("checked above");
                Ok((parse_real(t, "--bulk-atoms")?, parse_real(w, "--bulk-atoms")?))
            })
            .collect::<CliResult<Vec<_>>>()?
    } else {
        return Err(CliError::input("--bulk-atoms: give weights for every atom or for none"));
    };
    if weighted == 0 {
        // equal weights may not sum to exactly one in floating point
        let t: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        if let Some(bad) = t.iter().find(|v| **v < 0.0) {
            return Err(CliError::input(format!("--bulk-atoms: location {bad} is negative")));
        }
        return BulkDistribution::from_eigenvalues(&t).map_err(|e| CliError::input(format!("--bulk-atoms: {e}")));
    }
    BulkDistribution::new(atoms).map_err(|e| CliError::input(format!("--bulk-atoms: {e}")))
}

pub fn theory(spikes: Vec<f64>, bulk: BulkDistribution, c: f64) -> CliResult<SignificanceReport> {
    let model = SpikeModel::new(spikes, bulk, c)?;
    Ok(model.count_significant())
}

#[derive(Debug, Serialize)]
pub struct GammaReport {
    pub population: Population,
    /// `None` when the Monte Carlo mean is unstable.
    pub gamma: Option<f64>,
    pub stderr: f64,
    pub diverged: bool,
    pub running_mean: f64,
    pub samples: usize,
    pub seed: u64,
    pub se_slope: f64,
}

pub fn gamma(population: Population, samples: usize, seed: u64) -> CliResult<GammaReport> {
    let g = gamma_mc(population, samples, seed)?;
    Ok(GammaReport {
        population,
        gamma: g.value(),
        stderr: g.std_error,
        diverged: g.diverged,
        running_mean: g.mean,
        samples,
        seed,
        se_slope: g.se_slope,
    })
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::input(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

/// Transforms a raw panel; dropped columns are reported on stderr.
pub fn ingest<W: Write>(input: &Path, out: W) -> CliResult<()> {
    let file =
        std::fs::File::open(input).map_err(|e| CliError::input(format!("cannot open {}: {e}", input.display())))?;
    let got = ingest_fredmd(file)?;
    for name in &got.dropped {
        eprintln!("note: dropped column '{name}' (missing values after transformation)");
    }
    eprintln!("note: kept {} columns, {} rows ({} leading rows trimmed)", got.names.len(), got.rows.len(), got.trimmed);
    write_matrix(out, &got.names, &got.rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn methods_and_atoms() {
        assert_eq!(parse_methods("all").unwrap().len(), 5);
        assert_eq!(parse_methods("sr,ACT,sr").unwrap(), vec![Method::Sr, Method::Act]);
        assert!(parse_methods("sr,bcv").is_err());
        let b = parse_atoms("1.0:1.0").unwrap();
        assert_eq!(b.atoms(), &[(1.0, 1.0)]);
        assert_eq!(parse_atoms("1,2,3").unwrap().atoms().len(), 3);
        assert!(parse_atoms("1:0.5,2").is_err());
        assert!(parse_atoms("1:0.5,2:0.4").is_err());
        assert!(parse_atoms("x:1").is_err());
        assert_eq!(parse_spikes("3.0, 1.2").unwrap(), vec![3.0, 1.2]);
        assert!(parse_spikes("3.0,,1").is_err());
    }

    #[test]
    fn theory_examples() {
        let r = theory(vec![3.0, 1.2], parse_atoms("1.0:1.0").unwrap(), 0.5).unwrap();
        assert_eq!(r.k0, 1);
        let r = theory(vec![2.0], parse_atoms("1.0:1.0").unwrap(), 1e-4).unwrap();
        assert!(r.spikes[0].detectable);
        assert!((r.spikes[0].predicted_limit - 2.0).abs() < 1e-3);
    }
}
