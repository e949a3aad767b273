//! The `sample`, `test` and `tables` subcommands.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use das_core::naturals::{mult_stable_outcomes, sample_mult_stable};
use das_core::plot::render_svg;
use das_core::process::{das_avoidance, empirical_avoidance, sample_das, sample_das_counts};
use das_core::scalar::{discrete_stable_pmf_oracle, discrete_stable_pgf, sample_sibuya, sibuya_pmf};
use das_core::special::normal_cdf;
use das_core::stats::{
    chi_square_gof, compare_count_laws, gof_sibuya, run_chunked, superposition_stability_test,
    thinning_stability_test, LEVEL,
};
use das_core::vector::{vector_pmf_oracle, SimplexMeasure};
use das_core::{
    DasProcessSpec, DiscreteStableParams, Exponent, Harness, PhaseSpace, QuerySet, RandomSource,
    TestReport,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, TableConfig, TestConfig};
use crate::error::CliError;

/// Settings shared by every subcommand after flag overrides.
pub struct Run {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub out: PathBuf,
    pub workers: usize,
}

impl Run {
    fn harness(&self) -> Harness {
        Harness { draws: self.config.draws, seed: self.seed, workers: self.workers }
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>, CliError> {
        fs::create_dir_all(&self.out)?;
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let mut w = self.create(name)?;
        w.write_all(bytes)?;
        w.flush()?;
        Ok(())
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn provenance(&self, command: &str) -> serde_json::Value {
        json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.seed,
            "config": self.config,
        })
    }
}

fn bins_of(cfg: &ExperimentConfig) -> Result<Vec<QuerySet>, CliError> {
    if cfg.bins.is_empty() {
        return Err(CliError::Config("this test needs at least one entry in `bins`".into()));
    }
    let bins = cfg.bins();
    das_core::measure::ensure_disjoint(&bins)?;
    Ok(bins)
}

fn planar_window(spec: &DasProcessSpec) -> Result<das_core::Rect, CliError> {
    match spec.window {
        PhaseSpace::PlanarWindow(r) => Ok(r),
        _ => Err(CliError::Config("SVG output needs a planar window".into())),
    }
}

/// Draw one realization and write `pattern.csv`, `provenance.json` and,
/// when requested, `pattern.svg` and `counts.csv`.
pub fn sample(run: &Run) -> Result<(), CliError> {
    let cfg = &run.config;
    let spec = cfg.process()?;
    let route = cfg.route()?;
    let lepage = cfg.lepage()?;
    let bins = cfg.bins();
    das_core::measure::ensure_disjoint(&bins)?;
    let svg_window = if cfg.outputs.svg { Some(planar_window(&spec)?) } else { None };

    let mut rng = RandomSource::new(run.seed);
    let realization = sample_das(&spec, route, &lepage, &mut rng)?;
    let pattern = &realization.pattern;

    let mut w = run.create("pattern.csv")?;
    pattern.write_csv(&spec.window, &mut w)?;
    w.flush()?;
    if let Some(window) = svg_window {
        run.write("pattern.svg", render_svg(pattern, &window).as_bytes())?;
    }
    if !bins.is_empty() {
        let mut text = String::from("bin,count\n");
        for (i, n) in pattern.counts(&bins).iter().enumerate() {
            text.push_str(&format!("{i},{n}\n"));
        }
        run.write("counts.csv", text.as_bytes())?;
    }
    let mut prov = run.provenance("sample");
    prov["route"] = json!(route.as_str());
    prov["points"] = json!(pattern.total());
    prov["clusters"] = json!(pattern.cluster_sizes().len());
    run.write_json("provenance.json", &prov)?;
    Ok(())
}

#[derive(Serialize)]
struct TestOutput<'a> {
    test: &'a str,
    level: f64,
    passed: bool,
    #[serde(flatten)]
    report: TestReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<serde_json::Value>,
}

/// Run the configured test, write `report.json` and fail with exit code 1
/// when the p-value is at or below the level.
pub fn test(run: &Run) -> Result<(), CliError> {
    let cfg = &run.config;
    let test = cfg
        .test
        .as_ref()
        .ok_or_else(|| CliError::Config("`test` section missing".into()))?;
    let h = run.harness();
    let lepage = cfg.lepage()?;
    let mut detail = None;
    let report = match test {
        TestConfig::Stability { t, scaling_alpha } => {
            let spec = cfg.process()?;
            let route = cfg.route()?;
            let bins = bins_of(cfg)?;
            let alpha = match scaling_alpha {
                Some(a) => Exponent::new(*a)?,
                None => spec.alpha,
            };
            let sample = |rng: &mut RandomSource| sample_das_counts(&spec, route, &lepage, &bins, rng);
            thinning_stability_test(sample, alpha, *t, &h)?.with_route(route.as_str())
        }
        TestConfig::Superposition { n } => {
            let spec = cfg.process()?;
            let route = cfg.route()?;
            let bins = bins_of(cfg)?;
            let sample = |rng: &mut RandomSource| sample_das_counts(&spec, route, &lepage, &bins, rng);
            superposition_stability_test(sample, spec.alpha, *n, &h)?.with_route(route.as_str())
        }
        TestConfig::RouteEquivalence { routes, alpha_b } => {
            let spec = cfg.process()?;
            let bins = bins_of(cfg)?;
            let a = routes[0].parse()?;
            let b = routes[1].parse()?;
            let mut spec_b = spec.clone();
            if let Some(alpha) = alpha_b {
                spec_b.alpha = Exponent::new(*alpha)?;
            }
            compare_count_laws(
                |rng: &mut RandomSource| sample_das_counts(&spec, a, &lepage, &bins, rng),
                |rng: &mut RandomSource| sample_das_counts(&spec_b, b, &lepage, &bins, rng),
                &h,
            )?
            .with_route(format!("{a} vs {b}"))
        }
        TestConfig::GofSibuya => {
            let alpha = cfg.exponent()?;
            let samples: Vec<u64> = run_chunked(h.draws, h.seed, h.workers, |n, rng| {
                (0..n).map(|_| sample_sibuya(alpha, rng)).collect::<Vec<_>>()
            })
            .concat();
            gof_sibuya(&samples, alpha)?
        }
        TestConfig::Avoidance { set } => {
            let spec = cfg.process()?;
            let route = cfg.route()?;
            let set = QuerySet::from(set);
            let exact = das_avoidance(&spec, &set, &cfg.quadrature())?;
            let mc = empirical_avoidance(&spec, route, &lepage, &set, &h)?;
            let scale = (mc.std_error.powi(2) + exact.error.powi(2)).sqrt();
            let z = if scale > 0.0 { (mc.value - exact.value) / scale } else { 0.0 };
            let p_value = if z.is_finite() { 2.0 * normal_cdf(-z.abs()) } else { 0.0 };
            detail = Some(json!({
                "oracle": exact.value,
                "oracle_error": exact.error,
                "estimate": mc.value,
                "std_error": mc.std_error,
            }));
            TestReport {
                method: "avoidance z-test".into(),
                route: Some(route.as_str().into()),
                statistic: z,
                dof: 0,
                p_value,
                draws: mc.draws,
                seed: None,
            }
        }
        TestConfig::MultNaturals { basis } => {
            let alpha = cfg.exponent()?;
            let min_prob = (0.1 / h.draws.max(1) as f64).max(1e-9);
            let outcomes = mult_stable_outcomes(basis, alpha, min_prob)?;
            let index: BTreeMap<u64, usize> = outcomes.iter().enumerate().map(|(i, &(n, _))| (n, i)).collect();
            let k = outcomes.len();
            let parts = run_chunked(h.draws, h.seed, h.workers, |n, rng| {
                let mut counts = vec![0u64; k + 1];
                for _ in 0..n {
                    let m = sample_mult_stable(basis, alpha, rng)?;
                    let cell = m.to_u64().and_then(|v| index.get(&v).copied()).unwrap_or(k);
                    counts[cell] += 1;
                }
                Ok::<_, das_core::Error>(counts)
            });
            let mut observed = vec![0u64; k + 1];
            for part in parts {
                for (o, c) in observed.iter_mut().zip(part?) {
                    *o += c;
                }
            }
            let mut probs: Vec<f64> = outcomes.iter().map(|&(_, p)| p).collect();
            probs.push((1.0 - probs.iter().sum::<f64>()).max(0.0));
            let mut report = chi_square_gof(&observed, &probs)?;
            report.method = "chi-square multiplicative stable goodness of fit".into();
            report
        }
    }
    .with_seed(run.seed);

    let passed = report.passes(LEVEL);
    let output = TestOutput { test: test.name(), level: LEVEL, passed, report, detail };
    run.write_json("report.json", &output)?;
    println!("{}", serde_json::to_string(&output)?);
    if passed {
        Ok(())
    } else {
        Err(CliError::TestFailed(format!("{} (p = {:e})", test.name(), output.report.p_value)))
    }
}

fn header(out: &mut String, kind: &str, run: &Run, params: serde_json::Value) {
    out.push_str(&format!("# das tables {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("# kind: {kind}\n"));
    out.push_str(&format!("# alpha: {}\n", run.config.alpha));
    out.push_str(&format!("# params: {params}\n"));
}

/// Write every configured table as `<kind>.csv` (`<kind>_<i>.csv` when a
/// kind repeats).
pub fn tables(run: &Run) -> Result<(), CliError> {
    let cfg = &run.config;
    if cfg.tables.is_empty() {
        return Err(CliError::Config("`tables` is empty".into()));
    }
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let mut rendered = Vec::new();
    for (i, table) in cfg.tables.iter().enumerate() {
        let name = table.name();
        *seen.entry(name).or_default() += 1;
        let text = render_table(run, table)?;
        rendered.push((i, name, text));
    }
    for (i, name, text) in rendered {
        let file = if seen[name] > 1 { format!("{name}_{i}.csv") } else { format!("{name}.csv") };
        run.write(&file, text.as_bytes())?;
    }
    run.write_json("provenance.json", &run.provenance("tables"))?;
    Ok(())
}

fn render_table(run: &Run, table: &TableConfig) -> Result<String, CliError> {
    let alpha = run.config.exponent()?;
    let mut out = String::new();
    match table {
        TableConfig::DiscreteStablePmf { c, n_max } => {
            let pmf = discrete_stable_pmf_oracle(DiscreteStableParams::new(*c, alpha)?, *n_max);
            header(&mut out, table.name(), run, json!({ "c": c, "n_max": n_max, "tail_mass": pmf.tail_mass }));
            out.push_str("n,probability\n");
            for (n, p) in pmf.probabilities.iter().enumerate() {
                out.push_str(&format!("{n},{p}\n"));
            }
        }
        TableConfig::SibuyaPmf { alphas, n_max } => {
            let exps = alphas.iter().map(|&a| Exponent::new(a)).collect::<das_core::Result<Vec<_>>>()?;
            header(&mut out, table.name(), run, json!({ "alphas": alphas, "n_max": n_max }));
            out.push('n');
            for a in alphas {
                out.push_str(&format!(",alpha={a}"));
            }
            out.push('\n');
            for n in 1..=*n_max {
                out.push_str(&n.to_string());
                for &a in &exps {
                    out.push_str(&format!(",{}", sibuya_pmf(a, n)?));
                }
                out.push('\n');
            }
        }
        TableConfig::MultNaturals { basis, min_prob } => {
            let rows = mult_stable_outcomes(basis, alpha, *min_prob)?;
            header(&mut out, table.name(), run, json!({ "basis": basis, "min_prob": min_prob }));
            out.push_str("n,probability\n");
            for (n, p) in rows {
                out.push_str(&format!("{n},{p}\n"));
            }
        }
        TableConfig::Avoidance { sets } => {
            let spec = run.config.process()?;
            let quad = run.config.quadrature();
            header(&mut out, table.name(), run, json!({ "grid": quad.grid }));
            out.push_str("set,probability,error\n");
            for (i, set) in sets.iter().enumerate() {
                let v = das_avoidance(&spec, &QuerySet::from(set), &quad)?;
                out.push_str(&format!("{i},{},{}\n", v.value, v.error));
            }
        }
        TableConfig::Pgf { c, s } => {
            let params = DiscreteStableParams::new(*c, alpha)?;
            if let Some(bad) = s.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(CliError::Config(format!("p.g.f. argument {bad} outside [0, 1]")));
            }
            header(&mut out, table.name(), run, json!({ "c": c }));
            out.push_str("s,value\n");
            for &x in s {
                out.push_str(&format!("{x},{}\n", discrete_stable_pgf(params, x)));
            }
        }
        TableConfig::VectorPmf { components, max_counts } => {
            let sigma = SimplexMeasure::new(components.iter().map(|c| (c.weight, c.p.clone())))?;
            let table_ = vector_pmf_oracle(&sigma, alpha, max_counts)?;
            header(
                &mut out,
                table.name(),
                run,
                json!({ "max_counts": max_counts, "truncated_mass": table_.truncated_mass }),
            );
            let mut buf = Vec::new();
            table_.write_csv(&mut buf)?;
            out.push_str(&String::from_utf8(buf).expect("csv is utf-8"));
        }
    }
    Ok(out)
}

pub fn resolve_out(out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."))
}
