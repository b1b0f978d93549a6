//! Small benchmark harness: runs the engines over named instance suites and
//! writes one CSV row per engine run.

use std::path::Path;
use std::time::Instant;

use crate::engines::{
    exact_joinwidth, find_decomposition_dp, solve_variable_dp, SearchVerdict, SolveVerdict,
};
use crate::error::{Error, Result};
use crate::generators::{GeneratorSpec, RandomSpec};
use crate::relation::Instance;
use crate::width::Omega;

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub instance: String,
    pub family: String,
    pub engine: String,
    pub verdict: String,
    pub width: String,
    pub wall_time_s: f64,
    pub peak_relation_size: u64,
}

pub const CSV_HEADER: &str = "instance,family,engine,verdict,width,wall_time_s,peak_relation_size";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{:.6},{}\n",
            csv_field(&r.instance),
            csv_field(&r.family),
            csv_field(&r.engine),
            csv_field(&r.verdict),
            csv_field(&r.width),
            r.wall_time_s,
            r.peak_relation_size,
        ));
    }
    out
}

pub fn write_csv(rows: &[BenchRow], path: &Path) -> Result<()> {
    Ok(std::fs::write(path, rows_to_csv(rows))?)
}

/// Runs the standard engines over one instance and reports a row per run.
pub fn bench_instance(name: &str, family: &str, inst: &Instance, omega: Omega) -> Vec<BenchRow> {
    let mut rows = Vec::new();

    let start = Instant::now();
    match exact_joinwidth(inst) {
        Ok(r) => rows.push(BenchRow {
            instance: name.into(),
            family: family.into(),
            engine: "exact_joinwidth".into(),
            verdict: "ok".into(),
            width: format!("{:.3}", r.width),
            wall_time_s: start.elapsed().as_secs_f64(),
            peak_relation_size: r.peak_tuples,
        }),
        Err(e) => rows.push(BenchRow {
            instance: name.into(),
            family: family.into(),
            engine: "exact_joinwidth".into(),
            verdict: format!("error: {e}"),
            width: String::new(),
            wall_time_s: start.elapsed().as_secs_f64(),
            peak_relation_size: 0,
        }),
    }

    let start = Instant::now();
    match find_decomposition_dp(inst, omega) {
        Ok(out) => {
            let (verdict, width, peak) = match out.verdict {
                SearchVerdict::Found { width, peak_tuples, .. } => {
                    ("found".to_string(), format!("{width:.3}"), peak_tuples)
                }
                SearchVerdict::NotFound => {
                    ("not_found".to_string(), String::new(), out.stats.peak_relation_size)
                }
            };
            rows.push(BenchRow {
                instance: name.into(),
                family: family.into(),
                engine: format!("find_decomposition_dp({omega})"),
                verdict,
                width,
                wall_time_s: start.elapsed().as_secs_f64(),
                peak_relation_size: peak,
            });
        }
        Err(e) => rows.push(BenchRow {
            instance: name.into(),
            family: family.into(),
            engine: format!("find_decomposition_dp({omega})"),
            verdict: format!("error: {e}"),
            width: String::new(),
            wall_time_s: start.elapsed().as_secs_f64(),
            peak_relation_size: 0,
        }),
    }

    let start = Instant::now();
    let (verdict, peak) = match solve_variable_dp(inst, omega) {
        Ok(SolveVerdict::Sat) => ("sat".to_string(), 0),
        Ok(SolveVerdict::Unsat) => ("unsat".to_string(), 0),
        Ok(SolveVerdict::WidthExceeded) => ("width_exceeded".to_string(), 0),
        Err(e) => (format!("error: {e}"), 0),
    };
    rows.push(BenchRow {
        instance: name.into(),
        family: family.into(),
        engine: format!("solve_variable_dp({omega})"),
        verdict,
        width: String::new(),
        wall_time_s: start.elapsed().as_secs_f64(),
        peak_relation_size: peak,
    });

    rows
}

/// Named suites of generated instances.
pub fn suite_specs(name: &str) -> Result<Vec<(String, GeneratorSpec)>> {
    match name {
        "quick" => Ok(vec![
            ("triangle_2".into(), GeneratorSpec::Triangle { n: 2 }),
            ("triangle_3".into(), GeneratorSpec::Triangle { n: 3 }),
            ("star_3".into(), GeneratorSpec::Star { omega: 3 }),
            (
                "random_6v".into(),
                GeneratorSpec::Random(RandomSpec {
                    seed: 11,
                    num_vars: 6,
                    domain_size: 2,
                    num_constraints: 5,
                    min_arity: 2,
                    max_arity: 3,
                    density: 0.5,
                }),
            ),
        ]),
        "standard" => {
            let mut specs = suite_specs("quick")?;
            specs.push(("triangle_5".into(), GeneratorSpec::Triangle { n: 5 }));
            specs.push(("star_4".into(), GeneratorSpec::Star { omega: 4 }));
            specs.push(("chain_6".into(), GeneratorSpec::ChainN { n: 6 }));
            specs.push((
                "random_10v".into(),
                GeneratorSpec::Random(RandomSpec {
                    seed: 12,
                    num_vars: 10,
                    domain_size: 2,
                    num_constraints: 12,
                    min_arity: 2,
                    max_arity: 3,
                    density: 0.5,
                }),
            ));
            Ok(specs)
        }
        other => Err(Error::InvalidSpec(format!(
            "unknown suite {other:?} (available: quick, standard)"
        ))),
    }
}

/// Runs a named suite with a fixed search width.
pub fn run_suite(name: &str, omega: Omega) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for (id, spec) in suite_specs(name)? {
        let inst = spec.build()?;
        rows.extend(bench_instance(&id, spec.family(), &inst, omega));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn quick_suite_emits_rows() {
        let rows = run_suite("quick", Ratio::from_integer(2)).unwrap();
        // Three engine rows per instance.
        assert_eq!(rows.len(), 4 * 3);
        let csv = rows_to_csv(&rows);
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), rows.len() + 1);
    }

    #[test]
    fn unknown_suite_errors() {
        assert!(run_suite("nope", Ratio::from_integer(1)).is_err());
    }
}
