//! The three subcommands: analyze, evaluate, synth.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::Path;

use serde_json::json;

use tagreuse::cooc::build_cooccurrence;
use tagreuse::eval::{run_protocol, EvalConfig, EvalReport, PrecisionDenominator};
use tagreuse::reuse::{
    pool_by_context, pool_by_frequency, pool_by_recency, FitOptions, PowerLawFit, ReuseCurve,
};
use tagreuse::split::{chronological_split, ChronoSplit};
use tagreuse::synth::synth_folksonomy;
use tagreuse::{parse_posts, Error, Folksonomy, Result};

use crate::fsio::write_atomic;
use crate::settings::{BinChoice, FactorChoice, Settings};

const ANALYZE_FORMAT_VERSION: u32 = 1;

fn load_dataset(settings: &Settings) -> Result<Folksonomy> {
    let path = settings
        .dataset
        .as_ref()
        .ok_or_else(|| Error::InvalidParam("--dataset is required".into()))?;
    let file = fs::File::open(path)?;
    parse_posts(BufReader::new(file))
}

fn out_dir(settings: &Settings) -> Result<&Path> {
    settings
        .out
        .as_deref()
        .ok_or_else(|| Error::InvalidParam("--out is required".into()))
}

/// Empirical study: parse, split, pool all requested factors, fit, emit.
pub fn cmd_analyze(settings: &Settings) -> Result<()> {
    let out = out_dir(settings)?.to_path_buf();
    let dataset = load_dataset(settings)?;
    let split = chronological_split(&dataset);
    let split_hash = split.split_hash();
    let fit_options = FitOptions {
        min_support: settings.min_support,
        weighting: settings.weighting,
    };

    let wanted: &[FactorChoice] = match settings.factor {
        FactorChoice::All => &[
            FactorChoice::Frequency,
            FactorChoice::Recency,
            FactorChoice::Context,
        ],
        ref single => std::slice::from_ref(single),
    };

    // Pool and fit everything before writing anything.
    let mut results: Vec<(ReuseCurve, std::result::Result<PowerLawFit, String>)> = Vec::new();
    let cooc = build_cooccurrence(&split.train);
    for factor in wanted {
        let curve = match factor {
            FactorChoice::Frequency => pool_by_frequency(&split)?,
            FactorChoice::Recency => pool_by_recency(&split)?,
            FactorChoice::Context => {
                let curve = pool_by_context(&split, &cooc)?;
                match settings.bin {
                    BinChoice::Raw => curve,
                    BinChoice::Log2 => curve.rebin_log2(),
                }
            }
            FactorChoice::All => unreachable!(),
        };
        let fit = curve.fit(&fit_options).map_err(|e| e.to_string());
        results.push((curve, fit));
    }

    println!("factor      k          b          r2        points");
    for (curve, fit) in &results {
        let name = curve.factor.as_str();
        let mut csv = Vec::new();
        curve.write_csv(&mut csv)?;
        write_atomic(&out.join(format!("{name}.csv")), &csv)?;

        let fit_json = match fit {
            Ok(f) => json!({
                "factor": name,
                "k": f.slope,
                "b": f.intercept,
                "r2": f.r2,
                "points": f.points_used,
            }),
            Err(_) => serde_json::Value::Null,
        };
        let document = json!({
            "format_version": ANALYZE_FORMAT_VERSION,
            "factor": name,
            "split_hash": split_hash,
            "fit": fit_json,
            "curve": curve.points.iter().map(|p| json!({
                "x": p.x,
                "n_total": p.n_total,
                "n_reused": p.n_reused,
                "p": p.probability(),
            })).collect::<Vec<_>>(),
        });
        let mut text = serde_json::to_string_pretty(&document)
            .map_err(|e| Error::InvalidParam(e.to_string()))?;
        text.push('\n');
        write_atomic(&out.join(format!("{name}.json")), text.as_bytes())?;

        match fit {
            Ok(f) => println!(
                "{name:<11} {:<10.4} {:<10.4} {:<9.4} {}",
                f.slope, f.intercept, f.r2, f.points_used
            ),
            Err(msg) => {
                println!("{name:<11} -          -          -         0");
                eprintln!("warning: {name}: {msg}");
            }
        }
    }
    println!("split_hash  {split_hash}");
    Ok(())
}

/// Prediction study: fit each predictor on train, evaluate, emit reports.
pub fn cmd_evaluate(settings: &Settings) -> Result<()> {
    settings.validate_predictor_names()?;
    let seed = settings.require_seed_if_stochastic()?;
    let out = out_dir(settings)?.to_path_buf();
    let dataset = load_dataset(settings)?;
    let split: ChronoSplit = chronological_split(&dataset);
    let params = settings.params.clone().with_seed(seed);
    let eval_config = EvalConfig {
        ks: settings.ks.clone(),
        precision_denominator: if settings.precision_denom_returned {
            PrecisionDenominator::Returned
        } else {
            PrecisionDenominator::FixedK
        },
        retain_queries: false,
        threads: settings.threads,
    };

    let mut reports: Vec<EvalReport> = Vec::new();
    let mut failures: BTreeMap<String, String> = BTreeMap::new();
    for name in &settings.predictors {
        match run_protocol(name, &split, &params, &eval_config) {
            Ok(report) => reports.push(report),
            Err(Error::InsufficientData(msg)) => {
                // No test queries at all: nothing more to evaluate.
                return Err(Error::InsufficientData(msg));
            }
            Err(e) => {
                eprintln!("warning: predictor {name} failed: {e}");
                failures.insert(name.clone(), e.to_string());
            }
        }
    }

    // Accuracy table, one row per predictor.
    let mut wide = String::from("predictor,f1@5,ndcg@10\n");
    println!("predictor   f1@5      ndcg@10   queries");
    for report in &reports {
        let f1 = report.metric("f1", 5).unwrap_or(f64::NAN);
        let ndcg = report.metric("ndcg", 10).unwrap_or(f64::NAN);
        wide.push_str(&format!("{},{},{}\n", report.predictor, f1, ndcg));
        println!(
            "{:<11} {:<9.4} {:<9.4} {}",
            report.predictor, f1, ndcg, report.queries
        );
    }
    write_atomic(&out.join("evaluation.csv"), wide.as_bytes())?;

    let mut long = Vec::new();
    for (i, report) in reports.iter().enumerate() {
        if i == 0 {
            report.write_csv(&mut long)?;
        } else {
            let mut body = Vec::new();
            report.write_csv(&mut body)?;
            let text = String::from_utf8_lossy(&body);
            for line in text.lines().skip(1) {
                long.extend_from_slice(line.as_bytes());
                long.push(b'\n');
            }
        }
    }
    write_atomic(&out.join("metrics.csv"), &long)?;

    let document = json!({
        "format_version": tagreuse::eval::EVAL_FORMAT_VERSION,
        "seed": settings.seed,
        "split_hash": split.split_hash(),
        "reports": reports,
        "errors": failures,
    });
    let mut text =
        serde_json::to_string_pretty(&document).map_err(|e| Error::InvalidParam(e.to_string()))?;
    text.push('\n');
    write_atomic(&out.join("evaluation.json"), text.as_bytes())?;
    println!("split_hash  {}", split.split_hash());
    Ok(())
}

/// Generates a synthetic dataset, writes the canonical TSV, prints the
/// narrowness report.
pub fn cmd_synth(settings: &Settings) -> Result<()> {
    let seed = settings
        .seed
        .ok_or_else(|| Error::InvalidParam("--seed is required for synth".into()))?;
    let out = settings
        .out
        .as_ref()
        .ok_or_else(|| Error::InvalidParam("--out is required".into()))?;
    let folksonomy = synth_folksonomy(&settings.synth, seed)?;
    let mut bytes = Vec::new();
    folksonomy.write_tsv(&mut bytes)?;
    write_atomic(out, &bytes)?;
    let report = folksonomy.narrowness()?;
    println!(
        "posts {}  users {}  resources {}  tags {}",
        folksonomy.post_count(),
        folksonomy.user_count(),
        folksonomy.resource_count(),
        folksonomy.tag_count()
    );
    println!(
        "narrowness {} ({})",
        report.ratio_truncated(),
        report.class.as_str()
    );
    Ok(())
}
