//! The four subcommands. Each writes its report to `out`, diagnostics to
//! `err`, and returns the exit code.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Instant;

use aara_fx::analysis::{infer_bound, AnalysisResult, BoundPolynomial, Status};
use aara_fx::corpus::{check_golden, load_corpus, parse_golden, GoldenEntry, Observed};
use aara_fx::machine::{run as run_machine, step_limit_from_env, Mode, OutcomeKind, RunOptions, TraceWriter};
use aara_fx::pipeline::{analyze_program, compile, compile_unchecked, PipelineError};
use aara_fx::rational::{fmt_rat, parse_rat, Rational};
use aara_fx::surface::lower::lower_literal;
use aara_fx::surface::{parse_expr, CostMetric, SurfaceError};
use aara_fx::syntax::{Program, Value};
use num_traits::Zero;

use crate::inputs::InputGen;
use crate::report::{
    status_name, AnalyzeReport, BenchEntry, BenchReport, FunctionReport, MetricReport, VerifyReport, Violation,
};
use crate::Exit;

fn diag(err: &mut dyn Write, file: &Path, e: impl Display) -> Exit {
    let _ = writeln!(err, "error: {}: {e}", file.display());
    Exit::Error
}

/// `file:line:col: message` when the error has a position.
fn pipeline_diag(err: &mut dyn Write, file: &Path, e: &PipelineError) -> Exit {
    match e {
        PipelineError::Surface(s) if s.position().is_some() => {
            let _ = writeln!(err, "error: {}:{s}", file.display());
            Exit::Error
        }
        _ => diag(err, file, e),
    }
}

fn read_source(file: &Path, err: &mut dyn Write) -> Result<String, Exit> {
    fs::read_to_string(file).map_err(|e| diag(err, file, e))
}

fn emit_json(out: &mut dyn Write, value: &impl serde::Serialize) {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    let _ = writeln!(out, "{text}");
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

pub fn analyze(
    file: &Path,
    entry: Option<&str>,
    metric: CostMetric,
    json: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Exit {
    let src = match read_source(file, err) {
        Ok(s) => s,
        Err(x) => return x,
    };
    let results = match compile(&src, metric).and_then(|c| analyze_program(&c.program, entry)) {
        Ok(r) => r,
        Err(e) => return pipeline_diag(err, file, &e),
    };
    if json {
        emit_json(
            out,
            &AnalyzeReport {
                file: file.display().to_string(),
                metric: MetricReport {
                    tick_calls: metric.tick_calls,
                    tick_handlers: metric.tick_handlers,
                },
                functions: results.iter().map(FunctionReport::from).collect(),
            },
        );
    } else {
        for r in &results {
            write_analysis(out, r);
        }
    }
    if results.iter().all(AnalysisResult::is_bounded) {
        Exit::Ok
    } else {
        Exit::Unsolvable
    }
}

fn write_analysis(out: &mut dyn Write, r: &AnalysisResult) {
    let _ = writeln!(out, "{}: {}", r.entry, status_name(r.status));
    if let (Some(s), Some(b)) = (&r.signature, &r.bound) {
        let _ = writeln!(out, "  signature: {}", s.display_fun());
        let _ = writeln!(out, "  bound: {b}");
    }
    let s = r.lp_stats;
    let _ = writeln!(
        out,
        "  lp: {} vars, {} constraints, {} pivots; {:.3} ms",
        s.vars,
        s.constraints,
        s.pivots,
        ms(r.elapsed)
    );
}

pub struct RunArgs {
    pub file: PathBuf,
    pub entry: String,
    pub input: String,
    pub budget: Option<String>,
    pub trace: Option<PathBuf>,
    pub step_limit: Option<u64>,
    pub unchecked: bool,
    pub metric: CostMetric,
}

pub fn run(a: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    let file = a.file.as_path();
    let src = match read_source(file, err) {
        Ok(s) => s,
        Err(x) => return x,
    };
    let compiled = if a.unchecked {
        compile_unchecked(&src, a.metric)
    } else {
        compile(&src, a.metric).map(|c| c.program)
    };
    let program = match compiled {
        Ok(p) => p,
        Err(e) => return pipeline_diag(err, file, &e),
    };
    let Some(decl) = program.fun(&a.entry) else {
        return diag(err, file, PipelineError::UnknownEntry(a.entry.clone()));
    };
    let input = match parse_expr(&a.input).and_then(|e| lower_literal(&e, &decl.param_ty)) {
        Ok(v) => v,
        Err(e) => return input_diag(err, &a.input, &e),
    };
    let mode = match &a.budget {
        Some(b) => match parse_rat(b) {
            Ok(q) => Mode::Metered(q),
            Err(e) => return diag(err, file, e),
        },
        None => Mode::Profile,
    };
    let mut trace = a.trace.as_ref().map(|_| TraceWriter::new());
    let opts = RunOptions {
        step_limit: Some(a.step_limit.unwrap_or_else(step_limit_from_env)),
        check_structure: false,
        trace: trace.as_mut(),
    };
    let outcome = match run_machine(&program, &a.entry, input, mode, opts) {
        Ok(o) => o,
        Err(e) => return diag(err, file, e),
    };
    if let (Some(path), Some(t)) = (&a.trace, &trace) {
        if let Err(e) = fs::File::create(path).and_then(|f| t.write_csv(std::io::BufWriter::new(f))) {
            return diag(err, path, e);
        }
    }
    let _ = writeln!(out, "{outcome}");
    match outcome.kind {
        OutcomeKind::Value(_) | OutcomeKind::UnhandledEffect { .. } => Exit::Ok,
        OutcomeKind::ResourceExhausted { .. } => Exit::Exhausted,
        OutcomeKind::RuntimeError(_) => Exit::Error,
    }
}

fn input_diag(err: &mut dyn Write, input: &str, e: &SurfaceError) -> Exit {
    let _ = writeln!(err, "error: input `{input}`: {e}");
    Exit::Error
}

pub struct VerifyArgs {
    pub file: PathBuf,
    pub entry: Option<String>,
    pub trials: u32,
    pub seed: u64,
    pub json: bool,
    pub step_limit: Option<u64>,
    pub metric: CostMetric,
}

/// The golden file next to `file`, if there is one.
fn adjacent_golden(file: &Path) -> Result<Option<GoldenEntry>, String> {
    let golden = file.with_extension("golden");
    if !golden.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&golden).map_err(|e| e.to_string())?;
    let name = file.file_stem().map(|s| s.to_string_lossy().to_string()).unwrap_or_default();
    parse_golden(&name, file.to_path_buf(), golden, &text)
        .map(Some)
        .map_err(|e| e.to_string())
}

pub fn verify(a: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    let file = a.file.as_path();
    let src = match read_source(file, err) {
        Ok(s) => s,
        Err(x) => return x,
    };
    let golden = match adjacent_golden(file) {
        Ok(g) => g,
        Err(e) => return diag(err, file, e),
    };
    let entry = match (&a.entry, &golden) {
        (Some(e), _) => e.clone(),
        (None, Some(g)) => g.entry.clone(),
        (None, None) => return diag(err, file, "no entry given and no golden file names one"),
    };
    let program = match compile(&src, a.metric) {
        Ok(c) => c.program,
        Err(e) => return pipeline_diag(err, file, &e),
    };
    let Some(decl) = program.fun(&entry) else {
        return diag(err, file, PipelineError::UnknownEntry(entry));
    };
    let result = match infer_bound(&program, &entry) {
        Ok(r) => r,
        Err(e) => return diag(err, file, e),
    };
    let Some(bound) = result.bound.as_ref().filter(|_| result.status == Status::Bounded) else {
        let _ = writeln!(err, "error: {}: `{entry}` is unsolvable", file.display());
        return Exit::Unsolvable;
    };

    let mut inputs: Vec<Value> = Vec::new();
    let mut gen = InputGen::new(&program, a.seed);
    for i in 0..a.trials {
        match gen.value(&decl.param_ty, InputGen::ramp(i, a.trials)) {
            Ok(v) => inputs.push(v),
            Err(e) => return diag(err, file, e),
        }
    }
    let mut tight_trials = 0;
    if let Some(fam) = golden.as_ref().filter(|g| g.entry == entry).and_then(|g| {
        g.tight_family.as_ref().map(|f| (f, &g.tight_sizes))
    }) {
        for &n in fam.1 {
            match fam.0.generate(&decl.param_ty, n) {
                Ok(v) => inputs.push(v),
                Err(e) => return diag(err, file, e),
            }
            tight_trials += 1;
        }
    }

    let limit = a.step_limit.unwrap_or_else(step_limit_from_env);
    let (min_slack, violations) = match check_inputs(&program, &entry, bound, inputs, limit) {
        Ok(r) => r,
        Err(e) => return diag(err, file, e),
    };

    let report = VerifyReport {
        program: file.display().to_string(),
        entry: entry.clone(),
        seed: a.seed,
        trials: a.trials,
        tight_trials,
        bound: bound.to_string(),
        min_slack: min_slack.as_ref().map(fmt_rat),
        violations,
    };
    if a.json {
        emit_json(out, &report);
    } else {
        let _ = writeln!(out, "{}: {}", report.program, report.entry);
        let _ = writeln!(out, "seed: {}", report.seed);
        let _ = writeln!(out, "trials: {} random, {} tight", report.trials, report.tight_trials);
        let _ = writeln!(out, "bound: {}", report.bound);
        let _ = writeln!(out, "minSlack: {}", report.min_slack.as_deref().unwrap_or("none"));
        let _ = writeln!(out, "violations: {}", report.violations.len());
        for v in &report.violations {
            let _ = writeln!(
                out,
                "counterexample: input {} bound {} high-water {}",
                v.input, v.bound, v.high_water
            );
        }
    }
    if report.violations.is_empty() {
        Exit::Ok
    } else {
        Exit::Violation
    }
}

/// Runs `entry` on each input and compares the high-water mark with the
/// bound. Returns the least slack and every violation.
pub fn check_inputs(
    program: &Program,
    entry: &str,
    bound: &BoundPolynomial,
    inputs: Vec<Value>,
    step_limit: u64,
) -> Result<(Option<Rational>, Vec<Violation>), String> {
    let mut min_slack: Option<Rational> = None;
    let mut violations = Vec::new();
    for v in inputs {
        let b = bound.eval(&v).map_err(|e| e.to_string())?;
        let opts = RunOptions {
            step_limit: Some(step_limit),
            ..RunOptions::default()
        };
        let o = run_machine(program, entry, v.clone(), Mode::Profile, opts).map_err(|e| e.to_string())?;
        match &o.kind {
            // an escaping effect ends the run; the cost so far is still covered
            OutcomeKind::Value(_) | OutcomeKind::UnhandledEffect { .. } => {}
            k => return Err(format!("input {v}: {k}")),
        }
        let slack = &b - &o.high_water;
        if slack < Rational::zero() {
            violations.push(Violation {
                input: v.to_string(),
                bound: fmt_rat(&b),
                high_water: fmt_rat(&o.high_water),
            });
        }
        if min_slack.as_ref().is_none_or(|m| slack < *m) {
            min_slack = Some(slack);
        }
    }
    Ok((min_slack, violations))
}

/// Compiles and analyzes one corpus entry `trials` times.
fn bench_entry(g: &GoldenEntry, trials: u32) -> BenchEntry {
    let mut row = BenchEntry {
        name: g.name.clone(),
        entry: g.entry.clone(),
        expected: g.status.to_string(),
        observed: "error".into(),
        signature: None,
        bound: None,
        matches: false,
        mismatches: Vec::new(),
        mean_ms: 0.0,
    };
    let src = match g.source() {
        Ok(s) => s,
        Err(e) => {
            row.mismatches.push(e.to_string());
            return row;
        }
    };
    let trials = trials.max(1);
    let start = Instant::now();
    let mut last = None;
    for _ in 0..trials {
        last = Some(
            compile(&src, CostMetric::default()).and_then(|c| analyze_program(&c.program, Some(&g.entry))),
        );
    }
    row.mean_ms = ms(start.elapsed()) / trials as f64;
    let mismatches = match last.expect("at least one trial") {
        Ok(rs) => {
            let r = &rs[0];
            row.observed = status_name(r.status).into();
            row.signature = r.signature.as_ref().map(|s| s.display_fun().to_string());
            row.bound = r.bound.as_ref().map(|b| b.to_string());
            check_golden(g, Observed::Analyzed(r))
        }
        Err(e) => {
            if matches!(e, PipelineError::Surface(SurfaceError::LinearReuse(_))) {
                row.observed = "rejected".into();
            }
            check_golden(g, Observed::Failed(&e))
        }
    };
    row.matches = mismatches.is_empty();
    row.mismatches = mismatches;
    row
}

pub fn bench(dir: &Path, json: bool, trials: u32, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    let entries = match load_corpus(dir) {
        Ok(e) => e,
        Err(e) => return diag(err, dir, e),
    };
    let rows: Vec<Mutex<Option<BenchEntry>>> = entries.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(entries.len().max(1));
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(g) = entries.get(i) else { break };
                *rows[i].lock().unwrap() = Some(bench_entry(g, trials));
            });
        }
    });
    let programs: Vec<BenchEntry> = rows
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every entry benchmarked"))
        .collect();
    let all_match = programs.iter().all(|p| p.matches);
    if json {
        emit_json(
            out,
            &BenchReport {
                corpus: dir.display().to_string(),
                trials,
                programs,
            },
        );
    } else {
        for p in &programs {
            let verdict = if p.matches { "ok" } else { "MISMATCH" };
            let _ = writeln!(
                out,
                "{:<22} {:<10} {:>10.3} ms  {verdict}  {}",
                p.name,
                p.observed,
                p.mean_ms,
                p.bound.as_deref().unwrap_or("")
            );
            for m in &p.mismatches {
                let _ = writeln!(out, "    {m}");
            }
        }
    }
    if all_match {
        Exit::Ok
    } else {
        Exit::GoldenMismatch
    }
}
