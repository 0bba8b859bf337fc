//! Command-line front end. [`run`] takes explicit streams so tests can drive it.
//!
//! Exit status: 0 on success, 1 when validation or lint findings exist,
//! 2 on usage, I/O or parse failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analytics;
use crate::assessment::{self, Assessment};
use crate::bundled;
use crate::exact::{self, Exact};
use crate::reconcile::{reconcile, RaterSheet};
use crate::report::{self, Format};
use crate::rubric::{CriterionId, Rubric, Severity};
use crate::scoring::{score_tree, AggregateReport, ScoringOptions};
use crate::store::{atomic_write, Store};

pub const DATA_ENV: &str = "FSF_DATA";

#[derive(Parser, Debug)]
#[command(name = "fsf", about = "Score, compare and lint safety framework assessments", version)]
pub struct Cli {
    /// Data directory holding rubric.json and assessments/. Without it the bundled dataset is used.
    #[arg(long, global = true, env = DATA_ENV)]
    pub data: Option<PathBuf>,
    /// Rubric file, overriding the one in the data directory.
    #[arg(long, global = true)]
    pub rubric: Option<PathBuf>,
    /// Score leaves without an entry as 0 instead of failing.
    #[arg(long, global = true)]
    pub missing_as_zero: bool,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the rubric and assessments; silent when everything is in order.
    Validate {
        /// Assessment ids or files. Defaults to every stored assessment.
        #[arg(long = "assessment", short = 'a')]
        assessments: Vec<String>,
        /// Also print notices.
        #[arg(long, short = 'v')]
        verbose: bool,
    },
    /// Score one assessment.
    Score(One),
    /// Rank all assessments and report the median and dimension leaders.
    Rank,
    /// Best-in-class composite across all assessments.
    Bic,
    /// Leaf and node changes between two assessments.
    Diff {
        #[arg(long)]
        base: String,
        #[arg(long)]
        head: String,
    },
    /// Score an assessment with some leaves replaced.
    Whatif {
        #[command(flatten)]
        target: One,
        /// Leaf override as `id=score`; repeatable.
        #[arg(long = "set", value_parser = parse_override)]
        set: Vec<(CriterionId, u32)>,
        /// Raise every leaf to the best-in-class score first.
        #[arg(long)]
        best_in_class: bool,
    },
    /// Leaves where peers score higher, ranked by total gain.
    Frontier {
        #[command(flatten)]
        target: One,
        /// Show at most this many candidates.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Compare published aggregates with recomputed values.
    Lint {
        /// Assessment ids or files. Defaults to every stored assessment.
        #[arg(long = "assessment", short = 'a')]
        assessments: Vec<String>,
        #[arg(long, default_value_t = analytics::DEFAULT_TOLERANCE, allow_negative_numbers = true)]
        tolerance: i64,
    },
    /// Render the comparison table, or a profile when an assessment is given.
    Report {
        #[arg(long = "assessment", short = 'a')]
        assessment: Option<String>,
        /// csv, markdown or structured. Defaults to the --out extension, else markdown.
        #[arg(long)]
        format: Option<Format>,
        /// Leave out the best-in-class column.
        #[arg(long)]
        no_bic: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare rater sheets and list disagreements.
    Reconcile {
        #[arg(required = true)]
        sheets: Vec<PathBuf>,
    },
    /// Run the HTTP service over the data directory.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: std::net::SocketAddr,
    },
}

#[derive(Args, Debug)]
pub struct One {
    /// Assessment id or file path.
    #[arg(long, short = 'a')]
    pub assessment: String,
}

fn parse_override(s: &str) -> Result<(CriterionId, u32), String> {
    let (id, score) = s.split_once('=').ok_or_else(|| format!("expected id=score, got `{s}`"))?;
    let id = id.trim().parse::<CriterionId>().map_err(|e| e.to_string())?;
    let score = score.trim().parse::<u32>().map_err(|e| format!("bad score `{score}`: {e}"))?;
    Ok((id, score))
}

/// A failure that maps to exit status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Fatal(String);

fn fatal(e: impl std::fmt::Display) -> Fatal {
    Fatal(e.to_string())
}

/// Where rubric and assessments come from.
struct Source {
    store: Option<Store>,
    rubric: Rubric,
    options: ScoringOptions,
}

impl Source {
    fn new(cli: &Cli) -> Result<Self, Fatal> {
        let store = cli.data.as_ref().map(Store::open).transpose().map_err(fatal)?;
        let rubric = match (&cli.rubric, &store) {
            (Some(path), _) => Rubric::parse(&read(path)?).map_err(|e| fatal(format!("{}: {e}", path.display())))?,
            (None, Some(store)) => store.rubric().map_err(fatal)?,
            (None, None) => bundled::rubric().map_err(fatal)?,
        };
        Ok(Source {
            store,
            rubric,
            options: ScoringOptions {
                missing_as_zero: cli.missing_as_zero,
            },
        })
    }

    fn ids(&self) -> Result<Vec<String>, Fatal> {
        match &self.store {
            Some(s) => s.list().map_err(fatal),
            None => Ok(bundled::ASSESSMENTS.iter().map(|(s, _)| s.to_string()).collect()),
        }
    }

    /// Loads by file path if one exists, else by id from the store or bundle.
    fn load(&self, spec: &str) -> Result<Assessment, Fatal> {
        let path = Path::new(spec);
        let text = if path.is_file() {
            read(path)?
        } else {
            match &self.store {
                Some(s) => s.read_raw(spec).map_err(fatal)?.0,
                None => bundled::assessment_document(spec)
                    .ok_or_else(|| fatal(format!("no assessment named `{spec}`")))?
                    .to_string(),
            }
        };
        Assessment::parse(&text, self.rubric.scale()).map_err(|e| fatal(format!("{spec}: {e}")))
    }

    fn load_many(&self, specs: &[String]) -> Result<Vec<(String, Assessment)>, Fatal> {
        let specs = if specs.is_empty() { self.ids()? } else { specs.to_vec() };
        specs.into_iter().map(|s| Ok((s.clone(), self.load(&s)?))).collect()
    }

    fn score(&self, a: &Assessment) -> Result<AggregateReport, Fatal> {
        score_tree(&self.rubric, a, self.options).map_err(|e| fatal(format!("{}: {e}", a.name())))
    }
}

fn read(path: &Path) -> Result<String, Fatal> {
    std::fs::read_to_string(path).map_err(|e| fatal(format!("{}: {e}", path.display())))
}

fn pct(x: &Exact) -> String {
    exact::to_fixed(x, 4)
}

fn signed(x: &Exact) -> String {
    let s = pct(x);
    if s.starts_with('-') {
        s
    } else {
        format!("+{s}")
    }
}

/// Parses `args` (including the program name) and runs one command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = if informational {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return if informational { 0 } else { 2 };
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(Fatal(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Fatal> {
    let src = Source::new(cli)?;
    let rubric = &src.rubric;
    let mut buf = String::new();
    let mut code = 0;
    use std::fmt::Write as _;

    match &cli.command {
        Command::Validate { assessments, verbose } => {
            let mut lines = Vec::new();
            let rubric_issues = rubric.validate();
            let mut errors = Rubric::has_errors(&rubric_issues);
            lines.extend(
                rubric_issues
                    .iter()
                    .filter(|i| *verbose || i.severity == Severity::Error)
                    .map(|i| format!("rubric: {i}")),
            );
            for (name, a) in src.load_many(assessments)? {
                let issues = a.validate(rubric);
                errors |= assessment::has_errors(&issues);
                lines.extend(
                    issues
                        .iter()
                        .filter(|i| *verbose || i.severity == Severity::Error)
                        .map(|i| format!("{name}: {i}")),
                );
            }
            for l in lines {
                let _ = writeln!(buf, "{l}");
            }
            if errors {
                code = 1;
            }
        }
        Command::Score(One { assessment }) => {
            let a = src.load(assessment)?;
            let r = src.score(&a)?;
            if cli.json {
                buf = r.to_json();
            } else {
                let _ = writeln!(buf, "{}: total {} ({})", r.name(), r.total_display, pct(&r.total_exact));
                for node in rubric.nodes() {
                    let n = r.node(&node.id).expect("node scored");
                    let indent = "  ".repeat(node.id.depth());
                    let _ = writeln!(buf, "{indent}{} {}: {} ({})", node.id, node.title, n.display, pct(&n.exact));
                }
            }
        }
        Command::Rank => {
            let reports = src
                .load_many(&[])?
                .iter()
                .map(|(_, a)| src.score(a))
                .collect::<Result<Vec<_>, _>>()?;
            let ranking = analytics::rank_and_stats(&reports).map_err(fatal)?;
            if cli.json {
                buf = to_json(&ranking);
            } else {
                for e in &ranking.ordering {
                    let _ = writeln!(buf, "{:>2}. {}: {} ({})", e.rank, e.name, e.total_display, pct(&e.total_exact));
                }
                let median = exact::to_terminating_decimal(&ranking.median).unwrap_or_else(|| pct(&ranking.median));
                let _ = writeln!(buf, "median: {median}");
                for d in &ranking.dimension_leaders {
                    let title = rubric.node(&d.dimension).map_or("", |n| n.title.as_str());
                    let _ = writeln!(buf, "leader {} {}: {} ({})", d.dimension, title, d.leader, d.display);
                }
            }
        }
        Command::Bic => {
            let all: Vec<Assessment> = src.load_many(&[])?.into_iter().map(|(_, a)| a).collect();
            let bic = analytics::best_in_class(rubric, &all, src.options).map_err(fatal)?;
            if cli.json {
                buf = to_json(&bic);
            } else {
                let r = &bic.report;
                let _ = writeln!(buf, "best in class: total {} ({})", r.total_display, pct(&r.total_exact));
                for d in rubric.dimensions() {
                    let n = r.node(&d.id).expect("dimension scored");
                    let _ = writeln!(buf, "  {} {}: {} ({})", d.id, d.title, n.display, pct(&n.exact));
                }
                for (id, holders) in &bic.sources {
                    let score = bic.composite.score(id).unwrap_or(0);
                    let _ = writeln!(buf, "  {id} {score}: {}", holders.join(", "));
                }
            }
        }
        Command::Diff { base, head } => {
            let d = analytics::diff(rubric, &src.load(base)?, &src.load(head)?, src.options).map_err(fatal)?;
            if cli.json {
                buf = to_json(&d);
            } else {
                let _ = writeln!(buf, "{} -> {}: total {}", d.base, d.head, signed(&d.total_delta));
                for (l, a) in d.leaf_deltas.iter().zip(&d.attributions) {
                    let _ = writeln!(
                        buf,
                        "  {} {} -> {}: {}",
                        l.criterion_id,
                        l.base,
                        l.head,
                        signed(&a.contribution)
                    );
                }
                if d.nonadditive {
                    let switches: Vec<String> = d.branch_switches.iter().map(|s| s.to_string()).collect();
                    let _ = writeln!(
                        buf,
                        "nonadditive: attributions sum to {}; override branch switched at {}",
                        signed(&d.attribution_sum()),
                        if switches.is_empty() { "none".into() } else { switches.join(", ") }
                    );
                }
            }
        }
        Command::Whatif { target, set, best_in_class } => {
            let a = src.load(&target.assessment)?;
            let mut overrides = BTreeMap::new();
            if *best_in_class {
                let all: Vec<Assessment> = src.load_many(&[])?.into_iter().map(|(_, a)| a).collect();
                overrides = analytics::best_in_class(rubric, &all, src.options).map_err(fatal)?.leaf_scores();
            }
            overrides.extend(set.iter().cloned());
            let w = analytics::what_if(rubric, &a, &overrides, src.options).map_err(fatal)?;
            if cli.json {
                buf = to_json(&w);
            } else {
                let _ = writeln!(
                    buf,
                    "{}: total {} ({}), delta {}",
                    w.report.name(),
                    w.report.total_display,
                    pct(&w.report.total_exact),
                    signed(&w.total_delta)
                );
            }
        }
        Command::Frontier { target, limit } => {
            let a = src.load(&target.assessment)?;
            let peers: Vec<Assessment> = src.load_many(&[])?.into_iter().map(|(_, a)| a).collect();
            let mut f = analytics::improvement_frontier(rubric, &a, &peers, src.options).map_err(fatal)?;
            if let Some(n) = limit {
                f.truncate(*n);
            }
            if cli.json {
                buf = to_json(&f);
            } else {
                for c in &f {
                    let _ = writeln!(
                        buf,
                        "{} {} -> {}: {} ({})",
                        c.criterion_id,
                        c.current,
                        c.target,
                        signed(&c.gain),
                        c.exemplars.join(", ")
                    );
                }
            }
        }
        Command::Lint { assessments, tolerance } => {
            let mut all = BTreeMap::new();
            for (name, a) in src.load_many(assessments)? {
                let findings = analytics::lint_consistency(rubric, &a, *tolerance, src.options).map_err(fatal)?;
                if !findings.is_empty() {
                    code = 1;
                }
                all.insert(name, findings);
            }
            if cli.json {
                buf = to_json(&all);
            } else {
                for (name, findings) in &all {
                    for f in findings {
                        let _ = writeln!(
                            buf,
                            "{name}: {}: published {}, recomputed {} ({}), off by {}",
                            f.node_id,
                            f.published,
                            f.recomputed_display,
                            pct(&f.recomputed_exact),
                            f.excess
                        );
                    }
                }
            }
        }
        Command::Report { assessment, format, no_bic, out: out_path } => {
            let format = format
                .or_else(|| out_path.as_deref().and_then(Format::from_path))
                .unwrap_or(Format::Markdown);
            buf = match assessment {
                Some(spec) => {
                    let a = src.load(spec)?;
                    let r = score_tree(rubric, &a, ScoringOptions { missing_as_zero: true }).ok();
                    report::render_profile(rubric, &a, r.as_ref(), format)
                }
                None => {
                    let all: Vec<Assessment> = src.load_many(&[])?.into_iter().map(|(_, a)| a).collect();
                    let reports = all.iter().map(|a| src.score(a)).collect::<Result<Vec<_>, _>>()?;
                    let bic = if *no_bic || all.is_empty() {
                        None
                    } else {
                        Some(analytics::best_in_class(rubric, &all, src.options).map_err(fatal)?.report)
                    };
                    report::render_comparison(rubric, &reports, bic.as_ref(), format).map_err(fatal)?
                }
            };
            if let Some(path) = out_path {
                atomic_write(path, buf.as_bytes()).map_err(fatal)?;
                buf.clear();
            }
        }
        Command::Reconcile { sheets } => {
            let sheets = sheets
                .iter()
                .map(|p| RaterSheet::parse(&read(p)?).map_err(|e| fatal(format!("{}: {e}", p.display()))))
                .collect::<Result<Vec<_>, _>>()?;
            let r = reconcile(&sheets, rubric).map_err(fatal)?;
            if !r.disagreements.is_empty() {
                code = 1;
            }
            if cli.json {
                buf = to_json(&r);
            } else {
                let _ = writeln!(buf, "agreed: {} leaves", r.merged.len());
                for d in &r.disagreements {
                    let scores: Vec<String> = d.scores.iter().map(|s| format!("{}={}", s.rater_id, s.score)).collect();
                    let _ = writeln!(buf, "disagreement {}: {}", d.criterion_id, scores.join(", "));
                }
            }
        }
        Command::Serve { bind } => {
            let store = src
                .store
                .clone()
                .ok_or_else(|| fatal(format!("serve needs a data directory (--data or {DATA_ENV})")))?;
            let rt = tokio::runtime::Runtime::new().map_err(fatal)?;
            let _ = writeln!(err, "serving {} on http://{bind}", store.root().display());
            rt.block_on(crate::service::serve(store, *bind)).map_err(fatal)?;
        }
    }
    out.write_all(buf.as_bytes()).map_err(fatal)?;
    Ok(code)
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}
