//! The `heis` command line: map-spec parsing, subcommands and report writing.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{appendix_identities, ledger_run};
use crate::expr::Expr;
use crate::fields::flow_closed_form;
use crate::group::{sl2_map, Generator, Point};
use crate::harmonic::{gradient_harmonic, subharmonicity_scan, GridSpec, SIGN_CSV_HEADER};
use crate::horizontal::{assess_jets, lambda_jet, require_contact};
use crate::jet::MAX_ORDER;
use crate::map::HeisMap;
use crate::schwarzian::{pf_of, s_cl_of, s_cr_of, SCHWARZIAN_ORDER};
use crate::suites::{run_criterion, suite_criteria, SuiteConfig};

pub const SCHEMA: u32 = 1;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

/// Exit code for an error that aborted a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain { .. } | Error::Singular(_) | Error::NotPositive { .. } | Error::NotContact { .. } => EXIT_DOMAIN,
        Error::NoConsistentConstant { .. } => EXIT_FAIL,
        _ => EXIT_USAGE,
    }
}

/// A parsed map spec.
#[derive(Clone, Debug)]
pub struct ParsedMap {
    pub map: HeisMap,
    /// False when an `expr(...)` segment is present: contact is not assumed.
    pub contact_assumed: bool,
}

fn parse_err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

/// Splits at depth-0 occurrences of `∘` or a whitespace-delimited `o`.
fn split_word(spec: &str) -> Vec<(usize, &str)> {
    let chars: Vec<(usize, char)> = spec.char_indices().collect();
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (k, &(i, c)) in chars.iter().enumerate() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '∘' if depth == 0 => {
                out.push((start, &spec[start..i]));
                start = i + c.len_utf8();
            }
            'o' if depth == 0
                && k > 0
                && chars[k - 1].1.is_whitespace()
                && chars.get(k + 1).is_some_and(|n| n.1.is_whitespace()) =>
            {
                out.push((start, &spec[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push((start, &spec[start..]));
    out
}

fn split_args(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(s[start..i].trim());
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn number(src: &str, pos: usize) -> Result<f64> {
    let e = Expr::parse(src).map_err(|_| parse_err(pos, format!("bad number `{src}`")))?;
    if e.free_vars().iter().any(|&v| v) {
        return Err(parse_err(pos, format!("`{src}` is not a constant")));
    }
    let z = Complex64::new(0.0, 0.0);
    match e.eval::<Complex64>(&[z, z, z]) {
        Ok(c) if c.im == 0.0 && c.re.is_finite() => Ok(c.re),
        _ => Err(parse_err(pos, format!("`{src}` is not a real constant"))),
    }
}

fn expr_arg(src: &str, pos: usize) -> Result<Expr> {
    Expr::parse(src).map_err(|e| match e {
        Error::Parse { pos: p, msg } => parse_err(pos + p, msg),
        other => other,
    })
}

fn keyed<'a>(args: &[&'a str], keys: &[&str], pos: usize) -> Result<Vec<&'a str>> {
    let mut found: BTreeMap<&str, &str> = BTreeMap::new();
    for a in args {
        let (k, v) = a
            .split_once('=')
            .ok_or_else(|| parse_err(pos, format!("expected key=value, got `{a}`")))?;
        let k = k.trim();
        if !keys.contains(&k) {
            return Err(parse_err(pos, format!("unknown key `{k}`")));
        }
        found.insert(k, v.trim());
    }
    keys.iter()
        .map(|k| found.get(k).copied().ok_or_else(|| parse_err(pos, format!("missing `{k}=`"))))
        .collect()
}

fn parse_segment(seg: &str, pos: usize) -> Result<(HeisMap, bool)> {
    let s = seg.trim();
    let pos = pos + (seg.len() - seg.trim_start().len());
    if s.is_empty() {
        return Err(parse_err(pos, "empty map segment"));
    }
    let (name, args) = match s.find('(') {
        Some(i) => {
            if !s.ends_with(')') {
                return Err(parse_err(pos + s.len(), format!("unclosed `(` in `{s}`")));
            }
            (s[..i].trim(), Some(&s[i + 1..s.len() - 1]))
        }
        None => (s, None),
    };
    let apos = pos + name.len() + 1;
    let nums = |n: usize| -> Result<Vec<f64>> {
        let a = args.ok_or_else(|| parse_err(pos, format!("`{name}` needs {n} argument(s)")))?;
        let parts = split_args(a, ',');
        if parts.len() != n {
            return Err(parse_err(apos, format!("`{name}` needs {n} argument(s), got {}", parts.len())));
        }
        parts.iter().map(|p| number(p, apos)).collect()
    };
    let gen = |g: Generator| Ok((HeisMap::generator(&g), true));
    match name {
        "inv" | "refl" if args.is_some() => Err(parse_err(apos, format!("`{name}` takes no arguments"))),
        "inv" => gen(Generator::Invert),
        "refl" => gen(Generator::Reflect),
        "id" => Ok((HeisMap::identity(), true)),
        "tr" => {
            let v = nums(3)?;
            gen(Generator::Translate { p: Point::new(v[0], v[1], v[2]) })
        }
        "dil" => {
            let v = nums(1)?;
            if v[0] <= 0.0 {
                return Err(parse_err(apos, "dilation factor must be positive"));
            }
            gen(Generator::Dilate { r: v[0] })
        }
        "rot" => gen(Generator::Rotate { phi: nums(1)?[0] }),
        "sl2" => {
            let v = nums(4)?;
            if (v[0] * v[3] - v[1] * v[2] - 1.0).abs() > 1e-12 {
                return Err(parse_err(apos, "sl2 needs ad - bc = 1"));
            }
            Ok((sl2_map(v[0], v[1], v[2], v[3]), true))
        }
        "flow" => {
            let a = args.ok_or_else(|| parse_err(pos, "`flow` needs h=..., s=..."))?;
            let kv = keyed(&split_args(a, ','), &["h", "s"], apos)?;
            let h = expr_arg(kv[0], apos)?;
            let sv = number(kv[1], apos)?;
            Ok((flow_closed_form(&h, sv)?, true))
        }
        "grad" => {
            let a = args.ok_or_else(|| parse_err(pos, "`grad` needs u=..."))?;
            let kv = keyed(&split_args(a, ','), &["u"], apos)?;
            Ok((gradient_harmonic(&expr_arg(kv[0], apos)?)?.map, false))
        }
        "expr" => {
            let a = args.ok_or_else(|| parse_err(pos, "`expr` needs f1;f2;f3"))?;
            let parts = split_args(a, ';');
            if parts.len() != 3 {
                return Err(parse_err(apos, format!("`expr` needs 3 components, got {}", parts.len())));
            }
            let comps = [expr_arg(parts[0], apos)?, expr_arg(parts[1], apos)?, expr_arg(parts[2], apos)?];
            Ok((HeisMap::from_exprs(format!("expr({a})"), comps), false))
        }
        other => Err(parse_err(pos, format!("unknown map `{other}`"))),
    }
}

/// Parses `seg ∘ seg ∘ …` (outermost first); segments are generators,
/// `sl2(a,b,c,d)`, `flow(h=…,s=…)`, `grad(u=…)` or `expr(f1;f2;f3)`.
pub fn parse_map(spec: &str) -> Result<ParsedMap> {
    let mut map = HeisMap::identity();
    let mut contact_assumed = true;
    for (pos, seg) in split_word(spec).into_iter().rev() {
        let (m, assumed) = parse_segment(seg, pos)?;
        contact_assumed &= assumed;
        map = m.compose(&map);
    }
    Ok(ParsedMap { map, contact_assumed })
}

pub fn parse_point(s: &str) -> Result<Point> {
    let v = split_args(s, ',');
    if v.len() != 3 {
        return Err(parse_err(0, format!("point needs x,y,t, got `{s}`")));
    }
    Ok(Point::new(number(v[0], 0)?, number(v[1], 0)?, number(v[2], 0)?))
}

/// `[a,b]^k` and `{v}` factors joined by `x` or `×`, three axes in total.
pub fn parse_grid(s: &str, n: usize) -> Result<GridSpec> {
    let mut axes = Vec::new();
    let norm = s.replace('×', "x");
    for f in split_args(&norm, 'x') {
        if let Some(inner) = f.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
            let v = number(inner, 0)?;
            axes.push((v, v, 1));
            continue;
        }
        let (body, rep) = match f.rsplit_once('^') {
            Some((b, r)) if b.ends_with(']') => (
                b,
                r.trim().parse::<usize>().map_err(|_| parse_err(0, format!("bad exponent in `{f}`")))?,
            ),
            _ => (f, 1),
        };
        let inner = body
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| parse_err(0, format!("bad grid factor `{f}`")))?;
        let ab = split_args(inner, ',');
        if ab.len() != 2 {
            return Err(parse_err(0, format!("interval needs two ends: `{f}`")));
        }
        let (a, b) = (number(ab[0], 0)?, number(ab[1], 0)?);
        for _ in 0..rep {
            axes.push((a, b, n));
        }
    }
    if axes.len() != 3 {
        return Err(parse_err(0, format!("grid `{s}` has {} axes, need 3", axes.len())));
    }
    Ok(GridSpec { x: axes[0], y: axes[1], t: axes[2] })
}

/// `a..b` into `steps + 1` equally spaced values.
pub fn parse_range(s: &str, steps: usize) -> Result<Vec<f64>> {
    let (a, b) = s.split_once("..").ok_or_else(|| parse_err(0, format!("range needs a..b, got `{s}`")))?;
    let (a, b) = (number(a, 0)?, number(b, 0)?);
    let steps = steps.max(1);
    Ok((0..=steps).map(|k| a + (b - a) * k as f64 / steps as f64).collect())
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn pair(c: Complex64) -> Value {
    json!([c.re, c.im])
}

fn quantity(r: Result<Complex64>) -> Result<Value> {
    match r {
        Ok(c) => Ok(pair(c)),
        Err(Error::Singular(_)) => Ok(json!("singular")),
        Err(Error::NotPositive { .. }) => Ok(json!("undefined")),
        Err(Error::NotContact { .. }) => Ok(json!("not contact")),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    #[value(alias = "s_cr")]
    SCr,
    #[value(alias = "s_cl")]
    SCl,
    Pf,
    Contact,
    All,
}

pub fn cmd_eval(spec: &str, p: Point, which: Which, order: usize) -> Result<Value> {
    if !(SCHWARZIAN_ORDER..=MAX_ORDER).contains(&order) {
        return Err(Error::Shape(format!("order must be in {SCHWARZIAN_ORDER}..={MAX_ORDER}, got {order}")));
    }
    let parsed = parse_map(spec)?;
    let m = parsed.map.eval_jets(p, order)?;
    let a = assess_jets(&m)?;
    let contact = require_contact(&a);
    let lambda = lambda_jet(&m)?.value();
    let with_contact = |f: fn(&crate::map::MapJets) -> Result<Complex64>| match &contact {
        Ok(()) => f(&m),
        Err(_) => Err(Error::NotContact { residual: a.residual() }),
    };
    let mut out = serde_json::Map::new();
    out.insert("schema".into(), json!(SCHEMA));
    out.insert("map".into(), json!(parsed.map.to_string()));
    out.insert("contact_assumed".into(), json!(parsed.contact_assumed));
    out.insert("point".into(), json!([p.x, p.y, p.t]));
    out.insert("image".into(), json!([a.image.x, a.image.y, a.image.t]));
    out.insert("lambda".into(), json!(lambda));
    out.insert("contact".into(), json!(contact.is_ok()));
    out.insert(
        "contact_residuals".into(),
        json!({"r1": a.r1, "r2": a.r2, "r_z": pair(a.r_z)}),
    );
    if matches!(which, Which::SCr | Which::All) {
        out.insert("s_cr".into(), quantity(with_contact(s_cr_of))?);
    }
    if matches!(which, Which::SCl | Which::All) {
        out.insert("s_cl".into(), quantity(with_contact(s_cl_of))?);
    }
    if matches!(which, Which::Pf | Which::All) {
        out.insert("pf".into(), quantity(pf_of(&m))?);
    }
    Ok(Value::Object(out))
}

/// Outcome of `verify`: report JSON, CSV files by name, pass flag, summary lines.
pub struct VerifyOutput {
    pub passed: bool,
    pub report: Value,
    pub files: Vec<(String, String)>,
    pub lines: Vec<String>,
}

pub fn cmd_verify(suite: &str, cfg: &SuiteConfig) -> Result<VerifyOutput> {
    if suite == "ledger" {
        let entries = ledger_run()?;
        let ledger = json!({"schema": SCHEMA, "entries": entries});
        let lines = entries
            .iter()
            .map(|e| {
                format!(
                    "({}) {:?}: printed {} fitted {}",
                    e.id,
                    e.verdict,
                    e.paper_constant,
                    e.fitted_constant.clone().unwrap_or_else(|| "-".into())
                )
            })
            .collect();
        return Ok(VerifyOutput {
            passed: true,
            report: json!({"schema": SCHEMA, "suite": suite, "passed": true, "entries": entries.len()}),
            files: vec![("ledger.json".into(), serde_json::to_string_pretty(&ledger)? + "\n")],
            lines,
        });
    }
    let ids = suite_criteria(suite).ok_or_else(|| {
        Error::Shape(format!(
            "unknown suite `{suite}` (conformal, cocycles, vfields, appendix, harmonic, ledger)"
        ))
    })?;
    let mut results = Vec::new();
    let mut files = Vec::new();
    let mut lines = Vec::new();
    for &id in ids {
        let r = run_criterion(id, cfg)?;
        lines.push(format!("[{}] {}. {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.name, r.detail));
        let mut csv = r.csv_header.clone();
        csv.push('\n');
        for row in &r.rows {
            csv.push_str(row);
            csv.push('\n');
        }
        files.push((format!("criterion_{id}.csv"), csv));
        results.push(r);
    }
    let passed = results.iter().all(|r| r.passed);
    let mut report = json!({
        "schema": SCHEMA,
        "suite": suite,
        "config": cfg,
        "passed": passed,
        "criteria": results,
    });
    if suite == "appendix" {
        let a = appendix_identities(6);
        let ids: Vec<Value> = a
            .checks
            .iter()
            .map(|c| {
                json!({
                    "identity": c.name,
                    "conditional": c.conditional,
                    "cases": c.cases,
                    "status": if c.pass() { "exact: pass".to_string() } else { format!("fail: {}", c.witness.clone().unwrap_or_default()) },
                })
            })
            .collect();
        report["identities"] = Value::Array(ids);
    }
    Ok(VerifyOutput { passed, report, files, lines })
}

pub fn cmd_scan(u: &str, grid: &GridSpec) -> Result<(Value, String, bool)> {
    let m = gradient_harmonic(&Expr::parse(u)?)?;
    let r = subharmonicity_scan(&m, grid)?;
    let mut csv = String::from(SIGN_CSV_HEADER);
    csv.push('\n');
    for row in &r.rows {
        csv.push_str(&row.csv());
        csv.push('\n');
    }
    let clean = r.violations == 0;
    Ok((json!({"schema": SCHEMA, "scan": r, "grid": grid}), csv, clean))
}

pub const FLOW_CSV_HEADER: &str = "s,x,y,t,lambda,s_cr_re,s_cr_im,s_cl_re,s_cl_im";

pub fn cmd_flow(h: &str, s_values: &[f64], p: Point) -> Result<String> {
    let h = Expr::parse(h)?;
    let fmt = |v: Result<Complex64>| -> Result<(String, String)> {
        match v {
            Ok(c) => Ok((format!("{:.12e}", c.re), format!("{:.12e}", c.im))),
            Err(Error::Singular(_)) => Ok(("singular".into(), "singular".into())),
            Err(Error::NotPositive { .. }) => Ok(("undefined".into(), "undefined".into())),
            Err(e) => Err(e),
        }
    };
    let mut csv = String::from(FLOW_CSV_HEADER);
    csv.push('\n');
    for &s in s_values {
        let f = flow_closed_form(&h, s)?;
        let m = f.eval_jets(p, SCHWARZIAN_ORDER)?;
        require_contact(&assess_jets(&m)?)?;
        let q = m.value();
        let lambda = lambda_jet(&m)?.value();
        let (cr_re, cr_im) = fmt(s_cr_of(&m))?;
        let (cl_re, cl_im) = fmt(s_cl_of(&m))?;
        csv.push_str(&format!(
            "{s},{:.12e},{:.12e},{:.12e},{:.12e},{cr_re},{cr_im},{cl_re},{cl_im}\n",
            q.x, q.y, q.t, lambda
        ));
    }
    Ok(csv)
}

#[derive(Parser, Debug)]
#[command(name = "heis", version, about = "Contact and conformal calculus on the first Heisenberg group")]
pub struct Cli {
    /// Plain key=value file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate S_CR, S_CL, Pf and contact residuals of a map at a point (JSON to stdout).
    Eval {
        #[arg(long)]
        map: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, value_enum, default_value = "all")]
        which: Which,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Run a verification suite and write report.json plus per-criterion CSV files.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Points per axis of the sign-suite grid.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sign scan of the gradient harmonic map of `u` over a grid (CSV).
    Scan {
        #[arg(long)]
        u: Option<String>,
        /// `grad(u=...)` is accepted as an alternative to --u.
        #[arg(long)]
        map: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trajectory of the closed-form flow of a potential h(x) (CSV).
    Flow {
        #[arg(long)]
        h: String,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// `key=value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(0, format!("config line {}: expected key=value", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

struct Merged(BTreeMap<String, String>);

impl Merged {
    fn get<T: std::str::FromStr>(&self, cli: Option<T>, key: &str) -> Result<Option<T>> {
        if cli.is_some() {
            return Ok(cli);
        }
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| parse_err(0, format!("config `{key}`: cannot parse `{v}`"))),
        }
    }
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text),
        None => {
            stdout(text)
        }
    }
}

fn run_cli(cli: Cli) -> Result<i32> {
    let cfg = Merged(match &cli.config {
        Some(p) => parse_config(&fs::read_to_string(p)?)?,
        None => BTreeMap::new(),
    });
    match cli.cmd {
        Command::Eval { map, point, which, order } => {
            let order = cfg.get(order, "order")?.unwrap_or(SCHWARZIAN_ORDER);
            let v = cmd_eval(&map, parse_point(&point)?, which, order)?;
            stdout(&(serde_json::to_string_pretty(&v)? + "\n"))?;
            Ok(EXIT_PASS)
        }
        Command::Verify { suite, seed, tol, n, out } => {
            let defaults = SuiteConfig::default();
            let sc = SuiteConfig {
                seed: cfg.get(seed, "seed")?.unwrap_or(defaults.seed),
                tol: cfg.get(tol, "tol")?,
                grid_n: cfg.get(n, "n")?.unwrap_or(defaults.grid_n),
            };
            let out = cfg.get(out, "out")?.unwrap_or_else(|| PathBuf::from("heis-report"));
            let v = cmd_verify(&suite, &sc)?;
            for (name, text) in &v.files {
                write_atomic(&out.join(name), text)?;
            }
            write_atomic(&out.join("report.json"), &(serde_json::to_string_pretty(&v.report)? + "\n"))?;
            for l in &v.lines {
                stdout(&format!("{l}\n"))?;
            }
            Ok(if v.passed { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Scan { u, map, grid, n, out } => {
            let u = match (u, map) {
                (Some(u), None) => u,
                (None, Some(m)) => m
                    .trim()
                    .strip_prefix("grad(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|r| r.trim().strip_prefix("u="))
                    .map(str::to_string)
                    .ok_or_else(|| parse_err(0, "scan --map accepts only grad(u=...)"))?,
                _ => return Err(parse_err(0, "scan needs exactly one of --u or --map")),
            };
            let n = cfg.get(n, "n")?.unwrap_or(21);
            let grid = cfg.get(grid, "grid")?.unwrap_or_else(|| "[-1,1]^3".into());
            let (summary, csv, clean) = cmd_scan(&u, &parse_grid(&grid, n)?)?;
            let out = cfg.get(out, "out")?;
            emit(out.as_deref(), &csv)?;
            if out.is_some() {
                stdout(&(serde_json::to_string_pretty(&summary)? + "\n"))?;
            }
            Ok(if clean { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Flow { h, s, steps, point, out } => {
            let steps = cfg.get(steps, "steps")?.unwrap_or(20);
            let csv = cmd_flow(&h, &parse_range(&s, steps)?, parse_point(&point)?)?;
            emit(cfg.get(out, "out")?.as_deref(), &csv)?;
            Ok(EXIT_PASS)
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match run_cli(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_specs() {
        let a = parse_map("inv∘rot(0.3)∘dil(2)").unwrap();
        let b = parse_map("inv o rot(0.3) o dil(2)").unwrap();
        let p = Point::new(0.3, 0.2, -0.4);
        assert_eq!(a.map.apply(p).unwrap(), b.map.apply(p).unwrap());
        assert_eq!(a.map.to_string(), "inv∘rot(0.3)∘dil(2)");
        let direct = Generator::Invert
            .act(Generator::Rotate { phi: 0.3 }.act(Generator::Dilate { r: 2.0 }.act(p).unwrap()).unwrap())
            .unwrap();
        let got = a.map.apply(p).unwrap();
        assert!((got.x - direct.x).abs() < 1e-14 && (got.t - direct.t).abs() < 1e-14);
        assert!(a.contact_assumed);
        assert!(!parse_map("expr(x; y; t + x)").unwrap().contact_assumed);
        assert!(parse_map("flow(h=exp(x), s=0.5)").is_ok());
        assert!(parse_map("tr(1,2/3,-1)").is_ok());
    }

    #[test]
    fn bad_specs_name_the_token() {
        match parse_map("inv∘bogus(1)") {
            Err(Error::Parse { pos, msg }) => {
                assert_eq!(pos, "inv∘".len());
                assert!(msg.contains("bogus"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_map("dil(1,2)").is_err());
        assert!(parse_map("sl2(1,1,0,2)").is_err());
        assert!(parse_map("flow(h=exp(y),s=1)").is_err());
        assert!(parse_map("grad(u=x^2)").is_err());
    }

    #[test]
    fn grids_and_ranges() {
        let g = parse_grid("[-1,1]^2×{0}", 21).unwrap();
        assert_eq!(g.points().len(), 441);
        let g = parse_grid("[-1,1]x[0,2]x{0.5}", 3).unwrap();
        assert_eq!(g.points().len(), 9);
        assert!(parse_grid("[-1,1]^2", 3).is_err());
        assert_eq!(parse_range("0..2", 4).unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn eval_examples() {
        let v = cmd_eval("dil(2)", Point::new(1.0, 1.0, 0.0), Which::SCl, 3).unwrap();
        assert_eq!(v["s_cl"], json!([0.0, 0.0]));
        assert!(v.get("s_cr").is_none());
        let v = cmd_eval("flow(h=exp(x),s=1)", Point::ORIGIN, Which::SCr, 3).unwrap();
        assert_eq!(v["s_cr"], json!([0.0, 0.0]));
        let e = cmd_eval("inv", Point::ORIGIN, Which::All, 3).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_DOMAIN);
        assert!(e.to_string().contains("inversion singular at origin"));
        let v = cmd_eval("expr(x; y; t + x)", Point::new(0.1, 0.2, 0.3), Which::All, 3).unwrap();
        assert_eq!(v["s_cr"], json!("not contact"));
    }

    #[test]
    fn config_merge() {
        let c = parse_config("seed = 11\n# comment\ntol=1e-9\n").unwrap();
        let m = Merged(c);
        assert_eq!(m.get::<u64>(None, "seed").unwrap(), Some(11));
        assert_eq!(m.get::<u64>(Some(3), "seed").unwrap(), Some(3));
        assert!(parse_config("nonsense").is_err());
    }
}
