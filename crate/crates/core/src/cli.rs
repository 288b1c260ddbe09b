//! Text formats and the batch command front end.
//!
//! Presentation grammar, one statement per line, `#` starts a comment:
//!
//! ```text
//! name s2
//! generator x deg 2
//! generator y deg 3
//! d y = x^2
//! relation x^4
//! truncate 12
//! ```
//!
//! Expressions use `+ - * ^`, parentheses, and rational literals `p/q`.
//! Relations must be single monomials. The default truncation is 12.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::cdga::{CdgaError, CdgaPresentation, Element, FreeCdga, Generator};
use crate::apl::{random_form, sections_cohomology, stokes_check, verify_simplicial_identities, AplError, FiniteSimplicialSet};
use crate::graded_core::{fmt_rational, Rational};
use crate::hochschild::{hochschild_homology, loop_space_table, HochschildReport, DEGREE_CONVENTION};
use crate::sullivan::{formal_up_to, homotopy_ranks, minimal_model, SullivanError};
use crate::whitney_jets::{
    multi_indices, parse_jet_file, quadrant_poincare_report, seminorm_flat, seminorm_whitney, whitney_rate_check,
    JetError, QuadrantSpec,
};

pub const DEFAULT_TRUNCATION: u32 = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: {source}")]
    Semantic {
        line: usize,
        #[source]
        source: CdgaError,
    },
    #[error(transparent)]
    Presentation(#[from] CdgaError),
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// A parsed presentation file.
#[derive(Clone, Debug, PartialEq)]
pub struct PresentationFile {
    pub name: Option<String>,
    pub presentation: CdgaPresentation,
}

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

struct ExprParser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    /// Column of `chars[0]` in the source line, 1-based.
    offset: usize,
    algebra: &'a FreeCdga,
}

impl<'a> ExprParser<'a> {
    fn err(&self, message: impl Into<String>) -> ParseError {
        syntax(self.line, self.offset + self.pos, message)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Element, ParseError> {
        let mut acc = Element::zero();
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    Rational::one()
                }
                Some('-') => {
                    self.pos += 1;
                    -Rational::one()
                }
                _ if first => Rational::one(),
                _ => return Ok(acc),
            };
            first = false;
            let t = self.term()?;
            acc = acc.add(&t.scale(&sign));
        }
    }

    fn term(&mut self) -> Result<Element, ParseError> {
        let mut acc = self.power()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            let rhs = self.power()?;
            acc = self.algebra.multiply(&acc, &rhs);
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Element, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let e = self.integer()?;
        let e: u32 = e
            .try_into()
            .map_err(|_| self.err("exponent out of range"))?;
        let mut out = self.algebra.unit();
        for _ in 0..e {
            out = self.algebra.multiply(&out, &base);
        }
        Ok(out)
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        Ok(s.parse().expect("digits"))
    }

    fn atom(&mut self) -> Result<Element, ParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.integer()?;
                let den = if self.chars.get(self.pos) == Some(&'/') {
                    self.pos += 1;
                    let d = self.integer()?;
                    if d.is_zero() {
                        return Err(self.err("zero denominator"));
                    }
                    d
                } else {
                    BigInt::one()
                };
                Ok(self.algebra.unit().scale(&Rational::new(num, den)))
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                let name = self.ident();
                self.algebra.gen(&name).map_err(|_| {
                    syntax(
                        self.line,
                        self.offset + start,
                        format!("unknown generator `{name}`"),
                    )
                })
            }
            Some(c) => Err(self.err(format!("unexpected `{c}`"))),
            None => Err(self.err("unexpected end of expression")),
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_')
        {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }
}

/// Parses an expression over `algebra`. `column` is where `text` starts.
pub fn parse_expression(
    algebra: &FreeCdga,
    text: &str,
    line: usize,
    column: usize,
) -> Result<Element, ParseError> {
    let mut p = ExprParser {
        chars: text.chars().collect(),
        pos: 0,
        line,
        offset: column,
        algebra,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

// ---------------------------------------------------------------------------
// Presentation files
// ---------------------------------------------------------------------------

enum Statement {
    Differential {
        line: usize,
        target: String,
        target_col: usize,
        expr: String,
        expr_col: usize,
    },
    Relation {
        line: usize,
        expr: String,
        expr_col: usize,
    },
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(s, t)| (line[..s].chars().count() + 1, t))
        .collect()
}

pub fn parse_presentation(text: &str) -> Result<PresentationFile, ParseError> {
    let mut name = None;
    let mut generators: Vec<(usize, Generator)> = Vec::new();
    let mut statements = Vec::new();
    let mut truncation = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw);
        let toks = tokens(body);
        let Some(&(col, keyword)) = toks.first() else {
            continue;
        };
        match keyword {
            "name" => {
                if toks.len() != 2 {
                    return Err(syntax(line, col, "expected `name <identifier>`"));
                }
                name = Some(toks[1].1.to_string());
            }
            "generator" => {
                if toks.len() != 4 || toks[2].1 != "deg" {
                    return Err(syntax(line, col, "expected `generator <name> deg <k>`"));
                }
                let (ncol, gname) = toks[1];
                if !is_ident(gname) {
                    return Err(syntax(line, ncol, format!("invalid name `{gname}`")));
                }
                let degree: u32 = toks[3]
                    .1
                    .parse()
                    .map_err(|_| syntax(line, toks[3].0, "degree must be a non-negative integer"))?;
                if let Some((_, g)) = generators.iter().find(|(_, g)| g.name == gname) {
                    return Err(ParseError::Semantic {
                        line,
                        source: CdgaError::DuplicateGenerator(g.name.clone()),
                    });
                }
                generators.push((line, Generator::new(gname, degree)));
            }
            "d" => {
                let rest = &body[body.find('d').unwrap() + 1..];
                let Some(eq) = rest.find('=') else {
                    return Err(syntax(line, col, "expected `d <name> = <expression>`"));
                };
                let lhs = rest[..eq].trim();
                if !is_ident(lhs) {
                    return Err(syntax(line, col + 2, "expected a generator name after `d`"));
                }
                let prefix = body.len() - rest.len();
                let target_col = body[..prefix + rest.find(lhs).unwrap()].chars().count() + 1;
                let expr_col = body[..prefix + eq + 1].chars().count() + 1;
                statements.push(Statement::Differential {
                    line,
                    target: lhs.to_string(),
                    target_col,
                    expr: rest[eq + 1..].to_string(),
                    expr_col,
                });
            }
            "relation" => {
                let start = body.find("relation").unwrap() + "relation".len();
                statements.push(Statement::Relation {
                    line,
                    expr: body[start..].to_string(),
                    expr_col: body[..start].chars().count() + 1,
                });
            }
            "truncate" => {
                if toks.len() != 2 {
                    return Err(syntax(line, col, "expected `truncate <N>`"));
                }
                let n: u32 = toks[1]
                    .1
                    .parse()
                    .map_err(|_| syntax(line, toks[1].0, "truncation must be a non-negative integer"))?;
                truncation = Some(n);
            }
            other => return Err(syntax(line, col, format!("unknown statement `{other}`"))),
        }
    }
    for (line, g) in &generators {
        if g.degree == 0 {
            return Err(ParseError::Semantic {
                line: *line,
                source: CdgaError::DegreeZeroGenerator(g.name.clone()),
            });
        }
    }
    let mut free = FreeCdga::new(generators.iter().map(|(_, g)| g.clone()).collect())?;
    let mut relations = Vec::new();
    let mut assigned = vec![false; free.ngens()];
    for st in &statements {
        match st {
            Statement::Differential {
                line,
                target,
                target_col,
                expr,
                expr_col,
            } => {
                let i = free.index_of(target).map_err(|_| {
                    syntax(*line, *target_col, format!("unknown generator `{target}`"))
                })?;
                if assigned[i] {
                    return Err(syntax(*line, *target_col, format!("d {target} given twice")));
                }
                assigned[i] = true;
                let value = parse_expression(&free, expr, *line, *expr_col)?;
                let g = &free.generators()[i];
                if !value.is_zero() && free.degree(&value) != Some(g.degree + 1) {
                    return Err(ParseError::Semantic {
                        line: *line,
                        source: CdgaError::DifferentialDegree {
                            generator: g.name.clone(),
                            expected: g.degree + 1,
                        },
                    });
                }
                free.set_differential(i, value);
            }
            Statement::Relation {
                line,
                expr,
                expr_col,
            } => {
                let value = parse_expression(&free, expr, *line, *expr_col)?;
                let mut terms = value.terms();
                match (terms.next(), terms.next()) {
                    (Some((m, _)), None) => relations.push(m.clone()),
                    _ => {
                        return Err(ParseError::Semantic {
                            line: *line,
                            source: CdgaError::NonMonomialRelation(expr.trim().to_string()),
                        })
                    }
                }
            }
        }
    }
    let presentation =
        CdgaPresentation::new(free, relations, truncation.unwrap_or(DEFAULT_TRUNCATION))?;
    Ok(PresentationFile { name, presentation })
}

/// Renders a presentation so that `parse_presentation` reproduces it.
pub fn print_presentation(file: &PresentationFile) -> String {
    let p = &file.presentation;
    let mut out = String::new();
    if let Some(name) = &file.name {
        writeln!(out, "name {name}").unwrap();
    }
    for g in p.generators() {
        writeln!(out, "generator {} deg {}", g.name, g.degree).unwrap();
    }
    for (i, g) in p.generators().iter().enumerate() {
        let d = p.algebra().d_of_generator(i);
        if !d.is_zero() {
            writeln!(out, "d {} = {}", g.name, p.format_element(d)).unwrap();
        }
    }
    for r in p.relations() {
        writeln!(out, "relation {}", p.algebra().format_monomial(r)).unwrap();
    }
    writeln!(out, "truncate {}", p.truncation()).unwrap();
    out
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

#[derive(Parser, Debug)]
#[command(name = "rhtk", version, about = "Exact rational homotopy computations")]
pub struct Cli {
    /// Emit one JSON object with `command`, `inputs`, `results` and `flags`.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Cohomology dimensions and representatives of a presentation.
    Cohomology {
        file: PathBuf,
        /// Highest degree; defaults to the truncation minus one.
        #[arg(long)]
        up_to: Option<u32>,
    },
    /// Minimal Sullivan model and the comparison map.
    MinimalModel {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        up_to: u32,
    },
    /// Generator counts of the minimal model per degree.
    HomotopyRanks {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        up_to: u32,
    },
    /// Compares the minimal models of an algebra and of its cohomology.
    Formality {
        file: PathBuf,
        #[arg(long, default_value_t = 6)]
        up_to: u32,
    },
    /// Hochschild homology of a presentation with stability flags.
    Hochschild {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        min_degree: i64,
        #[arg(long, default_value_t = 8)]
        max_degree: i64,
        #[arg(long, default_value_t = 4)]
        max_length: usize,
    },
    /// Free loop space ranks via the minimal model.
    LoopSpace {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        min_degree: i64,
        #[arg(long, default_value_t = 6)]
        max_degree: i64,
        #[arg(long, default_value_t = 4)]
        max_length: usize,
    },
    /// Simplicial identities of polynomial forms on simplices up to dimension n.
    AplVerify {
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// Cohomology of compatible polynomial forms on a finite simplicial set.
    AplSections {
        file: PathBuf,
        /// Highest cohomological degree reported.
        #[arg(long, default_value_t = 1)]
        up_to: usize,
        /// Bound on polynomial degree plus form degree.
        #[arg(long, default_value_t = 2)]
        max_degree: u32,
    },
    /// Randomized Stokes checks on the n-simplex.
    Stokes {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 5)]
        max_degree: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Seminorms and Whitney rate diagnostics of a jet table.
    Jets {
        file: PathBuf,
        /// Seminorm order; defaults to the jet order.
        #[arg(long)]
        order: Option<u32>,
    },
    /// Polynomial de Rham cohomology of a quadrant union via the radial homotopy.
    QuadrantPoincare {
        /// Union of sign strings over `0 + - *`, e.g. `++|0*@0,1`.
        #[arg(long)]
        quadrant: String,
        #[arg(long, default_value_t = 2)]
        up_to: usize,
        #[arg(long, default_value_t = 3)]
        coefficient_degree: u32,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("{0}")]
    Unsupported(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Unsupported(_) => 3,
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CdgaError> for CliError {
    fn from(e: CdgaError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SullivanError> for CliError {
    fn from(e: SullivanError) -> Self {
        if e.is_unsupported() {
            CliError::Unsupported(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<AplError> for CliError {
    fn from(e: AplError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<JetError> for CliError {
    fn from(e: JetError) -> Self {
        match e {
            JetError::Unsupported(_) => CliError::Unsupported(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

/// One command's output: a text table plus the structured form.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: &'static str,
    pub inputs: Value,
    pub results: Value,
    pub flags: Value,
    pub text: String,
}

impl Report {
    pub fn to_json(&self) -> String {
        let v = json!({
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "flags": self.flags,
        });
        serde_json::to_string_pretty(&v).expect("values serialize") + "\n"
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn load(path: &Path) -> Result<PresentationFile, CliError> {
    Ok(parse_presentation(&read(path)?)?)
}

fn q(v: &Rational) -> String {
    fmt_rational(v)
}

fn counts_json(counts: &BTreeMap<u32, usize>) -> Value {
    Value::Array(
        counts
            .iter()
            .map(|(k, c)| json!({"degree": k, "count": c}))
            .collect(),
    )
}

fn counts_text(counts: &BTreeMap<u32, usize>) -> String {
    let parts: Vec<String> = counts.iter().map(|(k, c)| format!("{k}:{c}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Parses the command line, runs it, and returns `(exit code, stdout, stderr)`.
pub fn run_args<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                (0, rendered, String::new())
            } else {
                (code, String::new(), rendered)
            }
        }
    }
}

pub fn run(cli: &Cli) -> (i32, String, String) {
    match execute(&cli.command) {
        Ok(report) if cli.json => (0, report.to_json(), String::new()),
        Ok(report) => (0, report.text, String::new()),
        Err(e) => (e.exit_code(), String::new(), format!("rhtk: {e}\n")),
    }
}

pub fn execute(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Cohomology { file, up_to } => cohomology_report(file, *up_to),
        Command::MinimalModel { file, up_to } => minimal_model_report(file, *up_to),
        Command::HomotopyRanks { file, up_to } => homotopy_ranks_report(file, *up_to),
        Command::Formality { file, up_to } => formality_report(file, *up_to),
        Command::Hochschild {
            file,
            min_degree,
            max_degree,
            max_length,
        } => hochschild_report(file, *min_degree, *max_degree, *max_length),
        Command::LoopSpace {
            file,
            min_degree,
            max_degree,
            max_length,
        } => loop_space_report(file, *min_degree, *max_degree, *max_length),
        Command::AplVerify { n } => apl_verify_report(*n),
        Command::AplSections {
            file,
            up_to,
            max_degree,
        } => apl_sections_report(file, *up_to, *max_degree),
        Command::Stokes {
            n,
            samples,
            max_degree,
            seed,
        } => stokes_report(*n, *samples, *max_degree, *seed),
        Command::Jets { file, order } => jets_report(file, *order),
        Command::QuadrantPoincare {
            quadrant,
            up_to,
            coefficient_degree,
        } => quadrant_report(quadrant, *up_to, *coefficient_degree),
    }
}

fn presentation_inputs(path: &Path, f: &PresentationFile) -> Value {
    json!({
        "file": file_label(path),
        "name": f.name,
        "truncation": f.presentation.truncation(),
    })
}

fn cohomology_report(path: &Path, up_to: Option<u32>) -> Result<Report, CliError> {
    let f = load(path)?;
    let p = &f.presentation;
    let up_to = up_to.unwrap_or(p.truncation().saturating_sub(1));
    if up_to >= p.truncation() {
        return Err(CliError::Input(format!(
            "--up-to {up_to} needs a truncation above {up_to}, found {}",
            p.truncation()
        )));
    }
    let h = p.cohomology(up_to)?;
    let mut text = format!("cohomology through degree {up_to}\ndegree  dim  representatives\n");
    let mut degrees = Vec::new();
    for g in h.groups() {
        let reps: Vec<String> = g.representatives.iter().map(|e| p.format_element(e)).collect();
        let line = format!("{:>6}  {:>3}  {}", g.degree, g.dim, reps.join(", "));
        writeln!(text, "{}", line.trim_end()).unwrap();
        degrees.push(json!({"degree": g.degree, "dimension": g.dim, "representatives": reps}));
    }
    Ok(Report {
        command: "cohomology",
        inputs: json!({"presentation": presentation_inputs(path, &f), "up_to": up_to}),
        results: json!({"degrees": degrees}),
        flags: json!({"exact": true}),
        text,
    })
}

fn model_json(p: &CdgaPresentation) -> Value {
    Value::Array(
        p.generators()
            .iter()
            .enumerate()
            .map(|(i, g)| {
                json!({
                    "name": g.name,
                    "degree": g.degree,
                    "differential": p.format_element(&p.d_of_generator(i)),
                })
            })
            .collect(),
    )
}

fn minimal_model_report(path: &Path, up_to: u32) -> Result<Report, CliError> {
    let f = load(path)?;
    let r = minimal_model(&f.presentation, up_to)?;
    let model = &r.model.presentation;
    let counts = r.model.generator_counts();
    let mut text = format!("minimal model through degree {up_to}\n");
    for (i, g) in model.generators().iter().enumerate() {
        writeln!(
            text,
            "  {} (degree {})  d = {}",
            g.name,
            g.degree,
            model.format_element(&model.d_of_generator(i))
        )
        .unwrap();
    }
    writeln!(text, "generator counts {}", counts_text(&counts)).unwrap();
    let mut qi = Vec::new();
    text.push_str("degree  H(model)  H(target)  rank  iso\n");
    for d in &r.report.degrees {
        writeln!(
            text,
            "{:>6}  {:>8}  {:>9}  {:>4}  {}",
            d.degree, d.source_dim, d.target_dim, d.rank, d.bijective
        )
        .unwrap();
        qi.push(json!({
            "degree": d.degree,
            "model_dimension": d.source_dim,
            "target_dimension": d.target_dim,
            "rank": d.rank,
            "bijective": d.bijective,
        }));
    }
    Ok(Report {
        command: "minimal-model",
        inputs: json!({"presentation": presentation_inputs(path, &f), "up_to": up_to}),
        results: json!({
            "generators": model_json(model),
            "counts": counts_json(&counts),
            "comparison": qi,
        }),
        flags: json!({
            "sullivan": r.model.is_sullivan(),
            "minimal": r.model.is_minimal(),
            "quasi_isomorphism_through": r.report.verified_up_to,
            "quasi_isomorphism": r.report.is_quasi_iso,
        }),
        text,
    })
}

fn homotopy_ranks_report(path: &Path, up_to: u32) -> Result<Report, CliError> {
    let f = load(path)?;
    let r = minimal_model(&f.presentation, up_to)?;
    let ranks = homotopy_ranks(&r);
    let mut text = format!(
        "ranks of rational homotopy groups through degree {}\ndegree  rank\n",
        r.verified_degree
    );
    let mut rows = Vec::new();
    for k in 1..=r.verified_degree {
        let rank = ranks.get(&k).copied().unwrap_or(0);
        writeln!(text, "{k:>6}  {rank:>4}").unwrap();
        rows.push(json!({"degree": k, "rank": rank}));
    }
    Ok(Report {
        command: "homotopy-ranks",
        inputs: json!({"presentation": presentation_inputs(path, &f), "up_to": up_to}),
        results: json!({"ranks": rows}),
        flags: json!({"verified_through": r.verified_degree}),
        text,
    })
}

fn formality_report(path: &Path, up_to: u32) -> Result<Report, CliError> {
    let f = load(path)?;
    let e = formal_up_to(&f.presentation, up_to)?;
    let a = e.model_of_algebra.generator_counts();
    let b = e.model_of_cohomology.generator_counts();
    let text = format!(
        "formality evidence through degree {up_to}\n  model of algebra     {}\n  model of cohomology  {}\n  counts agree {}\n  differentials agree {}\n  consistent with formality {}\n",
        counts_text(&a),
        counts_text(&b),
        e.counts_agree,
        e.differentials_agree,
        e.consistent()
    );
    Ok(Report {
        command: "formality",
        inputs: json!({"presentation": presentation_inputs(path, &f), "up_to": up_to}),
        results: json!({
            "model_of_algebra": model_json(&e.model_of_algebra.presentation),
            "model_of_cohomology": model_json(&e.model_of_cohomology.presentation),
            "counts_agree": e.counts_agree,
            "differentials_agree": e.differentials_agree,
        }),
        flags: json!({"evidence_only": true, "consistent": e.consistent()}),
        text,
    })
}

fn hh_text(title: &str, r: &HochschildReport) -> String {
    let mut text = format!(
        "{title}\n{DEGREE_CONVENTION}\nmax tensor length {} (words of length up to {}), algebra truncation {}\ndegree  dim  flag\n",
        r.max_length,
        r.max_length + 1,
        r.algebra_truncation
    );
    for d in &r.degrees {
        writeln!(text, "{:>6}  {:>3}  {}", d.degree, d.dim, d.stability.label()).unwrap();
    }
    text
}

fn hh_results(r: &HochschildReport) -> (Value, Value) {
    let degrees: Vec<Value> = r
        .degrees
        .iter()
        .map(|d| {
            json!({
                "degree": d.degree,
                "dimension": d.dim,
                "stability": d.stability.label(),
            })
        })
        .collect();
    let boundary: Vec<i64> = r
        .degrees
        .iter()
        .filter(|d| d.boundary_effect)
        .map(|d| d.degree)
        .collect();
    (
        json!({"degree_convention": DEGREE_CONVENTION, "degrees": degrees}),
        json!({
            "max_length": r.max_length,
            "algebra_truncation": r.algebra_truncation,
            "all_stable": r.all_stable(),
            "boundary_effects": boundary,
        }),
    )
}

fn hochschild_report(path: &Path, lo: i64, hi: i64, max_length: usize) -> Result<Report, CliError> {
    if lo > hi {
        return Err(CliError::Input(format!("empty degree window {lo}..{hi}")));
    }
    let f = load(path)?;
    let r = hochschild_homology(&f.presentation, lo, hi, max_length)?;
    let (results, flags) = hh_results(&r);
    Ok(Report {
        command: "hochschild",
        inputs: json!({
            "presentation": presentation_inputs(path, &f),
            "min_degree": lo,
            "max_degree": hi,
            "max_length": max_length,
        }),
        results,
        flags,
        text: hh_text("Hochschild homology", &r),
    })
}

fn loop_space_report(path: &Path, lo: i64, hi: i64, max_length: usize) -> Result<Report, CliError> {
    if lo > hi {
        return Err(CliError::Input(format!("empty degree window {lo}..{hi}")));
    }
    let f = load(path)?;
    let model = minimal_model(&f.presentation, hi.max(0) as u32 + 2)?;
    let t = loop_space_table(&model, lo, hi, max_length)?;
    let (mut results, flags) = hh_results(&t.report);
    results["label"] = json!(t.label);
    results["model_counts"] = counts_json(&model.model.generator_counts());
    Ok(Report {
        command: "loop-space",
        inputs: json!({
            "presentation": presentation_inputs(path, &f),
            "min_degree": lo,
            "max_degree": hi,
            "max_length": max_length,
        }),
        results,
        flags,
        text: hh_text(&t.label, &t.report),
    })
}

fn apl_verify_report(n: usize) -> Result<Report, CliError> {
    let r = verify_simplicial_identities(n);
    let mut text = format!("simplicial identities for n <= {n}\nfamily  checks\n");
    let mut families = Vec::new();
    for (family, count) in r.counts() {
        writeln!(text, "{:<28}  {count}", family.label()).unwrap();
        families.push(json!({"family": family.label(), "checks": count}));
    }
    let failures: Vec<Value> = r
        .failures()
        .map(|c| {
            json!({
                "family": c.family.label(),
                "n": c.n,
                "i": c.i,
                "j": c.j,
                "generator": c.generator,
            })
        })
        .collect();
    writeln!(
        text,
        "{}",
        if r.all_passed() {
            "all identities pass".to_string()
        } else {
            format!("{} failures", failures.len())
        }
    )
    .unwrap();
    Ok(Report {
        command: "apl-verify",
        inputs: json!({"n": n}),
        results: json!({"families": families, "failures": failures}),
        flags: json!({"all_passed": r.all_passed()}),
        text,
    })
}

fn apl_sections_report(path: &Path, up_to: usize, max_degree: u32) -> Result<Report, CliError> {
    let x = FiniteSimplicialSet::parse(&read(path)?)?;
    let dims = sections_cohomology(&x, up_to, max_degree)?;
    let mut text = format!(
        "cohomology of polynomial forms on {} ({} nondegenerate simplices, total degree <= {max_degree})\ndegree  dim\n",
        file_label(path),
        x.len()
    );
    let mut rows = Vec::new();
    for (k, d) in dims.iter().enumerate() {
        writeln!(text, "{k:>6}  {d:>3}").unwrap();
        rows.push(json!({"degree": k, "dimension": d}));
    }
    Ok(Report {
        command: "apl-sections",
        inputs: json!({
            "file": file_label(path),
            "simplices": x.len(),
            "up_to": up_to,
            "max_degree": max_degree,
        }),
        results: json!({"degrees": rows}),
        flags: json!({"exact": true}),
        text,
    })
}

fn stokes_report(n: usize, samples: usize, max_degree: u32, seed: u64) -> Result<Report, CliError> {
    if n == 0 {
        return Err(CliError::Input("Stokes checks need n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for i in 0..samples {
        let w = random_form(&mut rng, n, n - 1, max_degree);
        let r = stokes_check(&w)?;
        if !r.equal {
            failures.push(json!({"sample": i, "integral_of_d": q(&r.lhs), "boundary_sum": q(&r.rhs)}));
        }
    }
    let text = format!(
        "Stokes on the {n}-simplex: {samples} random {}-forms, polynomial degree <= {max_degree}, seed {seed}\n{} passed, {} failed\n",
        n - 1,
        samples - failures.len(),
        failures.len()
    );
    Ok(Report {
        command: "stokes",
        inputs: json!({"n": n, "samples": samples, "max_degree": max_degree, "seed": seed}),
        results: json!({"passed": samples - failures.len(), "failures": failures}),
        flags: json!({"all_equal": failures.is_empty()}),
        text,
    })
}

fn jets_report(path: &Path, order: Option<u32>) -> Result<Report, CliError> {
    let jet = parse_jet_file(&read(path)?)?;
    let k = order.unwrap_or(jet.order());
    let all = jet.points().clone();
    let flat = seminorm_flat(&jet, &all, k)?;
    let whitney = seminorm_whitney(&jet, &all, k)?;
    let mut text = format!(
        "jet of order {} on {} points in dimension {}\n|F|_K,{k} = {}\n||F||_K,{k} = {}\nWhitney rate diagnostics (sup-norm dyadic buckets)\n",
        jet.order(),
        all.len(),
        jet.dim(),
        q(&flat),
        q(&whitney)
    );
    let mut checks = Vec::new();
    for beta in multi_indices(jet.order(), jet.dim()) {
        let r = whitney_rate_check(&jet, jet.order(), &beta, &all)?;
        let ratios: Vec<String> = r
            .buckets
            .iter()
            .map(|b| format!("2^{}:{}", b.scale, q(&b.max_ratio)))
            .collect();
        writeln!(text, "  beta {}  {}  [{}]", beta, r.verdict.label(), ratios.join(", ")).unwrap();
        let buckets: Vec<Value> = r
            .buckets
            .iter()
            .map(|b| json!({"scale_exponent": b.scale, "pairs": b.pairs, "max_ratio": q(&b.max_ratio)}))
            .collect();
        checks.push(json!({"beta": beta.0, "verdict": r.verdict.label(), "buckets": buckets}));
    }
    Ok(Report {
        command: "jets",
        inputs: json!({
            "file": file_label(path),
            "dimension": jet.dim(),
            "order": jet.order(),
            "points": all.len(),
            "seminorm_order": k,
        }),
        results: json!({
            "seminorm_flat": q(&flat),
            "seminorm_whitney": q(&whitney),
            "rate_checks": checks,
        }),
        flags: json!({"diagnostic_only": true}),
        text,
    })
}

fn quadrant_report(spec: &str, up_to: usize, coefficient_degree: u32) -> Result<Report, CliError> {
    let quadrant = QuadrantSpec::parse(spec)?;
    let r = quadrant_poincare_report(&quadrant, up_to, coefficient_degree)?;
    let contractible = r.dims.first() == Some(&1) && r.dims.iter().skip(1).all(|&d| d == 0);
    let span: Vec<usize> = r.span.iter().map(|i| i + 1).collect();
    let mut text = format!(
        "polynomial de Rham cohomology of {spec} (span coordinates {span:?}, coefficient degree <= {coefficient_degree})\ndegree  dim\n"
    );
    for (k, d) in r.dims.iter().enumerate() {
        writeln!(text, "{k:>6}  {d:>3}").unwrap();
    }
    writeln!(
        text,
        "radial homotopy checked on {} forms: Kd + dK = id - ev0 {}, K^2 = 0 {}",
        r.forms_checked, r.homotopy_identity, r.k_squared_zero
    )
    .unwrap();
    Ok(Report {
        command: "quadrant-poincare",
        inputs: json!({
            "quadrant": spec,
            "dimension": quadrant.n,
            "up_to": up_to,
            "coefficient_degree": coefficient_degree,
        }),
        results: json!({"span": span, "dimensions": r.dims, "forms_checked": r.forms_checked}),
        flags: json!({
            "homotopy_identity": r.homotopy_identity,
            "k_squared_zero": r.k_squared_zero,
            "contractible": contractible,
        }),
        text,
    })
}
