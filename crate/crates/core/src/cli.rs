//! The `cobord` command line. Output depends only on the flags.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bivariant::{run_check, Bivariant, Budget, Check, CheckReport, SkippedPullback, Universal};
use crate::chern::{
    ambient_space, chern_character, todd_inverse, twisted_first_chern, ChernCalculus, ChernVector,
    TwistConvention,
};
use crate::error::{Error, Result};
use crate::exactalg::parse::parse_rational;
use crate::exactalg::{ElementJson, GradedRing, RingElement};
use crate::fgl::{additive_specialization, multiplicative_specialization, FormalGroupLaw, TwistData};
use crate::series::Series;
use crate::spaces::grr_check;

/// Exit status for a run that found nothing wrong.
pub const EXIT_OK: i32 = 0;
/// Exit status when an identity or axiom fails.
pub const EXIT_VIOLATION: i32 = 1;
/// Exit status for malformed or out-of-range arguments.
pub const EXIT_USAGE: i32 = 2;

/// Largest coefficient degree accepted by `--degree`.
pub const MAX_DEGREE: u32 = 8;
/// Largest nilpotency order accepted by `--nilpotency`.
pub const MAX_NILPOTENCY: u32 = 8;
/// Largest rank accepted by `--rank` and `--roots`.
pub const MAX_RANK: usize = 4;
/// Largest set size accepted by the bivariant checker.
pub const MAX_SET_SIZE: usize = 6;

#[derive(Parser, Debug)]
#[command(name = "cobord", version, about = "Exact formal group laws, Chern classes and bivariant checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Formal group laws.
    #[command(subcommand)]
    Fgl(FglCommand),
    /// Chern classes of formal bundles.
    #[command(subcommand)]
    Chern(ChernCommand),
    /// Euler characteristic of O(d) on P^n computed three ways.
    Hrr(HrrArgs),
    /// The bivariant theory of finite sets.
    #[command(subcommand)]
    Bivariant(BivariantCommand),
    /// Runs the acceptance suite.
    Selftest(OutputArgs),
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum LawKind {
    Universal,
    Additive,
    Multiplicative,
}

impl LawKind {
    fn name(self) -> &'static str {
        match self {
            LawKind::Universal => "universal",
            LawKind::Additive => "additive",
            LawKind::Multiplicative => "multiplicative",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SpecialKind {
    Additive,
    Multiplicative,
}

#[derive(Args, Debug)]
struct LawArgs {
    #[arg(long, value_enum, default_value = "universal")]
    law: LawKind,
    /// Coefficient degree bound; series are kept through degree `degree + 1`.
    #[arg(long, default_value_t = 3)]
    degree: u32,
}

impl LawArgs {
    /// The law over its natural ring: the Lazard ring, `Z`, or `Z[beta, beta^-1]`.
    fn build(&self) -> Result<FormalGroupLaw> {
        check_max("--degree", self.degree as usize, MAX_DEGREE as usize)?;
        let cap = self.degree + 1;
        match self.law {
            LawKind::Universal => FormalGroupLaw::universal(self.degree),
            LawKind::Additive => FormalGroupLaw::additive(&GradedRing::integers(0), cap),
            LawKind::Multiplicative => FormalGroupLaw::multiplicative_periodic(cap),
        }
    }

    /// The law over the rationals; the multiplicative law takes `beta = 1`.
    fn build_rational(&self) -> Result<FormalGroupLaw> {
        match self.law {
            LawKind::Multiplicative => {
                check_max("--degree", self.degree as usize, MAX_DEGREE as usize)?;
                let q = GradedRing::rationals(0);
                FormalGroupLaw::multiplicative(&q, &q.one(), self.degree + 1)
            }
            _ => self.build()?.rationalize(),
        }
    }
}

#[derive(Subcommand, Debug)]
enum FglCommand {
    /// The universal law over the Lazard ring.
    Universal {
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// The formal inverse `i(x)`.
    Inverse {
        #[command(flatten)]
        law: LawArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// The difference law `F(x, i(y))`.
    Difference {
        #[command(flatten)]
        law: LawArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// The logarithm over the rationals and the weights `p_m`.
    Log {
        #[command(flatten)]
        law: LawArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Pushes the universal law to the additive or multiplicative one.
    Specialize {
        #[arg(long, value_enum)]
        to: SpecialKind,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Changes coordinates by `tau` over the rationals.
    Twist {
        #[command(flatten)]
        law: LawArgs,
        #[command(flatten)]
        tau: TauArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args, Debug)]
#[group(multiple = false)]
struct TauArgs {
    /// The sequence `b_0, b_1, ...` with `x / g(x) = sum b_i x^i`, e.g. `1,1/2,1/12`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    tau: Option<Vec<String>>,
    /// Twist onto this law instead (`g = exp_target . log`).
    #[arg(long, value_enum)]
    target: Option<LawKind>,
}

impl TauArgs {
    /// Defaults to the twist from the additive to the multiplicative law.
    fn build(&self, law: &FormalGroupLaw) -> Result<TwistData> {
        let ring = law.ring();
        if let Some(list) = &self.tau {
            let b = list
                .iter()
                .map(|s| Ok(ring.scalar(parse_rational(s.trim())?)))
                .collect::<Result<Vec<_>>>()?;
            return TwistData::from_b(ring, &b);
        }
        let target = match self.target {
            Some(LawKind::Universal) => {
                return Err(Error::Incompatible("the universal law is not a twist target".into()))
            }
            Some(LawKind::Additive) => FormalGroupLaw::additive(ring, law.cap())?,
            Some(LawKind::Multiplicative) | None => FormalGroupLaw::multiplicative(ring, &ring.one(), law.cap())?,
        };
        if self.target.is_none() && law != &FormalGroupLaw::additive(ring, law.cap())? {
            return Err(Error::Incompatible("pass --tau or --target for a non-additive law".into()));
        }
        law.tau_for_target(&target)
    }
}

#[derive(Args, Debug)]
struct BundleArgs {
    /// Chern roots of the bundle, each a fresh variable of degree one.
    #[arg(long, value_delimiter = ',', default_value = "u,v")]
    roots: Vec<String>,
    /// Every monomial of this total degree vanishes.
    #[arg(long, default_value_t = 4)]
    nilpotency: u32,
}

impl BundleArgs {
    fn ambient_with(&self, ring: &GradedRing, extra: &[&str]) -> Result<(ChernVector, Vec<Series>)> {
        check_max("--roots", self.roots.len(), MAX_RANK)?;
        check_max("--nilpotency", self.nilpotency as usize, MAX_NILPOTENCY as usize)?;
        let mut names: Vec<&str> = self.roots.iter().map(|s| s.trim()).collect();
        names.extend_from_slice(extra);
        let amb = ambient_space(ring, &names, self.nilpotency)?;
        let roots = self.roots.iter().map(|n| amb.var(n.trim())).collect::<Result<Vec<_>>>()?;
        let extras = extra.iter().map(|n| amb.var(n)).collect::<Result<Vec<_>>>()?;
        Ok((ChernVector::from_roots(&amb, &roots)?, extras))
    }
}

#[derive(Subcommand, Debug)]
enum ChernCommand {
    /// `H^i(s_1..s_r, x)`: the classes of `E (x) L` in those of `E` and `c_1(L) = x`.
    HSeries {
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long, default_value_t = 1)]
        index: usize,
        /// Use the difference law, giving the classes of `E (x) L^v`.
        #[arg(long)]
        minus: bool,
        #[command(flatten)]
        law: LawArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Chern classes of `E (x) L` for a split bundle `E`.
    Twist {
        #[command(flatten)]
        bundle: BundleArgs,
        /// First Chern class of the line bundle, a fresh variable.
        #[arg(long, default_value = "w")]
        line: String,
        /// Untwist instead.
        #[arg(long)]
        untwist: bool,
        #[command(flatten)]
        law: LawArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// The inverse Todd class and twisted first Chern classes of the roots.
    Todd {
        #[command(flatten)]
        bundle: BundleArgs,
        #[command(flatten)]
        tau: TauArgs,
        /// Report twisted first Chern classes as `c + b_1 c^2 + ...`.
        #[arg(long)]
        expansion_convention: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// The Chern character over the rationals.
    Character {
        #[command(flatten)]
        bundle: BundleArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct HrrArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, allow_hyphen_values = true)]
    d: i64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum EngineKind {
    Universal,
    /// A deliberately broken engine whose product skips a pullback.
    SkippedPullback,
}

#[derive(Args, Debug)]
struct BudgetArgs {
    #[arg(long, default_value_t = 4)]
    max_size: usize,
    #[arg(long, default_value_t = 3)]
    max_fiber: u32,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Largest set size swept exhaustively; 0 skips the sweep.
    #[arg(long, default_value_t = 3)]
    exhaustive_size: usize,
    #[arg(long, value_enum, default_value = "universal")]
    engine: EngineKind,
    #[command(flatten)]
    out: OutputArgs,
}

impl BudgetArgs {
    fn budget(&self) -> Result<Budget> {
        check_max("--max-size", self.max_size, MAX_SET_SIZE)?;
        check_max("--exhaustive-size", self.exhaustive_size, MAX_SET_SIZE.min(4))?;
        check_max("--max-fiber", self.max_fiber as usize, 8)?;
        Ok(Budget {
            exhaustive_size: self.exhaustive_size,
            max_size: self.max_size,
            max_fiber: self.max_fiber,
            trials: self.trials,
            seed: self.seed,
        })
    }

    fn engine(&self) -> &'static dyn Bivariant {
        match self.engine {
            EngineKind::Universal => &Universal,
            EngineKind::SkippedPullback => &SkippedPullback,
        }
    }
}

#[derive(Subcommand, Debug)]
enum BivariantCommand {
    /// Checks the bivariant axioms.
    Check {
        /// `all` or one of the check names.
        #[arg(long, default_value = "all")]
        axiom: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Checks that the map to multiplicity functions is a transformation.
    Transform {
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

fn check_max(flag: &str, value: usize, max: usize) -> Result<()> {
    if value > max {
        return Err(Error::OutOfRange(format!("{flag} {value} above the maximum {max}")));
    }
    Ok(())
}

/// What a subcommand produced: its text and JSON renderings and whether it found a violation.
struct Output {
    text: String,
    json: serde_json::Value,
    violation: bool,
}

impl Output {
    fn new(text: String, json: impl Serialize) -> Self {
        Self {
            text,
            json: serde_json::to_value(json).expect("report serializes"),
            violation: false,
        }
    }

    fn with_violation(mut self, violation: bool) -> Self {
        self.violation = violation;
        self
    }
}

/// Parses `argv` (program name first), writes the result and returns the exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let json = match &cli.command {
        Command::Fgl(c) => match c {
            FglCommand::Universal { out, .. }
            | FglCommand::Inverse { out, .. }
            | FglCommand::Difference { out, .. }
            | FglCommand::Log { out, .. }
            | FglCommand::Specialize { out, .. }
            | FglCommand::Twist { out, .. } => out.json,
        },
        Command::Chern(c) => match c {
            ChernCommand::HSeries { out, .. }
            | ChernCommand::Twist { out, .. }
            | ChernCommand::Todd { out, .. }
            | ChernCommand::Character { out, .. } => out.json,
        },
        Command::Hrr(a) => a.out.json,
        Command::Bivariant(BivariantCommand::Check { budget, .. } | BivariantCommand::Transform { budget }) => {
            budget.out.json
        }
        Command::Selftest(o) => o.json,
    };
    match execute(&cli.command) {
        Ok(result) => {
            let rendered = if json {
                let mut s = serde_json::to_string_pretty(&result.json).expect("json renders");
                s.push('\n');
                s
            } else {
                result.text
            };
            if out.write_all(rendered.as_bytes()).is_err() {
                return EXIT_USAGE;
            }
            if result.violation {
                EXIT_VIOLATION
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(command: &Command) -> Result<Output> {
    match command {
        Command::Fgl(c) => fgl(c),
        Command::Chern(c) => chern(c),
        Command::Hrr(a) => hrr(a),
        Command::Bivariant(c) => bivariant(c),
        Command::Selftest(_) => {
            let report = crate::selftest::run();
            let passed = report.passed();
            Ok(Output::new(report.render(), &report).with_violation(!passed))
        }
    }
}

#[derive(Serialize)]
struct NamedSeries<'a> {
    law: &'a str,
    cap: u32,
    #[serde(flatten)]
    fields: serde_json::Map<String, serde_json::Value>,
}

fn named(law: &str, cap: u32, fields: &[(&str, serde_json::Value)]) -> serde_json::Value {
    let fields = fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    serde_json::to_value(NamedSeries { law, cap, fields }).expect("json value")
}

fn series_value(s: &Series) -> serde_json::Value {
    serde_json::to_value(s.to_json()).expect("json value")
}

fn elements_json(ring: &GradedRing, xs: &[RingElement]) -> Vec<ElementJson> {
    xs.iter().map(|x| ring.to_json(x)).collect()
}

fn describe_ring(ring: &GradedRing) -> String {
    let p = ring.presentation();
    let gens: Vec<String> = p.generators.iter().map(|g| format!("{} ({})", g.name, g.weight)).collect();
    let mut s = if gens.is_empty() {
        format!("{:?}", p.domain)
    } else {
        format!("{:?}[{}]", p.domain, gens.join(", "))
    };
    if !p.relations.is_empty() {
        s.push_str(&format!(" / ({})", p.relations.join(", ")));
    }
    s
}

fn fgl(command: &FglCommand) -> Result<Output> {
    match command {
        FglCommand::Universal { degree, .. } => {
            check_max("--degree", *degree as usize, MAX_DEGREE as usize)?;
            let law = FormalGroupLaw::universal(*degree)?;
            let text = format!(
                "cap: {}\nring: {}\nF(x, y) = {}\ni(x) = {}\nF_-(x, y) = {}\n",
                law.cap(),
                describe_ring(law.ring()),
                law.series(),
                law.inverse(),
                law.difference()
            );
            Ok(Output::new(text, law.to_json()))
        }
        FglCommand::Inverse { law: args, .. } => {
            let law = args.build()?;
            let text = format!("i(x) = {}\n", law.inverse());
            let json = named(args.law.name(), law.cap(), &[("inverse", series_value(law.inverse()))]);
            Ok(Output::new(text, json))
        }
        FglCommand::Difference { law: args, .. } => {
            let law = args.build()?;
            let text = format!("F_-(x, y) = {}\n", law.difference());
            let json = named(args.law.name(), law.cap(), &[("difference", series_value(law.difference()))]);
            Ok(Output::new(text, json))
        }
        FglCommand::Log { law: args, .. } => {
            let law = args.build_rational()?;
            let log = law.log()?;
            let pm = law.pm_coefficients()?;
            let pm_text: Vec<String> = pm.iter().map(|p| law.ring().format(p)).collect();
            let text = format!("log(x) = {log}\np = ({})\n", pm_text.join(", "));
            let pm_json = serde_json::to_value(elements_json(law.ring(), &pm)).expect("json value");
            let json = named(args.law.name(), law.cap(), &[("log", series_value(&log)), ("pm", pm_json)]);
            Ok(Output::new(text, json))
        }
        FglCommand::Specialize { to, degree, .. } => {
            check_max("--degree", *degree as usize, MAX_DEGREE as usize)?;
            let universal = FormalGroupLaw::universal(*degree)?;
            let cap = universal.cap();
            let (name, expected, hom) = match to {
                SpecialKind::Additive => {
                    let z = GradedRing::integers(0);
                    let h = additive_specialization(universal.ring(), &z)?;
                    ("additive", FormalGroupLaw::additive(&z, cap)?, h)
                }
                SpecialKind::Multiplicative => {
                    let law = FormalGroupLaw::multiplicative_periodic(cap)?;
                    let beta = law.ring().gen("beta")?;
                    let h = multiplicative_specialization(universal.ring(), law.ring(), &beta)?;
                    ("multiplicative", law, h)
                }
            };
            let special = universal.specialize(&hom)?;
            let matches = special == expected;
            let text = format!("F(x, y) = {}\nmatches the {name} law: {matches}\n", special.series());
            let json = named(
                name,
                cap,
                &[("F", series_value(special.series())), ("matches", matches.into())],
            );
            Ok(Output::new(text, json).with_violation(!matches))
        }
        FglCommand::Twist { law: args, tau, .. } => {
            let law = args.build_rational()?;
            let t = tau.build(&law)?;
            let twisted = law.twist(&t)?;
            let b = t.b_sequence()?;
            let b_text: Vec<String> = b.iter().map(|c| law.ring().format(c)).collect();
            let text = format!(
                "g(x) = {}\nb = ({})\nF_g(x, y) = {}\n",
                t.series(),
                b_text.join(", "),
                twisted.series()
            );
            let b_json = serde_json::to_value(elements_json(law.ring(), &b)).expect("json value");
            let json = named(
                args.law.name(),
                twisted.cap(),
                &[("g", series_value(t.series())), ("b", b_json), ("F", series_value(twisted.series()))],
            );
            Ok(Output::new(text, json))
        }
    }
}

fn classes_text(label: &str, e: &ChernVector) -> String {
    e.classes()
        .iter()
        .enumerate()
        .map(|(i, c)| format!("c{}({label}) = {c}\n", i + 1))
        .collect()
}

fn classes_json(e: &ChernVector) -> serde_json::Value {
    serde_json::to_value(e.to_json()).expect("json value")
}

fn chern(command: &ChernCommand) -> Result<Output> {
    match command {
        ChernCommand::HSeries {
            rank,
            index,
            minus,
            law: args,
            ..
        } => {
            check_max("--rank", *rank, MAX_RANK)?;
            let law = args.build()?;
            let calc = ChernCalculus::new(&law, law.cap())?;
            let h = if *minus {
                calc.h_minus_series(*rank, *index)?
            } else {
                calc.h_series(*rank, *index)?
            };
            let label = if *minus { "H_-" } else { "H" };
            let text = format!("{label}^{index} = {h}\n");
            let json = named(args.law.name(), h.cap(), &[("h", series_value(&h))]);
            Ok(Output::new(text, json))
        }
        ChernCommand::Twist {
            bundle,
            line,
            untwist,
            law: args,
            ..
        } => {
            let law = args.build()?;
            let calc = ChernCalculus::new(&law, law.cap())?;
            let (e, extras) = bundle.ambient_with(law.ring(), &[line.trim()])?;
            let result = if *untwist {
                calc.untwist(&e, &extras[0])?
            } else {
                calc.twist(&e, &extras[0])?
            };
            let label = if *untwist { "E (x) L^-1" } else { "E (x) L" };
            let text = format!("{}{}", classes_text("E", &e), classes_text(label, &result));
            Ok(Output::new(text, classes_json(&result)))
        }
        ChernCommand::Todd {
            bundle,
            tau,
            expansion_convention,
            ..
        } => {
            let q = GradedRing::rationals(0);
            let cap = bundle.nilpotency.max(2);
            let law = FormalGroupLaw::additive(&q, cap)?;
            let t = tau.build(&law)?;
            let (e, _) = bundle.ambient_with(&q, &[])?;
            let td = todd_inverse(&t, &e)?;
            let convention = if *expansion_convention {
                TwistConvention::Expansion
            } else {
                TwistConvention::Coordinate
            };
            let amb = e.ambient();
            let mut text = format!("Td^-1(E) = {td}\n");
            let mut twisted = Vec::new();
            for root in &bundle.roots {
                let c = twisted_first_chern(&t, &amb.var(root.trim())?, convention)?;
                text.push_str(&format!("c1_tau({}) = {c}\n", root.trim()));
                twisted.push(series_value(&c));
            }
            let json = serde_json::json!({
                "todd_inverse": series_value(&td),
                "twisted_first_chern": twisted,
                "convention": convention,
            });
            Ok(Output::new(text, json))
        }
        ChernCommand::Character { bundle, .. } => {
            let q = GradedRing::rationals(0);
            let (e, _) = bundle.ambient_with(&q, &[])?;
            let ch = chern_character(&e)?;
            Ok(Output::new(format!("ch(E) = {ch}\n"), ch.to_json()))
        }
    }
}

fn hrr(args: &HrrArgs) -> Result<Output> {
    let report = grr_check(args.n, args.d)?;
    let verdict = if report.agree { "agree" } else { "DISAGREE" };
    let text = format!(
        "chi(P^{}, O({})): K-side {}, CH-side {}, binomial {}: {verdict}\n",
        args.n, args.d, report.k_side, report.ch_side, report.binomial
    );
    let agree = report.agree;
    Ok(Output::new(text, &report).with_violation(!agree))
}

fn check_text(reports: &[CheckReport]) -> String {
    let mut text = String::new();
    for r in reports {
        let verdict = if r.passed { "pass" } else { "FAIL" };
        text.push_str(&format!(
            "{}: {verdict} ({} exhaustive cases, {} random trials, {} skipped)\n",
            r.check.name(),
            r.exhaustive_cases,
            r.random_trials,
            r.skipped
        ));
        if let Some(c) = &r.counterexample {
            let json = serde_json::to_string_pretty(c).expect("json renders");
            text.push_str(&format!("counterexample: {json}\n"));
        }
    }
    text
}

fn run_checks(checks: &[Check], args: &BudgetArgs) -> Result<Output> {
    let budget = args.budget()?;
    let engine = args.engine();
    let reports: Vec<CheckReport> = checks.iter().map(|&c| run_check(c, engine, &budget)).collect();
    let violation = reports.iter().any(|r| !r.passed);
    Ok(Output::new(check_text(&reports), &reports).with_violation(violation))
}

fn bivariant(command: &BivariantCommand) -> Result<Output> {
    match command {
        BivariantCommand::Check { axiom, budget } => {
            let checks: Vec<Check> = if axiom == "all" {
                Check::axioms().to_vec()
            } else {
                let check = Check::from_name(axiom).ok_or_else(|| {
                    let names: Vec<&str> = Check::ALL.iter().map(|c| c.name()).collect();
                    Error::OutOfRange(format!("unknown check `{axiom}`; expected all or one of {}", names.join(", ")))
                })?;
                vec![check]
            };
            run_checks(&checks, budget)
        }
        BivariantCommand::Transform { budget } => run_checks(Check::transform(), budget),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("cobord").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn universal_json_has_the_a11_term() {
        let (code, out, _) = call(&["fgl", "universal", "--degree", "3", "--json"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["cap"], 4);
        assert!(v["F"]["text"].as_str().unwrap().contains("a11*x*y"));
        let parsed: crate::fgl::FglJson = serde_json::from_value(v).unwrap();
        let law = FormalGroupLaw::universal(3).unwrap();
        assert_eq!(law.series().space().from_json(&parsed.law).unwrap(), *law.series());
    }

    #[test]
    fn hrr_text_and_json() {
        let (code, out, _) = call(&["hrr", "--n", "2", "--d", "2"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out, "chi(P^2, O(2)): K-side 6, CH-side 6, binomial 6: agree\n");
        let (code, out, _) = call(&["hrr", "--n", "1", "--d", "-3", "--json"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["k_side"], "-2");
        assert_eq!(v["agree"], true);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&["fgl", "nonsense"]).0, EXIT_USAGE);
        assert_eq!(call(&["hrr", "--n", "20", "--d", "1"]).0, EXIT_USAGE);
        assert_eq!(call(&["fgl", "universal", "--degree", "99"]).0, EXIT_USAGE);
        assert_eq!(call(&["fgl", "twist", "--law", "additive", "--tau", "2,1/x"]).0, EXIT_USAGE);
        assert_eq!(call(&["bivariant", "check", "--axiom", "a99"]).0, EXIT_USAGE);
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("bivariant"));
    }

    #[test]
    fn twist_by_the_todd_sequence() {
        let (code, out, _) = call(&["fgl", "twist", "--law", "additive", "--degree", "4", "--tau", "1,1/2,1/12,0,-1/720"]);
        assert_eq!(code, EXIT_OK, "{out}");
        assert!(out.contains("F_g(x, y) = x + y - x*y\n"), "{out}");
        let (_, default, _) = call(&["fgl", "twist", "--law", "additive", "--degree", "4"]);
        assert_eq!(out, default);
    }

    #[test]
    fn specializations_match() {
        for to in ["additive", "multiplicative"] {
            let (code, out, _) = call(&["fgl", "specialize", "--to", to, "--degree", "3"]);
            assert_eq!(code, EXIT_OK);
            assert!(out.ends_with("law: true\n"), "{out}");
        }
    }

    #[test]
    fn chern_commands_run() {
        let (code, out, _) = call(&["chern", "h-series", "--law", "additive", "--rank", "2", "--index", "2"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out, "H^2 = s1*x + s2 + x^2\n");
        let (code, out, _) = call(&["chern", "twist", "--law", "additive", "--roots", "u", "--line", "w"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("c1(E (x) L) = u + w\n"), "{out}");
        let (code, out, _) = call(&["chern", "character", "--roots", "u", "--nilpotency", "3"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out, "ch(E) = 1 + u + 1/2*u^2\n");
        let (code, out, _) = call(&["chern", "todd", "--roots", "c", "--nilpotency", "3"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with("Td^-1(E) = 1 + 1/2*c + 1/12*c^2\n"), "{out}");
        assert!(out.contains("c1_tau(c) = c - 1/2*c^2\n"), "{out}");
        let (_, out, _) = call(&["chern", "todd", "--roots", "c", "--nilpotency", "3", "--expansion-convention"]);
        assert!(out.contains("c1_tau(c) = c + 1/2*c^2\n"), "{out}");
    }

    #[test]
    fn mutant_engine_exits_one() {
        let args = [
            "bivariant", "check", "--axiom", "a12", "--engine", "skipped-pullback", "--exhaustive-size", "2",
            "--trials", "50", "--json",
        ];
        let (code, out, _) = call(&args);
        assert_eq!(code, EXIT_VIOLATION);
        let reports: Vec<CheckReport> = serde_json::from_str(&out).unwrap();
        assert!(reports[0].counterexample.is_some());
        assert_eq!(call(&args).1, out);
        let (code, _, _) = call(&["bivariant", "transform", "--exhaustive-size", "2", "--trials", "50"]);
        assert_eq!(code, EXIT_OK);
    }
}
