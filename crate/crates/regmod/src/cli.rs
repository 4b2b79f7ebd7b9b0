//! Command-line front end: parse a problem description, run checks with
//! certificates, decompose elements, sweep submodule lattices, and search
//! for simultaneous bases.
//!
//! Input is a single JSON object `{"p", "shape", "generators", "element"?}`.
//! Exit codes: 0 regular / decomposition found, 1 not regular / none found,
//! 2 usage or input error, 3 internal invariant violation (checker
//! disagreement).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::basis::{find_simultaneous_basis, verify_simultaneous_basis};
use crate::error::Error;
use crate::module::{Element, ModuleShape};
use crate::oracle;
use crate::regularity::{
    baer_decompose, baer_signature, check_b, check_fpp, check_k, Certificate, RegularityReport,
};
use crate::submodule::{Submodule, DEFAULT_ORDER_CAP};

#[derive(Parser)]
#[command(name = "regmod", version, about = "Regularity of submodules of finite p-primary modules")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run regularity checks on the submodule described by a problem file.
    Check {
        /// Problem file (JSON).
        input: PathBuf,
        /// Which condition to check.
        #[arg(long, value_enum, default_value_t = CheckChoice::All)]
        check: CheckChoice,
        /// Also run the brute-force oracle checkers and compare.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Profile, signature and decomposition of the problem file's element.
    Decompose {
        /// Problem file (JSON); must carry an "element".
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Enumerate every submodule of a module and cross-check all verdicts.
    Enumerate {
        /// The prime p.
        #[arg(long)]
        p: u64,
        /// Exponents of the cyclic summands, non-increasing, e.g. 3,1.
        #[arg(long, value_delimiter = ',')]
        shape: Vec<u32>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Search for a simultaneous basis of the module and the submodule.
    Simbasis {
        /// Problem file (JSON).
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Write a machine-readable report to this path.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Enumeration cap on the module order.
    #[arg(long, default_value_t = DEFAULT_ORDER_CAP)]
    max_order: u64,
    /// Suppress the human-readable table.
    #[arg(long)]
    quiet: bool,
    /// Record wall-clock timings in the report.
    #[arg(long)]
    timings: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CheckChoice {
    K,
    B,
    Fpp,
    All,
}

/// A parsed problem description. Coordinates are arbitrary integers and are
/// reduced modulo the summand p-powers on load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub p: u64,
    pub shape: Vec<u32>,
    pub generators: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<Vec<i64>>,
}

/// The normalized input as echoed into every report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputEcho {
    pub p: u64,
    pub shape: Vec<u32>,
    pub generators: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    pub witness: Vec<u64>,
}

impl CertificateJson {
    fn from_certificate(cert: &Certificate) -> CertificateJson {
        match cert {
            Certificate::K { n, r, witness } => CertificateJson {
                kind: "K".into(),
                n: Some(*n),
                r: Some(*r),
                s: None,
                k: None,
                witness: witness.coords().to_vec(),
            },
            Certificate::Fpp { s, k, witness } => CertificateJson {
                kind: "FPP".into(),
                n: None,
                r: None,
                s: Some(*s),
                k: Some(*k),
                witness: witness.coords().to_vec(),
            },
            Certificate::B { witness } => CertificateJson {
                kind: "B".into(),
                n: None,
                r: None,
                s: None,
                k: None,
                witness: witness.coords().to_vec(),
            },
        }
    }

    fn describe(&self) -> String {
        match self.kind.as_str() {
            "K" => format!(
                "(n, r) = ({}, {}), witness {}",
                self.n.unwrap_or_default(),
                self.r.unwrap_or_default(),
                fmt_coords(&self.witness)
            ),
            "FPP" => format!(
                "(s, k) = ({}, {}), witness {}",
                self.s.unwrap_or_default(),
                self.k.unwrap_or_default(),
                fmt_coords(&self.witness)
            ),
            _ => format!("witness {}", fmt_coords(&self.witness)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileJson {
    pub s: u32,
    pub k: u32,
    pub s1: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartJson {
    pub element: Vec<u64>,
    pub exponent: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsJson {
    pub total: u64,
    pub regular: u64,
    pub non_regular: u64,
    pub disagreements: u64,
}

/// Machine-readable result of one command invocation. Serialized reports
/// re-parse to an equal value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub command: String,
    pub input: InputEcho,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdicts: Option<BTreeMap<String, bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificates: Option<BTreeMap<String, CertificateJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<Vec<(u32, u32)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposable: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Vec<PartJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<CountsJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smallest_non_regular: Option<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depths: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verified: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, u64>>,
}

impl RunReport {
    fn new(command: &str, input: InputEcho) -> RunReport {
        RunReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            input,
            verdicts: None,
            certificates: None,
            profile: None,
            signature: None,
            decomposable: None,
            decomposition: None,
            counts: None,
            smallest_non_regular: None,
            basis: None,
            depths: None,
            verified: None,
            timings_ms: None,
        }
    }
}

/// Parses arguments from the process environment and runs the command.
/// Returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            2
        }
    }
}

struct Outcome {
    report: RunReport,
    human: String,
    exit: i32,
}

fn dispatch(cli: Cli) -> Result<i32, String> {
    let (outcome, common) = match cli.command {
        Command::Check {
            input,
            check,
            oracle,
            common,
        } => (cmd_check(&input, check, oracle, &common)?, common),
        Command::Decompose { input, common } => (cmd_decompose(&input, &common)?, common),
        Command::Enumerate { p, shape, common } => (cmd_enumerate(p, &shape, &common)?, common),
        Command::Simbasis { input, common } => (cmd_simbasis(&input, &common)?, common),
    };
    if !common.quiet {
        print!("{}", outcome.human);
    }
    if let Some(path) = &common.json {
        let text = serde_json::to_string_pretty(&outcome.report)
            .map_err(|e| format!("serializing report: {e}"))?;
        std::fs::write(path, text + "\n")
            .map_err(|e| format!("writing {}: {e}", path.display()))?;
    }
    Ok(outcome.exit)
}

struct Problem {
    shape: ModuleShape,
    submodule: Submodule,
    element: Option<Element>,
    echo: InputEcho,
}

fn load_problem(path: &PathBuf, max_order: u64) -> Result<Problem, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("reading {}: {e}", path.display()))?;
    let file: ProblemFile =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let shape = build_shape(file.p, &file.shape, max_order)?;
    let mut generators = Vec::with_capacity(file.generators.len());
    for (index, coords) in file.generators.iter().enumerate() {
        let g = shape
            .element(coords)
            .map_err(|e| format!("generators[{index}]: {e}"))?;
        generators.push(g);
    }
    let element = match &file.element {
        Some(coords) => Some(shape.element(coords).map_err(|e| format!("element: {e}"))?),
        None => None,
    };
    let submodule = Submodule::span(&shape, &generators);
    let echo = InputEcho {
        p: file.p,
        shape: shape.exponents().to_vec(),
        generators: generators.iter().map(|g| g.coords().to_vec()).collect(),
        element: element.as_ref().map(|x| x.coords().to_vec()),
    };
    Ok(Problem {
        shape,
        submodule,
        element,
        echo,
    })
}

fn build_shape(p: u64, exponents: &[u32], max_order: u64) -> Result<ModuleShape, String> {
    if exponents.windows(2).any(|w| w[0] < w[1]) {
        return Err("shape must be non-increasing (largest exponent first)".into());
    }
    let shape = ModuleShape::new(p, exponents).map_err(|e| format!("shape: {e}"))?;
    if shape.order() > max_order {
        return Err(Error::CapExceeded {
            required: shape.order(),
            cap: max_order,
        }
        .to_string());
    }
    Ok(shape)
}

fn header(shape: &ModuleShape, w: &Submodule) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "module: {} (p={}, shape {:?}, order {})",
        shape,
        shape.prime(),
        shape.exponents(),
        shape.order()
    );
    let gens: Vec<String> = w
        .canonical_generators()
        .iter()
        .map(|g| g.to_string())
        .collect();
    let _ = writeln!(
        out,
        "submodule: order {}, canonical generators [{}]",
        w.order(),
        gens.join(", ")
    );
    out
}

fn fmt_coords(coords: &[u64]) -> String {
    let inner: Vec<String> = coords.iter().map(|c| c.to_string()).collect();
    format!("({})", inner.join(", "))
}

fn record_report(
    label: &str,
    report: &RegularityReport,
    verdicts: &mut BTreeMap<String, bool>,
    certificates: &mut BTreeMap<String, CertificateJson>,
) {
    verdicts.insert(label.to_string(), report.verdict);
    if let Some(cert) = &report.certificate {
        certificates.insert(label.to_string(), CertificateJson::from_certificate(cert));
    }
}

fn cmd_check(
    input: &PathBuf,
    choice: CheckChoice,
    with_oracle: bool,
    common: &CommonArgs,
) -> Result<Outcome, String> {
    let problem = load_problem(input, common.max_order)?;
    let w = &problem.submodule;
    let cap = common.max_order;
    let run_fast = |which: CheckChoice| -> Result<RegularityReport, String> {
        match which {
            CheckChoice::K => Ok(check_k(w)),
            CheckChoice::B => check_b(w, cap).map_err(|e| e.to_string()),
            CheckChoice::Fpp => Ok(check_fpp(w)),
            CheckChoice::All => unreachable!(),
        }
    };
    let run_oracle = |which: CheckChoice| -> Result<RegularityReport, String> {
        match which {
            CheckChoice::K => oracle::oracle_check_k(w, cap).map_err(|e| e.to_string()),
            CheckChoice::B => oracle::oracle_check_b(w, cap).map_err(|e| e.to_string()),
            CheckChoice::Fpp => oracle::oracle_check_fpp(w, cap).map_err(|e| e.to_string()),
            CheckChoice::All => unreachable!(),
        }
    };
    let selected: Vec<(&str, CheckChoice)> = match choice {
        CheckChoice::All => vec![
            ("K", CheckChoice::K),
            ("B", CheckChoice::B),
            ("FPP", CheckChoice::Fpp),
        ],
        CheckChoice::K => vec![("K", CheckChoice::K)],
        CheckChoice::B => vec![("B", CheckChoice::B)],
        CheckChoice::Fpp => vec![("FPP", CheckChoice::Fpp)],
    };

    let mut verdicts = BTreeMap::new();
    let mut certificates = BTreeMap::new();
    let mut timings = BTreeMap::new();
    let mut disagreement = false;
    let mut human = header(&problem.shape, w);
    for (label, which) in &selected {
        let start = Instant::now();
        let fast = run_fast(*which)?;
        timings.insert(label.to_string(), start.elapsed().as_millis() as u64);
        record_report(label, &fast, &mut verdicts, &mut certificates);
        let _ = writeln!(human, "{}", render_check_line(label, &fast));
        if with_oracle {
            let oracle_label = format!("{label}-oracle");
            let start = Instant::now();
            let slow = run_oracle(*which)?;
            timings.insert(oracle_label.clone(), start.elapsed().as_millis() as u64);
            record_report(&oracle_label, &slow, &mut verdicts, &mut certificates);
            let _ = writeln!(human, "{}", render_check_line(&oracle_label, &slow));
            if slow.verdict != fast.verdict {
                disagreement = true;
                let _ = writeln!(
                    human,
                    "CHECKER DISAGREEMENT: {label} fast={} oracle={}",
                    fast.verdict, slow.verdict
                );
            }
        }
    }
    let all_regular = verdicts.values().all(|&v| v);
    let _ = writeln!(
        human,
        "overall: {}",
        if all_regular { "REGULAR" } else { "NOT REGULAR" }
    );

    let mut report = RunReport::new("check", problem.echo);
    report.verdicts = Some(verdicts);
    report.certificates = (!certificates.is_empty()).then_some(certificates);
    report.timings_ms = common.timings.then_some(timings);
    let exit = if disagreement {
        3
    } else if all_regular {
        0
    } else {
        1
    };
    Ok(Outcome {
        report,
        human,
        exit,
    })
}

fn render_check_line(label: &str, report: &RegularityReport) -> String {
    let verdict = if report.verdict { "REGULAR" } else { "NOT REGULAR" };
    match &report.certificate {
        Some(cert) => format!(
            "{label:<12} {verdict:<12} {}",
            CertificateJson::from_certificate(cert).describe()
        ),
        None => format!("{label:<12} {verdict}"),
    }
}

fn cmd_decompose(input: &PathBuf, common: &CommonArgs) -> Result<Outcome, String> {
    let problem = load_problem(input, common.max_order)?;
    let w = &problem.submodule;
    let x = problem
        .element
        .as_ref()
        .ok_or_else(|| "decompose needs an \"element\" field in the problem file".to_string())?;
    if x.is_zero() {
        return Err("element must be nonzero".into());
    }
    if !w.contains(x) {
        return Err("element lies outside the span of the generators".into());
    }
    let profile = x.profile().map_err(|e| e.to_string())?;
    let signature = baer_signature(x).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let decomposition = baer_decompose(w, x).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_millis() as u64;

    let mut human = header(&problem.shape, w);
    let _ = writeln!(
        human,
        "element {}: profile (s, k; s1) = ({}, {}; {})",
        x, profile.s, profile.k, profile.s1
    );
    let sig: Vec<String> = signature
        .pairs
        .iter()
        .map(|(k, s)| format!("(k={k}, s={s})"))
        .collect();
    let _ = writeln!(human, "signature: [{}]", sig.join(", "));
    match &decomposition {
        Some(d) => {
            let _ = writeln!(human, "decomposition in W:");
            for part in d.parts() {
                let _ = writeln!(
                    human,
                    "  {}  exponent {}  height {}",
                    part.element, part.exponent, part.height
                );
            }
        }
        None => {
            let _ = writeln!(human, "no decomposition exists in W");
        }
    }

    let mut report = RunReport::new("decompose", problem.echo);
    report.profile = Some(ProfileJson {
        s: profile.s,
        k: profile.k,
        s1: profile.s1,
    });
    report.signature = Some(signature.pairs.clone());
    report.decomposable = Some(decomposition.is_some());
    report.decomposition = decomposition.as_ref().map(|d| {
        d.parts()
            .iter()
            .map(|p| PartJson {
                element: p.element.coords().to_vec(),
                exponent: p.exponent,
                height: p.height,
            })
            .collect()
    });
    report.timings_ms = common
        .timings
        .then(|| BTreeMap::from([("decompose".to_string(), elapsed)]));
    let exit = if decomposition.is_some() { 0 } else { 1 };
    Ok(Outcome {
        report,
        human,
        exit,
    })
}

fn cmd_enumerate(p: u64, shape: &[u32], common: &CommonArgs) -> Result<Outcome, String> {
    let shape = build_shape(p, shape, common.max_order)?;
    let start = Instant::now();
    let submodules =
        Submodule::enumerate_all(&shape, common.max_order).map_err(|e| e.to_string())?;
    let mut regular = 0u64;
    let mut disagreements = 0u64;
    let mut smallest_non_regular: Option<&Submodule> = None;
    for w in &submodules {
        let k = check_k(w);
        let b = check_b(w, common.max_order).map_err(|e| e.to_string())?;
        let f = check_fpp(w);
        if k.verdict != b.verdict || k.verdict != f.verdict {
            disagreements += 1;
            continue;
        }
        if k.verdict {
            regular += 1;
        } else if smallest_non_regular.is_none() {
            smallest_non_regular = Some(w);
        }
    }
    let elapsed = start.elapsed().as_millis() as u64;
    let total = submodules.len() as u64;
    let counts = CountsJson {
        total,
        regular,
        non_regular: total - regular - disagreements,
        disagreements,
    };

    let mut human = String::new();
    let _ = writeln!(
        human,
        "module: {} (p={}, shape {:?}, order {})",
        shape,
        shape.prime(),
        shape.exponents(),
        shape.order()
    );
    let _ = writeln!(
        human,
        "submodules: {} total, {} regular, {} non-regular",
        counts.total, counts.regular, counts.non_regular
    );
    let _ = writeln!(
        human,
        "checker agreement: {}/{}",
        total - disagreements,
        total
    );
    if disagreements > 0 {
        let _ = writeln!(human, "CHECKER DISAGREEMENT on {disagreements} submodules");
    }
    if let Some(w) = smallest_non_regular {
        let gens: Vec<String> = w
            .canonical_generators()
            .iter()
            .map(|g| g.to_string())
            .collect();
        let _ = writeln!(
            human,
            "smallest non-regular: order {}, generators [{}]",
            w.order(),
            gens.join(", ")
        );
    }

    let echo = InputEcho {
        p,
        shape: shape.exponents().to_vec(),
        generators: Vec::new(),
        element: None,
    };
    let mut report = RunReport::new("enumerate", echo);
    report.counts = Some(counts);
    report.smallest_non_regular = smallest_non_regular.map(|w| {
        w.canonical_generators()
            .iter()
            .map(|g| g.coords().to_vec())
            .collect()
    });
    report.timings_ms = common
        .timings
        .then(|| BTreeMap::from([("enumerate".to_string(), elapsed)]));
    let exit = if disagreements > 0 { 3 } else { 0 };
    Ok(Outcome {
        report,
        human,
        exit,
    })
}

fn cmd_simbasis(input: &PathBuf, common: &CommonArgs) -> Result<Outcome, String> {
    let problem = load_problem(input, common.max_order)?;
    let w = &problem.submodule;
    let start = Instant::now();
    let found = match find_simultaneous_basis(w, common.max_order) {
        Ok(found) => found,
        Err(Error::SearchBudget) => {
            let mut human = header(&problem.shape, w);
            let _ = writeln!(human, "INTERNAL: basis search exhausted on a regular submodule");
            let report = RunReport::new("simbasis", problem.echo);
            return Ok(Outcome {
                report,
                human,
                exit: 3,
            });
        }
        Err(e) => return Err(e.to_string()),
    };
    let elapsed = start.elapsed().as_millis() as u64;

    let mut human = header(&problem.shape, w);
    let mut report = RunReport::new("simbasis", problem.echo);
    report.timings_ms = common
        .timings
        .then(|| BTreeMap::from([("simbasis".to_string(), elapsed)]));
    let exit;
    match found {
        Some(basis) => {
            let ok = verify_simultaneous_basis(w, &basis);
            let _ = writeln!(human, "simultaneous basis:");
            for (i, (x, d)) in basis.basis.iter().zip(&basis.depths).enumerate() {
                let _ = writeln!(human, "  x{} = {}  depth {}", i + 1, x, d);
            }
            let _ = writeln!(human, "verifier: {}", if ok { "ok" } else { "FAILED" });
            report.basis = Some(basis.basis.iter().map(|x| x.coords().to_vec()).collect());
            report.depths = Some(basis.depths.clone());
            report.verified = Some(ok);
            exit = if ok { 0 } else { 3 };
        }
        None => {
            let _ = writeln!(
                human,
                "no simultaneous basis exists (the submodule is not regular)"
            );
            let k = check_k(w);
            let mut certificates = BTreeMap::new();
            if let Some(cert) = &k.certificate {
                let json = CertificateJson::from_certificate(cert);
                let _ = writeln!(human, "K-certificate: {}", json.describe());
                certificates.insert("K".to_string(), json);
            }
            report.verdicts = Some(BTreeMap::from([("K".to_string(), k.verdict)]));
            report.certificates = (!certificates.is_empty()).then_some(certificates);
            exit = 1;
        }
    }
    Ok(Outcome {
        report,
        human,
        exit,
    })
}
