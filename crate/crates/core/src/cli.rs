//! Command-line front end. `run` parses arguments, executes one subcommand and returns
//! the exit code with the rendered report; `main` only forwards to it.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::gluing::{glue, glue_report, GluingSpec, GluingSpecFile};
use crate::moduli::{ghost_zero_slice, GhostDims, Moduli};
use crate::simplicial::OrientedComplex;
use crate::symbolic::{builtin_by_name, TargetSpec};
use crate::theories::{build_from_config, verify_cme, LinearTheory, TheoryConfig, TheoryError};

pub const TOOL: &str = "bvbfv";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_PASS: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VERDICT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "bvbfv", version, about = "Exact BV-BFV checks for linear gauge theories on simplicial complexes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Record wall-clock time in the report. Off by default so reports stay byte-identical.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Operations on a complex file.
    Complex {
        #[command(subcommand)]
        action: ComplexAction,
    },
    /// Full moduli report of a theory on a complex.
    Moduli(TheoryRun),
    /// Modified classical master equation and its companion identities.
    Cme(TheoryRun),
    /// Glue two complexes and compare the intrinsic and direct moduli.
    Glue {
        /// Gluing spec file.
        spec: String,
        #[command(flatten)]
        theory: TheoryArgs,
    },
    /// Operations on a symplectic target.
    Target {
        #[command(subcommand)]
        action: TargetAction,
    },
    /// Ghost-number-zero slice of the moduli.
    #[command(name = "slice-gh0")]
    SliceGh0(TheoryRun),
}

#[derive(Subcommand, Debug)]
pub enum ComplexAction {
    /// Load, validate orientation, report counts, Betti numbers and Stokes.
    Check { file: String },
}

#[derive(Subcommand, Debug)]
pub enum TargetAction {
    /// Master equation, Q² = 0 and primitive reconstruction. Accepts a file or a builtin name.
    Check { file: String },
    /// Print a builtin target as a target file.
    Export { name: String },
}

#[derive(clap::Args, Debug)]
pub struct TheoryRun {
    /// Complex file.
    pub complex: String,
    #[command(flatten)]
    pub theory: TheoryArgs,
}

#[derive(clap::Args, Debug)]
pub struct TheoryArgs {
    /// Theory config file, or a kind name (cs, bf, scalar, ed).
    #[arg(long)]
    pub theory: String,
    /// Mass as an exact rational p/q; overrides the config.
    #[arg(long, allow_hyphen_values = true)]
    pub mass: Option<String>,
    /// Codimension of the stratum carrying the fields; overrides the config.
    #[arg(long)]
    pub codim: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

/// Everything one invocation produced. Dimension tables map a label to dims per ghost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub verdicts: BTreeMap<String, bool>,
    pub dims: BTreeMap<String, GhostDims>,
    pub report: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl RunReport {
    pub fn new(command: Vec<String>) -> Self {
        RunReport {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            command,
            inputs: Vec::new(),
            verdicts: BTreeMap::new(),
            dims: BTreeMap::new(),
            report: serde_json::Value::Null,
            timing_ms: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|v| *v)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_PASS
        } else {
            EXIT_VERDICT
        }
    }
}

/// An input problem, with the name of the underlying error variant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputError {
    pub kind: String,
    pub message: String,
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "error[{}]: {}", self.kind, self.message)
    }
}

impl InputError {
    fn new(kind: &str, message: impl Into<String>) -> Self {
        InputError { kind: kind.to_string(), message: message.into() }
    }

    fn from_err<E: Debug + std::fmt::Display>(e: E) -> Self {
        InputError { kind: variant_name(&e), message: e.to_string() }
    }
}

/// Innermost variant name in a Debug rendering such as `Theory(Complex(Singular(..)))`.
fn variant_name<E: Debug>(e: &E) -> String {
    let text = format!("{e:?}");
    let mut s = text.as_str();
    loop {
        let ident: String = s.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
        let rest = &s[ident.len()..];
        match rest.strip_prefix('(') {
            Some(inner) if inner.starts_with(|c: char| c.is_ascii_uppercase()) => s = inner,
            _ => return ident,
        }
    }
}

pub fn emit_report(r: &RunReport, format: Format) -> String {
    match format {
        Format::Structured => {
            let mut s = serde_json::to_string_pretty(r).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => render_text(r),
    }
}

pub fn parse_report(text: &str) -> Result<RunReport, serde_json::Error> {
    serde_json::from_str(text)
}

fn render_text(r: &RunReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "{} {}: {}", r.tool, r.version, r.command.join(" "));
    for i in &r.inputs {
        let _ = writeln!(out, "  {} {} sha256:{}", i.role, i.path, i.sha256);
    }
    if !r.dims.is_empty() {
        let mut ghosts: Vec<i32> = r.dims.values().flat_map(|d| d.0.keys().copied()).collect();
        ghosts.sort_unstable_by(|a, b| b.cmp(a));
        ghosts.dedup();
        let width = r.dims.keys().map(|k| k.len()).max().unwrap_or(0).max(5);
        let _ = write!(out, "\n{:width$}", "ghost");
        for g in &ghosts {
            let _ = write!(out, " {g:>4}");
        }
        out.push('\n');
        for (name, d) in &r.dims {
            let _ = write!(out, "{name:width$}");
            for g in &ghosts {
                match d.0.get(g) {
                    Some(v) => {
                        let _ = write!(out, " {v:>4}");
                    }
                    None => out.push_str("    ."),
                }
            }
            out.push('\n');
        }
    }
    out.push('\n');
    if r.verdicts.is_empty() {
        out.push_str("no checks\n");
    }
    for (name, ok) in &r.verdicts {
        let _ = writeln!(out, "{} {}", if *ok { "pass" } else { "FAIL" }, name);
    }
    let _ = writeln!(
        out,
        "{} of {} checks pass",
        r.verdicts.values().filter(|v| **v).count(),
        r.verdicts.len()
    );
    if let Some(t) = r.timing_ms {
        let _ = writeln!(out, "time {t} ms");
    }
    out
}

/// Root of the bundled corpus: `BVBFV_CORPUS` if set, else the in-repo directory.
pub fn corpus_root() -> PathBuf {
    match std::env::var_os("BVBFV_CORPUS") {
        Some(p) => PathBuf::from(p),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus"),
    }
}

/// Finds an input: the path as given, then with `.json`, then relative to the corpus
/// root, then by file stem in the corpus subdirectory `category`.
fn locate(given: &str, category: &str) -> Option<PathBuf> {
    let p = Path::new(given);
    if p.is_file() {
        return Some(p.to_path_buf());
    }
    let with_ext = PathBuf::from(format!("{given}.json"));
    if with_ext.is_file() {
        return Some(with_ext);
    }
    if p.is_relative() {
        let under_root = corpus_root().join(p);
        if under_root.is_file() {
            return Some(under_root);
        }
    }
    let stem = p.file_stem()?.to_str()?;
    let in_corpus = corpus_root().join(category).join(format!("{stem}.json"));
    in_corpus.is_file().then_some(in_corpus)
}

fn read_input(given: &str, category: &str, role: &str, report: &mut RunReport) -> Result<(PathBuf, String), InputError> {
    let path = locate(given, category).ok_or_else(|| {
        InputError::new("NotFound", format!("no {role} file {given:?} (also looked in {})", corpus_root().join(category).display()))
    })?;
    let bytes = std::fs::read(&path).map_err(|e| InputError::new("Io", format!("cannot read {}: {e}", path.display())))?;
    report.inputs.push(InputDigest { role: role.to_string(), path: given.to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
    let text = String::from_utf8(bytes).map_err(|_| InputError::new("Parse", format!("{} is not UTF-8", path.display())))?;
    Ok((path, text))
}

fn load_complex(given: &str, report: &mut RunReport) -> Result<OrientedComplex, InputError> {
    let (_, text) = read_input(given, "complexes", "complex", report)?;
    OrientedComplex::from_json(&text).map_err(InputError::from_err)
}

fn theory_config(args: &TheoryArgs, report: &mut RunReport) -> Result<TheoryConfig, InputError> {
    let mut cfg = match locate(&args.theory, "theories") {
        Some(_) => {
            let (_, text) = read_input(&args.theory, "theories", "theory", report)?;
            TheoryConfig::from_json(&text).map_err(InputError::from_err)?
        }
        None => TheoryConfig::named(&args.theory),
    };
    if let Some(m) = &args.mass {
        cfg.mass = Some(m.clone());
    }
    if let Some(k) = args.codim {
        cfg.codim = Some(k);
    }
    Ok(cfg)
}

fn build(c: &OrientedComplex, cfg: &TheoryConfig) -> Result<LinearTheory, InputError> {
    build_from_config(c, cfg).map_err(InputError::from_err)
}

fn to_value<T: Serialize>(t: &T) -> serde_json::Value {
    serde_json::to_value(t).expect("reports serialize")
}

fn dims_of(m: &BTreeMap<i32, usize>) -> GhostDims {
    GhostDims(m.clone())
}

fn complex_check(file: &str, r: &mut RunReport) -> Result<(), InputError> {
    let c = load_complex(file, r)?;
    let cc = c.cochains();
    let d_squared_zero = (0..c.dimension().saturating_sub(1)).all(|k| {
        let d = c.coboundary_matrix(k + 1).mul(&c.coboundary_matrix(k));
        d.is_zero()
    });
    let betti = cc.betti();
    let boundary_betti = c.boundary().map(|b| b.cochains().betti());
    let euler: i64 = c.counts().iter().enumerate().map(|(k, n)| if k % 2 == 0 { *n as i64 } else { -(*n as i64) }).sum();
    r.verdicts.insert("orientation_coherent".into(), true);
    r.verdicts.insert("d_squared_zero".into(), d_squared_zero);
    r.verdicts.insert("stokes".into(), c.stokes_holds());
    r.report = serde_json::json!({
        "dimension": c.dimension(),
        "counts": c.counts(),
        "closed": c.is_closed(),
        "betti": betti,
        "boundary_counts": c.boundary().map(|b| b.counts()),
        "boundary_betti": boundary_betti,
        "euler_characteristic": euler,
    });
    Ok(())
}

fn moduli_run(run: &TheoryRun, r: &mut RunReport) -> Result<(), InputError> {
    let c = load_complex(&run.complex, r)?;
    let cfg = theory_config(&run.theory, r)?;
    let t = build(&c, &cfg)?;
    let m = Moduli::new(&t).map_err(InputError::from_err)?;
    let rep = m.report();
    r.dims.insert("fields".into(), dims_of(&rep.field_dims));
    r.dims.insert("boundary_fields".into(), dims_of(&rep.boundary_field_dims));
    r.dims.insert("el".into(), rep.el.clone());
    r.dims.insert("el_boundary".into(), rep.el_boundary.clone());
    r.dims.insert("moduli".into(), rep.moduli.clone());
    r.dims.insert("moduli_symp".into(), rep.moduli_symp.clone());
    r.dims.insert("moduli_vertical".into(), rep.moduli_vertical.clone());
    r.dims.insert("boundary_moduli".into(), rep.boundary_moduli.clone());
    r.dims.insert("evolution".into(), rep.evolution_relation.dims.clone());
    r.dims.insert("evolution_reduced".into(), rep.evolution_relation.reduced_dims.clone());
    r.dims.insert("vacua".into(), rep.vacua.dims.clone());
    let v = &rep.verdicts;
    for (name, ok) in [
        ("structure", v.structure),
        ("les_exact", v.les_exact),
        ("lagrangian", v.lagrangian),
        ("lefschetz", v.lefschetz),
        ("vacua_symplectic", v.vacua_symplectic),
        ("beta", v.beta),
        ("regular", v.regular),
        ("transversal_reduction", v.transversal_reduction),
        ("symplectic_equals_q_reduction", v.symplectic_equals_q_reduction),
    ] {
        r.verdicts.insert(name.into(), ok);
    }
    r.report = to_value(&rep);
    Ok(())
}

fn cme_run(run: &TheoryRun, r: &mut RunReport) -> Result<(), InputError> {
    let c = load_complex(&run.complex, r)?;
    let cfg = theory_config(&run.theory, r)?;
    let t = build(&c, &cfg)?;
    let rep = verify_cme(&t).map_err(InputError::from_err)?;
    for i in &rep.identities {
        r.verdicts.insert(i.name.clone(), i.holds);
    }
    r.dims.insert("fields".into(), dims_of(&t.field_dims()));
    r.dims.insert("boundary_fields".into(), dims_of(&t.boundary_field_dims()));
    r.report = to_value(&rep);
    Ok(())
}

fn slice_run(run: &TheoryRun, r: &mut RunReport) -> Result<(), InputError> {
    let c = load_complex(&run.complex, r)?;
    let cfg = theory_config(&run.theory, r)?;
    let t = build(&c, &cfg)?;
    let m = Moduli::new(&t).map_err(InputError::from_err)?;
    let s = ghost_zero_slice(&m);
    r.verdicts.insert("boundary_el_coisotropic".into(), s.boundary_el_coisotropic_reduced);
    r.report = to_value(&s);
    Ok(())
}

fn glue_run(spec: &str, args: &TheoryArgs, r: &mut RunReport) -> Result<(), InputError> {
    let (path, text) = read_input(spec, "gluing", "gluing spec", r)?;
    let file: GluingSpecFile = serde_json::from_str(&text).map_err(|e| InputError::new("Parse", e.to_string()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    for (role, p) in [("left", &file.left), ("right", &file.right)] {
        let full = if Path::new(p).is_absolute() { PathBuf::from(p) } else { base.join(p) };
        if let Ok(bytes) = std::fs::read(&full) {
            r.inputs.push(InputDigest { role: role.into(), path: p.clone(), sha256: hex::encode(Sha256::digest(&bytes)) });
        }
    }
    let gs = GluingSpec::from_json(&text, &base).map_err(InputError::from_err)?;
    let cfg = theory_config(args, r)?;
    let g = glue(&gs).map_err(InputError::from_err)?;
    let builder = |c: &OrientedComplex| -> Result<LinearTheory, TheoryError> { build_from_config(c, &cfg) };
    let rep = glue_report(&g, &builder).map_err(InputError::from_err)?;
    r.verdicts.insert("fiber_product".into(), rep.verdicts.fiber_product);
    r.verdicts.insert("intrinsic_matches_direct".into(), rep.verdicts.intrinsic_matches_direct);
    r.verdicts.insert("isomorphism".into(), rep.glue_moduli.isomorphism);
    r.verdicts.insert("mayer_vietoris_exact".into(), rep.verdicts.mayer_vietoris_exact);
    r.dims.insert("glued_el".into(), rep.fiber_product.el_dims.clone());
    r.dims.insert("glued_moduli".into(), rep.glue_moduli.direct.clone());
    r.dims.insert("intrinsic_moduli".into(), rep.glue_moduli.intrinsic.clone());
    r.dims.insert("fiber_product_moduli".into(), rep.glue_moduli.fiber_product.clone());
    r.report = to_value(&rep);
    Ok(())
}

fn target_check(file: &str, r: &mut RunReport) -> Result<(), InputError> {
    let spec = match locate(file, "targets") {
        Some(_) => {
            let (_, text) = read_input(file, "targets", "target", r)?;
            TargetSpec::from_json(&text).map_err(InputError::from_err)?
        }
        None => {
            let name = Path::new(file).file_stem().and_then(|s| s.to_str()).unwrap_or(file);
            let spec = builtin_by_name(name).map_err(|e| match e {
                crate::symbolic::SymbolicError::UnknownTarget(_) => {
                    InputError::new("NotFound", format!("{file:?} is neither a target file nor a builtin target"))
                }
                other => InputError::from_err(other),
            })?;
            let canon = serde_json::to_vec(&spec.to_file()).expect("targets serialize");
            r.inputs.push(InputDigest { role: "target".into(), path: format!("builtin:{name}"), sha256: hex::encode(Sha256::digest(&canon)) });
            spec
        }
    };
    let residual = spec.master_residual();
    let master = residual.is_zero();
    let q2 = spec.q_squares_to_zero();
    let roy = spec.euler_and_roytenberg().map_err(InputError::from_err)?;
    r.verdicts.insert("master_equation".into(), master);
    r.verdicts.insert("q_squared_zero".into(), q2);
    r.verdicts.insert("primitive".into(), roy.primitive_ok);
    r.verdicts.insert("hamiltonian".into(), roy.hamiltonian_ok);
    if let Some(ok) = roy.reconstruction_ok {
        r.verdicts.insert("reconstruction".into(), ok);
    }
    r.report = serde_json::json!({
        "vars": spec.alg.len(),
        "omega_degree": spec.m,
        "theta": spec.alg.format(&spec.theta),
        "residual": spec.alg.format(&residual),
        "theta_primitive": roy.theta_primitive,
        "reconstructed": roy.reconstructed.as_ref().map(|s| spec.alg.format(s)),
    });
    Ok(())
}

fn export_target(name: &str) -> Result<String, InputError> {
    let spec = builtin_by_name(name).map_err(InputError::from_err)?;
    let mut s = serde_json::to_string_pretty(&spec.to_file()).expect("targets serialize");
    s.push('\n');
    Ok(s)
}

fn execute(cli: &Cli, r: &mut RunReport) -> Result<(), InputError> {
    match &cli.command {
        Command::Target { action: TargetAction::Export { .. } } => unreachable!("handled before execute"),
        Command::Complex { action: ComplexAction::Check { file } } => complex_check(file, r),
        Command::Moduli(run) => moduli_run(run, r),
        Command::Cme(run) => cme_run(run, r),
        Command::Glue { spec, theory } => glue_run(spec, theory, r),
        Command::Target { action: TargetAction::Check { file } } => target_check(file, r),
        Command::SliceGh0(run) => slice_run(run, r),
    }
}

/// Outcome of one invocation: exit code, what goes to stdout and what goes to stderr.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    pub report: Option<RunReport>,
}

/// Runs one command line (including the program name).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Outcome { code: EXIT_PASS, stdout: text, stderr: String::new(), report: None }
                }
                _ => Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: text, report: None },
            };
        }
    };
    if let Command::Target { action: TargetAction::Export { name } } = &cli.command {
        return match export_target(name) {
            Ok(text) => match &cli.out {
                Some(path) => match std::fs::write(path, &text) {
                    Ok(()) => Outcome { code: EXIT_PASS, stdout: String::new(), stderr: String::new(), report: None },
                    Err(e) => Outcome {
                        code: EXIT_INPUT,
                        stdout: String::new(),
                        stderr: format!("error[Io]: cannot write {}: {e}\n", path.display()),
                        report: None,
                    },
                },
                None => Outcome { code: EXIT_PASS, stdout: text, stderr: String::new(), report: None },
            },
            Err(e) => Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: format!("{e}\n"), report: None },
        };
    }
    let command: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let mut report = RunReport::new(command);
    let start = std::time::Instant::now();
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| execute(&cli, &mut report)));
    let result = match result {
        Ok(r) => r,
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown failure".into());
            Err(InputError::new("Internal", format!("computation aborted: {msg}")))
        }
    };
    if let Err(e) = result {
        return Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: format!("{e}\n"), report: None };
    }
    if cli.timing {
        report.timing_ms = Some(start.elapsed().as_millis() as u64);
    }
    let text = emit_report(&report, cli.format);
    let code = report.exit_code();
    match &cli.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr: String::new(), report: Some(report) },
            Err(e) => Outcome {
                code: EXIT_INPUT,
                stdout: String::new(),
                stderr: format!("error[Io]: cannot write {}: {e}\n", path.display()),
                report: Some(report),
            },
        },
        None => Outcome { code, stdout: text, stderr: String::new(), report: Some(report) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        let mut r = RunReport::new(vec!["moduli".into(), "x".into()]);
        r.verdicts.insert("b".into(), true);
        r.verdicts.insert("a".into(), false);
        r.dims.insert("moduli".into(), GhostDims([(0, 1), (-1, 2)].into_iter().collect()));
        r.report = serde_json::json!({"z": "1/2", "a": [1, 2]});
        r
    }

    #[test]
    fn structured_round_trip() {
        let r = sample();
        let text = emit_report(&r, Format::Structured);
        assert_eq!(parse_report(&text).unwrap(), r);
        assert_eq!(emit_report(&parse_report(&text).unwrap(), Format::Structured), text);
    }

    #[test]
    fn empty_report_is_a_valid_document() {
        let r = RunReport::new(vec![]);
        assert!(r.passed());
        let text = emit_report(&r, Format::Structured);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["verdicts"], serde_json::json!({}));
        assert!(emit_report(&r, Format::Text).contains("0 of 0 checks pass"));
    }

    #[test]
    fn text_tabulates_ghosts_high_to_low() {
        let text = emit_report(&sample(), Format::Text);
        let header = text.lines().find(|l| l.starts_with("ghost")).unwrap();
        assert_eq!(header.split_whitespace().collect::<Vec<_>>(), ["ghost", "0", "-1"]);
        assert!(text.contains("FAIL a"));
        assert_eq!(sample().exit_code(), EXIT_VERDICT);
    }

    #[test]
    fn variant_names_dig_through_wrappers() {
        use crate::simplicial::ComplexFileError;
        use crate::gluing::GluingError;
        let e = GluingError::Complex(ComplexFileError::IncoherentOrientation(vec![1, 2]));
        assert_eq!(variant_name(&e), "IncoherentOrientation");
        let e = GluingError::Io { path: "p".into(), reason: "r".into() };
        assert_eq!(variant_name(&e), "Io");
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["bvbfv", "moduli"]).code, EXIT_INPUT);
        assert_eq!(run(["bvbfv", "frobnicate"]).code, EXIT_INPUT);
        assert_eq!(run(["bvbfv", "moduli", "x", "--theory", "cs", "--format", "yaml"]).code, EXIT_INPUT);
        assert_eq!(run(["bvbfv", "--help"]).code, EXIT_PASS);
    }
}
