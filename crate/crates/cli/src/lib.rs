//! Command implementations behind the `unitcheck` binary. Each command
//! writes its report to `out`, diagnostics to `err`, and returns the exit
//! code.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use unitcheck_core::analysis::{analyze, Analysis, AnalysisError, Options};
use unitcheck_core::generator::{generate, GeneratorParams, Layout};

/// Environment variable holding extra include directories, separated like `PATH`.
pub const INCLUDE_ENV: &str = "UNITCHECK_INCLUDE";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCONSISTENT: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "unitcheck", version, about = "Units-of-measure inference and checking for Fortran")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Fortran source files.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Directory searched for module summaries and sources; repeatable.
    #[arg(long = "include", short = 'I', value_name = "DIR")]
    pub include: Vec<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Suggest variables whose annotation would determine the rest.
    Suggest(Inputs),
    /// Check annotations for consistency; silent on success.
    Check(Inputs),
    /// Print the inferred unit of every variable.
    Infer(Inputs),
    /// Rewrite sources with inferred annotations inserted.
    Synth {
        #[command(flatten)]
        inputs: Inputs,
        /// Output file (single input) or directory; stdout when absent.
        #[arg(long, short = 'o', value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Write module summaries for use by other files.
    Compile {
        #[command(flatten)]
        inputs: Inputs,
        /// Directory for summary files; defaults to each source's directory.
        #[arg(long, short = 'o', value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic benchmark corpus.
    Generate {
        /// Number of functions.
        #[arg(short, long, default_value_t = 5)]
        n: usize,
        /// Length of each function.
        #[arg(short, long, default_value_t = 5)]
        l: usize,
        /// Arguments per function.
        #[arg(short, long, default_value_t = 2)]
        a: usize,
        #[arg(long, value_enum, default_value_t = Format::Mult)]
        fmt: Format,
        /// Output directory.
        #[arg(long, short = 'o', value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Single,
    Mult,
}

/// Include directories: flags first, then the environment variable.
pub fn include_dirs(flags: &[PathBuf]) -> Vec<PathBuf> {
    let mut dirs = flags.to_vec();
    if let Some(v) = std::env::var_os(INCLUDE_ENV) {
        dirs.extend(std::env::split_paths(&v).filter(|p| !p.as_os_str().is_empty()));
    }
    dirs
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let code = match cli.command {
        Command::Suggest(i) => cmd_suggest(&i.files, &include_dirs(&i.include), out, err),
        Command::Check(i) => cmd_check(&i.files, &include_dirs(&i.include), out, err),
        Command::Infer(i) => cmd_infer(&i.files, &include_dirs(&i.include), out, err),
        Command::Synth { inputs, out: dest } => cmd_synth(&inputs.files, &include_dirs(&inputs.include), dest.as_deref(), out, err),
        Command::Compile { inputs, out: dest } => cmd_compile(&inputs.files, &include_dirs(&inputs.include), dest.as_deref(), out, err),
        Command::Generate { n, l, a, fmt, out: dest } => {
            let layout = match fmt {
                Format::Single => Layout::Single,
                Format::Mult => Layout::Multi,
            };
            cmd_generate(&GeneratorParams { n, l, a, layout }, &dest, out, err)
        }
    };
    let _ = out.flush();
    code
}

/// Runs the analysis and reports diagnostics. Returns the analysis when
/// it can be reported on, or the exit code otherwise.
fn prepare(files: &[PathBuf], include: &[PathBuf], literal_check: bool, err: &mut dyn Write) -> Result<Analysis, i32> {
    let opts = Options { include: include.to_vec(), literal_check };
    let a = match analyze(files, &opts) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {}", render_error(&e));
            return Err(EXIT_ERROR);
        }
    };
    for d in &a.diags {
        let _ = writeln!(err, "{d}");
    }
    if a.has_setup_errors() {
        return Err(EXIT_ERROR);
    }
    if !a.is_consistent() {
        return Err(EXIT_INCONSISTENT);
    }
    Ok(a)
}

fn render_error(e: &AnalysisError) -> String {
    match e {
        AnalysisError::Setup(d) => format!("{}:{}: {}", d.file, d.span, d.message),
        other => other.to_string(),
    }
}

fn shown(p: &Path) -> String {
    p.display().to_string()
}

fn report_summaries(a: &Analysis, out: &mut dyn Write) {
    for s in &a.summaries {
        let _ = writeln!(out, "{}: parsed precompiled file.", s.shown);
    }
}

pub fn cmd_infer(files: &[PathBuf], include: &[PathBuf], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let a = match prepare(files, include, true, err) {
        Ok(a) => a,
        Err(code) => return code,
    };
    report_summaries(&a, out);
    for f in files {
        let name = shown(f);
        let _ = writeln!(out, "{name}:");
        for i in a.inferred(&name) {
            let _ = writeln!(out, "  {}:{} unit {} :: {}", i.pos.line, i.pos.col, i.unit, i.name);
        }
    }
    EXIT_OK
}

pub fn cmd_check(files: &[PathBuf], include: &[PathBuf], _out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match prepare(files, include, true, err) {
        Ok(_) => EXIT_OK,
        Err(code) => code,
    }
}

pub fn cmd_suggest(files: &[PathBuf], include: &[PathBuf], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let a = match prepare(files, include, false, err) {
        Ok(a) => a,
        Err(code) => return code,
    };
    report_summaries(&a, out);
    for f in files {
        let name = shown(f);
        let s = a.suggestions(&name);
        let noun = if s.len() == 1 { "declaration" } else { "declarations" };
        let _ = writeln!(out, "{name}: {} variable {noun}", s.len());
        if !s.is_empty() {
            let _ = writeln!(out, "   suggested to be given a specification:");
            for (pos, v) in s {
                let _ = writeln!(out, "    {:<10}{v}", format!("({}:{})", pos.line, pos.col));
            }
        }
    }
    EXIT_OK
}

pub fn cmd_synth(files: &[PathBuf], include: &[PathBuf], dest: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let a = match prepare(files, include, true, err) {
        Ok(a) => a,
        Err(code) => return code,
    };
    let to_dir = dest.is_some_and(|d| d.is_dir()) || files.len() > 1;
    for f in files {
        let Some(text) = a.synthesize(&shown(f)) else { continue };
        let target = match dest {
            None => {
                let _ = out.write_all(text.as_bytes());
                continue;
            }
            Some(d) if to_dir => d.join(f.file_name().unwrap_or_default()),
            Some(d) => d.to_path_buf(),
        };
        if let Err(e) = write_atomic(&target, text.as_bytes()) {
            let _ = writeln!(err, "error: {}: {e}", shown(&target));
            return EXIT_ERROR;
        }
    }
    EXIT_OK
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile_in(dir)?;
    tmp.1.write_all(bytes)?;
    tmp.1.sync_all()?;
    std::fs::rename(&tmp.0, path)
}

fn tempfile_in(dir: &Path) -> std::io::Result<(PathBuf, std::fs::File)> {
    for k in 0..100u32 {
        let p = dir.join(format!(".unitcheck-{}-{k}.tmp", std::process::id()));
        match std::fs::OpenOptions::new().write(true).create_new(true).open(&p) {
            Ok(f) => return Ok((p, f)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e),
        }
    }
    Err(std::io::Error::other("cannot create a temporary file"))
}

pub fn cmd_compile(files: &[PathBuf], include: &[PathBuf], dest: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    for f in files {
        let _ = writeln!(out, "Compiling units for '{}'", shown(f));
    }
    let a = match prepare(files, include, true, err) {
        Ok(a) => a,
        Err(code) => return code,
    };
    for f in files {
        let dir = match dest {
            Some(d) => d.to_path_buf(),
            None => f.parent().map(Path::to_path_buf).filter(|p| !p.as_os_str().is_empty()).unwrap_or_else(|| PathBuf::from(".")),
        };
        for m in a.modules_in(&shown(f)) {
            let Some(s) = a.summary(&m) else { continue };
            if let Err(e) = s.write(&dir) {
                let _ = writeln!(err, "error: {e}");
                return EXIT_ERROR;
            }
        }
    }
    EXIT_OK
}

pub fn cmd_generate(p: &GeneratorParams, dest: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    for w in p.warnings() {
        let _ = writeln!(err, "warning: {w}");
    }
    let files = match generate(p) {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
    };
    if let Err(e) = std::fs::create_dir_all(dest) {
        let _ = writeln!(err, "error: {}: {e}", shown(dest));
        return EXIT_ERROR;
    }
    for f in files {
        let path = dest.join(&f.name);
        if let Err(e) = std::fs::write(&path, f.text) {
            let _ = writeln!(err, "error: {}: {e}", shown(&path));
            return EXIT_ERROR;
        }
        let _ = writeln!(out, "{}", shown(&path));
    }
    EXIT_OK
}
