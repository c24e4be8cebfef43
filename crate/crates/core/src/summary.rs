//! Module summaries (`.fsmod` files): solved module-variable units and
//! per-procedure slot signatures.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::gen::{ModuleInterface, ProcSig};
use crate::intrinsics::Signature;
use crate::units::{parse_unit, SurfaceUnit};

pub const FORMAT_VERSION: u32 = 1;
pub const EXTENSION: &str = "fsmod";

#[derive(Clone, Debug, PartialEq)]
pub struct ProcSummary {
    pub name: String,
    pub arity: usize,
    pub is_function: bool,
    /// Slot index and unit; unsolved slots are absent.
    pub slots: Vec<(usize, SurfaceUnit)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModuleSummary {
    pub name: String,
    pub vars: Vec<(String, SurfaceUnit)>,
    pub procs: Vec<ProcSummary>,
}

#[derive(Debug, thiserror::Error)]
pub enum SummaryError {
    #[error("{path}: unsupported summary version {found} (this tool reads version {expected})")]
    Version { path: String, found: String, expected: u32 },
    #[error("{path}:{line}: malformed summary: {message}")]
    Malformed { path: String, line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ModuleSummary {
    /// Serializes in a fixed order so repeated runs give identical bytes.
    pub fn to_text(&self) -> String {
        let mut out = format!("fsmod {FORMAT_VERSION}\n");
        for (name, unit) in &self.vars {
            writeln!(out, "var {name} {unit}").unwrap();
        }
        for p in &self.procs {
            let kw = if p.is_function { "fun" } else { "sub" };
            writeln!(out, "{kw} {} {}", p.name, p.arity).unwrap();
            for (k, u) in &p.slots {
                writeln!(out, "slot {k} {u}").unwrap();
            }
        }
        out
    }

    pub fn parse(text: &str, path: &str, module: &str) -> Result<ModuleSummary, SummaryError> {
        let bad = |line: usize, message: String| SummaryError::Malformed { path: path.to_string(), line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some((_, header)) => {
                let mut parts = header.split_whitespace();
                if parts.next() != Some("fsmod") {
                    return Err(bad(1, "missing `fsmod` header".into()));
                }
                let v = parts.next().unwrap_or("");
                if v != FORMAT_VERSION.to_string() {
                    return Err(SummaryError::Version { path: path.into(), found: v.into(), expected: FORMAT_VERSION });
                }
            }
            None => return Err(bad(1, "empty file".into())),
        }
        let mut s = ModuleSummary { name: module.to_string(), vars: vec![], procs: vec![] };
        for (ln, line) in lines {
            let (kw, rest) = line.split_once(char::is_whitespace).ok_or_else(|| bad(ln, format!("unexpected `{line}`")))?;
            let rest = rest.trim();
            match kw {
                "var" => {
                    let (name, unit) = rest.split_once(char::is_whitespace).ok_or_else(|| bad(ln, "expected `var <name> <unit>`".into()))?;
                    let unit = parse_unit(unit.trim()).map_err(|e| bad(ln, e.to_string()))?;
                    s.vars.push((name.to_lowercase(), unit));
                }
                "fun" | "sub" => {
                    let mut parts = rest.split_whitespace();
                    let (Some(name), Some(arity), None) = (parts.next(), parts.next(), parts.next()) else {
                        return Err(bad(ln, format!("expected `{kw} <name> <arity>`")));
                    };
                    let arity = arity.parse().map_err(|_| bad(ln, format!("bad arity `{arity}`")))?;
                    s.procs.push(ProcSummary { name: name.to_lowercase(), arity, is_function: kw == "fun", slots: vec![] });
                }
                "slot" => {
                    let p = s.procs.last_mut().ok_or_else(|| bad(ln, "`slot` before any procedure".into()))?;
                    let (k, unit) = rest.split_once(char::is_whitespace).ok_or_else(|| bad(ln, "expected `slot <k> <unit>`".into()))?;
                    let k: usize = k.parse().map_err(|_| bad(ln, format!("bad slot `{k}`")))?;
                    let lo = if p.is_function { 0 } else { 1 };
                    if k < lo || k > p.arity {
                        return Err(bad(ln, format!("slot {k} out of range for `{}`", p.name)));
                    }
                    let unit = parse_unit(unit.trim()).map_err(|e| bad(ln, e.to_string()))?;
                    p.slots.push((k, unit));
                }
                other => return Err(bad(ln, format!("unknown entry `{other}`"))),
            }
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<ModuleSummary, SummaryError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| SummaryError::Io { path: shown.clone(), source })?;
        let module = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_lowercase();
        ModuleSummary::parse(&text, &shown, &module)
    }

    /// Writes `<dir>/<module>.fsmod` through a temporary file and a rename.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, SummaryError> {
        let path = dir.join(format!("{}.{EXTENSION}", self.name));
        let io = |source| SummaryError::Io { path: path.display().to_string(), source };
        let tmp = dir.join(format!(".{}.{EXTENSION}.tmp", self.name));
        let mut f = std::fs::File::create(&tmp).map_err(io)?;
        f.write_all(self.to_text().as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)?;
        std::fs::rename(&tmp, &path).map_err(io)?;
        Ok(path)
    }

    pub fn interface(&self) -> ModuleInterface {
        ModuleInterface {
            vars: self.vars.iter().map(|(n, _)| n.clone()).collect(),
            procs: self.procs.iter().map(|p| (p.name.clone(), ProcSig { arity: p.arity, is_function: p.is_function })).collect(),
        }
    }

    /// Slot signature of a procedure. Polymorphic names are scoped to this
    /// module and procedure so they cannot capture names elsewhere.
    pub fn signature(&self, proc: &ProcSummary) -> Signature {
        let scope = format!("{}::{}", self.name, proc.name);
        proc.slots.iter().map(|(k, u)| (*k, u.to_expr(&scope))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HELPER: &str = "fsmod 1\nvar v0 metre / sec\nvar x0 metre\nfun square 1\nslot 0 ('a)**2\nslot 1 'a\n";

    #[test]
    fn round_trip() {
        let s = ModuleSummary::parse(HELPER, "helper.fsmod", "helper").unwrap();
        assert_eq!(s.vars.len(), 2);
        assert_eq!(s.procs[0].slots.len(), 2);
        assert_eq!(s.to_text(), HELPER);
    }

    #[test]
    fn version_mismatch_names_both() {
        let e = ModuleSummary::parse("fsmod 7\n", "m.fsmod", "m").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains('7') && msg.contains('1'), "{msg}");
    }

    #[test]
    fn malformed_reports_path_and_line() {
        let e = ModuleSummary::parse("fsmod 1\nvar x\n", "m.fsmod", "m").unwrap_err();
        assert!(e.to_string().starts_with("m.fsmod:2:"), "{e}");
    }

    #[test]
    fn signature_scopes_names() {
        let s = ModuleSummary::parse(HELPER, "helper.fsmod", "helper").unwrap();
        let sig = s.signature(&s.procs[0]);
        assert_eq!(sig.len(), 2);
        assert!(sig[1].1.to_string().contains('a'));
    }

    #[test]
    fn atomic_write() {
        let dir = tempfile::tempdir().unwrap();
        let s = ModuleSummary::parse(HELPER, "helper.fsmod", "helper").unwrap();
        let p = s.write(dir.path()).unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), HELPER);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
