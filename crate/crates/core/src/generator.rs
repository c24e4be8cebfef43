//! Synthetic test programs: chains of multiplications whose inferred
//! exponents follow the Fibonacci sequence.

use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// Every function in one file.
    Single,
    /// One module file per function plus a top-level file.
    Multi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorParams {
    /// Number of functions.
    pub n: usize,
    /// Local variables per function, parameters included.
    pub l: usize,
    /// Parameters per function.
    pub a: usize,
    pub layout: Layout,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("function count, length and argument count must be positive")]
    Zero,
    #[error("function length {l} must be at least the argument count {a} plus 1")]
    TooShort { l: usize, a: usize },
}

/// A generated file: name relative to the output directory, and contents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedFile {
    pub name: String,
    pub text: String,
}

/// File name of the top-level subroutine's file.
pub const TOP_FILE: &str = "main.f90";
/// Name of the file holding everything in the single layout.
pub const SINGLE_FILE: &str = "single.f90";

impl GeneratorParams {
    /// Parameter values outside the studied grid; accepted with a warning.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = vec![];
        if ![5, 10, 15].contains(&self.n) {
            w.push(format!("n = {} is outside the usual set {{5, 10, 15}}", self.n));
        }
        if ![5, 10, 15, 20].contains(&self.l) {
            w.push(format!("l = {} is outside the usual set {{5, 10, 15, 20}}", self.l));
        }
        if ![2, 4].contains(&self.a) {
            w.push(format!("a = {} is outside the usual set {{2, 4}}", self.a));
        }
        w
    }

    fn validate(&self) -> Result<(), GeneratorError> {
        if self.n == 0 || self.l == 0 || self.a == 0 {
            return Err(GeneratorError::Zero);
        }
        if self.l <= self.a {
            return Err(GeneratorError::TooShort { l: self.l, a: self.a });
        }
        Ok(())
    }
}

fn function(out: &mut String, k: usize, l: usize, a: usize, indent: &str) {
    let params: Vec<String> = (1..=a).map(|i| format!("v{i}")).collect();
    let locals: Vec<String> = (1..=l).map(|i| format!("v{i}")).collect();
    writeln!(out, "{indent}real function f{k}({})", params.join(", ")).unwrap();
    writeln!(out, "{indent}  real :: {}", locals.join(", ")).unwrap();
    for i in a + 1..=l {
        let (x, y) = (i.saturating_sub(2).max(1), i - 1);
        writeln!(out, "{indent}  v{i} = v{x} * v{y}").unwrap();
    }
    writeln!(out, "{indent}  f{k} = v{l}").unwrap();
    writeln!(out, "{indent}end function f{k}").unwrap();
}

fn top(out: &mut String, n: usize, a: usize, uses: &[String]) {
    let ps: Vec<String> = (1..=n * a).map(|i| format!("p{i}")).collect();
    writeln!(out, "subroutine main({})", ps.join(", ")).unwrap();
    for u in uses {
        writeln!(out, "  use {u}").unwrap();
    }
    writeln!(out, "  real :: {}", ps.join(", ")).unwrap();
    writeln!(out, "  real :: r").unwrap();
    for k in 1..=n {
        let args: Vec<&str> = ps[(k - 1) * a..k * a].iter().map(String::as_str).collect();
        writeln!(out, "  r = f{k}({})", args.join(", ")).unwrap();
    }
    writeln!(out, "end subroutine main").unwrap();
}

pub fn module_name(k: usize) -> String {
    format!("mod_f{k}")
}

/// Generates the corpus. In the multi layout the top-level file comes last.
pub fn generate(p: &GeneratorParams) -> Result<Vec<GeneratedFile>, GeneratorError> {
    p.validate()?;
    let mut files = vec![];
    match p.layout {
        Layout::Single => {
            let mut text = String::from("module funcs\n  implicit none\ncontains\n");
            for k in 1..=p.n {
                function(&mut text, k, p.l, p.a, "  ");
                text.push('\n');
            }
            text.push_str("end module funcs\n\n");
            top(&mut text, p.n, p.a, &["funcs".to_string()]);
            files.push(GeneratedFile { name: SINGLE_FILE.into(), text });
        }
        Layout::Multi => {
            let mut uses = vec![];
            for k in 1..=p.n {
                let m = module_name(k);
                let mut text = format!("module {m}\n  implicit none\ncontains\n");
                function(&mut text, k, p.l, p.a, "  ");
                writeln!(text, "end module {m}").unwrap();
                files.push(GeneratedFile { name: format!("{m}.f90"), text });
                uses.push(m);
            }
            let mut text = String::new();
            top(&mut text, p.n, p.a, &uses);
            files.push(GeneratedFile { name: TOP_FILE.into(), text });
        }
    }
    Ok(files)
}

/// `fib(1) = fib(2) = 1`.
pub fn fibonacci(k: usize) -> u64 {
    let (mut x, mut y) = (0u64, 1u64);
    for _ in 0..k {
        (x, y) = (y, x + y);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_function_shape() {
        let fs = generate(&GeneratorParams { n: 1, l: 5, a: 2, layout: Layout::Multi }).unwrap();
        assert_eq!(fs.len(), 2);
        let f = &fs[0].text;
        assert!(f.contains("real function f1(v1, v2)"));
        assert!(f.contains("v3 = v1 * v2"));
        assert!(f.contains("v5 = v3 * v4"));
        assert!(f.contains("f1 = v5"));
        assert!(fs[1].text.contains("r = f1(p1, p2)"));
    }

    #[test]
    fn fibonacci_values() {
        assert_eq!((1..=9).map(fibonacci).collect::<Vec<_>>(), vec![1, 1, 2, 3, 5, 8, 13, 21, 34]);
    }

    #[test]
    fn rejects_degenerate() {
        assert_eq!(generate(&GeneratorParams { n: 1, l: 2, a: 2, layout: Layout::Single }), Err(GeneratorError::TooShort { l: 2, a: 2 }));
        assert!(GeneratorParams { n: 3, l: 5, a: 2, layout: Layout::Single }.warnings().len() == 1);
    }
}
