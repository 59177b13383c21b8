use std::fmt::Write;

use super::LinearProgram;
use crate::scalar::Scalar;

fn num<S: Scalar>(v: S) -> String {
    let v = v.to_f64_lossy();
    let plain = format!("{v}");
    if plain.len() <= 12 {
        return plain;
    }
    for digits in (1..=6).rev() {
        let s = format!("{v:.digits$e}");
        if s.len() <= 12 {
            return s;
        }
    }
    format!("{v:.0e}")
}

fn col(j: usize) -> String {
    format!("X{:06}", j + 1)
}

fn row(i: usize) -> String {
    format!("R{:06}", i + 1)
}

/// Fixed-format MPS text for `lp` (maximization, ge rows as `G`).
pub fn write_mps<S: Scalar>(lp: &LinearProgram<S>, name: &str) -> String {
    let mut out = String::new();
    let name: String = name.chars().filter(|c| !c.is_whitespace()).take(8).collect();
    let _ = writeln!(out, "NAME          {name}");
    let _ = writeln!(out, "OBJSENSE");
    let _ = writeln!(out, "    MAX");
    let _ = writeln!(out, "ROWS");
    let _ = writeln!(out, " N  OBJ");
    let neq = lp.eq_rhs.len();
    for i in 0..neq {
        let _ = writeln!(out, " E  {}", row(i));
    }
    for i in 0..lp.ge_rhs.len() {
        let _ = writeln!(out, " G  {}", row(neq + i));
    }
    let _ = writeln!(out, "COLUMNS");
    for j in 0..lp.num_vars {
        let mut entries = Vec::new();
        if lp.objective[j] != S::zero() {
            entries.push(("OBJ".to_string(), lp.objective[j]));
        }
        for (i, r) in lp.eq_matrix.iter().enumerate() {
            if r[j] != S::zero() {
                entries.push((row(i), r[j]));
            }
        }
        for (i, r) in lp.ge_matrix.iter().enumerate() {
            if r[j] != S::zero() {
                entries.push((row(neq + i), r[j]));
            }
        }
        if entries.is_empty() {
            entries.push(("OBJ".to_string(), S::zero()));
        }
        for (r, v) in entries {
            let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", col(j), r, num(v));
        }
    }
    let _ = writeln!(out, "RHS");
    let rhs = lp.eq_rhs.iter().chain(&lp.ge_rhs);
    for (i, v) in rhs.enumerate() {
        if *v != S::zero() {
            let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", "RHS", row(i), num(*v));
        }
    }
    let _ = writeln!(out, "BOUNDS");
    for j in 0..lp.num_vars {
        let c = col(j);
        match (lp.lower[j], lp.upper[j]) {
            (Some(l), Some(u)) if l == u => {
                let _ = writeln!(out, " FX {:<8}  {:<8}  {:>12}", "BND", c, num(l));
            }
            (Some(l), u) => {
                if l != S::zero() {
                    let _ = writeln!(out, " LO {:<8}  {:<8}  {:>12}", "BND", c, num(l));
                }
                if let Some(u) = u {
                    let _ = writeln!(out, " UP {:<8}  {:<8}  {:>12}", "BND", c, num(u));
                }
            }
            (None, None) => {
                let _ = writeln!(out, " FR {:<8}  {}", "BND", c);
            }
            (None, Some(u)) => {
                let _ = writeln!(out, " MI {:<8}  {}", "BND", c);
                let _ = writeln!(out, " UP {:<8}  {:<8}  {:>12}", "BND", c, num(u));
            }
        }
    }
    let _ = writeln!(out, "ENDATA");
    out
}
