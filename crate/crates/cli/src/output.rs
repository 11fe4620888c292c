use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{CliError, CliResult};

/// `v` with twelve significant digits, fixed notation.
pub fn sig12(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (11 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

/// File-name-safe form of a schedule identifier.
pub fn slug(id: &str) -> String {
    let mut out = String::with_capacity(id.len());
    for c in id.chars() {
        match c {
            'a'..='z' | 'A'..='Z' | '0'..='9' | '.' | '-' => out.push(c),
            '/' => out.push('_'),
            _ => {
                if !out.ends_with('_') {
                    out.push('_');
                }
            }
        }
    }
    out.trim_matches('_').to_string()
}

/// CSV text with a leading `# key=value ...` comment line.
pub fn csv_text(header: &str, columns: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Computation(format!("csv encoding: {e}"));
    w.write_record(columns).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    let body = w.into_inner().map_err(|e| CliError::Computation(format!("csv encoding: {e}")))?;
    let mut text = format!("# {header}\n");
    text.push_str(&String::from_utf8(body).expect("csv output is UTF-8"));
    Ok(text)
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(&parent.display().to_string(), e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::io(&path.display().to_string(), e))?;
    f.write_all(contents.as_bytes()).map_err(|e| CliError::io(&path.display().to_string(), e))
}

pub fn json_text<T: serde::Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Computation(format!("json encoding: {e}")))?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(sig12(0.5623342454291234), "0.562334245429");
        assert_eq!(sig12(12.0), "12.0000000000");
        assert_eq!(sig12(-0.001), "-0.00100000000000");
        assert_eq!(sig12(0.0), "0");
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("power(c=1,alpha=0.25)"), "power_c_1_alpha_0.25");
        assert_eq!(slug("constant(1/10)"), "constant_1_10");
    }
}
