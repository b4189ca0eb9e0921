use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Ten significant digits, trailing zeros dropped.
pub fn sig(x: f64) -> String {
    if !x.is_finite() {
        return ob_bell::experiment::format_float(x);
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..10).contains(&magnitude) {
        let s = format!("{x:.9e}");
        let (mantissa, exponent) = s.split_once('e').unwrap();
        return format!("{}e{exponent}", trim(mantissa));
    }
    let decimals = (9 - magnitude).max(0) as usize;
    trim(&format!("{x:.decimals$}")).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn vector(v: [f64; 3]) -> String {
    format!("({}, {}, {})", sig(v[0]), sig(v[1]), sig(v[2]))
}

/// Writes `contents` to `dir/name` through a temporary file in `dir` and a
/// rename, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.join(name).display()));
    std::fs::create_dir_all(dir).map_err(fail)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents.as_bytes()).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(dir.join(name)).map_err(|e| fail(e.error))?;
    Ok(())
}
