//! Number lists of the form `1,2.5,3` and inclusive ranges `start:step:stop`.

use anyhow::{bail, Context, Result};

/// Expands a comma separated mix of plain values and `start:step:stop` ranges.
///
/// A range includes `stop` when the last step lands within half a step of it.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim) {
        if item.is_empty() {
            bail!("empty entry in `{text}`");
        }
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(number(v)?),
            [a, s, b] => expand(number(a)?, number(s)?, number(b)?, &mut out)?,
            _ => bail!("`{item}` is neither a value nor start:step:stop"),
        }
    }
    Ok(out)
}

fn number(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().with_context(|| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        bail!("`{s}` is not finite");
    }
    Ok(v)
}

fn expand(start: f64, step: f64, stop: f64, out: &mut Vec<f64>) -> Result<()> {
    if step <= 0.0 {
        bail!("range step must be positive, got {step}");
    }
    if stop < start {
        bail!("range {start}:{step}:{stop} runs backwards");
    }
    let n = ((stop - start) / step + 0.5).floor() as usize;
    if n > 100_000 {
        bail!("range {start}:{step}:{stop} has too many points");
    }
    // Multiplying instead of accumulating keeps 0:0.1:1 free of drift.
    out.extend((0..=n).map(|k| start + k as f64 * step));
    Ok(())
}
