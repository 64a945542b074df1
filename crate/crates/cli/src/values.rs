//! Axis value lists: `0,5,10` or the inclusive range `start:step:stop`.

use crate::error::CliError;

/// Largest number of points a range may expand to.
pub const MAX_POINTS: usize = 100_000;

pub fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(CliError::usage("values", "empty value list"));
    }
    if text.contains(':') {
        return parse_range(text);
    }
    text.split(',').map(|t| parse_number(t.trim())).collect()
}

fn parse_number(token: &str) -> Result<f64, CliError> {
    let v: f64 = token
        .parse()
        .map_err(|_| CliError::usage("values", format!("`{token}` is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::usage("values", format!("`{token}` is not finite")));
    }
    Ok(v)
}

fn parse_range(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, step, stop] = parts[..] else {
        return Err(CliError::usage("values", format!("range `{text}` must be start:step:stop")));
    };
    let (start, step, stop) = (
        parse_number(start.trim())?,
        parse_number(step.trim())?,
        parse_number(stop.trim())?,
    );
    if step == 0.0 || (stop - start) * step < 0.0 {
        return Err(CliError::usage(
            "values",
            format!("step {step} does not lead from {start} to {stop}"),
        ));
    }
    let span = (stop - start) / step;
    // tolerate rounding in e.g. 0:0.1:1
    let count = (span + 1e-9 * span.abs().max(1.0)).floor();
    if !(count.is_finite() && count < MAX_POINTS as f64) {
        return Err(CliError::usage("values", format!("range `{text}` has too many points")));
    }
    Ok((0..=count as usize).map(|i| start + i as f64 * step).collect())
}
