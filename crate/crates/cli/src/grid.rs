//! `a:b:step` grids, inclusive of `b` when `b - a` is a multiple of `step`.

use std::str::FromStr;

fn split(raw: &str) -> Result<Vec<&str>, String> {
    let parts: Vec<&str> = raw.split(':').collect();
    match parts.len() {
        1 | 3 => Ok(parts),
        _ => Err(format!("grid {raw:?} must be a single value or a:b:step")),
    }
}

fn num<T: FromStr>(raw: &str) -> Result<T, String> {
    raw.trim().parse().map_err(|_| format!("{raw:?} is not a valid number"))
}

pub fn parse_usize_grid(raw: &str) -> Result<Vec<usize>, String> {
    let parts = split(raw)?;
    let start: usize = num(parts[0])?;
    if parts.len() == 1 {
        return Ok(vec![start]);
    }
    let (end, step): (usize, usize) = (num(parts[1])?, num(parts[2])?);
    if step == 0 || end < start {
        return Err(format!("grid {raw:?} needs step > 0 and a <= b"));
    }
    Ok((start..=end).step_by(step).collect())
}

pub fn parse_f64_grid(raw: &str) -> Result<Vec<f64>, String> {
    let parts = split(raw)?;
    let start: f64 = num(parts[0])?;
    if parts.len() == 1 {
        return Ok(vec![start]);
    }
    let (end, step): (f64, f64) = (num(parts[1])?, num(parts[2])?);
    if !(step > 0.0) || !(end >= start) || !start.is_finite() || !end.is_finite() {
        return Err(format!("grid {raw:?} needs step > 0 and a <= b"));
    }
    // Tolerate float error so 0:1:0.1 reaches 1.
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| {
            let x = start + i as f64 * step;
            (x * 1e12).round() / 1e12
        })
        .collect())
}
