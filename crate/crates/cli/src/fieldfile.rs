//! Complex fields as CSV.
//!
//! ```text
//! x1,re,im
//! -2.0000000000000000e1,4.1223072448771157e-9,0.0000000000000000e0
//! ```
//!
//! One row per grid point in row-major order (the last axis varies
//! fastest). The coordinate columns `x1..x{dim}` are optional on input; when
//! present they must match the grid.

use nlsv::{Complex, Field64, Grid64};

use crate::output::fmt_f64;

pub fn write(field: &Field64) -> String {
    let grid = field.grid();
    let dim = grid.dim();
    let mut out = String::new();
    for a in 1..=dim {
        out.push_str(&format!("x{a},"));
    }
    out.push_str("re,im\n");
    for (flat, z) in field.values().iter().enumerate() {
        for a in 0..dim {
            out.push_str(&fmt_f64(grid.coord(flat, a)));
            out.push(',');
        }
        out.push_str(&fmt_f64(z.re));
        out.push(',');
        out.push_str(&fmt_f64(z.im));
        out.push('\n');
    }
    out
}

pub fn parse(bytes: &[u8], grid: &Grid64) -> Result<Vec<Complex<f64>>, String> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let header: Vec<String> = reader.headers().map_err(|e| e.to_string())?.iter().map(str::to_owned).collect();
    let dim = grid.dim();
    let expected_coords: Vec<String> = (1..=dim).map(|a| format!("x{a}")).collect();
    let with_coords = match header.len() {
        2 => false,
        n if n == dim + 2 => true,
        n => return Err(format!("expected columns re,im (optionally preceded by x1..x{dim}), found {n} columns")),
    };
    let names = if with_coords { [expected_coords.clone(), vec!["re".into(), "im".into()]].concat() } else { vec!["re".into(), "im".into()] };
    if header != names {
        return Err(format!("header must be `{}`, found `{}`", names.join(","), header.join(",")));
    }

    let tol = 1e-9 * (1.0 + grid.half_width());
    let mut values = Vec::with_capacity(grid.len());
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| format!("line {line}: {e}"))?;
        if values.len() == grid.len() {
            return Err(format!("line {line}: more than {} data rows", grid.len()));
        }
        let num = |i: usize| -> Result<f64, String> {
            let raw = &record[i];
            raw.parse::<f64>().map_err(|_| format!("line {line}, column `{}`: `{raw}` is not a number", names[i]))
        };
        if with_coords {
            for a in 0..dim {
                let x = num(a)?;
                let want = grid.coord(values.len(), a);
                if (x - want).abs() > tol {
                    return Err(format!("line {line}: x{} = {x} but the grid point is {want}", a + 1));
                }
            }
        }
        let off = if with_coords { dim } else { 0 };
        values.push(Complex::new(num(off)?, num(off + 1)?));
    }
    if values.len() != grid.len() {
        return Err(format!("expected {} data rows for the grid, found {}", grid.len(), values.len()));
    }
    Ok(values)
}
