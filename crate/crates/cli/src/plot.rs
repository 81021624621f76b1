//! gnuplot script generation. The script renders to a PNG next to itself;
//! nothing here launches a viewer or runs gnuplot.

use std::fs;
use std::path::Path;

use crate::error::CliError;

/// Diagnostics columns the script plots.
const REQUIRED: [&str; 3] = ["t", "variance", "energy"];

fn read_header(path: &Path) -> Result<Vec<String>, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    let header = reader
        .headers()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();
    Ok(header)
}

/// 1-based column index, as gnuplot counts.
fn column(header: &[String], name: &str, path: &Path) -> Result<usize, CliError> {
    header
        .iter()
        .position(|h| h == name)
        .map(|i| i + 1)
        .ok_or_else(|| CliError::Config(format!("{}: missing column `{name}`", path.display())))
}

fn quoted(path: &Path) -> String {
    format!("\"{}\"", path.display().to_string().replace('\\', "\\\\").replace('"', "\\\""))
}

/// Builds the script. Panels: variance, energy drift `E(t) - E(0)`, and
/// `|residual|` on a log axis for every column of `residuals` but `t`.
pub fn script(diagnostics: &Path, residuals: Option<&Path>, image: &Path) -> Result<String, CliError> {
    let header = read_header(diagnostics)?;
    let idx: Vec<usize> = REQUIRED.iter().map(|name| column(&header, name, diagnostics)).collect::<Result<_, _>>()?;
    let (t, variance, energy) = (idx[0], idx[1], idx[2]);
    let diag = quoted(diagnostics);

    let mut s = String::new();
    s.push_str("# gnuplot script written by `nlsv plot`\n");
    s.push_str("set datafile separator \",\"\n");
    s.push_str("set terminal pngcairo size 1000,1200\n");
    s.push_str(&format!("set output {}\n", quoted(image)));
    let panels = if residuals.is_some() { 3 } else { 2 };
    s.push_str(&format!("set multiplot layout {panels},1\n"));
    s.push_str("set xlabel \"t\"\nset grid\n");

    s.push_str("set ylabel \"variance\"\n");
    s.push_str(&format!("plot {diag} skip 1 using {t}:{variance} with lines title \"variance\"\n"));

    s.push_str(&format!("stats {diag} skip 1 using {energy} every ::0::0 nooutput\n"));
    s.push_str("E0 = STATS_min\n");
    s.push_str("set ylabel \"E(t) - E(0)\"\n");
    s.push_str(&format!("plot {diag} skip 1 using {t}:(${energy} - E0) with lines title \"energy drift\"\n"));

    if let Some(res) = residuals {
        let rheader = read_header(res)?;
        let rt = column(&rheader, "t", res)?;
        let names: Vec<(usize, &String)> =
            rheader.iter().enumerate().filter(|(_, n)| n.as_str() != "t").map(|(i, n)| (i + 1, n)).collect();
        if names.is_empty() {
            return Err(CliError::Config(format!("{}: no residual columns besides `t`", res.display())));
        }
        s.push_str("set logscale y\nset format y \"%.0e\"\nset ylabel \"|residual|\"\nset key outside right\n");
        let curves: Vec<String> = names
            .iter()
            .map(|(i, name)| {
                format!("{} skip 1 using {rt}:(abs(${i}) > 0 ? abs(${i}) : NaN) with linespoints title \"{name}\"", quoted(res))
            })
            .collect();
        s.push_str("plot ");
        s.push_str(&curves.join(", \\\n     "));
        s.push('\n');
        s.push_str("unset logscale y\n");
    }
    s.push_str("unset multiplot\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn script_references_every_residual_column() {
        let dir = tempfile::tempdir().unwrap();
        let diag = write(dir.path(), "d.csv", "t,charge,energy,variance\n0,2,1,3\n0.1,2,1,3\n0.2,2,1,3\n");
        let res = write(dir.path(), "r.csv", "t,virial,duhamel,chain_rule\n0,0,0,\n0.1,1e-9,2e-9,\n0.2,1e-9,2e-9,5e-11\n");
        let s = script(&diag, Some(&res), &dir.path().join("out.png")).unwrap();
        for name in ["virial", "duhamel", "chain_rule"] {
            assert!(s.contains(&format!("title \"{name}\"")), "{s}");
        }
        assert!(s.contains("using 1:4 with lines title \"variance\""));
        assert!(s.contains("($3 - E0)"));
        assert!(!s.contains("pause"));
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let diag = write(dir.path(), "d.csv", "t,charge,energy\n0,2,1\n");
        let err = script(&diag, None, &dir.path().join("o.png")).unwrap_err();
        assert!(err.to_string().contains("`variance`"), "{err}");
    }
}
