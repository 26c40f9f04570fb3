//! CSV, JSON and gnuplot-script writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Scientific notation with 16 significant digits.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.15e}")
    }
}

/// One CSV cell.
#[derive(Debug, Clone, Copy)]
pub enum Cell<'a> {
    Num(f64),
    Int(usize),
    Text(&'a str),
}

/// Minimal comma-separated writer with a mandatory header line.
pub struct CsvWriter<W: Write> {
    out: W,
    columns: usize,
}

impl CsvWriter<BufWriter<File>> {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        Self::new(BufWriter::new(File::create(path)?), header)
    }
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, header: &[&str]) -> Result<Self> {
        writeln!(out, "{}", header.join(","))?;
        Ok(Self {
            out,
            columns: header.len(),
        })
    }

    pub fn row(&mut self, cells: &[Cell<'_>]) -> Result<()> {
        debug_assert_eq!(cells.len(), self.columns);
        let mut line = String::with_capacity(24 * cells.len());
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            match c {
                Cell::Num(v) => line.push_str(&fmt_num(*v)),
                Cell::Int(v) => line.push_str(&v.to_string()),
                Cell::Text(s) => line.push_str(s),
            }
        }
        writeln!(self.out, "{line}")?;
        Ok(())
    }

    pub fn nums(&mut self, values: &[f64]) -> Result<()> {
        let cells: Vec<Cell<'_>> = values.iter().map(|&v| Cell::Num(v)).collect();
        self.row(&cells)
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Pretty-printed JSON; key order follows field declaration order.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

/// Drift history plot for `invariants.csv`.
pub fn plot_invariants(dir: &Path) -> Result<()> {
    write_text(
        &dir.join("invariants.gp"),
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set logscale y\n\
         set format y '%.0e'\n\
         set xlabel 't'\n\
         set ylabel 'relative drift'\n\
         set terminal pngcairo size 900,600\n\
         set output 'invariants.png'\n\
         plot for [i=8:12] 'invariants.csv' using 1:(abs(column(i)) + 1e-18) with lines\n",
    )
}

/// Space-time views of `snapshots.csv`.
pub fn plot_snapshots(dir: &Path) -> Result<()> {
    write_text(
        &dir.join("snapshots.gp"),
        "set datafile separator ','\n\
         set xlabel 'x'\n\
         set ylabel 't'\n\
         set terminal pngcairo size 900,600\n\
         set view 60,30\n\
         set output 'abs_B.png'\n\
         splot 'snapshots.csv' using 2:1:5 with dots title '|B|'\n\
         set output 'rho.png'\n\
         splot 'snapshots.csv' using 2:1:6 with dots title 'rho'\n\
         set output 'u.png'\n\
         splot 'snapshots.csv' using 2:1:7 with dots title 'u'\n",
    )
}

/// Log-log error plot of a convergence table whose first numeric column is
/// `xcol` and whose error columns are `cols`.
pub fn plot_convergence(dir: &Path, csv: &str, xcol: usize, cols: &[usize], xlabel: &str) -> Result<()> {
    let stem = csv.trim_end_matches(".csv");
    let lines: Vec<String> = cols
        .iter()
        .map(|c| format!("'{csv}' using {xcol}:{c} with linespoints"))
        .collect();
    write_text(
        &dir.join(format!("{stem}.gp")),
        &format!(
            "set datafile separator ','\n\
             set key autotitle columnhead\n\
             set logscale xy\n\
             set format y '%.0e'\n\
             set xlabel '{xlabel}'\n\
             set ylabel 'max error'\n\
             set terminal pngcairo size 900,600\n\
             set output '{stem}.png'\n\
             plot {}\n",
            lines.join(", ")
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(1.0), "1.000000000000000e0");
        assert_eq!(fmt_num(-1.05e-5), "-1.050000000000000e-5");
        assert_eq!(fmt_num(f64::NAN), "NaN");
        let back: f64 = fmt_num(std::f64::consts::PI).parse().unwrap();
        assert!((back - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn csv_rows() {
        let mut w = CsvWriter::new(Vec::new(), &["scheme", "h", "N"]).unwrap();
        w.row(&[Cell::Text("fprk2"), Cell::Num(0.5), Cell::Int(128)]).unwrap();
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        assert_eq!(text, "scheme,h,N\nfprk2,5.000000000000000e-1,128\n");
    }
}
