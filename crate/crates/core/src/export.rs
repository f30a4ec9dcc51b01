//! Matrix Market and CSV writers.

use std::io::Write;

use crate::solver::Distribution;
use crate::statespace::Generator;

/// Coordinate-format, real, general Matrix Market dump (1-based indices,
/// diagonal included).
pub fn write_matrix_market<W: Write>(gen: &Generator, mut out: W) -> std::io::Result<()> {
    let entries = gen.triplets();
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", gen.dim(), gen.dim(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(out, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// `species..., probability` rows; a sink, if any, is written as `sink`.
pub fn write_distribution_csv<W: Write>(dist: &Distribution, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = dist.space.species().to_vec();
    header.push("probability".into());
    w.write_record(&header)?;
    for (x, p) in dist.space.states().iter().zip(&dist.p) {
        let mut row: Vec<String> = x.iter().map(u32::to_string).collect();
        row.push(format!("{p:e}"));
        w.write_record(&row)?;
    }
    if let Some(s) = dist.space.sink() {
        let mut row = vec!["sink".to_string(); dist.space.species().len()];
        row.push(format!("{:e}", dist.p[s]));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `species..., frequency` rows for an empirical histogram.
pub fn write_histogram_csv<'a, W, I>(species: &[String], hist: I, out: W) -> csv::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (&'a Vec<u32>, &'a f64)>,
{
    let mut w = csv::Writer::from_writer(out);
    let mut header = species.to_vec();
    header.push("frequency".into());
    w.write_record(&header)?;
    for (x, f) in hist {
        let mut row: Vec<String> = x.iter().map(u32::to_string).collect();
        row.push(format!("{f:e}"));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Two-column numeric table with a header.
pub fn write_series_csv<W: Write>(names: [&str; 2], rows: &[(f64, f64)], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(names)?;
    for (a, b) in rows {
        w.write_record([format!("{a:e}"), format!("{b:e}")])?;
    }
    w.flush()?;
    Ok(())
}
