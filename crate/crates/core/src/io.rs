//! CSV serialization of fields, spectra, kernels, lattices, samples and reports.
//!
//! Floats are written with 17 significant digits so values round-trip exactly.
//! Metadata lines start with `#`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::discretization::{Field, Spectrum};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::reconstruction::ReconstructionReport;
use crate::sampling::{Lattice, SampleVector};
use crate::transform::SinchKernel;

/// A float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Input(format!("{other:?}")),
    }
}

fn write_rows<W: Write>(w: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for row in rows {
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

/// `x,y,weight,re,im` per grid node.
pub fn write_field<W: Write>(w: W, f: &Field) -> Result<()> {
    let g = f.grid();
    let rows = g.nodes().iter().zip(g.weights()).zip(f.values()).map(|((z, wt), v)| {
        vec![fmt_f64(z.x()), fmt_f64(z.y()), fmt_f64(*wt), fmt_f64(v.re), fmt_f64(v.im)]
    });
    write_rows(w, &["x", "y", "weight", "re", "im"], rows)
}

/// `t,phi,weight,re,im` per spectral node.
pub fn write_spectrum<W: Write>(w: W, s: &Spectrum) -> Result<()> {
    let g = s.grid();
    let n_phi = g.n_phi();
    let rows = s.coefficients().iter().enumerate().map(|(i, c)| {
        let k = i / n_phi;
        vec![fmt_f64(g.t()[k]), fmt_f64(g.phi()[i % n_phi]), fmt_f64(g.node_weight(k)), fmt_f64(c.re), fmt_f64(c.im)]
    });
    write_rows(w, &["t", "phi", "weight", "re", "im"], rows)
}

/// `rho,value` for the radial sinch table.
pub fn write_sinch_table<W: Write>(w: W, k: &SinchKernel) -> Result<()> {
    write_rows(w, &["rho", "value"], k.table().map(|(r, v)| vec![fmt_f64(r), fmt_f64(v)]))
}

/// Metadata lines then `x,y` per center.
pub fn write_lattice<W: Write>(mut w: W, l: &Lattice) -> Result<()> {
    writeln!(w, "# r={}", fmt_f64(l.r()))?;
    writeln!(w, "# separation={}", fmt_f64(l.separation()))?;
    writeln!(w, "# covering={}", fmt_f64(l.covering()))?;
    writeln!(w, "# multiplicity={}", l.multiplicity())?;
    write_rows(w, &["x", "y"], l.centers().iter().map(|z| vec![fmt_f64(z.x()), fmt_f64(z.y())]))
}

/// Metadata of a lattice file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LatticeFile {
    pub r: Option<f64>,
    pub separation: Option<f64>,
    pub covering: Option<f64>,
    pub multiplicity: Option<usize>,
    pub centers: Vec<Point>,
}

fn parse_f64(s: &str, what: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Input(format!("line {line}: cannot parse {what} from {s:?}")))
}

fn split_comments<R: Read>(mut r: R) -> Result<(Vec<(usize, String)>, String)> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut meta = Vec::new();
    let mut body = String::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(rest) = line.trim_start().strip_prefix('#') {
            meta.push((i + 1, rest.trim().to_string()));
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    Ok((meta, body))
}

fn read_table(body: &str, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
    let found: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if found.len() < header.len() || found.iter().zip(header).any(|(a, b)| a != b) {
        return Err(Error::Input(format!("expected columns {header:?}, found {found:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = header
            .iter()
            .enumerate()
            .map(|(c, name)| parse_f64(rec.get(c).unwrap_or(""), name, i + 2))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn to_point(x: f64, y: f64, line: usize) -> Result<Point> {
    Point::new(x, y).map_err(|e| Error::Input(format!("row {line}: {e}")))
}

pub fn read_lattice<R: Read>(r: R) -> Result<LatticeFile> {
    let (meta, body) = split_comments(r)?;
    let mut out = LatticeFile::default();
    for (line, m) in meta {
        let Some((key, value)) = m.split_once('=') else { continue };
        match key.trim() {
            "r" => out.r = Some(parse_f64(value, "r", line)?),
            "separation" => out.separation = Some(parse_f64(value, "separation", line)?),
            "covering" => out.covering = Some(parse_f64(value, "covering", line)?),
            "multiplicity" => {
                out.multiplicity = Some(
                    value.trim().parse().map_err(|_| Error::Input(format!("line {line}: bad multiplicity")))?,
                )
            }
            _ => {}
        }
    }
    out.centers =
        read_table(&body, &["x", "y"])?.iter().enumerate().map(|(i, r)| to_point(r[0], r[1], i + 1)).collect::<Result<_>>()?;
    Ok(out)
}

/// `x,y,re,im` per lattice center.
pub fn write_samples<W: Write>(w: W, s: &SampleVector) -> Result<()> {
    let rows = s
        .lattice()
        .centers()
        .iter()
        .zip(s.values())
        .map(|(z, v)| vec![fmt_f64(z.x()), fmt_f64(z.y()), fmt_f64(v.re), fmt_f64(v.im)]);
    write_rows(w, &["x", "y", "re", "im"], rows)
}

pub fn read_samples<R: Read>(r: R) -> Result<Vec<(Point, Complex64)>> {
    let (_, body) = split_comments(r)?;
    read_table(&body, &["x", "y", "re", "im"])?
        .iter()
        .enumerate()
        .map(|(i, r)| Ok((to_point(r[0], r[1], i + 1)?, Complex64::new(r[2], r[3]))))
        .collect()
}

/// `n,delta_norm,error_vs_truth` rows and a `#` summary line.
pub fn write_report<W: Write>(mut w: W, report: &ReconstructionReport) -> Result<()> {
    {
        let mut out = csv::Writer::from_writer(&mut w);
        out.write_record(["n", "delta_norm", "error_vs_truth"]).map_err(csv_err)?;
        for (n, d) in report.delta_norms.iter().enumerate() {
            // errors[0] belongs to f_0; the step producing f_{n+1} is row n.
            let err = report.errors.as_ref().and_then(|e| e.get(n + 1)).map(|v| fmt_f64(*v)).unwrap_or_default();
            out.write_record([n.to_string(), fmt_f64(*d), err]).map_err(csv_err)?;
        }
        out.flush()?;
    }
    writeln!(
        w,
        "# gamma_estimate={} converged={} iterations={} fit_r2={}",
        fmt_f64(report.gamma_estimate),
        report.converged,
        report.iterations,
        fmt_f64(report.fit_r2)
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for &v in &[0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let digits = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).count();
            assert_eq!(digits, 17);
        }
    }

    #[test]
    fn samples_round_trip() {
        let text = "x,y,re,im\n0.5,1.5,1.0,-2.0\n-1,0.25,0,0\n";
        let s = read_samples(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].1, Complex64::new(1.0, -2.0));
        assert!(read_samples("x,y,re,im\n0,-1,0,0\n".as_bytes()).is_err());
        assert!(read_samples("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn lattice_metadata_parses() {
        let text = "# r=0.25\n# separation=0.2\n# covering=0.1\n# multiplicity=7\nx,y\n0,1\n";
        let l = read_lattice(text.as_bytes()).unwrap();
        assert_eq!(l.r, Some(0.25));
        assert_eq!(l.multiplicity, Some(7));
        assert_eq!(l.centers, vec![Point::I]);
    }
}
