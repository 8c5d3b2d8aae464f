//! Sample tables, spectrum files, cluster reports, histograms and the
//! synthetic dataset generators.
//!
//! Output files are tab-separated with a `#` header line. Floats are
//! written in shortest round-trip form.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::moments::Sample;

/// Column selection `TOTAL:X:F[:W]`, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnSpec {
    pub total_columns: usize,
    pub x_column: usize,
    pub f_column: usize,
    pub weight_column: Option<usize>,
}

impl ColumnSpec {
    /// `f_column` may equal `x_column` (the `f = x` pencil); the weight
    /// column must differ from both.
    pub fn new(total_columns: usize, x_column: usize, f_column: usize, weight_column: Option<usize>) -> Result<Self> {
        let spec = Self {
            total_columns,
            x_column,
            f_column,
            weight_column,
        };
        for c in [Some(x_column), Some(f_column), weight_column].into_iter().flatten() {
            if c >= total_columns {
                return Err(Error::ColumnSpec(format!("column {c} outside 0..{total_columns}")));
            }
        }
        if let Some(w) = weight_column {
            if w == x_column || w == f_column {
                return Err(Error::ColumnSpec(format!("weight column {w} repeats x or f")));
            }
        }
        Ok(spec)
    }
}

impl FromStr for ColumnSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(Error::ColumnSpec(format!("expected TOTAL:X:F[:W], got {s:?}")));
        }
        let nums = parts
            .iter()
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::ColumnSpec(format!("non-numeric entry in {s:?}")))?;
        ColumnSpec::new(nums[0], nums[1], nums[2], nums.get(3).copied())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_error(path: Option<&Path>, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.map(Path::to_path_buf),
        line,
        message: message.into(),
    }
}

/// Rows of numbers from tab- or comma-separated text. `#` lines and blank
/// lines are skipped; the delimiter is taken from the first data line.
pub fn read_table<R: Read>(mut reader: R, path: Option<&Path>) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| parse_error(path, 0, e.to_string()))?;
    let delimiter = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| if l.contains('\t') { '\t' } else { ',' })
        .unwrap_or('\t');
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let values = trimmed
            .split(delimiter)
            .enumerate()
            .map(|(c, field)| {
                let field = field.trim();
                field
                    .parse::<f64>()
                    .map_err(|_| parse_error(path, line, format!("column {c}: cannot parse {field:?} as a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line, values));
    }
    Ok(rows)
}

fn sample_from_row(values: &[f64], spec: &ColumnSpec, path: Option<&Path>, line: usize) -> Result<Sample> {
    if values.len() != spec.total_columns {
        return Err(Error::ColumnSpec(format!(
            "{}line {line}: expected {} columns, found {}",
            path.map(|p| format!("{}: ", p.display())).unwrap_or_default(),
            spec.total_columns,
            values.len()
        )));
    }
    let w = spec.weight_column.map_or(1.0, |c| values[c]);
    Sample::new(values[spec.x_column], values[spec.f_column], w)
        .map_err(|e| parse_error(path, line, e.to_string()))
}

/// Samples in file order from any reader.
pub fn parse_samples<R: Read>(reader: R, spec: &ColumnSpec, path: Option<&Path>) -> Result<Vec<Sample>> {
    read_table(reader, path)?
        .iter()
        .map(|(line, values)| sample_from_row(values, spec, path, *line))
        .collect()
}

pub fn read_samples(path: &Path, spec: &ColumnSpec) -> Result<Vec<Sample>> {
    let file = File::open(path).map_err(io_err(path))?;
    parse_samples(BufReader::new(file), spec, Some(path))
}

/// Writes through a temporary file in the target directory and renames it
/// into place only when `fill` succeeds.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err(path))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut buf)?;
        buf.flush().map_err(io_err(path))?;
    }
    tmp.persist(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, |w| w.write_all(text.as_bytes()).map_err(io_err(path)))
}

fn fmt_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push('\t');
        }
        let _ = write!(out, "{v:?}");
    }
    out.push('\n');
}

/// One row of a spectrum file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub index: usize,
    pub lambda: f64,
    pub x_psi: f64,
    pub weight: f64,
    /// NaN when not computed.
    pub weight_k: f64,
}

pub const SPECTRUM_HEADER: &str = "# index\tlambda\tx_psi\tw\tw_K";

pub fn format_spectrum(rows: &[SpectrumRow]) -> String {
    let mut out = String::from(SPECTRUM_HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{}\t", r.index);
        fmt_row(&mut out, &[r.lambda, r.x_psi, r.weight, r.weight_k]);
    }
    out
}

pub fn write_spectrum(path: &Path, rows: &[SpectrumRow]) -> Result<()> {
    write_text(path, &format_spectrum(rows))
}

pub fn parse_spectrum<R: Read>(reader: R, path: Option<&Path>) -> Result<Vec<SpectrumRow>> {
    read_table(reader, path)?
        .into_iter()
        .map(|(line, v)| {
            if v.len() != 5 {
                return Err(parse_error(path, line, format!("spectrum rows have 5 columns, found {}", v.len())));
            }
            if v[0] < 0.0 || v[0].fract() != 0.0 {
                return Err(parse_error(path, line, format!("bad index {}", v[0])));
            }
            Ok(SpectrumRow {
                index: v[0] as usize,
                lambda: v[1],
                x_psi: v[2],
                weight: v[3],
                weight_k: v[4],
            })
        })
        .collect()
}

pub fn read_spectrum(path: &Path) -> Result<Vec<SpectrumRow>> {
    let file = File::open(path).map_err(io_err(path))?;
    parse_spectrum(BufReader::new(file), Some(path))
}

/// `m`, `lambda_G`, `w_G` per cluster.
pub fn write_cluster_report(path: &Path, values: &[f64], weights: &[f64]) -> Result<()> {
    let mut out = String::from("# m\tlambda_G\tw_G\n");
    for (m, (v, w)) in values.iter().zip(weights).enumerate() {
        let _ = write!(out, "{m}\t");
        fmt_row(&mut out, &[*v, *w]);
    }
    write_text(path, &out)
}

/// Tab-separated numeric table with a header naming the columns.
pub fn write_columns(path: &Path, names: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = format!("# {}\n", names.join("\t"));
    for r in rows {
        fmt_row(&mut out, r);
    }
    write_text(path, &out)
}

/// Equal-width bins over `[min, max]` of `values`; returns
/// `(bin_center, mass)`. The maximum lands in the last bin.
pub fn histogram(values: &[f64], weights: &[f64], bins: usize) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.len() != weights.len() {
        return Err(Error::invalid(format!("{} values but {} weights", values.len(), weights.len())));
    }
    if bins == 0 {
        return Err(Error::invalid("bins must be at least 1"));
    }
    if values.iter().chain(weights).any(|v| !v.is_finite()) {
        return Err(Error::invalid("histogram input must be finite"));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (start, width) = if hi > lo {
        (lo, (hi - lo) / bins as f64)
    } else {
        (lo - 0.5, 1.0 / bins as f64)
    };
    let mut mass = vec![0.0; bins];
    for (v, w) in values.iter().zip(weights) {
        let b = if hi > lo && *v == hi {
            bins - 1
        } else {
            (((v - start) / width).floor() as usize).min(bins - 1)
        };
        mass[b] += w;
    }
    Ok(mass
        .into_iter()
        .enumerate()
        .map(|(b, m)| (start + (b as f64 + 0.5) * width, m))
        .collect())
}

pub fn write_histogram(path: &Path, bins: &[(f64, f64)]) -> Result<()> {
    let rows: Vec<Vec<f64>> = bins.iter().map(|(c, m)| vec![*c, *m]).collect();
    write_columns(path, &["bin_center", "mass"], &rows)
}

/// Piecewise-linear degradation `C(N)`: slope `-slope1` up to `n_break`,
/// `-slope2` after, `C(0) = 1`, optional uniform noise of amplitude
/// `noise`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStageParams {
    pub samples: usize,
    pub n_total: f64,
    pub n_break: f64,
    pub slope1: f64,
    pub slope2: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for TwoStageParams {
    fn default() -> Self {
        Self {
            samples: 10000,
            n_total: 1000.0,
            n_break: 800.0,
            slope1: 1e-4,
            slope2: 5e-4,
            noise: 0.0,
            seed: 0,
        }
    }
}

pub fn two_stage_rows(p: &TwoStageParams) -> Result<Vec<(f64, f64)>> {
    if p.samples < 2 {
        return Err(Error::invalid("two-stage model needs at least 2 samples"));
    }
    if ![p.n_total, p.n_break, p.slope1, p.slope2, p.noise].iter().all(|v| v.is_finite()) {
        return Err(Error::invalid("two-stage parameters must be finite"));
    }
    if !(0.0 < p.n_break && p.n_break < p.n_total) {
        return Err(Error::invalid(format!(
            "break point {} must lie strictly inside (0, {})",
            p.n_break, p.n_total
        )));
    }
    if p.noise < 0.0 {
        return Err(Error::invalid("noise amplitude must be non-negative"));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(p.seed);
    let c_break = 1.0 - p.slope1 * p.n_break;
    Ok((0..p.samples)
        .map(|l| {
            let n = p.n_total * l as f64 / (p.samples - 1) as f64;
            let mut c = if n <= p.n_break {
                1.0 - p.slope1 * n
            } else {
                c_break - p.slope2 * (n - p.n_break)
            };
            if p.noise > 0.0 {
                c += rng.random_range(-p.noise..=p.noise);
            }
            (n, c)
        })
        .collect())
}

pub fn generate_two_stage(path: &Path, p: &TwoStageParams) -> Result<()> {
    let rows: Vec<Vec<f64>> = two_stage_rows(p)?.into_iter().map(|(n, c)| vec![n, c]).collect();
    write_columns(path, &["N", "C"], &rows)
}

/// 10001 rows: `1, x, x^2, ..., x^6, 1/(1+25x^2), weight` on a uniform
/// grid over `[-1, 1]` with trapezoid weights summing to 2.
pub fn runge_rows() -> Vec<[f64; 9]> {
    let m = 10001;
    (0..m)
        .map(|l| {
            let x = if l == (m - 1) / 2 { 0.0 } else { -1.0 + 2.0 * l as f64 / (m - 1) as f64 };
            let w = if l == 0 || l == m - 1 { 1.0 } else { 2.0 } / (m - 1) as f64;
            let mut row = [0.0; 9];
            let mut p = 1.0;
            for v in row.iter_mut().take(7) {
                *v = p;
                p *= x;
            }
            row[7] = 1.0 / (1.0 + 25.0 * x * x);
            row[8] = w;
            row
        })
        .collect()
}

pub fn generate_runge(path: &Path) -> Result<()> {
    let rows: Vec<Vec<f64>> = runge_rows().iter().map(|r| r.to_vec()).collect();
    write_columns(path, &["1", "x", "x2", "x3", "x4", "x5", "x6", "runge", "weight"], &rows)
}

/// `f -> df/dx` over samples sorted by `x`: centred differences inside,
/// one-sided at the ends. The measure becomes `dx`: each sample carries
/// its trapezoid cell width.
pub fn derivative_dx(samples: &[Sample]) -> Result<Vec<Sample>> {
    if samples.len() < 2 {
        return Err(Error::invalid("derivative needs at least 2 samples"));
    }
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.x.total_cmp(&b.x));
    if let Some(w) = s.windows(2).find(|w| w[0].x == w[1].x) {
        return Err(Error::InvalidMeasure(format!("repeated x = {} in derivative input", w[0].x)));
    }
    let m = s.len();
    (0..m)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(m - 1));
            let slope = (s[b].f - s[a].f) / (s[b].x - s[a].x);
            Sample::new(s[i].x, slope, (s[b].x - s[a].x) / 2.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn column_spec_parsing() {
        let s: ColumnSpec = "9:1:7:8".parse().unwrap();
        assert_eq!(s, ColumnSpec::new(9, 1, 7, Some(8)).unwrap());
        assert_eq!("2:0:1".parse::<ColumnSpec>().unwrap().weight_column, None);
        assert!("9:1:1:8".parse::<ColumnSpec>().is_ok());
        for bad in ["9:1", "9:1:9", "9:1:7:1", "a:b:c", "3:0:1:2:3"] {
            assert!(matches!(bad.parse::<ColumnSpec>(), Err(Error::ColumnSpec(_))), "{bad}");
        }
    }

    #[test]
    fn parse_tab_file() {
        let spec = ColumnSpec::new(2, 0, 1, None).unwrap();
        let s = parse_samples("0\t1\n# note\n\n1\t2\n2\t5\n".as_bytes(), &spec, None).unwrap();
        assert_eq!(s, vec![Sample::unit(0.0, 1.0).unwrap(), Sample::unit(1.0, 2.0).unwrap(), Sample::unit(2.0, 5.0).unwrap()]);
        let s = parse_samples("0,1\n1, 2\n".as_bytes(), &spec, None).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let spec = ColumnSpec::new(2, 0, 1, None).unwrap();
        match parse_samples("abc\t1\n".as_bytes(), &spec, None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        match parse_samples("0\t1\n# c\n2\tx\n".as_bytes(), &spec, None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_samples("0\t1\t2\n".as_bytes(), &spec, None), Err(Error::ColumnSpec(_))));
        let wspec = ColumnSpec::new(3, 0, 1, Some(2)).unwrap();
        assert!(matches!(parse_samples("0\t1\t-2\n".as_bytes(), &wspec, None), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn runge_dataset() {
        let rows = runge_rows();
        assert_eq!(rows.len(), 10001);
        assert_eq!(rows[0].len(), 9);
        let total: f64 = rows.iter().map(|r| r[8]).sum();
        assert!((total - 2.0).abs() < 1e-12);
        assert_eq!(rows[5000][1], 0.0);
        assert_eq!(rows[5000][7], 1.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runge.tsv");
        generate_runge(&path).unwrap();
        let spec: ColumnSpec = "9:1:7:8".parse().unwrap();
        let s = read_samples(&path, &spec).unwrap();
        assert_eq!(s.len(), 10001);
        assert_eq!(s[10000].weight, 1e-4);
        assert_eq!(s[5000].f, 1.0);
    }

    #[test]
    fn two_stage_model() {
        let rows = two_stage_rows(&TwoStageParams::default()).unwrap();
        assert_eq!(rows.len(), 10000);
        assert_eq!(rows[0], (0.0, 1.0));
        let (n_last, c_last) = rows[9999];
        assert_eq!(n_last, 1000.0);
        assert!((c_last - (1.0 - 0.18)).abs() < 1e-12);
        let c800: f64 = 1.0 - 1e-4 * 800.0;
        assert!((c800 - 0.92).abs() < 1e-15);
        let samples: Vec<Sample> = rows.iter().map(|&(n, c)| Sample::unit(n, c).unwrap()).collect();
        let d = derivative_dx(&samples).unwrap();
        for s in &d {
            if (s.x - 800.0).abs() > 1.0 {
                let want = if s.x < 800.0 { -1e-4 } else { -5e-4 };
                assert!((s.f - want).abs() < 1e-9 * want.abs(), "{s:?}");
            }
        }
        let measure: f64 = d.iter().map(|s| s.weight).sum();
        assert!((measure - 1000.0).abs() < 1e-9);
        for bad in [0.0, 1000.0, -5.0] {
            let p = TwoStageParams { n_break: bad, ..Default::default() };
            assert!(two_stage_rows(&p).is_err());
        }
        let noisy = TwoStageParams { noise: 1e-3, seed: 7, ..Default::default() };
        assert_eq!(two_stage_rows(&noisy).unwrap(), two_stage_rows(&noisy).unwrap());
    }

    #[test]
    fn histogram_cases() {
        let h = histogram(&[3.0, 3.0], &[1.5, 2.0], 5).unwrap();
        assert_eq!(h.iter().filter(|(_, m)| *m > 0.0).count(), 1);
        assert_eq!(h.iter().map(|b| b.1).sum::<f64>(), 3.5);
        let values: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let h = histogram(&values, &vec![1.0; 100], 4).unwrap();
        for (_, m) in &h {
            assert!((m - 25.0).abs() <= 1.0);
        }
        assert_eq!(h.iter().map(|b| b.1).sum::<f64>(), 100.0);
        assert!(matches!(histogram(&[], &[], 3), Err(Error::EmptyInput)));
        let h = histogram(&[0.0, 1.0], &[1.0, 1.0], 3).unwrap();
        assert_eq!(h[2].1, 1.0);
    }

    #[test]
    fn atomic_write_leaves_no_partial_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.tsv");
        let r = write_atomic(&path, |w| {
            w.write_all(b"partial").unwrap();
            Err(Error::EmptyInput)
        });
        assert!(r.is_err());
        assert!(!path.exists());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    proptest! {
        #[test]
        fn spectrum_round_trip(values in proptest::collection::vec((any::<f64>(), any::<f64>(), any::<f64>(), any::<f64>()), 1..20)) {
            let rows: Vec<SpectrumRow> = values
                .iter()
                .enumerate()
                .map(|(i, v)| SpectrumRow { index: i, lambda: v.0, x_psi: v.1, weight: v.2, weight_k: v.3 })
                .collect();
            let text = format_spectrum(&rows);
            let back = parse_spectrum(text.as_bytes(), None).unwrap();
            prop_assert_eq!(back.len(), rows.len());
            for (a, b) in rows.iter().zip(&back) {
                for (x, y) in [(a.lambda, b.lambda), (a.x_psi, b.x_psi), (a.weight, b.weight), (a.weight_k, b.weight_k)] {
                    prop_assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
                }
            }
        }

        #[test]
        fn histogram_conserves_integer_mass(values in proptest::collection::vec(-1e3f64..1e3, 1..200), bins in 1usize..40) {
            let weights: Vec<f64> = (0..values.len()).map(|i| (i % 7) as f64).collect();
            let h = histogram(&values, &weights, bins).unwrap();
            prop_assert_eq!(h.len(), bins);
            prop_assert_eq!(h.iter().map(|b| b.1).sum::<f64>(), weights.iter().sum::<f64>());
        }
    }
}
