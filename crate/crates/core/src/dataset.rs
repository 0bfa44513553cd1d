//! Numeric datasets, label vectors, CSV ingestion and the synthetic
//! geometries used to study distance distributions.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CoordinateSystem {
    #[default]
    Cartesian,
    /// Columns are `(r, phi, theta)`: radius, azimuth, polar angle.
    Spherical,
}

impl fmt::Display for CoordinateSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoordinateSystem::Cartesian => f.write_str("cartesian"),
            CoordinateSystem::Spherical => f.write_str("spherical"),
        }
    }
}

/// `n` observations by `d` finite features, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix<T> {
    rows: usize,
    cols: usize,
    values: Vec<T>,
    feature_names: Vec<String>,
    coordinate_system: CoordinateSystem,
}

impl<T: Scalar> DataMatrix<T> {
    pub fn new(
        rows: usize,
        cols: usize,
        values: Vec<T>,
        feature_names: Vec<String>,
        coordinate_system: CoordinateSystem,
    ) -> Result<Self> {
        if rows < 2 {
            return Err(Error::InvalidArgument(format!(
                "a data matrix needs at least 2 rows, got {rows}"
            )));
        }
        if cols < 1 {
            return Err(Error::InvalidArgument("a data matrix needs at least 1 column".into()));
        }
        if values.len() != rows * cols {
            return Err(Error::SizeMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        if feature_names.len() != cols {
            return Err(Error::SizeMismatch(format!(
                "{} feature names for {cols} columns",
                feature_names.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
                value: values[pos].to_string(),
            });
        }
        Ok(DataMatrix {
            rows,
            cols,
            values,
            feature_names,
            coordinate_system,
        })
    }

    /// Builds a Cartesian matrix with generated feature names `x1..xd`.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n * d);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::Ragged {
                    row: i,
                    expected: d,
                    found: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        let names = (1..=d).map(|j| format!("x{j}")).collect();
        Self::new(n, d, values, names, CoordinateSystem::Cartesian)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn coordinate_system(&self) -> CoordinateSystem {
        self.coordinate_system
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks_exact(self.cols)
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.iter_rows().map(|r| r[j]).collect()
    }

    /// Converts every value to another scalar type.
    pub fn cast<U: Scalar>(&self) -> DataMatrix<U> {
        DataMatrix {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|v| U::lit(v.as_f64())).collect(),
            feature_names: self.feature_names.clone(),
            coordinate_system: self.coordinate_system,
        }
    }
}

/// Cluster labels `1..=k`, each label used at least once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct LabelVector {
    labels: Vec<usize>,
    k: usize,
}

impl LabelVector {
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidLabels("empty label vector".into()));
        }
        let k = *labels.iter().max().unwrap_or(&0);
        if labels.contains(&0) {
            return Err(Error::InvalidLabels("labels must be positive".into()));
        }
        let mut seen = vec![false; k];
        for &l in &labels {
            seen[l - 1] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidLabels(format!(
                "label {} in 1..{k} is never used",
                missing + 1
            )));
        }
        Ok(LabelVector { labels, k })
    }

    /// Maps arbitrary integer labels onto `1..=k`, preserving their sort order.
    pub fn from_raw(raw: &[i64]) -> Result<Self> {
        let distinct: BTreeMap<i64, usize> = raw
            .iter()
            .copied()
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, i + 1))
            .collect();
        Self::new(raw.iter().map(|v| distinct[v]).collect())
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Cluster sizes indexed by `label - 1`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l - 1] += 1;
        }
        sizes
    }

    /// Observation indices per cluster, indexed by `label - 1`.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l - 1].push(i);
        }
        out
    }
}

impl TryFrom<Vec<usize>> for LabelVector {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        LabelVector::new(v)
    }
}

impl From<LabelVector> for Vec<usize> {
    fn from(l: LabelVector) -> Self {
        l.labels
    }
}

/// Which CSV column holds labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for ColumnRef {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        })
    }
}

/// Reads a comma-separated numeric table. Row order is preserved and the
/// label column, when given, is split off into a [`LabelVector`].
pub fn load_csv<T: Scalar>(
    path: impl AsRef<Path>,
    has_header: bool,
    label_column: Option<&ColumnRef>,
) -> Result<(DataMatrix<T>, Option<LabelVector>)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, has_header, label_column)
}

pub fn parse_csv<T: Scalar>(
    text: &str,
    has_header: bool,
    label_column: Option<&ColumnRef>,
) -> Result<(DataMatrix<T>, Option<LabelVector>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header: Option<Vec<String>> = if has_header {
        Some(reader.headers()?.iter().map(str::to_string).collect())
    } else {
        None
    };

    let records: Vec<csv::StringRecord> = reader.records().collect::<std::result::Result<_, _>>()?;
    let records: Vec<_> = records
        .into_iter()
        .filter(|r| !(r.len() == 1 && r[0].is_empty()))
        .collect();
    if records.is_empty() {
        return Err(Error::Empty("CSV file has no data rows".into()));
    }
    let width = header.as_ref().map_or(records[0].len(), Vec::len);
    let data_row_offset = usize::from(has_header);
    for (i, r) in records.iter().enumerate() {
        if r.len() != width {
            return Err(Error::Ragged {
                row: i + data_row_offset,
                expected: width,
                found: r.len(),
            });
        }
    }

    let label_idx = match label_column {
        None => None,
        Some(ColumnRef::Index(i)) if *i < width => Some(*i),
        Some(ColumnRef::Index(i)) => {
            return Err(Error::InvalidArgument(format!(
                "label column {i} out of range for {width} columns"
            )))
        }
        Some(ColumnRef::Name(name)) => {
            let names = header.as_ref().ok_or_else(|| {
                Error::InvalidArgument(format!("label column {name:?} given by name but file has no header"))
            })?;
            Some(names.iter().position(|h| h == name).ok_or_else(|| {
                Error::InvalidArgument(format!("no column named {name:?}"))
            })?)
        }
    };

    let feature_cols: Vec<usize> = (0..width).filter(|c| Some(*c) != label_idx).collect();
    if feature_cols.is_empty() {
        return Err(Error::InvalidArgument("no feature columns".into()));
    }
    let names = match &header {
        Some(h) => feature_cols.iter().map(|&c| h[c].clone()).collect(),
        None => feature_cols.iter().map(|c| format!("x{}", c + 1)).collect(),
    };

    let mut values = Vec::with_capacity(records.len() * feature_cols.len());
    let mut raw_labels = Vec::new();
    for (i, r) in records.iter().enumerate() {
        let row = i + data_row_offset;
        for &c in &feature_cols {
            values.push(parse_finite::<T>(&r[c], row, c)?);
        }
        if let Some(lc) = label_idx {
            raw_labels.push(parse_label(&r[lc], row, lc)?);
        }
    }
    let data = DataMatrix::new(
        records.len(),
        feature_cols.len(),
        values,
        names,
        CoordinateSystem::Cartesian,
    )?;
    let labels = match label_idx {
        Some(_) => Some(LabelVector::from_raw(&raw_labels)?),
        None => None,
    };
    Ok((data, labels))
}

fn parse_finite<T: Scalar>(cell: &str, row: usize, col: usize) -> Result<T> {
    let v: f64 = cell.parse().map_err(|_| Error::Parse {
        row,
        col,
        value: cell.to_string(),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFinite {
            row,
            col,
            value: cell.to_string(),
        });
    }
    Ok(T::lit(v))
}

fn parse_label(cell: &str, row: usize, col: usize) -> Result<i64> {
    if let Ok(v) = cell.parse::<i64>() {
        return Ok(v);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() && v.fract() == 0.0 => Ok(v as i64),
        _ => Err(Error::Parse {
            row,
            col,
            value: cell.to_string(),
        }),
    }
}

/// Reads a single-column label file (optional header line).
pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelVector> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labels(&text)
}

pub fn parse_labels(text: &str) -> Result<LabelVector> {
    let mut raw = Vec::new();
    for (row, line) in text.lines().enumerate() {
        let cell = line.trim().trim_matches('"');
        if cell.is_empty() {
            continue;
        }
        match parse_label(cell, row, 0) {
            Ok(v) => raw.push(v),
            Err(e) if row == 0 => {
                // header line
                let _ = e;
            }
            Err(e) => return Err(e),
        }
    }
    if raw.is_empty() {
        return Err(Error::Empty("label file has no labels".into()));
    }
    LabelVector::from_raw(&raw)
}

/// Writes the matrix as CSV with a header; appends a `label` column when
/// labels are given. Values use the shortest round-trip representation.
pub fn write_csv<T: Scalar, W: std::io::Write>(
    out: W,
    data: &DataMatrix<T>,
    labels: Option<&LabelVector>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = data.feature_names.clone();
    if labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for (i, row) in data.iter_rows().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(l) = labels {
            rec.push(l.labels()[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        ];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm > 1e-12 {
            return [v[0] / norm, v[1] / norm, v[2] / norm];
        }
    }
}

fn labelled<T: Scalar>(
    n: usize,
    d: usize,
    values: Vec<f64>,
    names: &[&str],
    labels: Vec<usize>,
) -> Result<(DataMatrix<T>, LabelVector)> {
    let data = DataMatrix::new(
        n,
        d,
        values.into_iter().map(T::lit).collect(),
        names.iter().map(|s| s.to_string()).collect(),
        CoordinateSystem::Cartesian,
    )?;
    Ok((data, LabelVector::new(labels)?))
}

/// Two 2-D Gaussian clusters of `n_per_cluster` points each. Both features
/// have standard deviation `sd`; the first feature is centred at 0 and the
/// second at `-shift` (cluster 1) and `+shift` (cluster 2).
pub fn generate_two_gaussians<T: Scalar>(
    n_per_cluster: usize,
    shift: f64,
    sd: f64,
    seed: u64,
) -> Result<(DataMatrix<T>, LabelVector)> {
    if n_per_cluster < 2 {
        return Err(Error::InvalidArgument("n_per_cluster must be at least 2".into()));
    }
    if !(sd > 0.0 && sd.is_finite()) || !shift.is_finite() {
        return Err(Error::InvalidArgument("sd must be positive and shift finite".into()));
    }
    let mut rng = rng_for(seed);
    let n = 2 * n_per_cluster;
    let mut values = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for (label, centre) in [(1, -shift), (2, shift)] {
        for _ in 0..n_per_cluster {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            values.push(a * sd);
            values.push(centre + b * sd);
            labels.push(label);
        }
    }
    labelled(n, 2, values, &["x", "y"], labels)
}

/// Radius of the Atom core ball.
pub const ATOM_CORE_RADIUS: f64 = 1.0;
/// Mean radius of the Atom shell; shell radii are uniform within ±5%.
pub const ATOM_SHELL_RADIUS: f64 = 30.0;
pub const ATOM_SHELL_THICKNESS: f64 = 0.05;
pub const GOLFBALL_RADIUS: f64 = 1.0;

/// Atom geometry: class 1 is a solid ball around the origin, class 2 a thin
/// hollow shell far outside it. The first `n/2` rows are the core.
pub fn generate_atom<T: Scalar>(n: usize, seed: u64) -> Result<(DataMatrix<T>, LabelVector)> {
    if n < 20 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "atom needs an even n >= 20, got {n}"
        )));
    }
    let mut rng = rng_for(seed);
    let half = n / 2;
    let mut values = Vec::with_capacity(3 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..half {
        let dir = unit_vector(&mut rng);
        let u: f64 = rng.random();
        let r = ATOM_CORE_RADIUS * u.cbrt();
        values.extend(dir.iter().map(|c| c * r));
        labels.push(1);
    }
    for _ in 0..half {
        let dir = unit_vector(&mut rng);
        let u: f64 = rng.random_range(-1.0..=1.0);
        let r = ATOM_SHELL_RADIUS * (1.0 + ATOM_SHELL_THICKNESS * u);
        values.extend(dir.iter().map(|c| c * r));
        labels.push(2);
    }
    labelled(n, 3, values, &["x", "y", "z"], labels)
}

/// Points uniform on the surface of a sphere of radius [`GOLFBALL_RADIUS`].
pub fn generate_golfball<T: Scalar>(n: usize, seed: u64) -> Result<DataMatrix<T>> {
    if n < 20 {
        return Err(Error::InvalidArgument(format!("golfball needs n >= 20, got {n}")));
    }
    let mut rng = rng_for(seed);
    let mut values = Vec::with_capacity(3 * n);
    for _ in 0..n {
        let dir = unit_vector(&mut rng);
        values.extend(dir.iter().map(|c| T::lit(c * GOLFBALL_RADIUS)));
    }
    DataMatrix::new(
        n,
        3,
        values,
        vec!["x".into(), "y".into(), "z".into()],
        CoordinateSystem::Cartesian,
    )
}

/// Converts 3-D Cartesian rows to `(r, phi, theta)`: `theta` is the polar
/// angle from +z in `[0, pi]`, `phi` the azimuth in `(-pi, pi]`. The origin
/// maps to all zeros.
pub fn to_spherical<T: Scalar>(m: &DataMatrix<T>) -> Result<DataMatrix<T>> {
    if m.cols != 3 || m.coordinate_system != CoordinateSystem::Cartesian {
        return Err(Error::InvalidArgument(
            "to_spherical needs a 3-column Cartesian matrix".into(),
        ));
    }
    let mut values = Vec::with_capacity(m.values.len());
    for row in m.iter_rows() {
        let (x, y, z) = (row[0], row[1], row[2]);
        let r = (x * x + y * y + z * z).sqrt();
        if r == T::zero() {
            values.extend([T::zero(); 3]);
            continue;
        }
        let mut phi = y.atan2(x);
        if phi == -T::PI() {
            phi = T::PI();
        }
        let c = (z / r).max(-T::one()).min(T::one());
        values.extend([r, phi, c.acos()]);
    }
    DataMatrix::new(
        m.rows,
        3,
        values,
        vec!["r".into(), "phi".into(), "theta".into()],
        CoordinateSystem::Spherical,
    )
}

/// Inverse of [`to_spherical`].
pub fn to_cartesian<T: Scalar>(m: &DataMatrix<T>) -> Result<DataMatrix<T>> {
    if m.cols != 3 || m.coordinate_system != CoordinateSystem::Spherical {
        return Err(Error::InvalidArgument(
            "to_cartesian needs a 3-column spherical matrix".into(),
        ));
    }
    let mut values = Vec::with_capacity(m.values.len());
    for row in m.iter_rows() {
        let (r, phi, theta) = (row[0], row[1], row[2]);
        let st = theta.sin();
        values.extend([r * st * phi.cos(), r * st * phi.sin(), r * theta.cos()]);
    }
    DataMatrix::new(
        m.rows,
        3,
        values,
        vec!["x".into(), "y".into(), "z".into()],
        CoordinateSystem::Cartesian,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::mean_sd;

    #[test]
    fn parses_three_row_csv() {
        let (m, l) = parse_csv::<f64>("x,y\n0,0\n1,0\n0,1\n", true, None).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 2));
        assert_eq!(m.row(2), &[0.0, 1.0]);
        assert_eq!(m.feature_names(), &["x", "y"]);
        assert!(l.is_none());
    }

    #[test]
    fn splits_off_label_column() {
        let text = "x,y,c\n0,0,1\n1,0,1\n0,1,2\n";
        let (m, l) = parse_csv::<f64>(text, true, Some(&ColumnRef::Name("c".into()))).unwrap();
        assert_eq!(m.cols(), 2);
        let l = l.unwrap();
        assert_eq!(l.k(), 2);
        assert_eq!(l.labels(), &[1, 1, 2]);
    }

    #[test]
    fn nan_cell_is_reported() {
        let err = parse_csv::<f64>("x,y\n0,0\n1,NaN\n", true, None).unwrap_err();
        match err {
            Error::NonFinite { row, col, value } => {
                assert_eq!((row, col), (2, 1));
                assert_eq!(value, "NaN");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_and_empty_files_fail() {
        assert!(matches!(
            parse_csv::<f64>("1,2\n3\n", false, None),
            Err(Error::Ragged { row: 1, .. })
        ));
        assert!(matches!(parse_csv::<f64>("", false, None), Err(Error::Empty(_))));
        assert!(matches!(
            parse_csv::<f64>("1,x\n", false, None),
            Err(Error::Parse { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let (m, l) = generate_two_gaussians::<f64>(5, 0.2, 0.1, 3).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &m, Some(&l)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let (m2, l2) = parse_csv::<f64>(&text, true, Some(&ColumnRef::Name("label".into()))).unwrap();
        assert_eq!(m.values(), m2.values());
        assert_eq!(l, l2.unwrap());
    }

    #[test]
    fn label_vector_rules() {
        assert!(LabelVector::new(vec![1, 3]).is_err());
        assert!(LabelVector::new(vec![0, 1]).is_err());
        let l = LabelVector::from_raw(&[7, -1, 7]).unwrap();
        assert_eq!(l.labels(), &[2, 1, 2]);
        assert_eq!(l.sizes(), vec![1, 2]);
    }

    #[test]
    fn zero_shift_clusters_are_centred() {
        let (m, l) = generate_two_gaussians::<f64>(250, 0.0, 0.1, 11).unwrap();
        let se = 0.1 / (250f64).sqrt();
        for members in l.members() {
            let ys: Vec<f64> = members.iter().map(|&i| m.row(i)[1]).collect();
            let (mean, _) = mean_sd(&ys);
            assert!(mean.abs() < 3.0 * se, "mean {mean}");
        }
    }

    #[test]
    fn two_gaussian_spread_matches_request() {
        let sd = 0.1;
        let (m, l) = generate_two_gaussians::<f64>(2000, 0.3, sd, 5).unwrap();
        // SE of a sample sd is about sd / sqrt(2n).
        let se = sd / (2.0 * 2000.0f64).sqrt();
        for (label, members) in l.members().into_iter().enumerate() {
            let centre = if label == 0 { -0.3 } else { 0.3 };
            for j in 0..2 {
                let col: Vec<f64> = members.iter().map(|&i| m.row(i)[j]).collect();
                let (mean, s) = mean_sd(&col);
                assert!((s - sd).abs() < 3.0 * se, "sd {s}");
                let expected = if j == 0 { 0.0 } else { centre };
                assert!((mean - expected).abs() < 3.0 * sd / (2000f64).sqrt());
            }
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = generate_atom::<f64>(40, 9).unwrap();
        let b = generate_atom::<f64>(40, 9).unwrap();
        assert_eq!(a, b);
        let c = generate_atom::<f64>(40, 10).unwrap();
        assert_ne!(a.0, c.0);
        assert_eq!(
            generate_golfball::<f32>(30, 1).unwrap(),
            generate_golfball::<f32>(30, 1).unwrap()
        );
    }

    #[test]
    fn atom_shell_encloses_core() {
        let (m, l) = generate_atom::<f64>(400, 2).unwrap();
        let radius = |r: &[f64]| (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        let members = l.members();
        let core_max = members[0].iter().map(|&i| radius(m.row(i))).fold(0.0, f64::max);
        let shell_min = members[1]
            .iter()
            .map(|&i| radius(m.row(i)))
            .fold(f64::INFINITY, f64::min);
        assert!(shell_min > core_max);
        assert!(generate_atom::<f64>(21, 0).is_err());
    }

    #[test]
    fn golfball_points_lie_on_sphere() {
        let m = generate_golfball::<f64>(300, 4).unwrap();
        for r in m.iter_rows() {
            let rad = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
            assert!((rad - GOLFBALL_RADIUS).abs() < 1e-9);
        }
    }

    #[test]
    fn spherical_conversion_examples() {
        let m = DataMatrix::from_rows(&[vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]])
            .unwrap();
        let s = to_spherical(&m).unwrap();
        assert_eq!(s.coordinate_system(), CoordinateSystem::Spherical);
        assert_eq!(s.row(0), &[1.0, 0.0, 0.0]);
        let r1 = s.row(1);
        assert_eq!((r1[0], r1[1]), (1.0, 0.0));
        assert!((r1[2] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(s.row(2), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn spherical_roundtrip() {
        let mut rng = rng_for(77);
        let rows: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..3).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let m = DataMatrix::from_rows(&rows).unwrap();
        let back = to_cartesian(&to_spherical(&m).unwrap()).unwrap();
        let err = m
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "max roundtrip error {err}");
    }
}
