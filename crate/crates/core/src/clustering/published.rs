//! Per-cluster summaries reported elsewhere (`median` and `2 sd` of each
//! cluster's intra-partition distances), checked exactly against a boundary.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::eq5::criterion_holds;
use crate::error::{Error, Result};

/// Exact decimal.
pub type Exact = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublishedRow {
    pub algorithm: String,
    /// `(median, two_sd)` per cluster index; `None` is NA.
    pub clusters: Vec<Option<(Exact, Exact)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublishedVerdict {
    pub algorithm: String,
    /// `None` for NA clusters.
    pub clusters: Vec<Option<bool>>,
    pub pass: bool,
}

/// Parses a decimal such as `1.01` or `-0.5` into an exact ratio.
pub fn parse_decimal(s: &str) -> Result<Exact> {
    let t = s.trim();
    let bad = || Error::InvalidArgument(format!("not a decimal: {s:?}"));
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty())
        || !int.chars().all(|c| c.is_ascii_digit())
        || !frac.chars().all(|c| c.is_ascii_digit())
        || frac.len() > 12
    {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num: i64 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
    let den = 10i64.pow(frac.len() as u32);
    let r = Ratio::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Reads long-format CSV with header `algorithm,cluster,median,two_sd`.
/// `NA` in either value column marks a singleton cluster. Rows keep the
/// order in which algorithms first appear.
pub fn parse_published(text: &str) -> Result<Vec<PublishedRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::InvalidArgument(format!("missing column {name:?}")))
    };
    let (ca, cc, cm, cs) = (col("algorithm")?, col("cluster")?, col("median")?, col("two_sd")?);
    let mut order: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(usize, usize), Option<(Exact, Exact)>> = BTreeMap::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let algo = field(ca).to_string();
        let idx = match order.iter().position(|a| *a == algo) {
            Some(i) => i,
            None => {
                order.push(algo);
                order.len() - 1
            }
        };
        let cluster: usize = field(cc).parse().map_err(|_| Error::Parse {
            row: row + 2,
            col: cc + 1,
            value: field(cc).to_string(),
        })?;
        if cluster == 0 {
            return Err(Error::InvalidArgument("cluster indices start at 1".into()));
        }
        let is_na = |s: &str| s.eq_ignore_ascii_case("na") || s.is_empty();
        let value = if is_na(field(cm)) || is_na(field(cs)) {
            None
        } else {
            Some((parse_decimal(field(cm))?, parse_decimal(field(cs))?))
        };
        cells.insert((idx, cluster), value);
    }
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(i, algorithm)| {
            let max_c = cells.range((i, 0)..(i + 1, 0)).map(|((_, c), _)| *c).max().unwrap_or(0);
            let clusters = (1..=max_c).map(|c| cells.get(&(i, c)).cloned().flatten()).collect();
            PublishedRow { algorithm, clusters }
        })
        .collect())
}

pub fn evaluate_published(rows: &[PublishedRow], bd: Exact) -> Vec<PublishedVerdict> {
    rows.iter()
        .map(|r| {
            let clusters: Vec<Option<bool>> = r
                .clusters
                .iter()
                .map(|c| c.map(|(m, two_sd)| criterion_holds(m, two_sd, bd)))
                .collect();
            let pass = clusters.iter().all(|c| *c != Some(false));
            PublishedVerdict {
                algorithm: r.algorithm.clone(),
                clusters,
                pass,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_decimal("1.01").unwrap(), Ratio::new(101, 100));
        assert_eq!(parse_decimal("-0.5").unwrap(), Ratio::new(-1, 2));
        assert_eq!(parse_decimal("3").unwrap(), Ratio::from_integer(3));
        assert_eq!(parse_decimal(".25").unwrap(), Ratio::new(1, 4));
        for bad in ["", ".", "1.2.3", "1e3", "abc"] {
            assert!(parse_decimal(bad).is_err(), "{bad}");
        }
        // 0.1 + 0.2 == 0.3 holds exactly here
        assert_eq!(
            parse_decimal("0.1").unwrap() + parse_decimal("0.2").unwrap(),
            parse_decimal("0.3").unwrap()
        );
    }

    #[test]
    fn boundary_equality_passes() {
        let text = "algorithm,cluster,median,two_sd\nA,1,1.03,0.37\nA,2,1.00,0.37\nB,1,1.01,0.41\nB,2,NA,NA\n";
        let rows = parse_published(text).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].clusters[1], None);
        let v = evaluate_published(&rows, parse_decimal("1.40").unwrap());
        assert!(v[0].pass);
        assert_eq!(v[1].clusters, vec![Some(false), None]);
        assert!(!v[1].pass);
    }

    #[test]
    fn missing_columns_are_reported() {
        assert!(parse_published("algorithm,cluster,median\nA,1,1.0\n").is_err());
        assert!(parse_published("algorithm,cluster,median,two_sd\nA,x,1.0,0.1\n").is_err());
    }
}
