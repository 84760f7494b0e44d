//! MacKay alist format.
//!
//! ```text
//! N M
//! max_col_degree max_row_degree
//! <N column degrees>
//! <M row degrees>
//! <N lines: 1-based check indices of each column, optionally 0-padded>
//! <M lines: 1-based variable indices of each row, optionally 0-padded>
//! ```
//!
//! The canonical form written by [`serialize_alist`] has sorted, unpadded
//! adjacency lists separated by single spaces and ends with a newline.

use std::fmt::Write as _;

use thiserror::Error;

use super::{GraphError, TannerGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlistError {
    #[error("truncated alist: missing {0}")]
    Truncated(&'static str),
    #[error("line {line}: invalid integer {token:?}")]
    BadInteger { line: usize, token: String },
    #[error("line {line}: expected {expected} values, found {found}")]
    BadHeader { line: usize, expected: usize, found: usize },
    #[error("column count mismatch: header declares {declared} columns, found {found}")]
    ColumnCountMismatch { declared: usize, found: usize },
    #[error("row count mismatch: header declares {declared} rows, found {found}")]
    RowCountMismatch { declared: usize, found: usize },
    #[error("{kind} {index}: declared degree {declared}, list has {found} entries")]
    DegreeMismatch {
        kind: &'static str,
        index: usize,
        declared: usize,
        found: usize,
    },
    #[error("{kind} {index}: index {value} out of range 1..={max}")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        value: usize,
        max: usize,
    },
    #[error("adjacency inconsistency: row {row} lists column {col}, but column {col} does not list row {row}")]
    Inconsistent { row: usize, col: usize },
    #[error("invalid graph: {0}")]
    Graph(#[from] GraphError),
}

fn parse_line(line_no: usize, line: &str) -> Result<Vec<usize>, AlistError> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<usize>().map_err(|_| AlistError::BadInteger {
                line: line_no,
                token: t.to_string(),
            })
        })
        .collect()
}

/// Parses an alist document into a Tanner graph.
pub fn parse_alist(text: &str) -> Result<TannerGraph, AlistError> {
    let mut lines = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        lines.push(parse_line(k + 1, raw)?);
    }
    let mut it = lines.into_iter().enumerate();
    let mut next = |what: &'static str| it.next().ok_or(AlistError::Truncated(what));

    let (ln, header) = next("N M header")?;
    if header.len() != 2 {
        return Err(AlistError::BadHeader { line: ln + 1, expected: 2, found: header.len() });
    }
    let (n, m) = (header[0], header[1]);
    if n == 0 || m == 0 {
        return Err(GraphError::Empty { n_vars: n, n_checks: m }.into());
    }
    let (ln, maxes) = next("maximum degree line")?;
    if maxes.len() != 2 {
        return Err(AlistError::BadHeader { line: ln + 1, expected: 2, found: maxes.len() });
    }
    let (_, col_deg) = next("column degree list")?;
    if col_deg.len() != n {
        return Err(AlistError::ColumnCountMismatch { declared: n, found: col_deg.len() });
    }
    let (_, row_deg) = next("row degree list")?;
    if row_deg.len() != m {
        return Err(AlistError::RowCountMismatch { declared: m, found: row_deg.len() });
    }
    let rest: Vec<Vec<usize>> = it.map(|(_, l)| l).collect();
    if rest.len() > n + m {
        return Err(AlistError::ColumnCountMismatch { declared: n, found: rest.len() - m });
    }
    if rest.len() < n {
        return Err(AlistError::Truncated("column adjacency lists"));
    }
    if rest.len() < n + m {
        return Err(AlistError::Truncated("row adjacency lists"));
    }

    let strip = |kind: &'static str,
                 index: usize,
                 list: &[usize],
                 declared: usize,
                 max: usize|
     -> Result<Vec<usize>, AlistError> {
        let entries: Vec<usize> = list.iter().copied().filter(|&v| v != 0).collect();
        if entries.len() != declared {
            return Err(AlistError::DegreeMismatch { kind, index: index + 1, declared, found: entries.len() });
        }
        for &v in &entries {
            if v > max {
                return Err(AlistError::IndexOutOfRange { kind, index: index + 1, value: v, max });
            }
        }
        Ok(entries.into_iter().map(|v| v - 1).collect())
    };

    let cols: Vec<Vec<usize>> = (0..n)
        .map(|i| strip("column", i, &rest[i], col_deg[i], m))
        .collect::<Result<_, _>>()?;
    let rows: Vec<Vec<usize>> = (0..m)
        .map(|j| strip("row", j, &rest[n + j], row_deg[j], n))
        .collect::<Result<_, _>>()?;

    let mut col_sets: Vec<Vec<usize>> = cols.clone();
    for c in &mut col_sets {
        c.sort_unstable();
    }
    for (j, row) in rows.iter().enumerate() {
        for &i in row {
            if col_sets[i].binary_search(&j).is_err() {
                return Err(AlistError::Inconsistent { row: j + 1, col: i + 1 });
            }
        }
    }
    // Row lists were verified against the columns; equal edge totals rule out
    // entries present only on the column side.
    let col_total: usize = cols.iter().map(Vec::len).sum();
    let row_total: usize = rows.iter().map(Vec::len).sum();
    if col_total != row_total {
        let (row, col) = first_column_only_entry(&rows, &cols);
        return Err(AlistError::Inconsistent { row, col });
    }
    Ok(TannerGraph::from_rows(n, &rows)?)
}

fn first_column_only_entry(rows: &[Vec<usize>], cols: &[Vec<usize>]) -> (usize, usize) {
    for (i, col) in cols.iter().enumerate() {
        for &j in col {
            if !rows[j].contains(&i) {
                return (j + 1, i + 1);
            }
        }
    }
    (0, 0)
}

/// Writes the canonical alist form of `g`.
pub fn serialize_alist(g: &TannerGraph) -> String {
    let mut out = String::new();
    // An empty adjacency list is written as a single 0 so the line survives.
    let join = |it: &mut dyn Iterator<Item = usize>| {
        let s = it.map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        if s.is_empty() {
            "0".to_string()
        } else {
            s
        }
    };
    let _ = writeln!(out, "{} {}", g.n_vars(), g.n_checks());
    let _ = writeln!(out, "{} {}", g.max_var_degree(), g.max_check_degree());
    let _ = writeln!(out, "{}", join(&mut (0..g.n_vars()).map(|i| g.var_degree(i))));
    let _ = writeln!(out, "{}", join(&mut (0..g.n_checks()).map(|j| g.check_degree(j))));
    for i in 0..g.n_vars() {
        let _ = writeln!(out, "{}", join(&mut g.col(i).map(|j| j + 1)));
    }
    for j in 0..g.n_checks() {
        let _ = writeln!(out, "{}", join(&mut g.row(j).map(|i| i + 1)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgcodes::{eg_line_incidence, pg_line_incidence};
    use proptest::prelude::*;

    const HAMMING_ALIST: &str = "7 3\n\
3 4\n\
2 3 2 2 1 1 1\n\
4 4 4\n\
1 3\n\
1 2 3\n\
1 2\n\
2 3\n\
1\n\
2\n\
3\n\
1 2 3 5\n\
2 3 4 6\n\
1 2 4 7\n";

    fn hamming() -> TannerGraph {
        #[rustfmt::skip]
        let h = [
            1, 1, 1, 0, 1, 0, 0,
            0, 1, 1, 1, 0, 1, 0,
            1, 1, 0, 1, 0, 0, 1,
        ];
        TannerGraph::from_dense(3, 7, &h).unwrap()
    }

    #[test]
    fn hamming_golden_bytes() {
        assert_eq!(serialize_alist(&hamming()), HAMMING_ALIST);
        let g = parse_alist(HAMMING_ALIST).unwrap();
        assert_eq!(g, hamming());
        let mut degrees: Vec<usize> = (0..7).map(|i| g.var_degree(i)).collect();
        degrees.sort_unstable();
        assert_eq!(degrees, vec![1, 1, 1, 2, 2, 2, 3]);
    }

    #[test]
    fn zero_padding_is_ignored() {
        let padded = "7 3\n3 4\n2 3 2 2 1 1 1\n4 4 4\n1 3 0\n1 2 3\n1 2 0\n2 3 0\n1 0 0\n2 0 0\n3 0 0\n\
1 2 3 5\n2 3 4 6\n1 2 4 7\n";
        let g = parse_alist(padded).unwrap();
        assert_eq!(g, hamming());
        assert_eq!(serialize_alist(&g), HAMMING_ALIST);
    }

    #[test]
    fn round_trips_on_geometry_codes() {
        for g in [
            TannerGraph::circulant(&pg_line_incidence(2).unwrap()).unwrap(),
            TannerGraph::circulant(&eg_line_incidence(3).unwrap()).unwrap(),
            hamming(),
        ] {
            let text = serialize_alist(&g);
            let back = parse_alist(&text).unwrap();
            assert_eq!(back, g);
            assert_eq!(serialize_alist(&back), text);
        }
    }

    #[test]
    fn column_count_mismatch() {
        let bad = "4 2\n2 3\n1 1 1 1 1\n2 3\n1\n1\n2\n2\n2\n1 2\n3 4 5\n";
        let err = parse_alist(bad).unwrap_err();
        assert!(matches!(err, AlistError::ColumnCountMismatch { declared: 4, found: 5 }));
        assert!(err.to_string().contains("column count mismatch"));
        // Degree line correct but one extra column list.
        let bad = "4 2\n1 2\n1 1 1 1\n2 2\n1\n1\n2\n2\n2\n1 2\n3 4\n";
        assert!(matches!(
            parse_alist(bad),
            Err(AlistError::ColumnCountMismatch { declared: 4, found: 5 })
        ));
    }

    #[test]
    fn distinct_diagnostics() {
        assert!(matches!(parse_alist(""), Err(AlistError::Truncated(_))));
        assert!(matches!(parse_alist("7 3\n3 4\n"), Err(AlistError::Truncated(_))));
        let truncated: String = HAMMING_ALIST.lines().take(12).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse_alist(&truncated), Err(AlistError::Truncated(_))));
        let inconsistent = HAMMING_ALIST.replace("1 2 4 7\n", "1 2 5 7\n");
        assert!(matches!(parse_alist(&inconsistent), Err(AlistError::Inconsistent { .. })));
        let out_of_range = HAMMING_ALIST.replace("1 2 4 7\n", "1 2 4 9\n");
        assert!(matches!(parse_alist(&out_of_range), Err(AlistError::IndexOutOfRange { .. })));
        let bad_int = HAMMING_ALIST.replace("4 4 4", "4 x 4");
        assert!(matches!(parse_alist(&bad_int), Err(AlistError::BadInteger { .. })));
        let bad_deg = HAMMING_ALIST.replace("2 3 2 2 1 1 1", "2 3 2 2 1 1 2");
        assert!(matches!(parse_alist(&bad_deg), Err(AlistError::DegreeMismatch { .. })));
        assert!(matches!(
            parse_alist("0 0\n0 0\n"),
            Err(AlistError::Graph(GraphError::Empty { .. }))
        ));
    }

    fn arb_graph() -> impl Strategy<Value = TannerGraph> {
        (1usize..20, 1usize..12).prop_flat_map(|(n, m)| {
            proptest::collection::vec(proptest::collection::btree_set(0..n, 0..=n.min(6)), m)
                .prop_map(move |rows| {
                    let rows: Vec<Vec<usize>> = rows.into_iter().map(|s| s.into_iter().collect()).collect();
                    TannerGraph::from_rows(n, &rows).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn serialize_then_parse_is_identity(g in arb_graph()) {
            let text = serialize_alist(&g);
            let back = parse_alist(&text).unwrap();
            prop_assert_eq!(serialize_alist(&back), text);
            prop_assert_eq!(back, g);
        }
    }
}
