//! Sparse parity-check matrices over GF(q): alist I/O, lifting, systematic
//! encoding and syndromes.

use std::fmt::Write as _;
use std::ops::{Deref, Range};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{GfField, GfSymbol};

/// A sparse M x N parity-check matrix over GF(q).
///
/// Nonzero entries double as Tanner-graph edges. Edges are numbered row-major
/// so the edges of row `m` form a contiguous range; each column keeps the list
/// of its edge ids.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityCheckMatrix {
    m: usize,
    n: usize,
    field: GfField,
    row_start: Vec<usize>,
    edge_col: Vec<usize>,
    edge_row: Vec<usize>,
    edge_val: Vec<u8>,
    col_edges: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// Builds a matrix from `(row, col, value)` triples.
    pub fn from_entries(
        m: usize,
        n: usize,
        field: GfField,
        entries: impl IntoIterator<Item = (usize, usize, u8)>,
    ) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidMatrix("empty dimensions".into()));
        }
        let mut rows: Vec<Vec<(usize, u8)>> = vec![Vec::new(); m];
        for (r, c, v) in entries {
            if r >= m || c >= n {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({r}, {c}) outside {m}x{n}"
                )));
            }
            if v == 0 || v as usize >= field.order() {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({r}, {c}) has invalid value {v}"
                )));
            }
            rows[r].push((c, v));
        }
        let mut row_start = Vec::with_capacity(m + 1);
        let mut edge_col = Vec::new();
        let mut edge_row = Vec::new();
        let mut edge_val = Vec::new();
        let mut col_edges = vec![Vec::new(); n];
        for (r, row) in rows.iter_mut().enumerate() {
            row.sort_unstable_by_key(|&(c, _)| c);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidMatrix(format!("duplicate entry in row {r}")));
            }
            row_start.push(edge_col.len());
            for &(c, v) in row.iter() {
                col_edges[c].push(edge_col.len());
                edge_col.push(c);
                edge_row.push(r);
                edge_val.push(v);
            }
        }
        row_start.push(edge_col.len());
        Ok(Self {
            m,
            n,
            field,
            row_start,
            edge_col,
            edge_row,
            edge_val,
            col_edges,
        })
    }

    /// Builds a matrix from a dense row-major table (zeros are skipped).
    pub fn from_dense(field: GfField, rows: &[Vec<u8>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("ragged dense matrix".into()));
        }
        let entries = rows.iter().enumerate().flat_map(|(r, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(move |(c, &v)| (r, c, v))
        });
        Self::from_entries(m, n, field, entries)
    }

    /// Number of parity checks (M).
    pub fn rows(&self) -> usize {
        self.m
    }

    /// Codeword length (N).
    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &GfField {
        &self.field
    }

    pub fn num_edges(&self) -> usize {
        self.edge_col.len()
    }

    /// Edge ids of row `m`; their columns are the set M_m in increasing order.
    pub fn row_edges(&self, m: usize) -> Range<usize> {
        self.row_start[m]..self.row_start[m + 1]
    }

    /// Edge ids of column `n`; their rows are the set N_n in increasing order.
    pub fn col_edges(&self, n: usize) -> &[usize] {
        &self.col_edges[n]
    }

    pub fn edge_col(&self, e: usize) -> usize {
        self.edge_col[e]
    }

    pub fn edge_row(&self, e: usize) -> usize {
        self.edge_row[e]
    }

    pub fn edge_value(&self, e: usize) -> u8 {
        self.edge_val[e]
    }

    /// Column indices M_m of row `m`.
    pub fn row_support(&self, m: usize) -> &[usize] {
        &self.edge_col[self.row_edges(m)]
    }

    /// Nonzero values of row `m`, aligned with [`Self::row_support`].
    pub fn row_values(&self, m: usize) -> &[u8] {
        &self.edge_val[self.row_edges(m)]
    }

    /// Row indices N_n of column `n`.
    pub fn col_support(&self, n: usize) -> Vec<usize> {
        self.col_edges[n].iter().map(|&e| self.edge_row[e]).collect()
    }

    pub fn row_weight(&self, m: usize) -> usize {
        self.row_start[m + 1] - self.row_start[m]
    }

    pub fn col_weight(&self, n: usize) -> usize {
        self.col_edges[n].len()
    }

    pub fn max_row_weight(&self) -> usize {
        (0..self.m).map(|m| self.row_weight(m)).max().unwrap_or(0)
    }

    pub fn max_col_weight(&self) -> usize {
        (0..self.n).map(|n| self.col_weight(n)).max().unwrap_or(0)
    }

    /// Entry at `(m, n)`, zero if absent.
    pub fn get(&self, m: usize, n: usize) -> u8 {
        let cols = self.row_support(m);
        match cols.binary_search(&n) {
            Ok(i) => self.row_values(m)[i],
            Err(_) => 0,
        }
    }

    /// True if both matrices have the same size and nonzero locations.
    pub fn same_pattern(&self, other: &ParityCheckMatrix) -> bool {
        self.m == other.m
            && self.n == other.n
            && self.row_start == other.row_start
            && self.edge_col == other.edge_col
    }

    /// Histogram of row weights: `(weight, count)` sorted by weight.
    pub fn row_weight_histogram(&self) -> Vec<(usize, usize)> {
        let mut hist = std::collections::BTreeMap::new();
        for m in 0..self.m {
            *hist.entry(self.row_weight(m)).or_insert(0) += 1;
        }
        hist.into_iter().collect()
    }

    /// Design rate 1 - M/N.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.m as f64 / self.n as f64
    }

    /// Parses MacKay's alist format.
    ///
    /// Binary files start with `N M`. The q-ary variant starts with `N M q`
    /// and lists `index value` pairs in the adjacency lists. Indices are
    /// 1-based and zero padding is ignored.
    pub fn parse_alist(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        fn numbers(line: usize, s: &str) -> Result<Vec<usize>> {
            s.split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Alist {
                        line,
                        msg: format!("bad integer {t:?}"),
                    })
                })
                .collect()
        }
        let mut next = |what: &str| -> Result<(usize, Vec<usize>)> {
            let (no, l) = lines.next().ok_or_else(|| Error::Alist {
                line: 0,
                msg: format!("unexpected end of input reading {what}"),
            })?;
            Ok((no, numbers(no, l)?))
        };

        let (hl, header) = next("header")?;
        let (n, m, q) = match header[..] {
            [n, m] => (n, m, 2),
            [n, m, q] => (n, m, q),
            _ => {
                return Err(Error::Alist {
                    line: hl,
                    msg: "header must be `N M` or `N M q`".into(),
                })
            }
        };
        if n == 0 || m == 0 {
            return Err(Error::Alist {
                line: hl,
                msg: "zero dimension".into(),
            });
        }
        let field = GfField::new(q).map_err(|e| Error::Alist {
            line: hl,
            msg: e.to_string(),
        })?;
        let qary = header.len() == 3;

        let (wl, maxw) = next("max weights")?;
        if maxw.len() != 2 {
            return Err(Error::Alist {
                line: wl,
                msg: "expected two maximum weights".into(),
            });
        }
        let (cl, col_w) = next("column weights")?;
        if col_w.len() != n {
            return Err(Error::Alist {
                line: cl,
                msg: format!("expected {n} column weights, got {}", col_w.len()),
            });
        }
        let (rl, row_w) = next("row weights")?;
        if row_w.len() != m {
            return Err(Error::Alist {
                line: rl,
                msg: format!("expected {m} row weights, got {}", row_w.len()),
            });
        }
        if col_w.iter().max() != Some(&maxw[0]) || row_w.iter().max() != Some(&maxw[1]) {
            return Err(Error::Alist {
                line: wl,
                msg: "maximum weights disagree with weight lists".into(),
            });
        }

        let mut read_lists = |count: usize, weights: &[usize], bound: usize, what: &str| {
            let mut out = Vec::with_capacity(count);
            for (i, &w) in weights.iter().enumerate().take(count) {
                let (no, nums) = next(what)?;
                let stride = if qary { 2 } else { 1 };
                let mut entries = Vec::new();
                for chunk in nums.chunks(stride) {
                    let idx = chunk[0];
                    if idx == 0 {
                        continue;
                    }
                    if idx > bound {
                        return Err(Error::Alist {
                            line: no,
                            msg: format!("index {idx} exceeds {bound}"),
                        });
                    }
                    let val = if qary {
                        *chunk.get(1).ok_or_else(|| Error::Alist {
                            line: no,
                            msg: "missing value in q-ary entry".into(),
                        })?
                    } else {
                        1
                    };
                    if val == 0 || val >= q {
                        return Err(Error::Alist {
                            line: no,
                            msg: format!("entry value {val} invalid for GF({q})"),
                        });
                    }
                    entries.push((idx - 1, val as u8));
                }
                if entries.len() != w {
                    return Err(Error::Alist {
                        line: no,
                        msg: format!("{what} {i} lists {} entries, weight is {w}", entries.len()),
                    });
                }
                out.push(entries);
            }
            Ok::<_, Error>(out)
        };
        let col_lists = read_lists(n, &col_w, m, "column")?;
        let row_lists = read_lists(m, &row_w, n, "row")?;

        let mut from_rows: Vec<(usize, usize, u8)> = row_lists
            .iter()
            .enumerate()
            .flat_map(|(r, l)| l.iter().map(move |&(c, v)| (r, c, v)))
            .collect();
        let mut from_cols: Vec<(usize, usize, u8)> = col_lists
            .iter()
            .enumerate()
            .flat_map(|(c, l)| l.iter().map(move |&(r, v)| (r, c, v)))
            .collect();
        from_rows.sort_unstable();
        from_cols.sort_unstable();
        if from_rows != from_cols {
            return Err(Error::Alist {
                line: 0,
                msg: "row and column adjacency lists are inconsistent".into(),
            });
        }
        Self::from_entries(m, n, field, from_rows).map_err(|e| Error::Alist {
            line: 0,
            msg: e.to_string(),
        })
    }

    /// Serializes to alist. Binary matrices with all-one entries use the
    /// plain format; anything else uses the q-ary `N M q` variant.
    pub fn to_alist(&self) -> String {
        let qary = self.field.order() != 2 || self.edge_val.iter().any(|&v| v != 1);
        let mut s = String::new();
        if qary {
            let _ = writeln!(s, "{} {} {}", self.n, self.m, self.field.order());
        } else {
            let _ = writeln!(s, "{} {}", self.n, self.m);
        }
        let _ = writeln!(s, "{} {}", self.max_col_weight(), self.max_row_weight());
        let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(" ");
        let _ = writeln!(
            s,
            "{}",
            join(&mut (0..self.n).map(|c| self.col_weight(c).to_string()))
        );
        let _ = writeln!(
            s,
            "{}",
            join(&mut (0..self.m).map(|r| self.row_weight(r).to_string()))
        );
        let fmt_entry = |idx: usize, val: u8| {
            if qary {
                format!("{} {}", idx + 1, val)
            } else {
                (idx + 1).to_string()
            }
        };
        for c in 0..self.n {
            let mut items: Vec<String> = self.col_edges[c]
                .iter()
                .map(|&e| fmt_entry(self.edge_row[e], self.edge_val[e]))
                .collect();
            let pad = if qary { "0 0" } else { "0" };
            items.resize(self.max_col_weight(), pad.to_string());
            let _ = writeln!(s, "{}", items.join(" "));
        }
        for r in 0..self.m {
            let mut items: Vec<String> = self
                .row_edges(r)
                .map(|e| fmt_entry(self.edge_col[e], self.edge_val[e]))
                .collect();
            let pad = if qary { "0 0" } else { "0" };
            items.resize(self.max_row_weight(), pad.to_string());
            let _ = writeln!(s, "{}", items.join(" "));
        }
        s
    }
}

/// Replaces every nonzero entry of a binary matrix by `eta` in GF(q).
pub fn lift_to_gfq(h: &ParityCheckMatrix, eta: GfSymbol, field: &GfField) -> Result<ParityCheckMatrix> {
    if h.field.order() != 2 {
        return Err(Error::InvalidMatrix("lifting expects a binary matrix".into()));
    }
    field.symbol(eta.0)?;
    if eta.0 == 0 {
        return Err(Error::InvalidParameter("lift value must be nonzero".into()));
    }
    let entries = (0..h.num_edges()).map(|e| (h.edge_row[e], h.edge_col[e], eta.0));
    ParityCheckMatrix::from_entries(h.m, h.n, field.clone(), entries)
}

/// A word over GF(q).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Codeword(pub Vec<u8>);

impl Deref for Codeword {
    type Target = [u8];
    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl From<Vec<u8>> for Codeword {
    fn from(v: Vec<u8>) -> Self {
        Codeword(v)
    }
}

/// Syndrome `H c` over GF(q).
pub fn syndrome(h: &ParityCheckMatrix, c: &[u8]) -> Result<Vec<GfSymbol>> {
    if c.len() != h.n {
        return Err(Error::LengthMismatch {
            expected: h.n,
            got: c.len(),
        });
    }
    if let Some(&v) = c.iter().find(|&&v| v as usize >= h.field.order()) {
        return Err(Error::SymbolOutOfRange {
            value: v as usize,
            q: h.field.order(),
        });
    }
    Ok((0..h.m)
        .map(|r| GfSymbol(row_check(h, r, c)))
        .collect())
}

#[inline]
fn row_check(h: &ParityCheckMatrix, r: usize, c: &[u8]) -> u8 {
    h.row_edges(r)
        .fold(0u8, |acc, e| acc ^ h.field.mul_raw(c[h.edge_col[e]], h.edge_val[e]))
}

/// True if `c` satisfies every parity check. Panics on length mismatch.
pub fn is_codeword(h: &ParityCheckMatrix, c: &[u8]) -> bool {
    assert_eq!(c.len(), h.n);
    (0..h.m).all(|r| row_check(h, r, c) == 0)
}

/// Systematic encoder derived by Gaussian elimination over GF(q).
///
/// Pivots are chosen as the leftmost column with a nonzero entry among the
/// remaining rows. Rank-deficient matrices are accepted; the code dimension is
/// then `N - rank`.
#[derive(Debug, Clone)]
pub struct SystematicEncoder {
    n: usize,
    field: GfField,
    rank: usize,
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    /// For each pivot row, `(info index, coefficient)` pairs.
    parity_rules: Vec<Vec<(usize, u8)>>,
}

impl SystematicEncoder {
    pub fn new(h: &ParityCheckMatrix) -> Self {
        let f = &h.field;
        let (m, n) = (h.m, h.n);
        let mut a = vec![vec![0u8; n]; m];
        for e in 0..h.num_edges() {
            a[h.edge_row[e]][h.edge_col[e]] = h.edge_val[e];
        }
        let mut pivots = Vec::new();
        let mut prow = 0;
        for col in 0..n {
            if prow == m {
                break;
            }
            let Some(sel) = (prow..m).find(|&r| a[r][col] != 0) else {
                continue;
            };
            a.swap(prow, sel);
            let inv = f.inv_raw(a[prow][col]);
            for v in a[prow].iter_mut() {
                *v = f.mul_raw(*v, inv);
            }
            let pivot_row = a[prow].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r == prow || row[col] == 0 {
                    continue;
                }
                let factor = row[col];
                for (x, &p) in row.iter_mut().zip(&pivot_row) {
                    *x ^= f.mul_raw(factor, p);
                }
            }
            pivots.push(col);
            prow += 1;
        }
        let rank = pivots.len();
        let mut is_pivot = vec![false; n];
        pivots.iter().for_each(|&c| is_pivot[c] = true);
        let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let parity_rules = (0..rank)
            .map(|r| {
                info_positions
                    .iter()
                    .enumerate()
                    .filter(|&(_, &c)| a[r][c] != 0)
                    .map(|(i, &c)| (i, a[r][c]))
                    .collect()
            })
            .collect();
        Self {
            n,
            field: f.clone(),
            rank,
            info_positions,
            parity_positions: pivots,
            parity_rules,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Code dimension K = N - rank.
    pub fn dimension(&self) -> usize {
        self.n - self.rank
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn parity_positions(&self) -> &[usize] {
        &self.parity_positions
    }

    pub fn encode(&self, info: &[u8]) -> Result<Codeword> {
        if info.len() != self.dimension() {
            return Err(Error::InfoLength {
                got: info.len(),
                expected: self.dimension(),
                rank: self.rank,
            });
        }
        if let Some(&v) = info.iter().find(|&&v| v as usize >= self.field.order()) {
            return Err(Error::SymbolOutOfRange {
                value: v as usize,
                q: self.field.order(),
            });
        }
        let mut c = vec![0u8; self.n];
        for (&pos, &v) in self.info_positions.iter().zip(info) {
            c[pos] = v;
        }
        for (rule, &pos) in self.parity_rules.iter().zip(&self.parity_positions) {
            c[pos] = rule
                .iter()
                .fold(0u8, |acc, &(i, coef)| acc ^ self.field.mul_raw(coef, info[i]));
        }
        Ok(Codeword(c))
    }

    /// Reads the information symbols back out of a codeword.
    pub fn extract_info(&self, c: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| c[p]).collect()
    }
}

/// One-shot systematic encoding.
pub fn encode(h: &ParityCheckMatrix, info: &[u8]) -> Result<Codeword> {
    SystematicEncoder::new(h).encode(info)
}
