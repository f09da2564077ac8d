//! Tabular ingestion and quantile discretization.
//!
//! Raw CSV columns are sniffed as numeric, boolean or text. Continuous
//! columns are cut at empirical quantiles (linear-interpolation definition),
//! text columns get first-appearance ordinal codes, booleans map to {0,1}.
//! The encoded [`Dataset`] is immutable and column-major.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type VarId = usize;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Feature,
    Label,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Variable {
    pub name: String,
    pub cardinality: usize,
    pub kind: VarKind,
    /// Sorted cut points, present iff the source column was continuous.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bin_edges: Option<Vec<f64>>,
    /// Category names in code order, present iff the source column was text.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub categories: Option<Vec<String>>,
    /// Code reserved for missing cells, appended after the last bin.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub missing_code: Option<u32>,
}

#[derive(Clone, Debug)]
pub enum RawColumn {
    Numeric(Vec<Option<f64>>),
    Boolean(Vec<Option<bool>>),
    Text(Vec<Option<String>>),
}

impl RawColumn {
    pub fn len(&self) -> usize {
        match self {
            RawColumn::Numeric(v) => v.len(),
            RawColumn::Boolean(v) => v.len(),
            RawColumn::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn is_missing(&self, row: usize) -> bool {
        match self {
            RawColumn::Numeric(v) => v[row].is_none(),
            RawColumn::Boolean(v) => v[row].is_none(),
            RawColumn::Text(v) => v[row].is_none(),
        }
    }

    fn cell_string(&self, row: usize) -> String {
        match self {
            RawColumn::Numeric(v) => v[row].map(fmt_num).unwrap_or_default(),
            RawColumn::Boolean(v) => v[row].map(|b| b.to_string()).unwrap_or_default(),
            RawColumn::Text(v) => v[row].clone().unwrap_or_default(),
        }
    }
}

fn fmt_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

#[derive(Clone, Debug)]
pub struct RawTable {
    pub column_names: Vec<String>,
    pub columns: Vec<RawColumn>,
    pub n_rows: usize,
    /// Columns tagged for label marking at discretization time.
    pub label_flags: Vec<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Dataset {
    pub variables: Vec<Variable>,
    /// Column-major encoded values, one vector per variable.
    pub data: Vec<Vec<u32>>,
    pub n_rows: usize,
}

/// Loads an RFC-4180 CSV with a header row, sniffing column types.
pub fn load_csv(path: impl AsRef<Path>, label_names: &[String]) -> Result<RawTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(file);

    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut seen = HashSet::new();
    for h in &headers {
        if !seen.insert(h.clone()) {
            return Err(Error::invalid(format!("duplicate column name '{h}'")));
        }
    }

    let mut cells: Vec<Vec<Option<String>>> = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::invalid(format!(
                "ragged row: expected {} fields, got {}",
                headers.len(),
                record.len()
            )));
        }
        for (i, field) in record.iter().enumerate() {
            let field = field.trim();
            cells[i].push(if field.is_empty() { None } else { Some(field.to_string()) });
        }
    }

    let n_rows = cells.first().map_or(0, |c| c.len());
    if n_rows == 0 {
        return Err(Error::invalid("empty file: no data rows"));
    }

    for label in label_names {
        if !headers.iter().any(|h| h == label) {
            return Err(Error::invalid(format!("unknown label name '{label}'")));
        }
    }

    let columns: Vec<RawColumn> = cells.into_iter().map(sniff_column).collect();
    let label_flags = headers
        .iter()
        .map(|h| label_names.iter().any(|l| l == h))
        .collect();

    Ok(RawTable { column_names: headers, columns, n_rows, label_flags })
}

fn sniff_column(cells: Vec<Option<String>>) -> RawColumn {
    let non_empty: Vec<&String> = cells.iter().flatten().collect();
    let all_bool = !non_empty.is_empty()
        && non_empty
            .iter()
            .all(|c| matches!(c.to_ascii_lowercase().as_str(), "true" | "false"));
    if all_bool {
        return RawColumn::Boolean(
            cells
                .into_iter()
                .map(|c| c.map(|s| s.eq_ignore_ascii_case("true")))
                .collect(),
        );
    }
    let all_numeric =
        !non_empty.is_empty() && non_empty.iter().all(|c| c.parse::<f64>().is_ok());
    if all_numeric {
        return RawColumn::Numeric(
            cells
                .into_iter()
                .map(|c| c.map(|s| s.parse::<f64>().unwrap()))
                .collect(),
        );
    }
    RawColumn::Text(cells)
}

impl RawTable {
    pub fn drop_columns(&mut self, names: &[String]) -> Result<()> {
        for n in names {
            if !self.column_names.iter().any(|c| c == n) {
                return Err(Error::invalid(format!("unknown column '{n}' in exclude list")));
            }
        }
        let keep: Vec<bool> = self
            .column_names
            .iter()
            .map(|c| !names.iter().any(|n| n == c))
            .collect();
        fn retain<T>(items: Vec<T>, keep: &[bool]) -> Vec<T> {
            items
                .into_iter()
                .zip(keep)
                .filter_map(|(v, &k)| k.then_some(v))
                .collect()
        }
        self.column_names = retain(std::mem::take(&mut self.column_names), &keep);
        self.columns = retain(std::mem::take(&mut self.columns), &keep);
        self.label_flags = retain(std::mem::take(&mut self.label_flags), &keep);
        Ok(())
    }

    fn select_rows(&self, rows: &[usize]) -> RawTable {
        let columns = self
            .columns
            .iter()
            .map(|col| match col {
                RawColumn::Numeric(v) => {
                    RawColumn::Numeric(rows.iter().map(|&r| v[r]).collect())
                }
                RawColumn::Boolean(v) => {
                    RawColumn::Boolean(rows.iter().map(|&r| v[r]).collect())
                }
                RawColumn::Text(v) => {
                    RawColumn::Text(rows.iter().map(|&r| v[r].clone()).collect())
                }
            })
            .collect();
        RawTable {
            column_names: self.column_names.clone(),
            columns,
            n_rows: rows.len(),
            label_flags: self.label_flags.clone(),
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(&self.column_names)?;
        for r in 0..self.n_rows {
            let row: Vec<String> = self.columns.iter().map(|c| c.cell_string(r)).collect();
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Splits rows into (train, test) preserving the joint label distribution.
pub fn stratified_split(table: &RawTable, frac: f64, seed: u64) -> Result<(RawTable, RawTable)> {
    if !(0.0..1.0).contains(&frac) {
        return Err(Error::invalid("holdout fraction must be in [0, 1)"));
    }
    let label_cols: Vec<usize> = (0..table.columns.len())
        .filter(|&i| table.label_flags[i])
        .collect();
    let mut groups: BTreeMap<Vec<String>, Vec<usize>> = BTreeMap::new();
    for r in 0..table.n_rows {
        let key: Vec<String> = label_cols
            .iter()
            .map(|&c| table.columns[c].cell_string(r))
            .collect();
        groups.entry(key).or_default().push(r);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_rows = Vec::new();
    let mut train_rows = Vec::new();
    for rows in groups.values() {
        let mut rows = rows.clone();
        rows.shuffle(&mut rng);
        let n_test = ((rows.len() as f64) * frac).round() as usize;
        test_rows.extend_from_slice(&rows[..n_test]);
        train_rows.extend_from_slice(&rows[n_test..]);
    }
    train_rows.sort_unstable();
    test_rows.sort_unstable();
    Ok((table.select_rows(&train_rows), table.select_rows(&test_rows)))
}

/// Type-7 empirical quantile (linear interpolation between order statistics).
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Quantile cut points at i/n_bins; ties collapsed, edges at or above the
/// column maximum dropped so no bin is empty by construction.
pub fn quantile_edges(values: &[f64], n_bins: usize) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let max = *sorted.last().unwrap();
    let mut edges = Vec::new();
    for i in 1..n_bins {
        let e = quantile(&sorted, i as f64 / n_bins as f64);
        if e >= max {
            continue;
        }
        if edges.last().is_some_and(|&last: &f64| e <= last) {
            continue;
        }
        edges.push(e);
    }
    edges
}

/// Bin index: count of edges strictly below the value, so bin i covers
/// (edge[i-1], edge[i]].
pub fn bin_of(edges: &[f64], v: f64) -> u32 {
    edges.partition_point(|e| *e < v) as u32
}

/// Discretizes a raw table: quantile bins for numeric columns, first-appearance
/// ordinals for text, {false -> 0, true -> 1} for booleans. Rows with a missing
/// label cell are rejected; missing feature cells get an extra trailing
/// "missing" category.
pub fn discretize(table: &RawTable, n_bins: usize) -> Result<Dataset> {
    if n_bins < 2 {
        return Err(Error::invalid("n_bins must be >= 2"));
    }
    let keep: Vec<usize> = (0..table.n_rows)
        .filter(|&r| {
            !(0..table.columns.len())
                .any(|c| table.label_flags[c] && table.columns[c].is_missing(r))
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::invalid("no rows left after rejecting missing labels"));
    }

    let mut variables = Vec::with_capacity(table.columns.len());
    let mut data = Vec::with_capacity(table.columns.len());

    for (ci, col) in table.columns.iter().enumerate() {
        let kind = if table.label_flags[ci] { VarKind::Label } else { VarKind::Feature };
        let name = table.column_names[ci].clone();
        let (var, codes) = encode_column(col, &keep, name, kind, n_bins);
        variables.push(var);
        data.push(codes);
    }

    Ok(Dataset { variables, data, n_rows: keep.len() })
}

fn encode_column(
    col: &RawColumn,
    keep: &[usize],
    name: String,
    kind: VarKind,
    n_bins: usize,
) -> (Variable, Vec<u32>) {
    match col {
        RawColumn::Numeric(v) => {
            let present: Vec<f64> = keep.iter().filter_map(|&r| v[r]).collect();
            let edges = quantile_edges(&present, n_bins);
            let base = edges.len() as u32 + 1;
            let has_missing = keep.iter().any(|&r| v[r].is_none());
            let codes = keep
                .iter()
                .map(|&r| v[r].map_or(base, |x| bin_of(&edges, x)))
                .collect();
            let var = Variable {
                name,
                cardinality: base as usize + has_missing as usize,
                kind,
                bin_edges: Some(edges),
                categories: None,
                missing_code: has_missing.then_some(base),
            };
            (var, codes)
        }
        RawColumn::Boolean(v) => {
            let has_missing = keep.iter().any(|&r| v[r].is_none());
            let codes = keep
                .iter()
                .map(|&r| v[r].map_or(2, |b| b as u32))
                .collect();
            let var = Variable {
                name,
                cardinality: 2 + has_missing as usize,
                kind,
                bin_edges: None,
                categories: None,
                missing_code: has_missing.then_some(2),
            };
            (var, codes)
        }
        RawColumn::Text(v) => {
            let mut order: Vec<String> = Vec::new();
            let mut codes_by_cat: HashMap<&str, u32> = HashMap::new();
            for &r in keep {
                if let Some(s) = &v[r] {
                    if !codes_by_cat.contains_key(s.as_str()) {
                        codes_by_cat.insert(s.as_str(), order.len() as u32);
                        order.push(s.clone());
                    }
                }
            }
            let base = order.len() as u32;
            let has_missing = keep.iter().any(|&r| v[r].is_none());
            let codes = keep
                .iter()
                .map(|&r| {
                    v[r].as_ref().map_or(base, |s| codes_by_cat[s.as_str()])
                })
                .collect();
            let var = Variable {
                name,
                cardinality: base as usize + has_missing as usize,
                kind,
                bin_edges: None,
                categories: Some(order),
                missing_code: has_missing.then_some(base),
            };
            (var, codes)
        }
    }
}

/// Encodes a raw table against an existing schema (test-time path). Rows with
/// a missing label cell are dropped; everything else must fit the schema.
pub fn encode_with_schema(table: &RawTable, variables: &[Variable]) -> Result<Dataset> {
    let mut col_of: HashMap<&str, usize> = HashMap::new();
    for (i, n) in table.column_names.iter().enumerate() {
        col_of.insert(n.as_str(), i);
    }
    let mut wanted = Vec::with_capacity(variables.len());
    for var in variables {
        let &ci = col_of.get(var.name.as_str()).ok_or_else(|| {
            Error::SchemaMismatch(format!("column '{}' missing from data", var.name))
        })?;
        wanted.push(ci);
    }

    let keep: Vec<usize> = (0..table.n_rows)
        .filter(|&r| {
            !variables.iter().zip(&wanted).any(|(var, &ci)| {
                var.kind == VarKind::Label && table.columns[ci].is_missing(r)
            })
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::invalid("no rows left after rejecting missing labels"));
    }

    let mut data = Vec::with_capacity(variables.len());
    for (var, &ci) in variables.iter().zip(&wanted) {
        let col = &table.columns[ci];
        let mut codes = Vec::with_capacity(keep.len());
        for &r in &keep {
            let code = if col.is_missing(r) {
                var.missing_code.ok_or_else(|| {
                    Error::SchemaMismatch(format!(
                        "missing cell in '{}' but schema has no missing category",
                        var.name
                    ))
                })?
            } else {
                encode_cell(var, col, r)?
            };
            codes.push(code);
        }
        data.push(codes);
    }

    Ok(Dataset { variables: variables.to_vec(), data, n_rows: keep.len() })
}

fn encode_cell(var: &Variable, col: &RawColumn, row: usize) -> Result<u32> {
    match (col, &var.bin_edges, &var.categories) {
        (RawColumn::Numeric(v), Some(edges), _) => Ok(bin_of(edges, v[row].unwrap())),
        (RawColumn::Boolean(v), None, None) => Ok(v[row].unwrap() as u32),
        (RawColumn::Text(v), _, Some(cats)) => {
            let s = v[row].as_ref().unwrap();
            cats.iter()
                .position(|c| c == s)
                .map(|p| p as u32)
                .ok_or_else(|| {
                    Error::SchemaMismatch(format!(
                        "unseen category '{s}' in column '{}'",
                        var.name
                    ))
                })
        }
        // Numeric 0/1 column read back where training saw boolean, or vice versa.
        (RawColumn::Numeric(v), None, None) => {
            let x = v[row].unwrap();
            if x == 0.0 || x == 1.0 {
                Ok(x as u32)
            } else {
                Err(Error::SchemaMismatch(format!(
                    "value {x} does not fit boolean column '{}'",
                    var.name
                )))
            }
        }
        _ => Err(Error::SchemaMismatch(format!(
            "column '{}' type does not match schema",
            var.name
        ))),
    }
}

impl Dataset {
    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn column(&self, v: VarId) -> &[u32] {
        &self.data[v]
    }

    pub fn cardinality(&self, v: VarId) -> usize {
        self.variables[v].cardinality
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn label_ids(&self) -> Vec<VarId> {
        (0..self.variables.len())
            .filter(|&i| self.variables[i].kind == VarKind::Label)
            .collect()
    }

    /// Hash of the variable schema; guards eval against silent re-binning.
    pub fn schema_hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.variables).expect("schema serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn validate(&self) -> Result<()> {
        for (i, var) in self.variables.iter().enumerate() {
            if self.data[i].len() != self.n_rows {
                return Err(Error::invalid(format!(
                    "column '{}' length mismatch",
                    var.name
                )));
            }
            if var.cardinality == 0 {
                return Err(Error::invalid(format!("variable '{}' has cardinality 0", var.name)));
            }
            if let Some(&v) = self.data[i].iter().find(|&&v| v as usize >= var.cardinality) {
                return Err(Error::invalid(format!(
                    "value {v} out of range for '{}' (cardinality {})",
                    var.name, var.cardinality
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn numeric_table(values: Vec<f64>) -> RawTable {
        RawTable {
            column_names: vec!["x".into()],
            columns: vec![RawColumn::Numeric(values.into_iter().map(Some).collect())],
            n_rows: 8,
            label_flags: vec![false],
        }
    }

    #[test]
    fn load_csv_basic() {
        let f = write_tmp("a,b,defect\n1,x,0\n2,y,1\n3,x,0\n4,z,1\n");
        let t = load_csv(f.path(), &["defect".into()]).unwrap();
        assert_eq!(t.n_rows, 4);
        assert_eq!(t.column_names, vec!["a", "b", "defect"]);
        assert!(matches!(t.columns[0], RawColumn::Numeric(_)));
        assert!(matches!(t.columns[1], RawColumn::Text(_)));
        assert_eq!(t.label_flags, vec![false, false, true]);
    }

    #[test]
    fn load_csv_empty_file() {
        let f = write_tmp("a,b\n");
        let err = load_csv(f.path(), &[]).unwrap_err();
        assert!(err.to_string().contains("empty file"));
    }

    #[test]
    fn load_csv_unknown_label() {
        let f = write_tmp("a,b\n1,2\n");
        let err = load_csv(f.path(), &["missing_col".into()]).unwrap_err();
        assert!(err.to_string().contains("unknown label name"));
    }

    #[test]
    fn load_csv_ragged_rows() {
        let f = write_tmp("a,b\n1,2\n3\n");
        assert!(load_csv(f.path(), &[]).is_err());
    }

    #[test]
    fn quartile_edges_match_hand_computation() {
        // 8 points 1..=8, type-7 quantiles at 1/4, 1/2, 3/4.
        let t = numeric_table((1..=8).map(f64::from).collect());
        let ds = discretize(&t, 4).unwrap();
        let edges = ds.variables[0].bin_edges.as_ref().unwrap();
        assert_eq!(edges, &vec![2.75, 4.5, 6.25]);
        assert_eq!(ds.data[0], vec![0, 0, 1, 1, 2, 2, 3, 3]);
        assert_eq!(ds.variables[0].cardinality, 4);
    }

    #[test]
    fn constant_column_collapses_to_one_bin() {
        let t = numeric_table(vec![5.0; 8]);
        let ds = discretize(&t, 4).unwrap();
        assert_eq!(ds.variables[0].cardinality, 1);
        assert!(ds.data[0].iter().all(|&v| v == 0));
    }

    #[test]
    fn text_first_appearance_coding() {
        let t = RawTable {
            column_names: vec!["c".into()],
            columns: vec![RawColumn::Text(vec![
                Some("a".into()),
                Some("b".into()),
                Some("a".into()),
            ])],
            n_rows: 3,
            label_flags: vec![false],
        };
        let ds = discretize(&t, 4).unwrap();
        assert_eq!(ds.data[0], vec![0, 1, 0]);
        assert_eq!(ds.variables[0].cardinality, 2);
        assert_eq!(ds.variables[0].categories, Some(vec!["a".into(), "b".into()]));
    }

    #[test]
    fn missing_feature_gets_trailing_category_missing_label_drops_row() {
        let t = RawTable {
            column_names: vec!["x".into(), "y".into()],
            columns: vec![
                RawColumn::Numeric(vec![Some(1.0), None, Some(3.0), Some(4.0)]),
                RawColumn::Numeric(vec![Some(0.0), Some(1.0), None, Some(1.0)]),
            ],
            n_rows: 4,
            label_flags: vec![false, true],
        };
        let ds = discretize(&t, 2).unwrap();
        // row 2 dropped (missing label), row 1 keeps a missing-feature code
        assert_eq!(ds.n_rows, 3);
        let x = &ds.variables[0];
        assert_eq!(ds.data[0][1], x.missing_code.unwrap());
    }

    #[test]
    fn discretize_rejects_small_bins() {
        let t = numeric_table((1..=8).map(f64::from).collect());
        assert!(discretize(&t, 1).is_err());
    }

    #[test]
    fn encode_with_schema_round_trips_training_data() {
        let f = write_tmp("a,b,defect\n1,x,0\n2,y,1\n3,x,0\n4,z,1\n5,y,0\n6,x,1\n7,y,0\n8,z,1\n");
        let t = load_csv(f.path(), &["defect".into()]).unwrap();
        let ds = discretize(&t, 4).unwrap();
        let re = encode_with_schema(&t, &ds.variables).unwrap();
        assert_eq!(ds, re);
    }

    #[test]
    fn encode_with_schema_rejects_unseen_category() {
        let f = write_tmp("a,defect\nx,0\ny,1\n");
        let t = load_csv(f.path(), &["defect".into()]).unwrap();
        let ds = discretize(&t, 4).unwrap();
        let f2 = write_tmp("a,defect\nz,0\n");
        let t2 = load_csv(f2.path(), &["defect".into()]).unwrap();
        assert!(matches!(
            encode_with_schema(&t2, &ds.variables),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn stratified_split_preserves_class_counts() {
        let mut rows = String::from("x,defect\n");
        for i in 0..90 {
            rows.push_str(&format!("{i},0\n"));
        }
        for i in 0..10 {
            rows.push_str(&format!("{i},1\n"));
        }
        let f = write_tmp(&rows);
        let t = load_csv(f.path(), &["defect".into()]).unwrap();
        let (train, test) = stratified_split(&t, 0.2, 7).unwrap();
        assert_eq!(train.n_rows, 80);
        assert_eq!(test.n_rows, 20);
        let positives = |tb: &RawTable| match &tb.columns[1] {
            RawColumn::Numeric(v) => v.iter().filter(|x| **x == Some(1.0)).count(),
            _ => panic!("expected numeric label"),
        };
        assert_eq!(positives(&test), 2);
        assert_eq!(positives(&train), 8);
    }

    #[test]
    fn bin_occupancy_within_one_chunk_of_ideal() {
        // 101 distinct values, 4 bins: each bin count within ceil(n/bins) +- 1.
        let t = RawTable {
            column_names: vec!["x".into()],
            columns: vec![RawColumn::Numeric(
                (0..101).map(|i| Some(i as f64)).collect(),
            )],
            n_rows: 101,
            label_flags: vec![false],
        };
        let ds = discretize(&t, 4).unwrap();
        let mut counts = vec![0usize; ds.variables[0].cardinality];
        for &v in &ds.data[0] {
            counts[v as usize] += 1;
        }
        let ideal = 101.0 / 4.0;
        let slack = (101f64 / 4.0).ceil();
        for &c in &counts {
            assert!((c as f64 - ideal).abs() <= slack, "counts {counts:?}");
        }
    }
}
