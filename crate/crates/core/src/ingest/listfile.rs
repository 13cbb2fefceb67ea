//! Delimited list files.
//!
//! Three layouts are accepted:
//!
//! * ranks-as-rows: one column per list, row `r` holds the label of the item
//!   ranked `r`. An optional leading `rank` column is ignored. A column may
//!   stop early (missing cells) to mark censoring.
//! * items-as-rows: a leading item-label column, then one column of integer
//!   ranks per list. Missing cells mark items outside the observed prefix.
//! * scores: like items-as-rows but cells hold real-valued scores; the
//!   highest score gets rank 1.
//!
//! Item ids are assigned in lexicographic label order, so the same ranking
//! parses to the same [`ListSet`] in every layout.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use super::{sniff_delimiter, split_metadata, ParseError};
use crate::lists::{CensoredRankedList, ItemId, ItemUniverse, ListSet, RankList, RankedList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    RanksAsRows,
    ItemsAsRows,
    Scores,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::RanksAsRows => "ranks-as-rows",
            Orientation::ItemsAsRows => "items-as-rows",
            Orientation::Scores => "scores",
        })
    }
}

impl FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ranks-as-rows" | "ranks" => Ok(Orientation::RanksAsRows),
            "items-as-rows" | "items" => Ok(Orientation::ItemsAsRows),
            "scores" => Ok(Orientation::Scores),
            other => Err(format!("unknown orientation {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ListFileOptions {
    /// `None` sniffs: a first header cell named `item` means items-as-rows.
    pub orientation: Option<Orientation>,
    /// `None` sniffs tab vs comma from the header row.
    pub delimiter: Option<u8>,
    /// Overrides a `# universe_size:` header line.
    pub universe_size: Option<usize>,
    /// Cell contents (after trimming) that mark a missing value.
    pub missing_tokens: Vec<String>,
    /// Accept ties: mid-rank coded integer ranks, or equal scores. Tied
    /// items are put in label order.
    pub allow_ties_midrank: bool,
}

impl Default for ListFileOptions {
    fn default() -> Self {
        Self {
            orientation: None,
            delimiter: None,
            universe_size: None,
            missing_tokens: vec![String::new(), "NA".into()],
            allow_ties_midrank: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedListSet {
    pub lists: ListSet,
    pub names: Vec<String>,
    pub orientation: Orientation,
    /// Number of tie groups that were broken; always 0 unless ties are allowed.
    pub ties_broken: usize,
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn cell(&self, row: usize, col: usize) -> &str {
        self.rows[row].get(col).map_or("", |s| s.as_str())
    }
}

fn read_table(body: &str, delimiter: u8) -> Result<Table, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.iter().all(String::is_empty) {
        return Err(ParseError::MissingHeader);
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(Table { header, rows })
}

/// Parse a list file into a validated [`ListSet`].
pub fn parse_listset(text: &str, options: &ListFileOptions) -> Result<ParsedListSet, ParseError> {
    let (meta, body) = split_metadata(text)?;
    let mut universe_size = options.universe_size;
    if universe_size.is_none() {
        if let Some((_, v)) = meta.iter().find(|(k, _)| k == "universe_size") {
            universe_size = Some(v.parse().map_err(|_| ParseError::InvalidMetadata(format!("universe_size: {v}")))?);
        }
    }
    let delimiter = options.delimiter.unwrap_or_else(|| sniff_delimiter(body));
    let table = read_table(body, delimiter)?;
    let first = table.header[0].to_ascii_lowercase();
    let orientation = options.orientation.unwrap_or(if first == "item" || first == "items" {
        Orientation::ItemsAsRows
    } else {
        Orientation::RanksAsRows
    });
    let missing: HashSet<&str> = options.missing_tokens.iter().map(String::as_str).collect();
    let ctx = Context { table: &table, missing, universe_size, allow_ties: options.allow_ties_midrank };
    let (lists, names, ties_broken) = match orientation {
        Orientation::RanksAsRows => ctx.ranks_as_rows()?,
        Orientation::ItemsAsRows => ctx.items_as_rows(false)?,
        Orientation::Scores => ctx.items_as_rows(true)?,
    };
    Ok(ParsedListSet { lists, names, orientation, ties_broken })
}

struct Context<'a> {
    table: &'a Table,
    missing: HashSet<&'a str>,
    universe_size: Option<usize>,
    allow_ties: bool,
}

impl Context<'_> {
    fn is_missing(&self, cell: &str) -> bool {
        self.missing.contains(cell)
    }

    fn ranks_as_rows(&self) -> Result<(ListSet, Vec<String>, usize), ParseError> {
        let table = self.table;
        let skip = usize::from(table.header[0].eq_ignore_ascii_case("rank"));
        let names: Vec<String> = table.header[skip..].to_vec();
        if names.is_empty() {
            return Err(ParseError::NoLists);
        }
        let mut columns: Vec<Vec<&str>> = Vec::with_capacity(names.len());
        for (c, name) in names.iter().enumerate() {
            let col = c + skip;
            let mut labels = Vec::new();
            let mut seen = HashSet::new();
            let mut ended = false;
            for row in 0..table.rows.len() {
                let cell = table.cell(row, col);
                if self.is_missing(cell) {
                    ended = true;
                    continue;
                }
                if ended {
                    return Err(ParseError::GapInList { list: name.clone(), row: row + 1 });
                }
                if !seen.insert(cell) {
                    return Err(ParseError::DuplicateItem { list: name.clone(), item: cell.to_string() });
                }
                labels.push(cell);
            }
            if labels.is_empty() {
                return Err(ParseError::EmptyList { list: name.clone() });
            }
            columns.push(labels);
        }
        let distinct: BTreeSet<&str> = columns.iter().flatten().copied().collect();
        let looks_complete = columns.iter().all(|c| c.len() == distinct.len());
        let size = match self.universe_size {
            Some(p) => p,
            None if looks_complete => distinct.len(),
            None => return Err(ParseError::MissingUniverseSize),
        };
        let labels: Vec<String> = distinct.iter().map(|s| s.to_string()).collect();
        let universe = build_universe(size, labels)?;
        let ids: HashMap<&str, ItemId> = distinct.iter().enumerate().map(|(i, &l)| (l, i as ItemId)).collect();
        let lists = columns
            .iter()
            .map(|labels| to_list(labels.iter().map(|l| ids[l]).collect(), size))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((finish(universe, lists)?, names, 0))
    }

    fn items_as_rows(&self, scores: bool) -> Result<(ListSet, Vec<String>, usize), ParseError> {
        let table = self.table;
        let names: Vec<String> = table.header[1..].to_vec();
        if names.is_empty() {
            return Err(ParseError::NoLists);
        }
        let mut seen = HashSet::new();
        for (row, cells) in table.rows.iter().enumerate() {
            let label = cells.first().map_or("", String::as_str);
            if label.is_empty() {
                return Err(ParseError::EmptyLabel { row: row + 1 });
            }
            if !seen.insert(label) {
                return Err(ParseError::DuplicateRow(label.to_string()));
            }
        }
        let mut sorted_labels: Vec<&str> = seen.into_iter().collect();
        sorted_labels.sort_unstable();
        let ids: HashMap<&str, ItemId> = sorted_labels.iter().enumerate().map(|(i, &l)| (l, i as ItemId)).collect();
        let size = self.universe_size.unwrap_or(table.rows.len());
        let universe = build_universe(size, sorted_labels.iter().map(|s| s.to_string()).collect())?;

        let mut ties_broken = 0;
        let mut lists = Vec::with_capacity(names.len());
        for (c, name) in names.iter().enumerate() {
            let col = c + 1;
            // (value, label) for every observed cell
            let mut entries: Vec<(f64, &str)> = Vec::new();
            for row in 0..table.rows.len() {
                let cell = table.cell(row, col);
                if self.is_missing(cell) {
                    continue;
                }
                let expected = if scores { "score" } else { "rank" };
                let value: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                    ParseError::InvalidNumber { list: name.clone(), row: row + 1, value: cell.to_string(), expected }
                })?;
                entries.push((value, table.cell(row, 0)));
            }
            if entries.is_empty() {
                return Err(ParseError::EmptyList { list: name.clone() });
            }
            ties_broken +=
                if scores { self.order_scores(name, &mut entries)? } else { self.order_ranks(name, &mut entries)? };
            lists.push(to_list(entries.iter().map(|(_, l)| ids[l]).collect(), size)?);
        }
        Ok((finish(universe, lists)?, names, ties_broken))
    }

    /// Sort by descending score, breaking ties by label when allowed.
    fn order_scores(&self, list: &str, entries: &mut [(f64, &str)]) -> Result<usize, ParseError> {
        entries.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        let groups = tie_groups(entries);
        if groups > 0 && !self.allow_ties {
            let value = entries.windows(2).find(|w| w[0].0 == w[1].0).map(|w| w[0].0).unwrap_or_default();
            return Err(ParseError::Ties { list: list.to_string(), value: value.to_string() });
        }
        Ok(groups)
    }

    /// Check integer ranks form exactly `1..=k`, or with ties allowed, that
    /// each tied group carries the mid-rank of the positions it occupies.
    fn order_ranks(&self, list: &str, entries: &mut [(f64, &str)]) -> Result<usize, ParseError> {
        entries.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        let k = entries.len();
        let groups = tie_groups(entries);
        if groups > 0 && !self.allow_ties {
            let value = entries.windows(2).find(|w| w[0].0 == w[1].0).map(|w| w[0].0).unwrap_or_default();
            return Err(ParseError::Ties { list: list.to_string(), value: value.to_string() });
        }
        let non_contiguous =
            |detail: String| ParseError::NonContiguousRanks { list: list.to_string(), expected_max: k, detail };
        let mut start = 0;
        while start < k {
            let value = entries[start].0;
            let end = start + entries[start..].iter().take_while(|e| e.0 == value).count();
            // positions start+1..=end, mid-rank (start+1+end)/2
            let expected = (start + 1 + end) as f64 / 2.0;
            if value != expected {
                if end - start == 1 && value.fract() != 0.0 {
                    return Err(ParseError::InvalidNumber {
                        list: list.to_string(),
                        row: 0,
                        value: value.to_string(),
                        expected: "integer rank",
                    });
                }
                return Err(non_contiguous(format!("found {value} where {expected} was expected")));
            }
            start = end;
        }
        Ok(groups)
    }
}

fn tie_groups(entries: &[(f64, &str)]) -> usize {
    let mut groups = 0;
    let mut i = 0;
    while i < entries.len() {
        let run = entries[i..].iter().take_while(|e| e.0 == entries[i].0).count();
        if run > 1 {
            groups += 1;
        }
        i += run;
    }
    groups
}

fn build_universe(size: usize, labels: Vec<String>) -> Result<ItemUniverse, ParseError> {
    if labels.len() > size {
        return Err(ParseError::UniverseTooSmall { items: labels.len(), universe: size });
    }
    ItemUniverse::partially_labeled(size, labels)
        .map_err(|e| ParseError::Invalid { what: "universe", detail: e.to_string() })
}

fn to_list(observed: Vec<ItemId>, size: usize) -> Result<RankList, ParseError> {
    let invalid = |e: crate::Error| ParseError::Invalid { what: "list", detail: e.to_string() };
    if observed.len() == size {
        RankedList::new(observed).map(RankList::from).map_err(invalid)
    } else {
        CensoredRankedList::new(observed, size).map(RankList::from).map_err(invalid)
    }
}

fn finish(universe: ItemUniverse, lists: Vec<RankList>) -> Result<ListSet, ParseError> {
    ListSet::new(universe, lists).map_err(|e| ParseError::Invalid { what: "list set", detail: e.to_string() })
}

/// Write a list set in the ranks-as-rows layout.
///
/// Unlabeled items are written as their numeric id. Censored sets carry a
/// `# universe_size:` line so the output parses back without extra options.
pub fn emit_listset(lists: &ListSet, names: &[String]) -> String {
    let label = |id: ItemId| lists.universe().label(id).map_or_else(|| id.to_string(), str::to_string);
    let mut out = Vec::new();
    if lists.has_censored() {
        out.extend_from_slice(format!("# universe_size: {}\n", lists.universe_size()).as_bytes());
    }
    {
        let mut writer = csv::WriterBuilder::new().flexible(true).from_writer(&mut out);
        let mut header = vec!["rank".to_string()];
        header.extend((0..lists.len()).map(|i| names.get(i).cloned().unwrap_or_else(|| format!("list{}", i + 1))));
        writer.write_record(&header).expect("write to memory");
        let depth = lists.recommended_max_depth();
        for row in 0..depth {
            let mut record = vec![(row + 1).to_string()];
            record
                .extend(lists.lists().iter().map(|l| l.observed().get(row).map_or_else(String::new, |&id| label(id))));
            writer.write_record(&record).expect("write to memory");
        }
        writer.flush().expect("write to memory");
    }
    String::from_utf8(out).expect("csv output is utf-8")
}
