//! Criteria queries over metadata documents, deep LOC filtering through
//! the base maps, deterministic seeded sampling, and the two sketched
//! analyses (language trend, per-file change frequency).

use std::collections::{BTreeMap, BTreeSet};

use crate::basemaps::BaseMaps;
use crate::error::{Error, Result};
use crate::langclass::{ExtensionTable, Language};
use crate::metadata::{AuthMetadata, ProjMetadata};
use crate::object::{ObjectId, ObjectStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    fn apply(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Field {
    NAuthors,
    NCommits,
    NFiles,
    FirstTs,
    LastTs,
    Stars,
    Lang(Language),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub field: Field,
    pub cmp: Cmp,
    pub value: i64,
}

/// Conjunction of comparison atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub atoms: Vec<Atom>,
}

fn query_err(col: usize, msg: impl Into<String>) -> Error {
    Error::Query {
        col,
        msg: msg.into(),
    }
}

fn parse_atom(text: &str, col: usize) -> Result<Atom> {
    let op_pos = text
        .find(|c| c == '<' || c == '>' || c == '=')
        .ok_or_else(|| query_err(col, format!("no comparison operator in {text:?}")))?;
    let field_text = text[..op_pos].trim();
    let rest = &text[op_pos..];
    let (cmp, op_len) = if let Some(two) = rest.get(..2) {
        match two {
            "<=" => (Cmp::Le, 2),
            ">=" => (Cmp::Ge, 2),
            "==" => (Cmp::Eq, 2),
            _ => match &rest[..1] {
                "<" => (Cmp::Lt, 1),
                ">" => (Cmp::Gt, 1),
                _ => return Err(query_err(col + op_pos, format!("bad comparison {rest:?}"))),
            },
        }
    } else {
        match rest {
            "<" | ">" => return Err(query_err(col + op_pos, "missing value")),
            _ => return Err(query_err(col + op_pos, format!("bad comparison {rest:?}"))),
        }
    };
    let value_text = text[op_pos + op_len..].trim();
    let value: i64 = value_text
        .parse()
        .map_err(|_| query_err(col + op_pos + op_len, format!("bad value {value_text:?}")))?;

    let field = match field_text {
        "n_authors" => Field::NAuthors,
        "n_commits" => Field::NCommits,
        "n_files" => Field::NFiles,
        "first_ts" => Field::FirstTs,
        "last_ts" => Field::LastTs,
        "stars" => Field::Stars,
        other => {
            if let Some(lang_name) = other.strip_prefix("lang.") {
                let lang = Language::from_name(lang_name)
                    .ok_or_else(|| query_err(col, format!("unknown language {lang_name:?}")))?;
                Field::Lang(lang)
            } else {
                return Err(query_err(col, format!("unknown field {other:?}")));
            }
        }
    };
    Ok(Atom { field, cmp, value })
}

/// Grammar: `atom (" AND " atom)*` with `atom = field cmp integer`.
/// Errors carry the 1-based column of the offending token.
pub fn parse_query(text: &str) -> Result<Predicate> {
    let mut atoms = Vec::new();
    let mut col = 1usize;
    for part in text.split(" AND ") {
        if part.trim().is_empty() {
            return Err(query_err(col, "empty atom"));
        }
        atoms.push(parse_atom(part.trim(), col)?);
        col += part.len() + " AND ".len();
    }
    if atoms.is_empty() {
        return Err(query_err(1, "empty query"));
    }
    Ok(Predicate { atoms })
}

/// Field access shared by project and author documents. Returns
/// `Ok(None)` when the field is legal for the kind but absent (stars),
/// and an error when the field does not apply to the kind at all.
pub trait MetaDoc {
    fn kind(&self) -> &'static str;
    fn id(&self) -> &str;
    fn field(&self, field: &Field) -> Result<Option<i64>>;
}

impl MetaDoc for ProjMetadata {
    fn kind(&self) -> &'static str {
        "project"
    }

    fn id(&self) -> &str {
        &self.project_id
    }

    fn field(&self, field: &Field) -> Result<Option<i64>> {
        Ok(Some(match field {
            Field::NAuthors => self.n_authors as i64,
            Field::NCommits => self.n_commits as i64,
            Field::NFiles => self.n_files as i64,
            Field::FirstTs => self.first_ts,
            Field::LastTs => self.last_ts,
            Field::Stars => match self.stars {
                Some(s) => s as i64,
                None => return Ok(None),
            },
            Field::Lang(l) => self
                .lang_counts
                .get(l.as_str())
                .copied()
                .unwrap_or(0) as i64,
        }))
    }
}

impl MetaDoc for AuthMetadata {
    fn kind(&self) -> &'static str {
        "author"
    }

    fn id(&self) -> &str {
        &self.author_id
    }

    fn field(&self, field: &Field) -> Result<Option<i64>> {
        Ok(Some(match field {
            Field::NCommits => self.n_commits as i64,
            Field::NFiles => self.n_files as i64,
            Field::FirstTs => self.first_ts,
            Field::LastTs => self.last_ts,
            Field::Lang(l) => self
                .lang_counts
                .get(l.as_str())
                .copied()
                .unwrap_or(0) as i64,
            Field::NAuthors | Field::Stars => {
                return Err(Error::FieldKindMismatch {
                    field: format!("{field:?}"),
                    kind: "author",
                })
            }
        }))
    }
}

/// Conjunction over atoms. A missing optional field (stars) makes its
/// atom false.
pub fn eval(p: &Predicate, doc: &dyn MetaDoc) -> Result<bool> {
    for atom in &p.atoms {
        match doc.field(&atom.field)? {
            Some(v) => {
                if !atom.cmp.apply(v, atom.value) {
                    return Ok(false);
                }
            }
            None => return Ok(false),
        }
    }
    Ok(true)
}

/// True when ≥ `min_files` distinct paths of `language` in the project
/// have some project-introduced blob with ≥ `min_lines` lines. Binary
/// blobs never qualify; the maximum line count over a path's historical
/// blobs is what counts.
pub fn deep_loc_filter(
    project_id: &str,
    language: Language,
    min_lines: u64,
    min_files: u64,
    table: &ExtensionTable,
    maps: &BaseMaps,
    store: &ObjectStore,
) -> Result<bool> {
    if min_lines < 1 || min_files < 1 {
        return Err(Error::Config("min_lines and min_files must be >= 1".into()));
    }
    let project_blobs = maps.project_blobs(project_id)?;
    let mut qualifying = 0u64;
    for path in maps.project_paths(project_id)? {
        if table.classify_path(&path) != Some(language) {
            continue;
        }
        let Some(blobs) = maps.f2b.get(&path) else {
            continue;
        };
        let max_lines = blobs
            .iter()
            .filter(|b| project_blobs.contains(*b))
            .filter_map(|b| {
                let stats = store.blobs.get(&ObjectId::new(b.clone()).ok()?)?;
                (!stats.is_binary).then_some(stats.line_count)
            })
            .max()
            .unwrap_or(0);
        if max_lines >= min_lines {
            qualifying += 1;
            if qualifying >= min_files {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSpec {
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct QueryResult {
    pub matched: Vec<String>,
    pub sampled: Vec<String>,
    pub shortfall: bool,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fisher–Yates shuffle driven by the pinned splitmix64 recurrence, then
/// the first min(n, len) elements. Bit-identical across implementations
/// and runs.
pub fn sample(matched: &[String], spec: &SampleSpec) -> Vec<String> {
    debug_assert!(matched.windows(2).all(|w| w[0] < w[1]), "input must be sorted and deduped");
    let mut items = matched.to_vec();
    let mut state = spec.seed;
    for i in (1..items.len()).rev() {
        let j = (splitmix64(&mut state) % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
    items.truncate(spec.n.min(matched.len()));
    items
}

/// Evaluates a predicate over documents and draws a deterministic sample.
pub fn run_query<D: MetaDoc>(
    p: &Predicate,
    docs: &[D],
    spec: &SampleSpec,
) -> Result<QueryResult> {
    let mut matched = Vec::new();
    for d in docs {
        if eval(p, d)? {
            matched.push(d.id().to_string());
        }
    }
    matched.sort();
    let sampled = sample(&matched, spec);
    let shortfall = matched.len() < spec.n;
    Ok(QueryResult {
        matched,
        sampled,
        shortfall,
    })
}

/// Proleptic-Gregorian year of a UTC epoch timestamp (days-from-civil
/// inverse, no leap seconds).
pub fn utc_year(ts: i64) -> i64 {
    let days = ts.div_euclid(86_400);
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    if m <= 2 {
        y + 1
    } else {
        y
    }
}

/// Rows (year, language, commit_count): commits introducing ≥1 path of
/// the language in that UTC year. A commit counts once per language.
pub fn lang_trend(
    maps: &BaseMaps,
    store: &ObjectStore,
    table: &ExtensionTable,
) -> Result<Vec<(i64, Language, u64)>> {
    let mut counts: BTreeMap<(i64, Language), u64> = BTreeMap::new();
    for (commit, paths) in &maps.c2f {
        let ts = store.commits[&ObjectId::new(commit.clone())?].commit_ts;
        let year = utc_year(ts);
        let langs: BTreeSet<Language> = paths
            .iter()
            .filter_map(|p| table.classify_path(p))
            .collect();
        for lang in langs {
            *counts.entry((year, lang)).or_insert(0) += 1;
        }
    }
    Ok(counts
        .into_iter()
        .map(|((year, lang), n)| (year, lang, n))
        .collect())
}

/// Distinct blobs introduced at each path by this project's commits.
pub fn file_change_counts(
    project_id: &str,
    maps: &BaseMaps,
) -> Result<BTreeMap<String, u64>> {
    let commits = maps
        .p2c
        .get(project_id)
        .ok_or_else(|| Error::UnknownProject(project_id.to_string()))?;
    let mut counts: BTreeMap<String, BTreeSet<&String>> = BTreeMap::new();
    for c in commits {
        let Some(paths) = maps.c2f.get(c) else { continue };
        let commit_blobs = &maps.c2b[c];
        for p in paths {
            // blobs this commit introduced that have ever lived at p
            let blobs = maps.f2b[p].iter().filter(|b| commit_blobs.contains(*b));
            counts.entry(p.clone()).or_default().extend(blobs);
        }
    }
    Ok(counts
        .into_iter()
        .map(|(p, blobs)| (p, blobs.len() as u64))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basemaps::build_basemaps;
    use crate::testutil::*;

    fn table() -> ExtensionTable {
        ExtensionTable::default()
    }

    #[test]
    fn parse_two_atom_query() {
        let p = parse_query("lang.Python>=20 AND n_authors>=5").unwrap();
        assert_eq!(p.atoms.len(), 2);
        assert_eq!(p.atoms[0].field, Field::Lang(Language::Python));
        assert_eq!(p.atoms[0].cmp, Cmp::Ge);
        assert_eq!(p.atoms[0].value, 20);
        assert_eq!(p.atoms[1].field, Field::NAuthors);
    }

    #[test]
    fn parse_single_atom() {
        let p = parse_query("n_commits>0").unwrap();
        assert_eq!(p.atoms.len(), 1);
    }

    #[test]
    fn parse_unknown_language_is_case_sensitive() {
        match parse_query("lang.Cobol>=1") {
            Err(Error::Query { col, msg }) => {
                assert_eq!(col, 1);
                assert!(msg.contains("Cobol"));
            }
            other => panic!("expected query error, got {other:?}"),
        }
        assert!(parse_query("lang.COBOL>=1").is_ok());
    }

    #[test]
    fn parse_errors_report_columns() {
        match parse_query("n_authors>=5 AND bogus>1") {
            Err(Error::Query { col, .. }) => assert_eq!(col, 18),
            other => panic!("{other:?}"),
        }
        assert!(parse_query("").is_err());
        assert!(parse_query("n_authors~5").is_err());
        assert!(parse_query("n_authors>").is_err());
    }

    fn doc(langs: &[(&str, u64)], n_authors: u64, stars: Option<u64>) -> ProjMetadata {
        ProjMetadata {
            project_id: "p".into(),
            n_authors,
            n_commits: 10,
            n_files: 30,
            first_ts: 0,
            last_ts: 10,
            lang_counts: langs.iter().map(|(l, c)| (l.to_string(), *c)).collect(),
            fork_of: None,
            stars,
        }
    }

    #[test]
    fn eval_sam_predicate() {
        let p = parse_query("lang.Python>=20 AND n_authors>=5").unwrap();
        assert!(eval(&p, &doc(&[("Python", 25)], 6, None)).unwrap());
        assert!(!eval(&p, &doc(&[("Python", 25)], 4, None)).unwrap());
        assert!(!eval(&p, &doc(&[], 6, None)).unwrap());
    }

    #[test]
    fn eval_missing_stars_is_false() {
        let p = parse_query("stars>=1").unwrap();
        assert!(!eval(&p, &doc(&[], 1, None)).unwrap());
        assert!(eval(&p, &doc(&[], 1, Some(3))).unwrap());
    }

    #[test]
    fn eval_author_kind_mismatch() {
        let auth = AuthMetadata {
            author_id: "a <a@x>".into(),
            n_commits: 1,
            n_blobs: 1,
            n_files: 1,
            n_projects: 1,
            first_ts: 0,
            last_ts: 0,
            lang_counts: Default::default(),
        };
        let p = parse_query("stars>=1").unwrap();
        assert!(matches!(
            eval(&p, &auth),
            Err(Error::FieldKindMismatch { .. })
        ));
        let p = parse_query("n_commits>=1").unwrap();
        assert!(eval(&p, &auth).unwrap());
    }

    #[test]
    fn eval_monotone_in_threshold() {
        let docs: Vec<ProjMetadata> = (0..20)
            .map(|i| {
                let mut d = doc(&[("Python", i)], i, None);
                d.project_id = format!("p{i:02}");
                d
            })
            .collect();
        let strict = parse_query("lang.Python>=10").unwrap();
        let weak = parse_query("lang.Python>=5").unwrap();
        let count = |p: &Predicate| docs.iter().filter(|d| eval(p, *d).unwrap()).count();
        assert!(count(&weak) >= count(&strict));
    }

    #[test]
    fn sample_pinned_sequence() {
        let matched: Vec<String> = (1..=5).map(|i| format!("p{i}")).collect();

        // execute the pinned recurrence independently of `sample`
        let mut state: u64 = 42;
        let mut step = |bound: u64| -> u64 {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z = z ^ (z >> 31);
            z % bound
        };
        let mut expect = matched.clone();
        for i in (1..expect.len()).rev() {
            let j = step(i as u64 + 1) as usize;
            expect.swap(i, j);
        }
        let expect2: Vec<String> = expect.into_iter().take(2).collect();

        let got = sample(&matched, &SampleSpec { n: 2, seed: 42 });
        assert_eq!(got, expect2);
        // determinism across runs
        assert_eq!(got, sample(&matched, &SampleSpec { n: 2, seed: 42 }));
    }

    #[test]
    fn sample_overask_returns_permutation() {
        let matched: Vec<String> = (1..=4).map(|i| format!("p{i}")).collect();
        let got = sample(&matched, &SampleSpec { n: 10, seed: 7 });
        assert_eq!(got.len(), 4);
        let mut sorted = got.clone();
        sorted.sort();
        assert_eq!(sorted, matched);
    }

    #[test]
    fn deep_loc_threshold() {
        let mut b = StoreBuilder::new();
        // 3 python files: two reach 50 lines at some version, one never does
        b.blob("big1", 2000, 60, false);
        b.blob("big2", 2000, 55, false);
        b.blob("small", 100, 49, false);
        b.blob("smaller", 90, 40, false);
        let c1 = b.commit(
            "ann",
            1,
            &[],
            &[("a.py", "smaller"), ("b.py", "big2"), ("c.py", "small")],
        );
        let c2 = b.commit("ann", 2, &[&c1], &[("a.py", "big1"), ("b.py", "big2"), ("c.py", "small")]);
        b.project("p", &[&c2]);
        let store = b.build();
        let maps = build_basemaps(&store).unwrap();
        let t = table();
        assert!(deep_loc_filter("p", Language::Python, 50, 2, &t, &maps, &store).unwrap());
        assert!(!deep_loc_filter("p", Language::Python, 50, 3, &t, &maps, &store).unwrap());
        // no C files at all
        assert!(!deep_loc_filter("p", Language::CCpp, 1, 1, &t, &maps, &store).unwrap());
        assert!(matches!(
            deep_loc_filter("ghost", Language::Python, 1, 1, &t, &maps, &store),
            Err(Error::UnknownProject(_))
        ));
    }

    #[test]
    fn binary_blobs_never_qualify() {
        let mut b = StoreBuilder::new();
        b.blob("bin", 5000, 0, true);
        let c = b.commit("ann", 1, &[], &[("x.py", "bin")]);
        b.project("p", &[&c]);
        let store = b.build();
        let maps = build_basemaps(&store).unwrap();
        assert!(!deep_loc_filter("p", Language::Python, 1, 1, &table(), &maps, &store).unwrap());
    }

    #[test]
    fn utc_year_values() {
        assert_eq!(utc_year(0), 1970);
        assert_eq!(utc_year(1_500_000_000), 2017); // 2017-07-14
        assert_eq!(utc_year(1_451_606_400), 2016); // 2016-01-01
        assert_eq!(utc_year(1_451_606_399), 2015); // 2015-12-31 23:59:59
    }

    #[test]
    fn lang_trend_once_per_language() {
        let mut b = StoreBuilder::new();
        // one commit in 2017 introducing two python files
        let c1 = b.commit("ann", 1_500_000_000, &[], &[("a.py", "b1"), ("b.py", "b2")]);
        b.project("p", &[&c1]);
        let store = b.build();
        let maps = build_basemaps(&store).unwrap();
        let rows = lang_trend(&maps, &store, &table()).unwrap();
        assert_eq!(rows, vec![(2017, Language::Python, 1)]);
    }

    #[test]
    fn lang_trend_two_years() {
        let mut b = StoreBuilder::new();
        let c1 = b.commit("ann", 1_420_113_600, &[], &[("x.c", "b1")]); // 2015
        let c2 = b.commit("ann", 1_451_736_000, &[&c1], &[("x.c", "b2")]); // 2016
        b.project("p", &[&c2]);
        let store = b.build();
        let maps = build_basemaps(&store).unwrap();
        let rows = lang_trend(&maps, &store, &table()).unwrap();
        assert_eq!(
            rows,
            vec![(2015, Language::CCpp, 1), (2016, Language::CCpp, 1)]
        );
    }

    #[test]
    fn lang_trend_empty_without_classified_files() {
        let mut b = StoreBuilder::new();
        let c1 = b.commit("ann", 1, &[], &[("README", "b1")]);
        b.project("p", &[&c1]);
        let store = b.build();
        let maps = build_basemaps(&store).unwrap();
        assert!(lang_trend(&maps, &store, &table()).unwrap().is_empty());
    }

    #[test]
    fn file_change_counts_cases() {
        let mut b = StoreBuilder::new();
        let c1 = b.commit("ann", 1, &[], &[("f.c", "v1"), ("stable.c", "s1")]);
        let c2 = b.commit("ann", 2, &[&c1], &[("f.c", "v2"), ("stable.c", "s1")]);
        let c3 = b.commit("ann", 3, &[&c2], &[("f.c", "v3"), ("stable.c", "s1")]);
        b.project("p", &[&c3]);
        let store = b.build();
        let maps = build_basemaps(&store).unwrap();
        let counts = file_change_counts("p", &maps).unwrap();
        assert_eq!(counts["f.c"], 3);
        assert_eq!(counts["stable.c"], 1);
    }

    #[test]
    fn file_change_counts_revert_dedupes() {
        let mut b = StoreBuilder::new();
        let c1 = b.commit("ann", 1, &[], &[("f.c", "v1")]);
        let c2 = b.commit("ann", 2, &[&c1], &[("f.c", "v2")]);
        let c3 = b.commit("ann", 3, &[&c2], &[("f.c", "v1")]); // revert
        b.project("p", &[&c3]);
        let store = b.build();
        let maps = build_basemaps(&store).unwrap();
        let counts = file_change_counts("p", &maps).unwrap();
        assert_eq!(counts["f.c"], 2);
    }
}
