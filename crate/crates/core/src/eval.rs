//! Character-level and sentence-level text precision.
//!
//! Character precision counts ground-truth characters recovered by a minimal
//! edit alignment of the prediction (unit-cost Levenshtein). Among alignments
//! of minimal cost the one with the most matches is used, so the score does
//! not depend on tie-breaking. Inserted characters never lower the score and
//! are reported as a separate rate.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Included in every report so consumers know how partial credit was assigned.
pub const METRIC_CONVENTION: &str = "char precision = (|gt| - substitutions - deletions) / |gt| under a minimal unit-cost \
edit alignment (most matches among minimal alignments); insertions reported separately; \
sentence precision = exact match per box";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("ground truth is empty")]
    EmptyGroundTruth,
    #[error("no transcript pairs")]
    EmptyInput,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptPair {
    #[serde(rename = "gt")]
    pub ground_truth: String,
    #[serde(rename = "pred")]
    pub predicted: String,
    #[serde(rename = "lang")]
    pub language: String,
    #[serde(rename = "box", deserialize_with = "string_or_number")]
    pub box_id: String,
}

fn string_or_number<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Id {
        S(String),
        N(serde_json::Number),
    }
    Ok(match Id::deserialize(d)? {
        Id::S(s) => s,
        Id::N(n) => n.to_string(),
    })
}

impl TranscriptPair {
    pub fn new(gt: &str, pred: &str) -> Self {
        Self { ground_truth: gt.into(), predicted: pred.into(), language: "und".into(), box_id: String::new() }
    }

    pub fn with_language(mut self, lang: &str) -> Self {
        self.language = lang.into();
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    #[default]
    None,
    Nfc,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MatchOptions {
    pub normalization: Normalization,
    pub trim_trailing_whitespace: bool,
}

impl MatchOptions {
    fn prepare(&self, s: &str) -> Vec<char> {
        let s = if self.trim_trailing_whitespace { s.trim_end() } else { s };
        match self.normalization {
            Normalization::None => s.chars().collect(),
            Normalization::Nfc => s.nfc().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOp {
    Match(char),
    Substitute { gt: char, pred: char },
    Delete(char),
    Insert(char),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EditCounts {
    pub matches: usize,
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
}

impl EditCounts {
    pub fn distance(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }
}

/// Minimal edit alignment of `pred` against `gt`, preferring more matches on
/// ties. Returns the operation sequence in reading order.
pub fn align(gt: &[char], pred: &[char]) -> Vec<EditOp> {
    let (n, m) = (gt.len(), pred.len());
    let w = m + 1;
    // (cost, matches); smaller cost wins, then larger matches.
    let mut t = vec![(0u32, 0u32); (n + 1) * w];
    for i in 1..=n {
        t[i * w] = (i as u32, 0);
    }
    for (j, cell) in t[..w].iter_mut().enumerate() {
        *cell = (j as u32, 0);
    }
    let better = |a: (u32, u32), b: (u32, u32)| a.0 < b.0 || (a.0 == b.0 && a.1 > b.1);
    for i in 1..=n {
        for j in 1..=m {
            let (dc, dm) = t[(i - 1) * w + j - 1];
            let mut best = if gt[i - 1] == pred[j - 1] { (dc, dm + 1) } else { (dc + 1, dm) };
            let del = t[(i - 1) * w + j];
            let del = (del.0 + 1, del.1);
            if better(del, best) {
                best = del;
            }
            let ins = t[i * w + j - 1];
            let ins = (ins.0 + 1, ins.1);
            if better(ins, best) {
                best = ins;
            }
            t[i * w + j] = best;
        }
    }
    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = t[i * w + j];
        if i > 0 && j > 0 {
            let (dc, dm) = t[(i - 1) * w + j - 1];
            let same = gt[i - 1] == pred[j - 1];
            let diag = if same { (dc, dm + 1) } else { (dc + 1, dm) };
            if diag == here {
                ops.push(if same { EditOp::Match(gt[i - 1]) } else { EditOp::Substitute { gt: gt[i - 1], pred: pred[j - 1] } });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 {
            let up = t[(i - 1) * w + j];
            if (up.0 + 1, up.1) == here {
                ops.push(EditOp::Delete(gt[i - 1]));
                i -= 1;
                continue;
            }
        }
        ops.push(EditOp::Insert(pred[j - 1]));
        j -= 1;
    }
    ops.reverse();
    ops
}

/// Operation counts of [`align`], from the final DP cell alone: with cost
/// `c` and `M` matches, `S + D = n - M`, `I = c - (n - M)`, `S = m - M - I`.
pub fn edit_counts(gt: &[char], pred: &[char]) -> EditCounts {
    let (n, m) = (gt.len(), pred.len());
    let mut stack = [(0u32, 0u32); 64];
    let mut heap = Vec::new();
    let row: &mut [(u32, u32)] = if m < stack.len() {
        &mut stack[..=m]
    } else {
        heap.resize(m + 1, (0, 0));
        &mut heap
    };
    for (j, cell) in row.iter_mut().enumerate() {
        *cell = (j as u32, 0);
    }
    for i in 1..=n {
        let mut diag = row[0];
        row[0] = (i as u32, 0);
        for j in 1..=m {
            let (dc, dm) = diag;
            let mut best = if gt[i - 1] == pred[j - 1] { (dc, dm + 1) } else { (dc + 1, dm) };
            let up = (row[j].0 + 1, row[j].1);
            let left = (row[j - 1].0 + 1, row[j - 1].1);
            for cand in [up, left] {
                if cand.0 < best.0 || (cand.0 == best.0 && cand.1 > best.1) {
                    best = cand;
                }
            }
            diag = row[j];
            row[j] = best;
        }
    }
    let (cost, matches) = (row[m].0 as usize, row[m].1 as usize);
    let insertions = cost - (n - matches);
    let substitutions = m - matches - insertions;
    EditCounts { matches, substitutions, deletions: n - matches - substitutions, insertions }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxScore {
    pub char_precision: f64,
    pub sentence_correct: bool,
    pub gt_chars: usize,
    pub counts: EditCounts,
}

pub fn score_pair(p: &TranscriptPair, opts: &MatchOptions) -> Result<BoxScore, EvalError> {
    let gt = opts.prepare(&p.ground_truth);
    if gt.is_empty() {
        return Err(EvalError::EmptyGroundTruth);
    }
    let pred = opts.prepare(&p.predicted);
    let counts = edit_counts(&gt, &pred);
    let correct = gt.len() - counts.substitutions - counts.deletions;
    Ok(BoxScore {
        char_precision: (correct as f64 / gt.len() as f64).clamp(0.0, 1.0),
        sentence_correct: gt == pred,
        gt_chars: gt.len(),
        counts,
    })
}

/// Fraction of ground-truth characters reproduced, strict comparison.
pub fn char_precision(p: &TranscriptPair) -> Result<f64, EvalError> {
    score_pair(p, &MatchOptions::default()).map(|s| s.char_precision)
}

/// 1 when the prediction equals the ground truth exactly, else 0.
pub fn sentence_precision(p: &TranscriptPair, opts: &MatchOptions) -> u8 {
    u8::from(opts.prepare(&p.ground_truth) == opts.prepare(&p.predicted))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PrecisionRow {
    pub char_precision: f64,
    pub sentence_precision: f64,
    pub insertion_rate: f64,
    pub box_count: usize,
    pub char_count: usize,
    pub correct_chars: usize,
    pub exact_boxes: usize,
}

#[derive(Default)]
struct Tally {
    boxes: usize,
    chars: usize,
    correct: usize,
    exact: usize,
    inserted: usize,
}

impl Tally {
    fn add(&mut self, s: &BoxScore) {
        self.boxes += 1;
        self.chars += s.gt_chars;
        self.correct += s.gt_chars - s.counts.substitutions - s.counts.deletions;
        self.exact += usize::from(s.sentence_correct);
        self.inserted += s.counts.insertions;
    }

    fn row(&self) -> PrecisionRow {
        PrecisionRow {
            char_precision: self.correct as f64 / self.chars as f64,
            sentence_precision: self.exact as f64 / self.boxes as f64,
            insertion_rate: self.inserted as f64 / self.chars as f64,
            box_count: self.boxes,
            char_count: self.chars,
            correct_chars: self.correct,
            exact_boxes: self.exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionReport {
    pub convention: &'static str,
    pub options: MatchOptions,
    pub languages: BTreeMap<String, PrecisionRow>,
    pub overall: PrecisionRow,
}

/// Character precision weighted by ground-truth length; sentence precision as
/// the mean of per-box indicators. Rows per language and overall.
pub fn aggregate(pairs: &[TranscriptPair], opts: &MatchOptions) -> Result<PrecisionReport, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut overall = Tally::default();
    let mut per_lang: BTreeMap<String, Tally> = BTreeMap::new();
    for p in pairs {
        let s = score_pair(p, opts)?;
        overall.add(&s);
        per_lang.entry(p.language.clone()).or_default().add(&s);
    }
    Ok(PrecisionReport {
        convention: METRIC_CONVENTION,
        options: *opts,
        languages: per_lang.into_iter().map(|(k, t)| (k, t.row())).collect(),
        overall: overall.row(),
    })
}

impl PrecisionReport {
    pub fn table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:<12} {:>6} {:>7} {:>10} {:>10}", "lang", "boxes", "chars", "char_prec", "sent_prec").unwrap();
        let rows = self.languages.iter().map(|(k, r)| (k.as_str(), r)).chain(std::iter::once(("overall", &self.overall)));
        for (name, r) in rows {
            writeln!(
                out,
                "{:<12} {:>6} {:>7} {:>10.4} {:>10.4}",
                name, r.box_count, r.char_count, r.char_precision, r.sentence_precision
            )
            .unwrap();
        }
        out
    }
}

/// Parses `{"gt", "pred", "lang", "box"}` lines. Blank lines are skipped.
pub fn parse_pairs_jsonl(text: &str) -> Result<Vec<TranscriptPair>, EvalError> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let pair: TranscriptPair = serde_json::from_str(line)
            .map_err(|e| EvalError::Malformed { line: i + 1, message: e.to_string() })?;
        if pair.ground_truth.is_empty() {
            return Err(EvalError::Malformed { line: i + 1, message: "empty ground truth".into() });
        }
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Human-readable alignment of each pair, for debugging scores.
pub fn aligned_diff(pairs: &[TranscriptPair], opts: &MatchOptions) -> String {
    let mut out = String::new();
    for p in pairs {
        let ops = align(&opts.prepare(&p.ground_truth), &opts.prepare(&p.predicted));
        let (mut g, mut q, mut k) = (String::new(), String::new(), String::new());
        for op in ops {
            let (a, b, c) = match op {
                EditOp::Match(ch) => (ch, ch, '='),
                EditOp::Substitute { gt, pred } => (gt, pred, 'S'),
                EditOp::Delete(ch) => (ch, '-', 'D'),
                EditOp::Insert(ch) => ('-', ch, 'I'),
            };
            g.push(a);
            q.push(b);
            k.push(c);
        }
        writeln!(out, "[{}] {}\n  gt:   {g}\n  pred: {q}\n  ops:  {k}", p.box_id, p.language).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn precision_examples() {
        assert_eq!(char_precision(&TranscriptPair::new("hello", "hello")).unwrap(), 1.0);
        assert_eq!(char_precision(&TranscriptPair::new("hello", "hallo")).unwrap(), 0.8);
        assert_eq!(char_precision(&TranscriptPair::new("abc", "")).unwrap(), 0.0);
        assert_eq!(char_precision(&TranscriptPair::new("", "abc")).unwrap_err(), EvalError::EmptyGroundTruth);
    }

    #[test]
    fn insertions_do_not_cost_precision() {
        let s = score_pair(&TranscriptPair::new("abc", "aXbYc"), &MatchOptions::default()).unwrap();
        assert_eq!(s.char_precision, 1.0);
        assert_eq!(s.counts.insertions, 2);
        assert!(!s.sentence_correct);
    }

    #[test]
    fn tie_break_prefers_matches() {
        // Two substitutions and delete+insert both cost 2; the latter keeps one match.
        let c = edit_counts(&chars("ab"), &chars("ba"));
        assert_eq!(c.distance(), 2);
        assert_eq!(c.matches, 1);
    }

    #[test]
    fn long_predictions() {
        let gt = chars(&"abcde".repeat(30));
        let pred = chars(&"abXde".repeat(31));
        let c = edit_counts(&gt, &pred);
        assert_eq!(c.matches, 120);
        assert_eq!(c.substitutions, 30);
        assert_eq!(c.insertions, 5);
        assert_eq!(c.deletions, 0);
    }

    #[test]
    fn sentence_examples() {
        let strict = MatchOptions::default();
        let trim = MatchOptions { trim_trailing_whitespace: true, ..strict };
        assert_eq!(sentence_precision(&TranscriptPair::new("你好", "你好"), &strict), 1);
        assert_eq!(sentence_precision(&TranscriptPair::new("你好", "你奸"), &strict), 0);
        assert_eq!(sentence_precision(&TranscriptPair::new("abc ", "abc"), &strict), 0);
        assert_eq!(sentence_precision(&TranscriptPair::new("abc ", "abc"), &trim), 1);
    }

    #[test]
    fn nfc_is_opt_in() {
        let composed = "\u{00e9}";
        let decomposed = "e\u{0301}";
        let p = TranscriptPair::new(composed, decomposed);
        assert_eq!(sentence_precision(&p, &MatchOptions::default()), 0);
        let nfc = MatchOptions { normalization: Normalization::Nfc, ..Default::default() };
        assert_eq!(sentence_precision(&p, &nfc), 1);
    }

    #[test]
    fn aggregate_examples() {
        let opts = MatchOptions::default();
        let pairs = vec![TranscriptPair::new("abcd", "abcd"), TranscriptPair::new("abcd", "abxy")];
        let r = aggregate(&pairs, &opts).unwrap();
        assert_eq!(r.overall.char_precision, 0.75);
        assert_eq!(r.overall.sentence_precision, 0.5);
        let mixed = vec![
            TranscriptPair::new("abcd", "abcd").with_language("en"),
            TranscriptPair::new("你好", "你").with_language("zh"),
            TranscriptPair::new("xyz", "xyz").with_language("en"),
        ];
        let r = aggregate(&mixed, &opts).unwrap();
        assert_eq!(r.languages.len(), 2);
        assert_eq!(r.languages.values().map(|row| row.box_count).sum::<usize>(), 3);
        assert_eq!(r.languages["zh"].char_precision, 0.5);
        assert_eq!(aggregate(&[], &opts).unwrap_err(), EvalError::EmptyInput);
        assert!(r.table().contains("overall"));
    }

    #[test]
    fn jsonl_parsing() {
        let text = "{\"gt\":\"ab\",\"pred\":\"ab\",\"lang\":\"en\",\"box\":\"1\"}\n\n{\"gt\":\"c\",\"pred\":\"\",\"lang\":\"en\",\"box\":2}\n";
        let pairs = parse_pairs_jsonl(text).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[1].box_id, "2");
        let bad = "{\"gt\":\"ab\",\"pred\":\"ab\",\"lang\":\"en\",\"box\":\"1\"}\nnot json\n";
        assert!(matches!(parse_pairs_jsonl(bad), Err(EvalError::Malformed { line: 2, .. })));
        let empty_gt = "{\"gt\":\"\",\"pred\":\"ab\",\"lang\":\"en\",\"box\":\"1\"}";
        assert!(matches!(parse_pairs_jsonl(empty_gt), Err(EvalError::Malformed { line: 1, .. })));
    }

    #[test]
    fn diff_dump() {
        let d = aligned_diff(&[TranscriptPair::new("hello", "hallo")], &MatchOptions::default());
        assert!(d.contains("ops:  =S==="));
    }

    proptest! {
        #[test]
        fn identical_strings_score_one(s in "\\PC{1,30}") {
            prop_assert_eq!(char_precision(&TranscriptPair::new(&s, &s)).unwrap(), 1.0);
        }

        #[test]
        fn exact_sentence_implies_full_chars(gt in "[abc ]{1,10}", pred in "[abc ]{0,10}", trim: bool) {
            let opts = MatchOptions { trim_trailing_whitespace: trim, ..Default::default() };
            let p = TranscriptPair::new(&gt, &pred);
            if let Ok(s) = score_pair(&p, &opts) {
                if sentence_precision(&p, &opts) == 1 {
                    prop_assert_eq!(s.char_precision, 1.0);
                }
                prop_assert!((0.0..=1.0).contains(&s.char_precision));
            }
        }

        #[test]
        fn shared_prefix_never_hurts(gt in "[abc]{1,8}", pred in "[abc]{0,8}", prefix in "[abc]{1,5}") {
            let base = char_precision(&TranscriptPair::new(&gt, &pred)).unwrap();
            let gt2 = format!("{prefix}{gt}");
            let pred2 = format!("{prefix}{pred}");
            let ext = char_precision(&TranscriptPair::new(&gt2, &pred2)).unwrap();
            prop_assert!(ext >= base - 1e-15);
        }

        #[test]
        fn counts_agree_with_alignment(gt in "[abc]{0,12}", pred in "[abc]{0,12}") {
            let (g, p) = (chars(&gt), chars(&pred));
            let mut c = EditCounts::default();
            for op in align(&g, &p) {
                match op {
                    EditOp::Match(_) => c.matches += 1,
                    EditOp::Substitute { .. } => c.substitutions += 1,
                    EditOp::Delete(_) => c.deletions += 1,
                    EditOp::Insert(_) => c.insertions += 1,
                }
            }
            prop_assert_eq!(edit_counts(&g, &p), c);
        }

        #[test]
        fn singleton_aggregate_matches(gt in "[a-z]{1,12}", pred in "[a-z]{0,12}") {
            let p = TranscriptPair::new(&gt, &pred);
            let opts = MatchOptions::default();
            let r = aggregate(std::slice::from_ref(&p), &opts).unwrap();
            prop_assert_eq!(r.overall.char_precision, char_precision(&p).unwrap());
            prop_assert_eq!(r.overall.sentence_precision, sentence_precision(&p, &opts) as f64);
        }
    }
}
