use std::sync::LazyLock;

use chrono::{TimeZone, Utc};
use cruciverba::curation::{filter_article, filter_keyword, CurationConfig};
use cruciverba::dataset::{compute_stats, read_jsonl, write_jsonl, ClueRecord, DatasetStore, ExportFilter, WhitespaceTokenizer};
use cruciverba::grid::{build, render, validate_layout, Entry, GridConfig, RenderFormat};
use cruciverba::rouge::{lcs_len, rouge_l, rouge_n, score_pair, RougeScore};
use cruciverba::styles::{parse_clue_list, render_prompt, ClueStyle, LIST_MARKER};
use cruciverba::validator::{classify_structure, contains_answer_leak, validate, ItalianLexicon};
use cruciverba::wiki::{parse_intro, ArticleRecord};
use proptest::prelude::*;
use regex::Regex;

static KEYWORD_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\p{Alphabetic}+(?: \p{Alphabetic}+)?$").unwrap());

fn tokens(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]).prop_map(String::from), 0..=max)
}

fn in_unit(s: RougeScore) -> bool {
    [s.precision, s.recall, s.f1].iter().all(|v| (0.0..=1.0).contains(v))
}

fn style() -> impl Strategy<Value = ClueStyle> {
    prop::sample::select(ClueStyle::ALL.to_vec())
}

fn brute_lcs(a: &[String], b: &[String]) -> usize {
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let mut it = b.iter();
        let ok = (0..a.len()).filter(|i| mask & (1 << i) != 0).all(|i| it.any(|x| *x == a[i]));
        if ok {
            best = best.max(mask.count_ones() as usize);
        }
    }
    best
}

proptest! {
    #[test]
    fn rouge_scores_in_unit_interval(a in tokens(12), b in tokens(12), n in 1usize..4) {
        prop_assert!(in_unit(rouge_n(&a, &b, n)));
        prop_assert!(in_unit(rouge_l(&a, &b)));
    }

    #[test]
    fn rouge_swap_exchanges_precision_and_recall(a in tokens(10), b in tokens(10), n in 1usize..4) {
        for (x, y) in [(rouge_n(&a, &b, n), rouge_n(&b, &a, n)), (rouge_l(&a, &b), rouge_l(&b, &a))] {
            prop_assert_eq!(x.precision, y.recall);
            prop_assert_eq!(x.recall, y.precision);
            prop_assert!((x.f1 - y.f1).abs() < 1e-12);
        }
    }

    #[test]
    fn rouge_n_beyond_length_is_zero(a in tokens(6), b in tokens(6), extra in 1usize..4) {
        let n = a.len().min(b.len()) + extra;
        prop_assert_eq!(rouge_n(&a, &b, n), RougeScore::default());
    }

    #[test]
    fn lcs_matches_brute_force(a in tokens(8), b in tokens(8)) {
        prop_assert_eq!(lcs_len(&a, &b), brute_lcs(&a, &b));
    }

    #[test]
    fn identical_text_scores_one(text in "[a-z]{1,6}( [a-z]{1,6}){1,8}") {
        let s = score_pair(&text, &text);
        prop_assert_eq!(s.rouge1.f1, 1.0);
        prop_assert_eq!(s.rouge_l.f1, 1.0);
    }

    #[test]
    fn keyword_filter_equals_predicate(s in "[ a-zàèéÉ1'\\-\\t.]{0,24}") {
        let kw = s.trim();
        let n = kw.chars().count();
        let expected = (3..=20).contains(&n) && KEYWORD_RE.is_match(kw);
        prop_assert_eq!(filter_keyword(&s, &CurationConfig::default()), expected);
    }

    #[test]
    fn article_accepted_iff_no_reasons(words in 0usize..80, kws in prop::collection::vec("[A-Za-z' ]{0,12}", 0..4)) {
        let article = ArticleRecord {
            intro_text: vec!["parola"; words].join(" "),
            bold_keywords: kws,
            ..Default::default()
        };
        let v = filter_article(&article, &CurationConfig::default());
        prop_assert_eq!(v.accepted, v.reasons.is_empty());
        for k in &v.keywords {
            prop_assert!(filter_keyword(k, &CurationConfig::default()));
        }
    }

    // Template literals are Latin text, so Greek contexts and Cyrillic keywords
    // can only occur where they were substituted.
    #[test]
    fn prompt_contains_context_and_keyword_once(
        context in "[αβγδε]{1,8}( [αβγδε]{1,8}){0,30}",
        keyword in "[ЖЗИЙКЛ]{3,12}",
        n in 1usize..=20,
        style in style(),
    ) {
        let prompt = render_prompt(&context, &keyword, n, style).unwrap();
        prop_assert_eq!(prompt.matches(context.as_str()).count(), 1);
        prop_assert_eq!(prompt.matches(keyword.as_str()).count(), 1);
    }

    #[test]
    fn parsed_clues_carry_no_list_marker(raw in prop::collection::vec("[-*•0-9.() a-zA-Z:\"«»]{0,30}", 0..8)) {
        if let Ok(clues) = parse_clue_list(&raw.join("\n"), 20) {
            for c in clues {
                prop_assert!(!LIST_MARKER.is_match(&c), "{:?}", c);
                prop_assert!(!c.is_empty());
            }
        }
    }

    #[test]
    fn numbered_list_round_trips(items in prop::collection::vec("[A-Za-zàè][a-zàè ,]{0,30}[a-z]", 1..=20), paren in any::<bool>()) {
        let text: String = items
            .iter()
            .enumerate()
            .map(|(i, c)| if paren { format!("{}) {c}\n", i + 1) } else { format!("{}. {c}\n", i + 1) })
            .collect();
        prop_assert_eq!(parse_clue_list(&text, items.len()).unwrap(), items);
    }

    #[test]
    fn embedded_answer_is_a_leak(
        prefix in "[A-Za-z ,.']{0,20}",
        answer in "[A-Za-zàè]{1,6}( [A-Za-z]{1,6})?",
        suffix in "[A-Za-z ,.']{0,20}",
    ) {
        let clue = format!("{prefix}{answer}{suffix}");
        prop_assert!(contains_answer_leak(&clue, &answer));
    }

    #[test]
    fn leaking_clue_never_passes(clue in "[A-Za-zè ]{1,40}", answer in "[A-Za-z]{2,8}", style in style()) {
        let lex = ItalianLexicon::builtin();
        let report = validate(&clue, &answer, style, lex);
        if report.answer_leak {
            prop_assert!(!report.passed);
        }
        prop_assert_eq!(report.style_matches_request, style == ClueStyle::Unrestricted || report.detected_style == Some(style));
        prop_assert_eq!(classify_structure(&clue, lex), report.detected_style);
    }

    #[test]
    fn intro_has_no_tags_and_bold_is_substring(
        parts in prop::collection::vec(("[a-zA-Zàè ]{1,15}", any::<bool>()), 1..10),
        extra in "[a-z ]{0,15}",
    ) {
        let body: String = parts
            .iter()
            .map(|(t, bold)| if *bold { format!("<b>{t}</b> ") } else { format!("<i>{t}</i> ") })
            .collect();
        let html = format!("<div class=\"mw-parser-output\"><p>{body}</p><p>{extra}</p><h2>Storia</h2><p>dopo</p></div>");
        let intro = parse_intro(&html).unwrap();
        prop_assert!(!intro.text.contains('<') && !intro.text.contains('>'));
        prop_assert!(!intro.text.contains("dopo"));
        for b in &intro.bold {
            prop_assert!(intro.text.contains(b.as_str()), "{:?} not in {:?}", b, intro.text);
        }
    }
}

fn record(i: usize, clue: &str, keyword: &str, style: ClueStyle) -> ClueRecord {
    ClueRecord {
        id: String::new(),
        title: format!("Voce {i}"),
        url: String::new(),
        category: ["Geografia", "Storia", "Musica"][i % 3].into(),
        context: format!("Testo di contesto numero {i} con alcune parole."),
        keyword: keyword.into(),
        style,
        clue: clue.into(),
        model_id: "gpt-4o".into(),
        rating: None,
        validation: validate(clue, keyword, style, ItalianLexicon::builtin()),
        rouge1: None,
        rouge2: None,
        rouge_l: None,
        created_at: Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
        revision: 0,
    }
}

fn records() -> impl Strategy<Value = Vec<ClueRecord>> {
    prop::collection::vec(("[A-Z][a-z]{2,10}", "[a-z]{3,8}( [a-z]{2,8}){0,6}", style()), 0..12).prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (kw, clue, s))| record(i, &clue, &kw, s))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jsonl_round_trip(recs in records()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        write_jsonl(&path, &recs).unwrap();
        prop_assert_eq!(read_jsonl(&path).unwrap(), recs);
    }

    #[test]
    fn store_export_import_is_identity(recs in records(), drop in any::<prop::sample::Index>()) {
        let a = tempfile::tempdir().unwrap();
        let store = DatasetStore::open(a.path().join("s")).unwrap();
        let mut ids = Vec::new();
        for r in recs {
            if let Ok(id) = store.append(r) {
                ids.push(id);
            }
        }
        if !ids.is_empty() {
            store.tombstone(&ids[drop.index(ids.len())]).unwrap();
        }
        let all = ExportFilter { include_tombstoned: true, ..Default::default() };
        let out = a.path().join("all.jsonl");
        store.export_jsonl(&all, &out).unwrap();
        let copy = DatasetStore::open(a.path().join("copy")).unwrap();
        copy.import_jsonl(&out).unwrap();
        prop_assert_eq!(copy.select(&all), store.select(&all));
        let visible = store.select(&ExportFilter::default());
        prop_assert_eq!(visible.len(), ids.len().saturating_sub(1));
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), ids.len());
    }

    #[test]
    fn stats_histograms_conserve_mass(recs in records()) {
        prop_assume!(!recs.is_empty());
        let stats = compute_stats(&recs, &WhitespaceTokenizer).unwrap();
        prop_assert_eq!(stats.context_token_histogram.values().sum::<usize>(), recs.len());
        prop_assert_eq!(stats.clue_token_histogram.values().sum::<usize>(), recs.len());
        prop_assert_eq!(stats.style_counts.values().sum::<usize>(), recs.len());
        prop_assert_eq!(stats.record_count, recs.len());
    }

    #[test]
    fn built_layouts_validate(answers in prop::collection::btree_set("[AEIORST]{2,7}", 1..8), seed in any::<u64>()) {
        let entries: Vec<Entry> = answers
            .iter()
            .enumerate()
            .map(|(i, a)| Entry::new(format!("e{i}"), a, format!("clue {i}")).unwrap())
            .collect();
        let cfg = GridConfig { seed, node_budget: 5_000, ..Default::default() };
        let layout = build(&entries, &cfg).unwrap();
        let check = validate_layout(&layout, &entries);
        prop_assert!(check.valid, "{:?}", check.issues);
        prop_assert_eq!(layout.placements.len() + layout.unplaced.len(), entries.len());
        prop_assert!(!layout.placements.is_empty());
        let again = build(&entries, &cfg).unwrap();
        prop_assert_eq!(
            render(&layout, &entries, RenderFormat::Json).unwrap(),
            render(&again, &entries, RenderFormat::Json).unwrap()
        );
    }
}
