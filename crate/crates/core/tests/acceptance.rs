//! End-to-end acceptance gate. Each numbered criterion prints one
//! pass/fail line (run with `--nocapture` to see them on success) and the
//! suite fails if any criterion fails or overruns its time budget.
//!
//! Everything runs against mocks and bundled fixtures; no network.

mod common;

use std::collections::HashMap;
use std::io::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use webtk_core::codec::{
    canonicalize_category, encode_action, parse_action, Action, ActionParseError,
    CategoryVocabulary,
};
use webtk_core::distill::{distill, DescriptionExample, DistillConfig};
use webtk_core::html::{
    parse_html, serialize, strip_closing_tags, HtmlDocument, NodeId,
};
use webtk_core::metrics::{bleu, closest_description, exact_match, rouge1};
use webtk_core::model::RandomActionModel;
use webtk_core::nav::{find_task, reset, run_episode, step, task_registry, Outcome, OraclePolicy, Terminal};
use webtk_core::snippet::{extract_snippet, snippet_stats, SnippetConfig};

struct Criterion {
    passed: bool,
    line: String,
}

fn run_criterion(
    results: &mut Vec<Criterion>,
    number: u32,
    name: &str,
    limit: Option<Duration>,
    body: impl FnOnce() -> Result<String, String>,
) {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let on_time = limit.is_none_or(|l| elapsed <= l);
    let timing = match limit {
        Some(l) => format!("{} ms < {} ms", elapsed.as_millis(), l.as_millis()),
        None => format!("{} ms", elapsed.as_millis()),
    };
    let (passed, detail) = match outcome {
        Ok(detail) if on_time => (true, detail),
        Ok(detail) => (false, format!("{detail}; over time budget")),
        Err(detail) => (false, detail),
    };
    let tag = if passed { "PASS" } else { "FAIL" };
    results.push(Criterion {
        passed,
        line: format!("[{tag}] {number} {name}: {detail} ({timing})"),
    });
}

#[test]
fn acceptance_criteria() {
    let mut results = Vec::new();
    let s = Duration::from_secs;
    run_criterion(&mut results, 1, "ref-numbering", Some(s(1)), ref_numbering);
    run_criterion(&mut results, 2, "snippet-invariants", Some(s(30)), snippet_invariants);
    run_criterion(&mut results, 3, "distiller-oracle", Some(s(10)), distiller_oracle);
    run_criterion(&mut results, 4, "round-trip", Some(s(10)), round_trip);
    run_criterion(&mut results, 5, "action-codec", Some(s(5)), action_codec);
    run_criterion(&mut results, 6, "navigation", Some(s(60)), navigation);
    run_criterion(&mut results, 7, "metrics-fidelity", None, metrics_fidelity);
    run_criterion(&mut results, 8, "closest-description", None, closest_description_oracle);
    run_criterion(&mut results, 9, "canonicalization", None, canonicalization);
    for criterion in &results {
        println!("{}", criterion.line);
    }
    let failed: Vec<&str> = results
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.line.as_str())
        .collect();
    assert!(
        failed.is_empty(),
        "{} of {} criteria failed:\n{}",
        failed.len(),
        results.len(),
        failed.join("\n")
    );
}

// 1: the first input on the sign-in fixture numbers as ref 5.
fn ref_numbering() -> Result<String, String> {
    let mut doc = parse_html(common::FIGURE_PAGE);
    doc.assign_refs();
    let first_input = doc
        .elements()
        .into_iter()
        .find(|&id| doc.tag(id) == Some("input"))
        .ok_or("fixture has no input")?;
    match doc.element_ref(first_input) {
        Some(5) => Ok("first input numbered ref 5".into()),
        other => Err(format!("first input numbered {other:?}, wanted Some(5)")),
    }
}

const GRID: [(f64, u32); 6] = [
    (25.0, 3),
    (25.0, 4),
    (50.0, 3),
    (50.0, 4),
    (300.0, 5),
    (500.0, 7),
];

// 2: containment, target uniqueness, limit respect, and monotonicity over
// 1,000 random trees and the full config grid.
fn snippet_invariants() -> Result<String, String> {
    let mut extractions = 0u64;
    for seed in 0..1000u64 {
        let doc = parse_html(&common::random_page(seed));
        let elements = doc.elements();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let salient = elements[rng.gen_range(0..elements.len())];
        let mut counts = Vec::with_capacity(GRID.len());
        for (pct, height) in GRID {
            let config = SnippetConfig {
                max_new_descendants_pct: pct,
                max_height: height,
            };
            let ctx = |what: &str| format!("{what} broken: seed {seed}, config ({pct}, {height})");
            let snip = extract_snippet(&doc, salient, config).map_err(|e| format!("{e}"))?;

            // containment: the salient subtree appears verbatim in the copy
            let mut stripped = snip.doc.clone();
            stripped
                .remove_attr(snip.salient, "target")
                .map_err(|e| format!("{e}"))?;
            let (in_snip, _) = stripped.subtree_copy(snip.salient).map_err(|e| format!("{e}"))?;
            let (in_orig, _) = doc.subtree_copy(salient).map_err(|e| format!("{e}"))?;
            if serialize(&in_snip) != serialize(&in_orig) {
                return Err(ctx("containment"));
            }

            let marked: Vec<NodeId> = snip
                .doc
                .elements()
                .into_iter()
                .filter(|&id| snip.doc.has_attr(id, "target"))
                .collect();
            if marked != vec![snip.salient] {
                return Err(ctx("target uniqueness"));
            }

            let (hops, growth, count) =
                snippet_stats(&doc, salient, config).map_err(|e| format!("{e}"))?;
            if hops > height || growth > pct || count != snip.doc.element_count() {
                return Err(ctx("limit respect"));
            }
            counts.push(count);
            extractions += 1;
        }
        for i in 0..GRID.len() {
            for j in 0..GRID.len() {
                if GRID[i].0 <= GRID[j].0 && GRID[i].1 <= GRID[j].1 && counts[i] > counts[j] {
                    return Err(format!(
                        "monotonicity broken: seed {seed}, {:?} gives {} > {:?} gives {}",
                        GRID[i], counts[i], GRID[j], counts[j]
                    ));
                }
            }
        }
    }
    Ok(format!(
        "4 invariants over {extractions} extractions (1000 trees x 6 configs)"
    ))
}

// ---- criterion 3: distiller vs an independent re-implementation ----

const DISTILL_SNIPPET_CFG: SnippetConfig = SnippetConfig {
    max_new_descendants_pct: 300.0,
    max_height: 3,
};
const LABEL_POOL: [&str; 4] = ["div", "span", "a", "label"];

fn field(id: &str, label: &str, hint: &str) -> String {
    format!(
        r#"<div class="field"><label for="{id}">{label}</label><input type="text" id="{id}"><span>{hint}</span></div>"#
    )
}

fn page(fields: &[String]) -> String {
    format!("<html><body><form>{}</form></body></html>", fields.concat())
}

/// 40 HTML pages covering the whole funnel: 25 share the "Email" label to
/// trip the per-description cap, and one page each exercises duplicate
/// target ids, single-text snippets, unresolved/blank/garbled labels, a
/// label outside the snippet, and non-input targets.
fn fixture_pages() -> Vec<(String, String)> {
    let tlds = ["com", "org", "net", "de", "io"];
    let mut pages = Vec::new();
    for i in 0..25 {
        pages.push((
            format!("https://mail{i}.example.{}/signup", tlds[i % tlds.len()]),
            page(&[
                field(&format!("em{i}"), "Email", "We never share it."),
                field(&format!("u{i}"), &format!("Handle {i}"), "Pick something unique."),
            ]),
        ));
    }
    for i in 25..30 {
        pages.push((
            format!("https://forms{i}.example.{}/apply", tlds[i % tlds.len()]),
            page(&[
                field(&format!("gn{i}"), &format!("Given name {i}"), "As printed."),
                field(&format!("fn{i}"), &format!("Family name {i}"), "As printed."),
                field(&format!("ph{i}"), &format!("Phone {i}"), "Digits only."),
            ]),
        ));
    }
    pages.push((
        "https://lonely.example.com/one".into(),
        page(&[r#"<div class="field"><label for="lone">Lonely</label><input type="text" id="lone"></div>"#.into()]),
    ));
    pages.push((
        "https://twins.example.org/dup".into(),
        page(&[
            r#"<div class="field"><label for="dup">Twin field</label><input type="text" id="dup"><input type="text" id="dup"></div>"#.into(),
            field("ok31", "Backup code", "Eight digits."),
        ]),
    ));
    pages.push((
        "https://ghost.example.net/missing".into(),
        page(&[
            r#"<label for="ghost">Ghost</label>"#.into(),
            field("ok32", "Reference number", "From your letter."),
        ]),
    ));
    pages.push((
        "https://blank.example.de/ws".into(),
        page(&[
            field("ws33", "   ", "Label is blank."),
            field("ok33", "Delivery note", "Optional."),
        ]),
    ));
    pages.push((
        "https://punct.example.io/sym".into(),
        page(&[
            field("pn34", "(!!)", "No letters above."),
            field("ok34", "Invoice id", "Top right corner."),
        ]),
    ));
    pages.push((
        "https://garbled.example.com/enc".into(),
        page(&[
            field("rc35", "Bad \u{FFFD} byte", "Mojibake above."),
            field("ok35", "Tracking code", "From the email."),
        ]),
    ));
    pages.push((
        "https://faraway.example.org/split".into(),
        format!(
            "<html><body>{}{}</body></html>",
            r#"<div class="group"><label for="far36">Distant description</label></div>"#,
            r#"<div class="group"><input type="text" id="far36"><span>first hint</span><span>second hint</span></div>"#
        ),
    ));
    pages.push((
        "https://message.example.net/ta".into(),
        page(&[r#"<div class="field"><label for="msg37">Message</label><textarea id="msg37"></textarea><span>Max 200 chars.</span></div>"#.into()]),
    ));
    pages.push((
        "https://country.example.de/sel".into(),
        page(&[r#"<div class="field"><label for="c38">Country</label><select id="c38"><option>Aruba</option></select><span>Pick one.</span></div>"#.into()]),
    ));
    pages.push((
        "https://letters.example.io/cb".into(),
        page(&[r#"<div class="field"><label for="nl39">Subscribe to news</label><input type="checkbox" id="nl39"><span>Weekly digest.</span></div>"#.into()]),
    ));
    pages
}

/// The pages interleaved with records the reader must skip: a warcinfo, a
/// PNG response, a response with no target URI, and a request record.
fn build_fixture_warc(pages: &[(String, String)]) -> Vec<u8> {
    let mut bytes = Vec::new();
    bytes.extend(common::warc_record("warcinfo", None, b"software: fixture"));
    for (i, (url, html)) in pages.iter().enumerate() {
        if i == 10 {
            bytes.extend(common::warc_record(
                "response",
                Some("https://img.example.com/logo"),
                &common::http_response("image/png", "PNGDATA"),
            ));
        }
        if i == 20 {
            bytes.extend(common::warc_record(
                "response",
                None,
                &common::http_response("text/html", "<p>anonymous</p>"),
            ));
        }
        if i == 30 {
            bytes.extend(common::warc_record(
                "request",
                Some("https://asked.example.com/"),
                b"GET / HTTP/1.1\r\n\r\n",
            ));
        }
        bytes.extend(common::html_record(url, html));
    }
    bytes
}

#[derive(Default, PartialEq, Debug)]
struct OracleCounts {
    raw_pairs: u64,
    duplicate_id_warnings: u64,
    clean_pairs: u64,
    dropped_duplicate_target_id: u64,
    dropped_single_text: u64,
    pre_balance: u64,
    dropped_by_balancing: u64,
    emitted: u64,
    top20_share: f64,
}

fn oracle_elements_in(doc: &HtmlDocument, id: NodeId) -> usize {
    let mut count = usize::from(doc.node(id).is_element());
    for &child in doc.node(id).children() {
        count += oracle_elements_in(doc, child);
    }
    count
}

fn oracle_choose_root(doc: &HtmlDocument, salient: NodeId, cfg: SnippetConfig) -> NodeId {
    let base = oracle_elements_in(doc, salient).max(1) as f64;
    let mut accepted = salient;
    let mut cur = salient;
    let mut hops = 0;
    while let Some(parent) = doc.node(cur).parent() {
        hops += 1;
        if hops > cfg.max_height {
            break;
        }
        let grown = oracle_elements_in(doc, parent) as f64 - base;
        if 100.0 * grown / base > cfg.max_new_descendants_pct {
            break;
        }
        accepted = parent;
        cur = parent;
    }
    accepted
}

fn oracle_clean(text: &str) -> Option<String> {
    let trimmed = text.trim();
    (trimmed.chars().any(char::is_alphanumeric) && !trimmed.contains('\u{FFFD}'))
        .then(|| trimmed.to_string())
}

fn oracle_normalize(text: &str) -> String {
    text.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}

fn oracle_tld(url: &str) -> String {
    let host = url
        .split("://")
        .nth(1)
        .unwrap_or(url)
        .split('/')
        .next()
        .unwrap_or_default();
    host.rsplit('.').next().unwrap_or(host).to_ascii_lowercase()
}

fn oracle_text_count(doc: &HtmlDocument) -> usize {
    doc.pre_order()
        .into_iter()
        .filter(|&id| doc.node(id).text().is_some_and(|t| !t.trim().is_empty()))
        .count()
}

/// Single-pass re-implementation of the distiller over the known page
/// list, sharing only the HTML tree primitives with the code under test.
fn oracle_distill(
    pages: &[(String, String)],
    seed: u64,
    cap: usize,
) -> (Vec<DescriptionExample>, OracleCounts) {
    let mut counts = OracleCounts::default();
    let mut candidates: Vec<(DescriptionExample, String)> = Vec::new();
    for (record_idx, (url, html)) in pages.iter().enumerate() {
        let doc = parse_html(html);
        let mut pair_idx: u64 = 0;
        for label in doc.elements() {
            if doc.tag(label) != Some("label") {
                continue;
            }
            let Some(wanted) = doc.attr(label, "for") else {
                continue;
            };
            let matches: Vec<NodeId> = doc
                .elements()
                .into_iter()
                .filter(|&e| doc.attr(e, "id") == Some(wanted))
                .collect();
            if matches.is_empty() {
                continue;
            }
            counts.raw_pairs += 1;
            if matches.len() > 1 {
                counts.duplicate_id_warnings += 1;
            }
            let target = matches[0];
            let this_pair = pair_idx;
            pair_idx += 1;
            let Some(description) = oracle_clean(&doc.text_content(label)) else {
                continue;
            };
            counts.clean_pairs += 1;
            let element_id = doc.attr(target, "id").unwrap_or_default().to_string();

            let root = oracle_choose_root(&doc, target, DISTILL_SNIPPET_CFG);
            let (mut copy, map) = doc.subtree_copy(root).expect("root is live");
            copy.mark_target(map[&target]).expect("target is live");
            if let Some(&label_copy) = map.get(&label) {
                let mut key = [0u8; 32];
                key[..8].copy_from_slice(&seed.to_le_bytes());
                key[8..16].copy_from_slice(&(record_idx as u64).to_le_bytes());
                key[16..24].copy_from_slice(&this_pair.to_le_bytes());
                let mut rng = ChaCha8Rng::from_seed(key);
                let tag = LABEL_POOL[rng.gen_range(0..LABEL_POOL.len())];
                copy.set_tag(label_copy, tag).expect("label is live");
                copy.remove_attr(label_copy, "for").expect("label is live");
            }
            let id_matches = copy
                .elements()
                .into_iter()
                .filter(|&e| copy.attr(e, "id") == Some(element_id.as_str()))
                .count();
            if id_matches != 1 {
                counts.dropped_duplicate_target_id += 1;
                continue;
            }
            if oracle_text_count(&copy) < 2 {
                counts.dropped_single_text += 1;
                continue;
            }
            let normalized = oracle_normalize(&description);
            candidates.push((
                DescriptionExample {
                    snippet_html: serialize(&copy),
                    element_id,
                    description,
                    source_url: url.clone(),
                    tld: oracle_tld(url),
                },
                normalized,
            ));
        }
    }
    counts.pre_balance = candidates.len() as u64;
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for (_, key) in &candidates {
        *freq.entry(key).or_default() += 1;
    }
    let mut sizes: Vec<u64> = freq.values().copied().collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    counts.top20_share = if candidates.is_empty() {
        0.0
    } else {
        sizes.iter().take(20).sum::<u64>() as f64 / candidates.len() as f64
    };
    let mut taken: HashMap<String, usize> = HashMap::new();
    let mut emitted = Vec::new();
    for (example, key) in candidates {
        let slot = taken.entry(key).or_insert(0);
        if *slot < cap {
            *slot += 1;
            emitted.push(example);
        }
    }
    counts.emitted = emitted.len() as u64;
    counts.dropped_by_balancing = counts.pre_balance - counts.emitted;
    (emitted, counts)
}

fn jsonl(examples: &[DescriptionExample]) -> String {
    examples
        .iter()
        .map(|e| serde_json::to_string(e).expect("serializable"))
        .map(|line| line + "\n")
        .collect()
}

fn distiller_oracle() -> Result<String, String> {
    let pages = fixture_pages();
    let warc_bytes = build_fixture_warc(&pages);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let plain = dir.path().join("fixture.warc");
    std::fs::write(&plain, &warc_bytes).map_err(|e| e.to_string())?;
    let gz_path = dir.path().join("fixture.warc.gz");
    let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
    enc.write_all(&warc_bytes).map_err(|e| e.to_string())?;
    std::fs::write(&gz_path, enc.finish().map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;

    let config = DistillConfig::default();
    let (examples, report) = distill(&[plain], &config, DISTILL_SNIPPET_CFG)
        .map_err(|e| e.to_string())?;
    let (gz_examples, gz_report) = distill(&[gz_path], &config, DISTILL_SNIPPET_CFG)
        .map_err(|e| e.to_string())?;
    if jsonl(&examples) != jsonl(&gz_examples) {
        return Err("gzip and plain runs differ".into());
    }
    if serde_json::to_string(&report).unwrap() != serde_json::to_string(&gz_report).unwrap() {
        return Err("gzip and plain reports differ".into());
    }

    let (oracle_examples, oracle) =
        oracle_distill(&pages, config.rng_seed, config.max_per_description);
    if jsonl(&examples) != jsonl(&oracle_examples) {
        let ours = jsonl(&examples);
        let theirs = jsonl(&oracle_examples);
        let diff = ours
            .lines()
            .zip(theirs.lines())
            .position(|(a, b)| a != b)
            .map(|i| {
                format!(
                    "first differing line {i}:\n  pipeline: {}\n  oracle:   {}",
                    ours.lines().nth(i).unwrap_or("<none>"),
                    theirs.lines().nth(i).unwrap_or("<none>")
                )
            })
            .unwrap_or_else(|| format!("line counts {} vs {}", ours.lines().count(), theirs.lines().count()));
        return Err(format!("emitted JSONL differs from oracle; {diff}"));
    }
    let got = OracleCounts {
        raw_pairs: report.raw_pairs,
        duplicate_id_warnings: report.duplicate_id_warnings,
        clean_pairs: report.clean_pairs,
        dropped_duplicate_target_id: report.dropped_duplicate_target_id,
        dropped_single_text: report.dropped_single_text,
        pre_balance: report.pre_balance_examples,
        dropped_by_balancing: report.dropped_by_balancing,
        emitted: report.emitted_examples,
        top20_share: report.top20_description_share,
    };
    if got != oracle {
        return Err(format!("stage counts differ:\n  pipeline: {got:?}\n  oracle:   {oracle:?}"));
    }
    if report.records_read != 40
        || report.pages_parsed != 40
        || report.records_skipped_non_html != 1
        || report.records_skipped_other_type != 2
        || report.records_skipped_malformed != 1
        || report.files_aborted != 0
    {
        return Err(format!("record funnel counts off: {report:?}"));
    }

    let email_count = examples
        .iter()
        .filter(|e| e.description == "Email")
        .count();
    if email_count != 10 {
        return Err(format!("cap-10 balancing kept {email_count} Email examples"));
    }
    if report.dropped_single_text == 0 || report.dropped_duplicate_target_id == 0 {
        return Err("fixture failed to exercise a drop stage".into());
    }
    for example in &examples {
        let doc = parse_html(&example.snippet_html);
        for el in doc.elements() {
            if doc.text_content(el).trim() == example.description && doc.has_attr(el, "for") {
                return Err(format!(
                    "description element kept its for attribute: {}",
                    example.snippet_html
                ));
            }
        }
        let texts = doc
            .pre_order()
            .into_iter()
            .filter(|&id| doc.node(id).text().is_some_and(|t| !t.trim().is_empty()))
            .count();
        if texts < 2 {
            return Err(format!("single-text snippet emitted: {}", example.snippet_html));
        }
    }
    Ok(format!(
        "byte-identical JSONL + stage counts vs oracle; {} emitted, Email capped at 10",
        examples.len()
    ))
}

// 4: parse-serialize-parse is structurally stable on 500 pages, and the
// corruption transform reproduces its reference output byte for byte.
fn round_trip() -> Result<String, String> {
    let mut pages: Vec<String> = vec![
        common::FIGURE_PAGE.to_string(),
        page(&[field("rt", "Round trip", "stays put")]),
        "<div><span>unclosed".into(),
        "</div>stray".into(),
        "<div a=1 a=2 bare x='y\"z'>mixed</div>".into(),
        "<script>if (a < b) { c(); }</script><style>.x > .y {}</style>".into(),
        "i <3 <div>literal</div>".into(),
        "<DIV CLASS=\"UP\"><INPUT></DIV>".into(),
    ];
    for seed in 0..(500 - pages.len() as u64) {
        pages.push(common::random_page(0x1000 + seed));
    }
    for (i, source) in pages.iter().enumerate() {
        let first = parse_html(source);
        let second = parse_html(&serialize(&first));
        if !first.structurally_equal(&second) {
            return Err(format!("round trip changed page {i}: {source}"));
        }
    }
    let doc = parse_html(r#"<div id="form"><div><input id="username"></div></div>"#);
    let corrupted = strip_closing_tags(&doc);
    let wanted = r#"<div id="form"><div><input id="username">"#;
    if corrupted != wanted {
        return Err(format!("corruption output {corrupted:?}, wanted {wanted:?}"));
    }
    Ok(format!("{} pages round-trip; corruption output bit-exact", pages.len()))
}

// 5: encode-parse identity over 10,000 random actions plus one dedicated
// fixture per parse-error kind.
fn action_codec() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let charset: Vec<char> = "aB7 ,{}.:-_é\n\"'".chars().collect();
    for i in 0..10_000u32 {
        let ref_num = rng.gen_range(1..=1_000_000u32);
        let action = if rng.gen_bool(0.5) {
            Action::Click { ref_num }
        } else {
            let len = rng.gen_range(0..12);
            let text: String = (0..len)
                .map(|_| charset[rng.gen_range(0..charset.len())])
                .collect();
            Action::Type { ref_num, text }
        };
        let parsed = parse_action(&encode_action(&action));
        if parsed.as_ref() != Ok(&action) {
            return Err(format!("round trip {i} failed: {action:?} -> {parsed:?}"));
        }
    }
    let cases = [
        ("just words", ActionParseError::MalformedRecord),
        ("{action: click, ref: abc}", ActionParseError::NonIntegerRef),
        ("{action: fly, ref: 3}", ActionParseError::UnknownFunction),
        ("{action: type, ref: 4}", ActionParseError::MissingText),
    ];
    for (input, wanted) in cases {
        match parse_action(input) {
            Err(e) if e == wanted => {}
            other => return Err(format!("{input:?} gave {other:?}, wanted {wanted:?}")),
        }
    }
    Ok("10000 round trips; all 4 error kinds distinguished".into())
}

// 6: scripted oracles solve 100 episodes per task, the random policy does
// strictly worse everywhere, and double-clicking any checkbox restores any
// intermediate state.
fn navigation() -> Result<String, String> {
    let mut summary = Vec::new();
    for task in task_registry() {
        let oracle = OraclePolicy::new(&task.name);
        let mut oracle_wins = 0u32;
        for seed in 0..100 {
            let record = run_episode(&task, seed, &oracle).map_err(|e| e.to_string())?;
            if record.outcome == Outcome::Success {
                oracle_wins += 1;
            } else {
                return Err(format!("oracle lost {} at seed {seed}", task.name));
            }
        }
        let random = RandomActionModel::new(7, 12);
        let mut random_wins = 0u32;
        for seed in 0..100 {
            let record = run_episode(&task, seed, &random).map_err(|e| e.to_string())?;
            if record.outcome == Outcome::Success {
                random_wins += 1;
            }
        }
        if random_wins >= oracle_wins {
            return Err(format!(
                "random policy matched the oracle on {}: {random_wins} vs {oracle_wins}",
                task.name
            ));
        }
        summary.push(format!("{} {random_wins}", task.name));
    }

    let task = find_task("click-checkboxes").map_err(|e| e.to_string())?;
    let mut states_checked = 0u32;
    for seed in 0..10 {
        let base = reset(&task, seed);
        let boxes: Vec<u32> = base
            .doc
            .find_by_attr("type", "checkbox")
            .into_iter()
            .map(|id| base.doc.element_ref(id).expect("refs assigned"))
            .collect();
        for prefix in 0..=3usize.min(boxes.len()) {
            let mut state = reset(&task, seed);
            for &b in boxes.iter().take(prefix) {
                step(&mut state, &Action::Click { ref_num: b }).map_err(|e| e.to_string())?;
            }
            let before = state.html_with_refs();
            for &b in &boxes {
                let mut twice = state.clone();
                step(&mut twice, &Action::Click { ref_num: b }).map_err(|e| e.to_string())?;
                if twice.html_with_refs() == before {
                    return Err(format!("first click did not flip box {b} (seed {seed})"));
                }
                step(&mut twice, &Action::Click { ref_num: b }).map_err(|e| e.to_string())?;
                if twice.html_with_refs() != before {
                    return Err(format!("double click moved the page (seed {seed}, box {b})"));
                }
                if twice.terminal != Terminal::Running {
                    return Err(format!("double click ended the episode (seed {seed})"));
                }
                states_checked += 1;
            }
        }
    }
    Ok(format!(
        "oracle 100/100 on all 5 tasks; random wins per 100: {}; involution on {} states",
        summary.join(", "),
        states_checked
    ))
}

// 7: scores agree with the exact-rational reference on the frozen fixture.
fn metrics_fidelity() -> Result<String, String> {
    let fixture: [(&str, &str); 10] = [
        ("Enter your email address", "Enter your email address"),
        ("Enter email", "Enter your email"),
        ("Password", "Password:"),
        ("Confirm your password", "Confirm password"),
        ("First name", "Enter first name"),
        ("your your your email", "your email"),
        ("Sign in to your account", "Sign in to your account now"),
        ("Search products", "Search for products"),
        ("Subscribe to the newsletter", "Subscribe to our newsletter"),
        ("Street address line two", "Street address line 2"),
    ];
    let reference_bleu = 54.636294504447655;
    let reference_rouge_mean = 0.727_575_757_575_757_5;
    let preds: Vec<String> = fixture.iter().map(|(p, _)| p.to_string()).collect();
    let golds: Vec<String> = fixture.iter().map(|(_, g)| g.to_string()).collect();
    let got_bleu = bleu(&preds, &golds).map_err(|e| e.to_string())?;
    if (got_bleu - reference_bleu).abs() >= 1e-6 {
        return Err(format!("bleu {got_bleu} vs reference {reference_bleu}"));
    }
    let mut rouge_sum = 0.0;
    for (p, g) in fixture {
        rouge_sum += rouge1(p, g).map_err(|e| e.to_string())?.2;
    }
    let got_rouge = rouge_sum / fixture.len() as f64;
    if (got_rouge - reference_rouge_mean).abs() >= 1e-6 {
        return Err(format!("rouge {got_rouge} vs reference {reference_rouge_mean}"));
    }
    if bleu(&golds, &golds).map_err(|e| e.to_string())? != 100.0 {
        return Err("identity corpus does not score BLEU 100".into());
    }
    for g in &golds {
        if rouge1(g, g).map_err(|e| e.to_string())? != (1.0, 1.0, 1.0) {
            return Err("identity pair does not score ROUGE 1.0".into());
        }
        if !exact_match(g, g) {
            return Err("exact match is not reflexive".into());
        }
    }
    let (p, r, _) = rouge1("enter your email", "enter email").map_err(|e| e.to_string())?;
    if r != 1.0 || p != 2.0 / 3.0 {
        return Err(format!("hand example gave p={p} r={r}, wanted 2/3 and 1"));
    }
    Ok("BLEU and ROUGE-1 within 1e-6 of reference; identity maximal".into())
}

// 8: the baseline's pick matches a string-offset brute force on all 200
// synthetic pages. The published large-corpus accuracy for this heuristic,
// 57.4%, is recorded here as a reference value only; it needs a crawl-scale
// corpus this suite does not ship.
fn closest_description_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xde5c_u64);
    let mut agreements = 0u32;
    let mut label_hits = 0u32;
    for i in 0..200 {
        let label = format!("desc{i} field name");
        let fa = "ax ".repeat(rng.gen_range(0..6));
        let fb = "bz ".repeat(rng.gen_range(0..6));
        let target_tag = format!("<input id=\"g{i}\" target>");
        let label_el = format!("<label for=\"g{i}\">{label}</label>");
        let body = if rng.gen_bool(0.3) {
            format!("<span>{fa}</span>{target_tag}{label_el}<span>{fb}</span>")
        } else {
            format!("<span>{fa}</span>{label_el}{target_tag}<span>{fb}</span>")
        };
        let page = format!("<div>{body}</div>");

        let doc = parse_html(&page);
        if serialize(&doc) != page {
            return Err(format!("page {i} does not reserialize verbatim"));
        }
        let target_pos = page.find(&target_tag).expect("target tag present");
        let mut best: Option<(usize, usize, &str)> = None;
        for candidate in [fa.as_str(), label.as_str(), fb.as_str()] {
            if candidate.trim().is_empty() {
                continue;
            }
            let pos = page.find(candidate).expect("candidate text present");
            let key = (pos.abs_diff(target_pos), pos);
            if best.is_none_or(|(d, o, _)| key < (d, o)) {
                best = Some((key.0, key.1, candidate));
            }
        }
        let expected = best.expect("label text always present").2.trim().to_string();
        let got = closest_description(&doc).map_err(|e| e.to_string())?;
        if got != expected {
            return Err(format!(
                "page {i}: baseline chose {got:?}, brute force chose {expected:?}"
            ));
        }
        agreements += 1;
        if got == label {
            label_hits += 1;
        }
    }
    Ok(format!(
        "zero disagreement on {agreements} pages (label hit {}%); 57.4% large-corpus accuracy is reference-only",
        label_hits as f64 / 2.0
    ))
}

// 9: rotations, reversals, and listed paraphrases all snap back onto the
// vocabulary, and in-vocabulary names are fixed points.
fn canonicalization() -> Result<String, String> {
    let vocab = CategoryVocabulary::builtin();
    let mut recovered = 0u32;
    for name in vocab.names() {
        if canonicalize_category(name, &vocab).as_deref() != Some(name.as_str()) {
            return Err(format!("{name} is not a fixed point"));
        }
        let parts: Vec<&str> = name.split('_').collect();
        if parts.len() < 2 {
            continue;
        }
        for shift in 1..parts.len() {
            let rotated: String = parts[shift..]
                .iter()
                .chain(&parts[..shift])
                .copied()
                .collect::<Vec<_>>()
                .join("_");
            if canonicalize_category(&rotated, &vocab).as_deref() != Some(name.as_str()) {
                return Err(format!("rotation {rotated} of {name} not recovered"));
            }
            recovered += 1;
        }
        let reversed: String = parts.iter().rev().copied().collect::<Vec<_>>().join("_");
        if canonicalize_category(&reversed, &vocab).as_deref() != Some(name.as_str()) {
            return Err(format!("reversal {reversed} of {name} not recovered"));
        }
        recovered += 1;
    }
    let asset: toml::Value = include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/assets/categories.toml"
    ))
    .parse()
    .map_err(|e| format!("{e}"))?;
    let paraphrases = asset
        .get("paraphrases")
        .and_then(|v| v.as_table())
        .ok_or("paraphrase table missing")?;
    for (raw, canonical) in paraphrases {
        let wanted = canonical.as_str().ok_or("non-string paraphrase")?;
        if canonicalize_category(raw, &vocab).as_deref() != Some(wanted) {
            return Err(format!("paraphrase {raw} did not map to {wanted}"));
        }
        recovered += 1;
    }
    Ok(format!(
        "{} categories fixed; {recovered} rotations/reversals/paraphrases recovered",
        vocab.names().len()
    ))
}
