//! Shared fixture builders for the integration suites.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sign-in form with two labels, two inputs, a hidden hint, and a button;
/// the first input is the fifth element in document order.
pub const FIGURE_PAGE: &str = concat!(
    r#"<div><label class="form-label" for="uName">Email Address</label>"#,
    r#"<label class="form-label" for="pass">Enter Password:</label></div>"#,
    r#"<div><input type="email" id="uName"><input type="password" id="pass">"#,
    r#"<span class="hidden">Please enter your password.</span></div>"#,
    r#"<div><button id="signin">Sign in</button></div>"#
);

const TAGS: &[&str] = &["div", "span", "section", "article", "b", "label", "nav", "li"];
const VOID_TAGS: &[&str] = &["input", "br", "img", "hr"];
const WORDS: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
];

/// Seeded random page text, sometimes malformed: elements may go unclosed
/// or gain a stray close tag. Always contains at least one element.
pub fn random_page(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    element(&mut out, &mut rng, 0);
    for _ in 0..rng.gen_range(0..=2) {
        if rng.gen_bool(0.3) {
            out.push_str(WORDS[rng.gen_range(0..WORDS.len())]);
        } else {
            element(&mut out, &mut rng, 0);
        }
    }
    out
}

fn element(out: &mut String, rng: &mut ChaCha8Rng, depth: usize) {
    if rng.gen_bool(0.25) {
        let tag = VOID_TAGS[rng.gen_range(0..VOID_TAGS.len())];
        out.push('<');
        out.push_str(tag);
        if rng.gen_bool(0.5) {
            out.push_str(&format!(" id=\"n{}\"", rng.gen_range(0..100)));
        }
        out.push('>');
        return;
    }
    let tag = TAGS[rng.gen_range(0..TAGS.len())];
    out.push('<');
    out.push_str(tag);
    if rng.gen_bool(0.4) {
        out.push_str(&format!(" class=\"c{}\"", rng.gen_range(0..5)));
    }
    if rng.gen_bool(0.15) {
        out.push_str(&format!(" data-k='{}'", WORDS[rng.gen_range(0..WORDS.len())]));
    }
    if rng.gen_bool(0.1) {
        out.push_str(" hidden");
    }
    out.push('>');
    if depth < 4 {
        for _ in 0..rng.gen_range(0..=3) {
            if rng.gen_bool(0.35) {
                out.push_str(WORDS[rng.gen_range(0..WORDS.len())]);
            } else {
                element(out, rng, depth + 1);
            }
        }
    }
    match rng.gen_range(0..10) {
        0 => {}                      // left unclosed
        1 => out.push_str("</em>"),  // stray close; em is never opened
        _ => out.push_str(&format!("</{tag}>")),
    }
}

pub fn warc_record(warc_type: &str, uri: Option<&str>, http_block: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(b"WARC/1.0\r\n");
    out.extend_from_slice(format!("WARC-Type: {warc_type}\r\n").as_bytes());
    if let Some(uri) = uri {
        out.extend_from_slice(format!("WARC-Target-URI: {uri}\r\n").as_bytes());
    }
    out.extend_from_slice(b"Content-Type: application/http; msgtype=response\r\n");
    out.extend_from_slice(format!("Content-Length: {}\r\n", http_block.len()).as_bytes());
    out.extend_from_slice(b"\r\n");
    out.extend_from_slice(http_block);
    out.extend_from_slice(b"\r\n\r\n");
    out
}

pub fn http_response(content_type: &str, body: &str) -> Vec<u8> {
    format!("HTTP/1.1 200 OK\r\nContent-Type: {content_type}\r\n\r\n{body}").into_bytes()
}

pub fn html_record(uri: &str, body: &str) -> Vec<u8> {
    warc_record(
        "response",
        Some(uri),
        &http_response("text/html; charset=UTF-8", body),
    )
}
