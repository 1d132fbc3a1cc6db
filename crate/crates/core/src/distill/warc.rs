//! Minimal WARC 1.0 reader yielding HTML response records.
//!
//! Records are framed by the Content-Length header, so one damaged record
//! body can be skipped without losing the rest of the file; only a corrupt
//! record header (where framing breaks down) aborts the file.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use flate2::bufread::MultiGzDecoder;

use super::DistillError;

/// Per-file skip and yield counters.
#[derive(Debug, Default, Clone, Copy)]
pub struct WarcStats {
    /// HTML response records handed to the caller.
    pub responses_yielded: u64,
    /// Records dropped for truncation, missing URI, or an unsplittable
    /// HTTP payload.
    pub skipped_malformed: u64,
    /// Response records whose HTTP Content-Type is not text/html.
    pub skipped_non_html: u64,
    /// Records of other WARC types (warcinfo, request, metadata, ...).
    pub skipped_other_type: u64,
}

pub struct WarcReader {
    input: Box<dyn BufRead + Send>,
    stats: WarcStats,
    record_idx: u64,
    done: bool,
}

impl WarcReader {
    /// Open a plain or gzip-compressed WARC file. Compression is detected
    /// from the magic bytes, not the extension; member-per-record gzip
    /// (the CommonCrawl layout) decodes as one stream.
    pub fn open(path: &Path) -> Result<Self, DistillError> {
        let mut buf = BufReader::new(File::open(path)?);
        let gzipped = matches!(buf.fill_buf()?, [0x1f, 0x8b, ..]);
        let input: Box<dyn BufRead + Send> = if gzipped {
            Box::new(BufReader::new(MultiGzDecoder::new(buf)))
        } else {
            Box::new(buf)
        };
        Ok(WarcReader {
            input,
            stats: WarcStats::default(),
            record_idx: 0,
            done: false,
        })
    }

    pub fn stats(&self) -> WarcStats {
        self.stats
    }

    /// Next HTML response record as (target URI, lossily decoded body), or
    /// `None` at end of file. Non-HTML and damaged records are counted and
    /// skipped; a corrupt record header ends the file with an error.
    pub fn next_record(&mut self) -> Result<Option<(String, String)>, DistillError> {
        loop {
            if self.done {
                return Ok(None);
            }
            let Some(block) = self.read_header_block()? else {
                self.done = true;
                return Ok(None);
            };
            let headers = match parse_header_block(&block) {
                Some(h) => h,
                None => {
                    self.done = true;
                    return Err(DistillError::MalformedWarc(self.record_idx));
                }
            };
            // Without a parseable length the stream cannot be reframed.
            let Some(length) = headers
                .get("content-length")
                .and_then(|v| v.parse::<usize>().ok())
            else {
                self.done = true;
                return Err(DistillError::MalformedWarc(self.record_idx));
            };
            self.record_idx += 1;

            let mut body = vec![0u8; length];
            if let Err(e) = self.input.read_exact(&mut body) {
                if e.kind() == std::io::ErrorKind::UnexpectedEof {
                    // Truncated final record: keep what was already yielded.
                    self.stats.skipped_malformed += 1;
                    self.done = true;
                    return Ok(None);
                }
                return Err(e.into());
            }

            if headers.get("warc-type").map(String::as_str) != Some("response") {
                self.stats.skipped_other_type += 1;
                continue;
            }
            let Some(uri) = headers.get("warc-target-uri") else {
                self.stats.skipped_malformed += 1;
                continue;
            };
            // The block is an HTTP response: head, blank line, payload.
            let Some(split) = find_subsequence(&body, b"\r\n\r\n") else {
                self.stats.skipped_malformed += 1;
                continue;
            };
            let head = String::from_utf8_lossy(&body[..split]).to_lowercase();
            if !head.contains("text/html") {
                self.stats.skipped_non_html += 1;
                continue;
            }
            let html = String::from_utf8_lossy(&body[split + 4..]).into_owned();
            self.stats.responses_yielded += 1;
            return Ok(Some((uri.clone(), html)));
        }
    }

    /// Read one record's header lines up to the blank line. Leading CRLFs
    /// (the record separator) are consumed first.
    fn read_header_block(&mut self) -> Result<Option<Vec<u8>>, DistillError> {
        loop {
            let buf = self.input.fill_buf()?;
            match buf.first() {
                None => return Ok(None),
                Some(b'\r') | Some(b'\n') => self.input.consume(1),
                Some(_) => break,
            }
        }
        let mut block = Vec::new();
        loop {
            let mut line = Vec::new();
            if self.input.read_until(b'\n', &mut line)? == 0 {
                // EOF inside a header block: unframeable.
                return Err(DistillError::MalformedWarc(self.record_idx));
            }
            if line == b"\r\n" || line == b"\n" {
                break;
            }
            block.extend_from_slice(&line);
        }
        Ok(Some(block))
    }
}

/// Header lines to a lowercase-keyed map; `None` when the version line is
/// not `WARC/...`.
fn parse_header_block(block: &[u8]) -> Option<HashMap<String, String>> {
    let text = String::from_utf8_lossy(block);
    let mut lines = text.lines();
    if !lines.next()?.starts_with("WARC/") {
        return None;
    }
    let mut headers = HashMap::new();
    for line in lines {
        if let Some((key, value)) = line.split_once(':') {
            headers.insert(key.trim().to_lowercase(), value.trim().to_string());
        }
    }
    Some(headers)
}

fn find_subsequence(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack.windows(needle.len()).position(|w| w == needle)
}
