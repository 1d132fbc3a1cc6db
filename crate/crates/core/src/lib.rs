//! Toolkit for turning web pages into model-ready text tasks: forgiving
//! HTML parsing, salient-snippet extraction, crawl distillation into
//! description examples, task encoding/decoding, a small navigation
//! environment, and the matching evaluation metrics.

pub mod codec;
pub mod distill;
pub mod html;
pub mod metrics;
pub mod model;
pub mod nav;
pub mod snippet;
