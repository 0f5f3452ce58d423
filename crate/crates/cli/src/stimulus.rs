//! Stimulus file parsing: one frame per line, whitespace-separated
//! `name=value` pairs, `X` for a fully unknown word. Blank lines and `#` or
//! `//` comments are skipped. Values are decimal, `0x...` or `0b...`.

use anyhow::{anyhow, Result};
use num_bigint::BigUint;
use num_traits::Num;
use wste::ir::{Elaborated, WordKind};
use wste::oracle::StimulusFrame;

pub fn parse_stimulus(src: &str, el: &Elaborated) -> Result<Vec<StimulusFrame>> {
    let mut frames = Vec::new();
    for (lineno, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("//") {
            continue;
        }
        let mut frame = StimulusFrame::new();
        for pair in line.split_whitespace() {
            let (name, value) = pair
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected name=value, got '{pair}'", lineno + 1))?;
            let info = el
                .word(name)
                .ok_or_else(|| anyhow!("line {}: unknown input '{name}'", lineno + 1))?;
            if info.kind != WordKind::Input {
                return Err(anyhow!("line {}: '{name}' is not an input", lineno + 1));
            }
            let v = if value.eq_ignore_ascii_case("x") {
                None
            } else {
                let n = if let Some(h) = value.strip_prefix("0x") {
                    BigUint::from_str_radix(h, 16)
                } else if let Some(b) = value.strip_prefix("0b") {
                    BigUint::from_str_radix(b, 2)
                } else {
                    BigUint::from_str_radix(value, 10)
                }
                .map_err(|_| anyhow!("line {}: bad value '{value}'", lineno + 1))?;
                if n.bits() > u64::from(info.width) {
                    return Err(anyhow!(
                        "line {}: value '{value}' does not fit {name}:{}",
                        lineno + 1,
                        info.width
                    ));
                }
                Some(n)
            };
            frame.insert(name.to_string(), v);
        }
        // every input must be assigned
        for (name, info) in &el.words {
            if info.kind == WordKind::Input && !frame.contains_key(name) {
                return Err(anyhow!("line {}: input '{name}' is not assigned", lineno + 1));
            }
        }
        frames.push(frame);
    }
    Ok(frames)
}
