//! Text checkpoint of a [`QNetwork`].
//!
//! ```text
//! cellbalance-qnet v1
//! sizes 9 64 64 32 4
//! w <hex f64 bits> ...     (one line per layer, input-major)
//! b <hex f64 bits> ...
//! ```
//! Parameters are written as raw IEEE-754 bit patterns so a reload
//! reproduces forward outputs bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use super::network::{Dense, QNetwork};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &str = "cellbalance-qnet";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn to_text(net: &QNetwork) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{CHECKPOINT_MAGIC} v{CHECKPOINT_VERSION}");
    let sizes: Vec<String> = net.sizes().iter().map(ToString::to_string).collect();
    let _ = writeln!(s, "sizes {}", sizes.join(" "));
    for layer in net.layers() {
        for (tag, values) in [("w", &layer.weights), ("b", &layer.bias)] {
            s.push_str(tag);
            for v in values.iter() {
                let _ = write!(s, " {:016x}", v.to_bits());
            }
            s.push('\n');
        }
    }
    s
}

pub fn from_text(text: &str) -> Result<QNetwork> {
    let bad = |m: String| Error::Checkpoint(m);
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty checkpoint".into()))?;
    let expected = format!("{CHECKPOINT_MAGIC} v{CHECKPOINT_VERSION}");
    if header != expected {
        return Err(bad(format!("unsupported header {header:?}, expected {expected:?}")));
    }
    let sizes: Vec<usize> = lines
        .next()
        .and_then(|l| l.strip_prefix("sizes "))
        .ok_or_else(|| bad("missing sizes line".into()))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(format!("bad size {t:?}"))))
        .collect::<Result<_>>()?;
    if sizes.len() < 2 {
        return Err(bad("need at least two sizes".into()));
    }
    let mut parse_row = |tag: &str, want: usize| -> Result<Vec<f64>> {
        let line = lines.next().ok_or_else(|| bad(format!("missing {tag} line")))?;
        let mut toks = line.split_whitespace();
        if toks.next() != Some(tag) {
            return Err(bad(format!("expected {tag} line")));
        }
        let vals: Vec<f64> = toks
            .map(|t| {
                u64::from_str_radix(t, 16)
                    .map(f64::from_bits)
                    .map_err(|_| bad(format!("bad value {t:?}")))
            })
            .collect::<Result<_>>()?;
        if vals.len() != want {
            return Err(bad(format!("{tag} line has {} values, expected {want}", vals.len())));
        }
        Ok(vals)
    };
    let mut layers = Vec::new();
    for pair in sizes.windows(2) {
        let (inputs, outputs) = (pair[0], pair[1]);
        let weights = parse_row("w", inputs * outputs)?;
        let bias = parse_row("b", outputs)?;
        layers.push(Dense {
            inputs,
            outputs,
            weights,
            bias,
        });
    }
    QNetwork::from_layers(layers)
}

pub fn save(net: &QNetwork, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(net)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<QNetwork> {
    from_text(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
