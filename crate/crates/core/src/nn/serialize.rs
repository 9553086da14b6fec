//! Versioned text format for trained models.
//!
//! ```text
//! imdd-eq-model 1
//! spec {...json...}
//! normalization <mean> <scale> ...
//! rule <offset> <scale> <threshold>
//! phase <n|none>
//! matched_filter <alpha> <span> | none
//! best_epoch <n>
//! loss <train> <validation> ...
//! tensor <name> <rows> <cols>
//! <values>
//! ```
//! Floats are written in shortest round-trip form, so loading reproduces
//! every parameter bit for bit.

use super::train::{EpochLoss, EqualizerSpec, TrainedModel};
use crate::error::{Error, Result};
use crate::rx::DecisionRule;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

const MAGIC: &str = "imdd-eq-model";
const VERSION: u32 = 1;

fn join(values: impl IntoIterator<Item = f64>) -> String {
    let mut s = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v}").expect("writing to a String");
    }
    s
}

fn bad(detail: impl Into<String>) -> Error {
    Error::format("model file", detail)
}

fn floats(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|e| bad(format!("`{t}`: {e}"))))
        .collect()
}

impl TrainedModel {
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let spec = serde_json::to_string(&self.spec).map_err(|e| bad(e.to_string()))?;
        let mut s = format!("{MAGIC} {VERSION}\nspec {spec}\n");
        let norm = self.normalization.iter().flat_map(|&(m, k)| [m, k]);
        writeln!(s, "normalization {}", join(norm)).unwrap();
        let r = &self.rule;
        writeln!(s, "rule {}", join([r.offset, r.scale, r.threshold])).unwrap();
        match self.phase {
            Some(p) => writeln!(s, "phase {p}").unwrap(),
            None => s.push_str("phase none\n"),
        }
        match self.matched_filter {
            Some((a, span)) => writeln!(s, "matched_filter {a} {span}").unwrap(),
            None => s.push_str("matched_filter none\n"),
        }
        writeln!(s, "best_epoch {}", self.best_epoch).unwrap();
        let loss = self.loss_trace.iter().flat_map(|l| [l.train, l.validation]);
        writeln!(s, "loss {}", join(loss)).unwrap();
        for t in self.network.tensors() {
            writeln!(s, "tensor {} {} {}", t.name, t.rows, t.cols).unwrap();
            writeln!(s, "{}", join(self.network.params()[t.range()].iter().copied())).unwrap();
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let mut lines = BufReader::new(input).lines();
        let mut next = |key: &str| keyed(&mut lines, key);
        let version = next(MAGIC)?;
        if version.trim() != VERSION.to_string() {
            return Err(bad(format!("unsupported version {version}")));
        }
        let spec: EqualizerSpec = serde_json::from_str(&next("spec")?).map_err(|e| bad(e.to_string()))?;
        let norm = floats(&next("normalization")?)?;
        if norm.len() % 2 != 0 {
            return Err(bad("odd normalization entry count"));
        }
        let normalization = norm.chunks(2).map(|c| (c[0], c[1])).collect();
        let rule = match floats(&next("rule")?)?[..] {
            [offset, scale, threshold] => DecisionRule {
                offset,
                scale,
                threshold,
            },
            _ => return Err(bad("rule needs three values")),
        };
        let phase = match next("phase")?.trim() {
            "none" => None,
            p => Some(p.parse().map_err(|_| bad(format!("phase `{p}`")))?),
        };
        let matched_filter = match next("matched_filter")?.trim() {
            "none" => None,
            mf => match mf.split_whitespace().collect::<Vec<_>>()[..] {
                [a, span] => Some((
                    a.parse().map_err(|_| bad("matched filter roll-off"))?,
                    span.parse().map_err(|_| bad("matched filter span"))?,
                )),
                _ => return Err(bad("matched_filter needs roll-off and span")),
            },
        };
        let best_epoch = next("best_epoch")?.trim().parse().map_err(|_| bad("best_epoch"))?;
        let loss = floats(&next("loss")?)?;
        if loss.len() % 2 != 0 {
            return Err(bad("odd loss entry count"));
        }
        let loss_trace = loss
            .chunks(2)
            .map(|c| EpochLoss {
                train: c[0],
                validation: c[1],
            })
            .collect();
        drop(next);
        let mut network = spec.network()?;
        let layout = network.tensors().to_vec();
        let mut params = Vec::with_capacity(network.n_params());
        for t in &layout {
            let header = keyed(&mut lines, "tensor")?;
            let want = format!("{} {} {}", t.name, t.rows, t.cols);
            if header.trim() != want {
                return Err(bad(format!("tensor `{header}` where `{want}` was expected")));
            }
            let values = floats(&lines_value(&mut lines)?)?;
            if values.len() != t.len() {
                return Err(Error::Dimension {
                    expected: t.len(),
                    got: values.len(),
                });
            }
            params.extend(values);
        }
        network.set_params(params)?;
        Ok(TrainedModel {
            spec,
            network,
            normalization,
            rule,
            phase,
            matched_filter,
            loss_trace,
            best_epoch,
        })
    }
}

fn keyed<B: BufRead>(lines: &mut std::io::Lines<B>, key: &str) -> Result<String> {
    let line = lines.next().transpose()?.ok_or_else(|| bad(format!("missing `{key}` line")))?;
    match line.split_once(' ') {
        Some((k, rest)) if k == key => Ok(rest.to_string()),
        _ if line == key => Ok(String::new()),
        _ => Err(bad(format!("expected `{key}`, found `{line}`"))),
    }
}

fn lines_value<B: BufRead>(lines: &mut std::io::Lines<B>) -> Result<String> {
    lines.next().transpose()?.ok_or_else(|| bad("missing tensor values"))
}
