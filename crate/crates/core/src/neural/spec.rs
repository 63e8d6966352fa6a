use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_HIDDEN: usize = 128;
pub const MAX_LAYERS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Rnn,
    Gru,
    Lstm,
}

impl CellKind {
    pub const ALL: [CellKind; 3] = [CellKind::Rnn, CellKind::Gru, CellKind::Lstm];

    /// Stacked gate blocks per weight matrix: 1 for rnn, 3 for gru
    /// (update, reset, candidate), 4 for lstm (input, forget, candidate,
    /// output).
    pub fn gates(self) -> usize {
        match self {
            CellKind::Rnn => 1,
            CellKind::Gru => 3,
            CellKind::Lstm => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Rnn => "rnn",
            CellKind::Gru => "gru",
            CellKind::Lstm => "lstm",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Readout {
    #[default]
    LastHidden,
    MeanPool,
}

impl FromStr for Readout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "last-hidden" | "last" => Ok(Readout::LastHidden),
            "mean-pool" | "mean" => Ok(Readout::MeanPool),
            other => Err(format!(
                "unknown readout {other:?} (expected last-hidden or mean-pool)"
            )),
        }
    }
}

/// Architecture of a recurrent classifier.
///
/// The textual form is `[bi]<cell>[-<layers>]`, e.g. `rnn`, `gru-2`,
/// `bilstm` or `bilstm-3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub cell: CellKind,
    #[serde(default)]
    pub bidirectional: bool,
    #[serde(default = "one")]
    pub layers: usize,
    #[serde(default = "default_hidden")]
    pub hidden: usize,
    #[serde(default)]
    pub readout: Readout,
    /// Inter-layer dropout probability; 0 disables it.
    #[serde(default)]
    pub dropout: f64,
}

fn one() -> usize {
    1
}

fn default_hidden() -> usize {
    DEFAULT_HIDDEN
}

impl ModelSpec {
    pub fn new(cell: CellKind, bidirectional: bool, layers: usize) -> Self {
        ModelSpec {
            cell,
            bidirectional,
            layers,
            hidden: DEFAULT_HIDDEN,
            readout: Readout::LastHidden,
            dropout: 0.0,
        }
    }

    pub fn with_hidden(mut self, hidden: usize) -> Self {
        self.hidden = hidden;
        self
    }

    pub fn with_readout(mut self, readout: Readout) -> Self {
        self.readout = readout;
        self
    }

    pub fn with_dropout(mut self, dropout: f64) -> Self {
        self.dropout = dropout;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_LAYERS).contains(&self.layers) {
            return Err(Error::InvalidSpec(format!(
                "layers must be 1..={MAX_LAYERS}, got {}",
                self.layers
            )));
        }
        if self.hidden == 0 {
            return Err(Error::InvalidSpec("hidden size must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidSpec(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout
            )));
        }
        Ok(())
    }

    pub fn directions(&self) -> usize {
        if self.bidirectional {
            2
        } else {
            1
        }
    }

    /// Width of each layer's output and of the readout vector.
    pub fn output_dim(&self) -> usize {
        self.hidden * self.directions()
    }

    /// Input width of layer `layer` given the embedding width.
    pub fn layer_input_dim(&self, layer: usize, embedding_dim: usize) -> usize {
        if layer == 0 {
            embedding_dim
        } else {
            self.output_dim()
        }
    }

    /// Trainable parameters excluding the embedding matrix.
    ///
    /// Each direction of each layer owns `W (G·h × in)`, `U (G·h × h)` and
    /// `b (G·h)`, so it holds `G·h·(in + h + 1)` values where `G` is
    /// [`CellKind::gates`]. The first layer reads the embedding width; the
    /// others read `h` per direction. The sigmoid head adds `output_dim + 1`.
    pub fn parameter_count(&self, embedding_dim: usize) -> usize {
        let g = self.cell.gates();
        let h = self.hidden;
        let recurrent: usize = (0..self.layers)
            .map(|l| self.directions() * g * h * (self.layer_input_dim(l, embedding_dim) + h + 1))
            .sum();
        recurrent + self.output_dim() + 1
    }

    /// Name in the style of published result tables, e.g. `Stacked BiLSTM 3`.
    pub fn display_name(&self) -> String {
        let cell = match self.cell {
            CellKind::Rnn => "RNN",
            CellKind::Gru => "GRU",
            CellKind::Lstm => "LSTM",
        };
        let base = if self.bidirectional {
            format!("Bi{cell}")
        } else {
            cell.to_string()
        };
        if self.layers > 1 {
            format!("Stacked {base} {}", self.layers)
        } else {
            base
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bidirectional {
            f.write_str("bi")?;
        }
        f.write_str(self.cell.name())?;
        if self.layers > 1 {
            write!(f, "-{}", self.layers)?;
        }
        Ok(())
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("unrecognized model name {s:?}"));
        let lower = s.trim().to_ascii_lowercase();
        let (name, layers) = match lower.split_once('-') {
            Some((name, n)) => (name, n.parse::<usize>().map_err(|_| bad())?),
            None => (lower.as_str(), 1),
        };
        let (bidirectional, cell) = match name.strip_prefix("bi") {
            Some(rest) => (true, rest),
            None => (false, name),
        };
        let cell = match cell {
            "rnn" => CellKind::Rnn,
            "gru" => CellKind::Gru,
            "lstm" => CellKind::Lstm,
            _ => return Err(bad()),
        };
        let spec = ModelSpec::new(cell, bidirectional, layers);
        spec.validate()?;
        Ok(spec)
    }
}

/// All 18 cell × direction × depth combinations.
pub fn all_specs(hidden: usize) -> Vec<ModelSpec> {
    let mut out = Vec::new();
    for cell in CellKind::ALL {
        for bidirectional in [false, true] {
            for layers in 1..=MAX_LAYERS {
                out.push(ModelSpec::new(cell, bidirectional, layers).with_hidden(hidden));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_names() {
        let s: ModelSpec = "bilstm-3".parse().unwrap();
        assert_eq!(
            (s.cell, s.bidirectional, s.layers),
            (CellKind::Lstm, true, 3)
        );
        assert_eq!(s.display_name(), "Stacked BiLSTM 3");
        let s: ModelSpec = "GRU".parse().unwrap();
        assert_eq!(
            (s.cell, s.bidirectional, s.layers),
            (CellKind::Gru, false, 1)
        );
        for spec in all_specs(4) {
            assert_eq!(
                spec.to_string().parse::<ModelSpec>().unwrap().to_string(),
                spec.to_string()
            );
        }
        for bad in ["", "cnn", "lstm-4", "lstm-0", "bi", "lstm-x"] {
            assert!(bad.parse::<ModelSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn parameter_counts() {
        // rnn, 1 layer, in 3, hidden 2: W 2x3, U 2x2, b 2, head 2+1
        assert_eq!(
            ModelSpec::new(CellKind::Rnn, false, 1)
                .with_hidden(2)
                .parameter_count(3),
            6 + 4 + 2 + 3
        );
        // lstm: 4 blocks of the rnn weights
        assert_eq!(
            ModelSpec::new(CellKind::Lstm, false, 1)
                .with_hidden(2)
                .parameter_count(3),
            4 * 12 + 3
        );
        // bigru-2, in 5, hidden 3: layer 0 2·9·(5+3+1), layer 1 2·9·(6+3+1), head 7
        assert_eq!(
            ModelSpec::new(CellKind::Gru, true, 2)
                .with_hidden(3)
                .parameter_count(5),
            2 * 9 * 9 + 2 * 9 * 10 + 7
        );
    }

    #[test]
    fn validation() {
        assert!(ModelSpec::new(CellKind::Rnn, false, 1)
            .with_hidden(0)
            .validate()
            .is_err());
        assert!(ModelSpec::new(CellKind::Rnn, false, 1)
            .with_dropout(1.0)
            .validate()
            .is_err());
        assert!(ModelSpec::new(CellKind::Rnn, false, 4).validate().is_err());
    }
}
