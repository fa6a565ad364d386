//! Directly encoded recurrent neural networks.
//!
//! A genome lists its nodes (10 inputs, 2 outputs, any number of hidden nodes)
//! and weighted directed connections. Hidden nodes may form cycles and
//! self-loops. Activation is synchronous: every non-input node reads the
//! previous step's activations of its sources, so one call to
//! [`Network::activate`] advances the whole network by one time step.

mod mutation;

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mutation::{mutate, polynomial_mutate, random_genome, InitConfig, MutationConfig};

pub const INPUT_COUNT: usize = 10;
pub const OUTPUT_COUNT: usize = 2;
pub const GENOME_FORMAT_VERSION: u32 = 1;

/// Slope of the logistic activation, `1 / (exp(-5x) + 1)`.
const SIGMOID_SLOPE: f64 = 5.0;
/// Largest double below one; keeps saturated outputs inside the open interval.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    (1.0 / ((-SIGMOID_SLOPE * x).exp() + 1.0)).clamp(f64::MIN_POSITIVE, BELOW_ONE)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Input,
    Hidden,
    Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeGene {
    pub id: u32,
    pub role: NodeRole,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionGene {
    pub source: u32,
    pub target: u32,
    pub weight: f64,
}

/// A network genome. Connection order is significant: it fixes the summation
/// order during activation and the scan order of the rewire operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkGenome {
    pub nodes: Vec<NodeGene>,
    pub connections: Vec<ConnectionGene>,
}

#[derive(Serialize, Deserialize)]
struct GenomeDocument {
    format_version: u32,
    #[serde(flatten)]
    genome: NetworkGenome,
}

impl NetworkGenome {
    /// Inputs and outputs only, every bias zero, no connections.
    pub fn minimal() -> Self {
        let mut nodes = Vec::with_capacity(INPUT_COUNT + OUTPUT_COUNT);
        for id in 0..INPUT_COUNT as u32 {
            nodes.push(NodeGene {
                id,
                role: NodeRole::Input,
                bias: 0.0,
            });
        }
        for k in 0..OUTPUT_COUNT as u32 {
            nodes.push(NodeGene {
                id: INPUT_COUNT as u32 + k,
                role: NodeRole::Output,
                bias: 0.0,
            });
        }
        Self {
            nodes,
            connections: Vec::new(),
        }
    }

    pub fn hidden_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.role == NodeRole::Hidden)
            .count()
    }

    pub fn node(&self, id: u32) -> Option<&NodeGene> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn has_connection(&self, source: u32, target: u32) -> bool {
        self.connections
            .iter()
            .any(|c| c.source == source && c.target == target)
    }

    pub(crate) fn next_node_id(&self) -> u32 {
        self.nodes.iter().map(|n| n.id).max().map_or(0, |m| m + 1)
    }

    /// Adds a hidden node with the given bias and returns its id.
    pub fn add_hidden(&mut self, bias: f64) -> u32 {
        let id = self.next_node_id();
        self.nodes.push(NodeGene {
            id,
            role: NodeRole::Hidden,
            bias,
        });
        id
    }

    /// Ids of the two output nodes in order (left wheel, right wheel).
    pub fn output_ids(&self) -> Vec<u32> {
        self.nodes
            .iter()
            .filter(|n| n.role == NodeRole::Output)
            .map(|n| n.id)
            .collect()
    }

    /// Checks every structural invariant; `range` bounds weights and biases.
    pub fn validate(&self, range: (f64, f64)) -> Result<()> {
        let bad = |reason: String| Error::Format {
            what: "genome",
            reason,
        };
        let mut roles = HashMap::with_capacity(self.nodes.len());
        for n in &self.nodes {
            if roles.insert(n.id, n.role).is_some() {
                return Err(bad(format!("duplicate node id {}", n.id)));
            }
            if n.role != NodeRole::Input && !(range.0..=range.1).contains(&n.bias) {
                return Err(bad(format!(
                    "bias {} of node {} out of range",
                    n.bias, n.id
                )));
            }
        }
        let inputs = roles.values().filter(|r| **r == NodeRole::Input).count();
        let outputs = roles.values().filter(|r| **r == NodeRole::Output).count();
        if inputs != INPUT_COUNT || outputs != OUTPUT_COUNT {
            return Err(bad(format!(
                "expected {INPUT_COUNT} inputs and {OUTPUT_COUNT} outputs, found {inputs} and {outputs}"
            )));
        }
        let mut seen = HashSet::with_capacity(self.connections.len());
        for c in &self.connections {
            if !seen.insert((c.source, c.target)) {
                return Err(bad(format!(
                    "duplicate connection {} -> {}",
                    c.source, c.target
                )));
            }
            match (roles.get(&c.source), roles.get(&c.target)) {
                (Some(_), Some(NodeRole::Input)) => {
                    return Err(bad(format!("connection into input node {}", c.target)))
                }
                (Some(_), Some(_)) => {}
                _ => {
                    return Err(bad(format!(
                        "dangling connection {} -> {}",
                        c.source, c.target
                    )))
                }
            }
            if !(range.0..=range.1).contains(&c.weight) {
                return Err(bad(format!("weight {} out of range", c.weight)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = GenomeDocument {
            format_version: GENOME_FORMAT_VERSION,
            genome: self.clone(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Format {
            what: "genome",
            reason: e.to_string(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GenomeDocument = serde_json::from_str(text).map_err(|e| Error::Format {
            what: "genome",
            reason: e.to_string(),
        })?;
        if doc.format_version != GENOME_FORMAT_VERSION {
            return Err(Error::Format {
                what: "genome",
                reason: format!("unsupported format version {}", doc.format_version),
            });
        }
        Ok(doc.genome)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Activations of the non-input nodes, in genome node order.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub activation: Vec<f64>,
}

impl NetworkState {
    pub fn zeros(genome: &NetworkGenome) -> Self {
        let n = genome
            .nodes
            .iter()
            .filter(|n| n.role != NodeRole::Input)
            .count();
        Self {
            activation: vec![0.0; n],
        }
    }

    pub fn reset(&mut self) {
        self.activation.fill(0.0);
    }
}

#[derive(Debug, Clone, Copy)]
enum Source {
    Input(usize),
    Unit(usize),
}

/// A genome compiled into index form for fast repeated activation.
#[derive(Debug, Clone)]
pub struct Network {
    biases: Vec<f64>,
    connections: Vec<(Source, usize, f64)>,
    outputs: [usize; OUTPUT_COUNT],
    scratch: Vec<f64>,
}

impl Network {
    pub fn new(genome: &NetworkGenome) -> Result<Self> {
        let mut input_slot = HashMap::new();
        let mut unit_slot = HashMap::new();
        let mut biases = Vec::new();
        let mut outputs = Vec::with_capacity(OUTPUT_COUNT);
        for n in &genome.nodes {
            match n.role {
                NodeRole::Input => {
                    let slot = input_slot.len();
                    input_slot.insert(n.id, slot);
                }
                role => {
                    if role == NodeRole::Output {
                        outputs.push(biases.len());
                    }
                    unit_slot.insert(n.id, biases.len());
                    biases.push(n.bias);
                }
            }
        }
        if input_slot.len() != INPUT_COUNT || outputs.len() != OUTPUT_COUNT {
            return Err(Error::Format {
                what: "genome",
                reason: format!(
                    "expected {INPUT_COUNT} inputs and {OUTPUT_COUNT} outputs, found {} and {}",
                    input_slot.len(),
                    outputs.len()
                ),
            });
        }
        let mut connections = Vec::with_capacity(genome.connections.len());
        for c in &genome.connections {
            let source = if let Some(&i) = input_slot.get(&c.source) {
                Source::Input(i)
            } else if let Some(&u) = unit_slot.get(&c.source) {
                Source::Unit(u)
            } else {
                return Err(Error::Format {
                    what: "genome",
                    reason: format!("dangling source {}", c.source),
                });
            };
            let target = *unit_slot.get(&c.target).ok_or_else(|| Error::Format {
                what: "genome",
                reason: format!("invalid target {}", c.target),
            })?;
            connections.push((source, target, c.weight));
        }
        let scratch = vec![0.0; biases.len()];
        Ok(Self {
            biases,
            connections,
            outputs: [outputs[0], outputs[1]],
            scratch,
        })
    }

    pub fn unit_count(&self) -> usize {
        self.biases.len()
    }

    /// Advances the network one step; returns the two output activations.
    pub fn activate(&mut self, state: &mut NetworkState, inputs: &[f64]) -> Result<[f64; 2]> {
        if inputs.len() != INPUT_COUNT {
            return Err(Error::LengthMismatch {
                left: inputs.len(),
                right: INPUT_COUNT,
            });
        }
        if state.activation.len() != self.biases.len() {
            return Err(Error::LengthMismatch {
                left: state.activation.len(),
                right: self.biases.len(),
            });
        }
        Ok(self.activate_unchecked(&mut state.activation, inputs))
    }

    #[inline]
    pub(crate) fn activate_unchecked(&mut self, state: &mut Vec<f64>, inputs: &[f64]) -> [f64; 2] {
        self.scratch.copy_from_slice(&self.biases);
        for &(source, target, weight) in &self.connections {
            let value = match source {
                Source::Input(i) => inputs[i],
                Source::Unit(u) => state[u],
            };
            self.scratch[target] += weight * value;
        }
        for x in self.scratch.iter_mut() {
            *x = sigmoid(*x);
        }
        std::mem::swap(state, &mut self.scratch);
        [state[self.outputs[0]], state[self.outputs[1]]]
    }
}

/// One synchronous activation step of `genome` from `state`.
pub fn activate(
    genome: &NetworkGenome,
    state: &NetworkState,
    inputs: &[f64],
) -> Result<([f64; 2], NetworkState)> {
    let mut net = Network::new(genome)?;
    let mut next = state.clone();
    let out = net.activate(&mut next, inputs)?;
    Ok((out, next))
}
