use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ConnectionGene, NetworkGenome, NodeRole};
use crate::error::{Error, Result};

/// Mutation operator probabilities and parameter bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MutationConfig {
    pub add_connection: f64,
    pub delete_connection: f64,
    /// Per-connection firing probability of the rewire scan.
    pub rewire_connection: f64,
    pub add_node: f64,
    pub delete_node: f64,
    /// Per-connection probability of a weight perturbation.
    pub change_weight: f64,
    /// Per-node probability of a bias perturbation.
    pub change_bias: f64,
    /// Distribution index of the polynomial mutation.
    pub eta: f64,
    pub min_weight: f64,
    pub max_weight: f64,
}

impl Default for MutationConfig {
    fn default() -> Self {
        Self {
            add_connection: 0.15,
            delete_connection: 0.05,
            rewire_connection: 0.15,
            add_node: 0.05,
            delete_node: 0.05,
            change_weight: 0.10,
            change_bias: 0.10,
            eta: 15.0,
            min_weight: -1.0,
            max_weight: 1.0,
        }
    }
}

impl MutationConfig {
    /// Every probability set to zero.
    pub fn disabled() -> Self {
        Self {
            add_connection: 0.0,
            delete_connection: 0.0,
            rewire_connection: 0.0,
            add_node: 0.0,
            delete_node: 0.0,
            change_weight: 0.0,
            change_bias: 0.0,
            ..Self::default()
        }
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("add_connection", self.add_connection),
            ("delete_connection", self.delete_connection),
            ("rewire_connection", self.rewire_connection),
            ("add_node", self.add_node),
            ("delete_node", self.delete_node),
            ("change_weight", self.change_weight),
            ("change_bias", self.change_bias),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!(
                    "mutation.{name} = {p} is not a probability"
                )));
            }
        }
        if !(self.eta > 0.0) {
            return Err(Error::Config("mutation.eta must be positive".into()));
        }
        if !(self.min_weight < self.max_weight) {
            return Err(Error::Config("mutation weight range is empty".into()));
        }
        Ok(())
    }
}

/// Size ranges of freshly generated networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitConfig {
    pub min_hidden: usize,
    pub max_hidden: usize,
    pub min_connections: usize,
    pub max_connections: usize,
    pub min_weight: f64,
    pub max_weight: f64,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            min_hidden: 10,
            max_hidden: 30,
            min_connections: 50,
            max_connections: 250,
            min_weight: -1.0,
            max_weight: 1.0,
        }
    }
}

impl InitConfig {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
    pub fn validate(&self) -> Result<()> {
        if self.min_hidden > self.max_hidden || self.min_connections > self.max_connections {
            return Err(Error::Config("init size ranges are inverted".into()));
        }
        if !(self.min_weight < self.max_weight) {
            return Err(Error::Config("init weight range is empty".into()));
        }
        Ok(())
    }
}

/// Bounded polynomial mutation of `x` within `[lo, hi]`.
///
/// The perturbation `delta in [-1, 1]` follows the density
/// `0.5 (eta + 1) (1 - |delta|)^eta`, is scaled by the width of the range and
/// the result is clipped back into `[lo, hi]`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
pub fn polynomial_mutate<R: Rng + ?Sized>(
    x: f64,
    eta: f64,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<f64> {
    if lo > hi {
        return Err(Error::usage(format!(
            "polynomial mutation range [{lo}, {hi}] is empty"
        )));
    }
    if !(eta > 0.0) {
        return Err(Error::usage("polynomial mutation needs eta > 0"));
    }
    let u: f64 = rng.random();
    let exponent = 1.0 / (eta + 1.0);
    let delta = if u < 0.5 {
        (2.0 * u).powf(exponent) - 1.0
    } else {
        1.0 - (2.0 * (1.0 - u)).powf(exponent)
    };
    Ok((x + delta * (hi - lo)).clamp(lo, hi))
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Samples a random network with the configured size ranges.
///
/// Connections are drawn without replacement from all valid
/// `(any node -> non-input node)` pairs.
pub fn random_genome<R: Rng + ?Sized>(rng: &mut R, cfg: &InitConfig) -> NetworkGenome {
    let mut genome = NetworkGenome::minimal();
    for n in genome
        .nodes
        .iter_mut()
        .filter(|n| n.role != NodeRole::Input)
    {
        n.bias = uniform(rng, cfg.min_weight, cfg.max_weight);
    }
    let hidden = rng.random_range(cfg.min_hidden..=cfg.max_hidden);
    for _ in 0..hidden {
        let bias = uniform(rng, cfg.min_weight, cfg.max_weight);
        genome.add_hidden(bias);
    }

    let sources: Vec<u32> = genome.nodes.iter().map(|n| n.id).collect();
    let targets: Vec<u32> = genome
        .nodes
        .iter()
        .filter(|n| n.role != NodeRole::Input)
        .map(|n| n.id)
        .collect();
    let pairs = sources.len() * targets.len();
    let mut wanted = rng.random_range(cfg.min_connections..=cfg.max_connections);
    if wanted > pairs {
        log::warn!(
            "requested {wanted} connections but only {pairs} distinct pairs exist; using {pairs}"
        );
        wanted = pairs;
    }
    for k in rand::seq::index::sample(rng, pairs, wanted).into_vec() {
        let source = sources[k / targets.len()];
        let target = targets[k % targets.len()];
        genome.connections.push(ConnectionGene {
            source,
            target,
            weight: uniform(rng, cfg.min_weight, cfg.max_weight),
        });
    }
    genome
}

/// Returns a mutated copy of `parent`.
///
/// Structural operators run once each in a fixed order (add connection,
/// delete connection, rewire, add node, delete node), followed by the
/// per-element weight and bias perturbations. Operators that cannot apply are
/// skipped.
pub fn mutate<R: Rng + ?Sized>(
    parent: &NetworkGenome,
    rng: &mut R,
    cfg: &MutationConfig,
) -> NetworkGenome {
    let mut g = parent.clone();
    if rng.random_bool(cfg.add_connection) {
        add_connection(&mut g, rng, cfg);
    }
    if rng.random_bool(cfg.delete_connection) && !g.connections.is_empty() {
        let k = rng.random_range(0..g.connections.len());
        g.connections.remove(k);
    }
    rewire_connection(&mut g, rng, cfg.rewire_connection);
    if rng.random_bool(cfg.add_node) {
        add_node(&mut g, rng);
    }
    if rng.random_bool(cfg.delete_node) {
        delete_node(&mut g, rng);
    }
    let (lo, hi) = (cfg.min_weight, cfg.max_weight);
    for c in g.connections.iter_mut() {
        if rng.random_bool(cfg.change_weight) {
            c.weight = polynomial_mutate(c.weight.clamp(lo, hi), cfg.eta, lo, hi, rng)
                .expect("validated mutation range");
        }
    }
    for n in g.nodes.iter_mut().filter(|n| n.role != NodeRole::Input) {
        if rng.random_bool(cfg.change_bias) {
            n.bias = polynomial_mutate(n.bias.clamp(lo, hi), cfg.eta, lo, hi, rng)
                .expect("validated mutation range");
        }
    }
    g
}

fn existing_pairs(g: &NetworkGenome) -> HashSet<(u32, u32)> {
    g.connections.iter().map(|c| (c.source, c.target)).collect()
}

fn add_connection<R: Rng + ?Sized>(g: &mut NetworkGenome, rng: &mut R, cfg: &MutationConfig) {
    let existing = existing_pairs(g);
    let mut free = Vec::new();
    for s in &g.nodes {
        for t in g.nodes.iter().filter(|n| n.role != NodeRole::Input) {
            if !existing.contains(&(s.id, t.id)) {
                free.push((s.id, t.id));
            }
        }
    }
    if let Some(&(source, target)) = free.choose(rng) {
        g.connections.push(ConnectionGene {
            source,
            target,
            weight: uniform(rng, cfg.min_weight, cfg.max_weight),
        });
    }
}

fn rewire_connection<R: Rng + ?Sized>(g: &mut NetworkGenome, rng: &mut R, p: f64) {
    if p <= 0.0 {
        return;
    }
    let existing = existing_pairs(g);
    for k in 0..g.connections.len() {
        if !rng.random_bool(p) {
            continue;
        }
        let ConnectionGene { source, target, .. } = g.connections[k];
        let change_source = rng.random_bool(0.5);
        let candidates: Vec<u32> = if change_source {
            g.nodes
                .iter()
                .map(|n| n.id)
                .filter(|&s| !existing.contains(&(s, target)))
                .collect()
        } else {
            g.nodes
                .iter()
                .filter(|n| n.role != NodeRole::Input)
                .map(|n| n.id)
                .filter(|&t| !existing.contains(&(source, t)))
                .collect()
        };
        if let Some(&pick) = candidates.choose(rng) {
            if change_source {
                g.connections[k].source = pick;
            } else {
                g.connections[k].target = pick;
            }
            return;
        }
    }
}

fn add_node<R: Rng + ?Sized>(g: &mut NetworkGenome, rng: &mut R) {
    if g.connections.is_empty() {
        return;
    }
    let k = rng.random_range(0..g.connections.len());
    let old = g.connections.remove(k);
    let id = g.add_hidden(0.0);
    g.connections.push(ConnectionGene {
        source: old.source,
        target: id,
        weight: old.weight,
    });
    g.connections.push(ConnectionGene {
        source: id,
        target: old.target,
        weight: old.weight,
    });
}

fn delete_node<R: Rng + ?Sized>(g: &mut NetworkGenome, rng: &mut R) {
    let hidden: Vec<u32> = g
        .nodes
        .iter()
        .filter(|n| n.role == NodeRole::Hidden)
        .map(|n| n.id)
        .collect();
    if let Some(&victim) = hidden.choose(rng) {
        g.nodes.retain(|n| n.id != victim);
        g.connections
            .retain(|c| c.source != victim && c.target != victim);
    }
}
