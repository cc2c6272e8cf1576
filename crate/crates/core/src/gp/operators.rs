//! Initialization, selection and variation operators.

use rand::Rng;

use crate::gp::config::GpConfig;
use crate::gp::program::{subtree_end, Node, Program};
use crate::primitives::Primitive;

fn random_terminal<R: Rng + ?Sized>(config: &GpConfig, n_features: usize, rng: &mut R) -> Node {
    if rng.gen_bool(0.5) {
        Node::Feature(rng.gen_range(0..n_features))
    } else {
        let (lo, hi) = config.constant_range;
        if lo < hi {
            Node::Const(rng.gen_range(lo..=hi))
        } else {
            Node::Const(lo)
        }
    }
}

fn random_primitive<R: Rng + ?Sized>(rng: &mut R) -> Primitive {
    Primitive::ALL[rng.gen_range(0..Primitive::ALL.len())]
}

#[allow(clippy::too_many_arguments)]
fn build<R: Rng + ?Sized>(
    nodes: &mut Vec<Node>,
    depth: usize,
    target: usize,
    full: bool,
    config: &GpConfig,
    n_features: usize,
    function_share: f64,
    rng: &mut R,
) {
    let function = depth < target
        && (full || depth < config.init_depth_min || rng.gen_bool(function_share));
    if function {
        let p = random_primitive(rng);
        nodes.push(Node::Op(p));
        for _ in 0..p.arity() {
            build(nodes, depth + 1, target, full, config, n_features, function_share, rng);
        }
    } else {
        nodes.push(random_terminal(config, n_features, rng));
    }
}

/// Ramped half-and-half initialization.
///
/// A target depth is drawn uniformly from the configured range and the tree
/// is grown either "full" (every branch reaches the target depth) or "grow"
/// (branches may stop early, but never above the minimum depth). Trees over
/// the node cap are redrawn.
pub fn random_program<R: Rng + ?Sized>(config: &GpConfig, n_features: usize, rng: &mut R) -> Program {
    assert!(n_features >= 1, "random_program needs at least one feature");
    let n_functions = Primitive::ALL.len() as f64;
    let function_share = n_functions / (n_functions + n_features as f64);
    loop {
        let target = rng.gen_range(config.init_depth_min..=config.init_depth_max);
        let full = rng.gen_bool(0.5);
        let mut nodes = Vec::new();
        build(&mut nodes, 0, target, full, config, n_features, function_share, rng);
        if nodes.len() <= config.hard_node_cap {
            return Program::from_nodes_unchecked(nodes);
        }
    }
}

/// Draws `k` contestants uniformly with replacement and returns the index of
/// the winner: lowest penalized fitness, then fewest nodes, then earliest
/// position.
pub fn tournament_index<R: Rng + ?Sized>(penalized: &[f64], sizes: &[usize], k: usize, rng: &mut R) -> usize {
    assert!(!penalized.is_empty(), "tournament on an empty population");
    let n = penalized.len();
    let mut best = rng.gen_range(0..n);
    for _ in 1..k {
        let c = rng.gen_range(0..n);
        let key = |i: usize| (penalized[i], sizes[i], i);
        let (fc, sc, ic) = key(c);
        let (fb, sb, ib) = key(best);
        if fc.total_cmp(&fb).then(sc.cmp(&sb)).then(ic.cmp(&ib)).is_lt() {
            best = c;
        }
    }
    best
}

/// Tournament selection over `(program, penalized fitness)` pairs.
pub fn tournament_select<'a, R: Rng + ?Sized>(
    population: &'a [(Program, f64)],
    k: usize,
    rng: &mut R,
) -> &'a Program {
    let fit: Vec<f64> = population.iter().map(|(_, f)| *f).collect();
    let sizes: Vec<usize> = population.iter().map(|(p, _)| p.len()).collect();
    &population[tournament_index(&fit, &sizes, k, rng)].0
}

/// Replaces a uniformly chosen subtree of `parent` with a uniformly chosen
/// subtree of `donor`. Falls back to `parent` if the child would exceed
/// `node_cap`.
pub fn subtree_crossover<R: Rng + ?Sized>(parent: &Program, donor: &Program, node_cap: usize, rng: &mut R) -> Program {
    let at = rng.gen_range(0..parent.len());
    let from = rng.gen_range(0..donor.len());
    let piece = &donor.nodes()[from..donor.subtree_end(from)];
    let removed = parent.subtree_end(at) - at;
    if parent.len() - removed + piece.len() > node_cap {
        return parent.clone();
    }
    parent.splice(at, piece)
}

/// Replaces a uniformly chosen subtree with a freshly generated program.
pub fn subtree_mutation<R: Rng + ?Sized>(parent: &Program, config: &GpConfig, n_features: usize, rng: &mut R) -> Program {
    let chicken = random_program(config, n_features, rng);
    subtree_crossover(parent, &chicken, config.hard_node_cap, rng)
}

/// Replaces a uniformly chosen subtree with one of its own subtrees.
pub fn hoist_mutation<R: Rng + ?Sized>(parent: &Program, rng: &mut R) -> Program {
    let at = rng.gen_range(0..parent.len());
    let end = parent.subtree_end(at);
    let inner = rng.gen_range(at..end);
    let nodes = parent.nodes();
    let piece = nodes[inner..subtree_end(nodes, inner)].to_vec();
    parent.splice(at, &piece)
}

/// Each node is independently replaced with probability
/// `config.point_replace_prob`: operators by a primitive of the same arity,
/// terminals by a fresh terminal.
pub fn point_mutation<R: Rng + ?Sized>(parent: &Program, config: &GpConfig, n_features: usize, rng: &mut R) -> Program {
    let mut nodes = parent.nodes().to_vec();
    for node in nodes.iter_mut() {
        if !rng.gen_bool(config.point_replace_prob) {
            continue;
        }
        *node = match *node {
            Node::Op(p) => {
                let same: Vec<Primitive> = Primitive::with_arity(p.arity()).collect();
                Node::Op(same[rng.gen_range(0..same.len())])
            }
            _ => random_terminal(config, n_features, rng),
        };
    }
    Program::from_nodes_unchecked(nodes)
}
