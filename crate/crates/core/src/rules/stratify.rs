use std::collections::{HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::visit::EdgeRef;

use super::{Head, RuleSet, Term};
use crate::error::{Error, Result};

/// Orders aux predicates into strata so that every negated reference points
/// to a strictly lower stratum. Positive references may stay within a
/// stratum. Names inside a stratum follow definition order.
pub fn stratify(rs: &RuleSet) -> Result<Vec<Vec<String>>> {
    let names = rs.aux_names();
    let mut graph: DiGraph<&str, bool> = DiGraph::new();
    let ids: HashMap<&str, NodeIndex> = names.iter().map(|n| (*n, graph.add_node(*n))).collect();

    // Edge head -> dependency, weighted by negation.
    for rule in &rs.aux_rules {
        let Head::Aux(head) = &rule.head else {
            continue;
        };
        for lit in &rule.body {
            if let Term::Aux(dep) = &lit.term {
                if let (Some(&h), Some(&d)) = (ids.get(head.as_str()), ids.get(dep.as_str())) {
                    // One edge per pair; a negative reference wins.
                    match graph.find_edge(h, d) {
                        Some(e) => graph[e] |= lit.negated,
                        None => {
                            graph.add_edge(h, d, lit.negated);
                        }
                    }
                }
            }
        }
    }

    // Components come out dependencies first.
    let components = tarjan_scc(&graph);
    let mut component_of = vec![0usize; graph.node_count()];
    for (c, members) in components.iter().enumerate() {
        for n in members {
            component_of[n.index()] = c;
        }
    }

    let mut level = vec![0usize; components.len()];
    for (c, members) in components.iter().enumerate() {
        let mut lvl = 0;
        for &n in members {
            for e in graph.edges(n) {
                let negative = *e.weight();
                let target = component_of[e.target().index()];
                if target == c {
                    if negative {
                        return Err(Error::NonStratified {
                            cycle: negative_cycle(&graph, n, e.target(), &component_of),
                        });
                    }
                } else {
                    lvl = lvl.max(level[target] + usize::from(negative));
                }
            }
        }
        level[c] = lvl;
    }

    let depth = level.iter().max().map_or(0, |m| m + 1);
    let mut strata = vec![Vec::new(); depth];
    for name in names {
        let n = ids[name];
        strata[level[component_of[n.index()]]].push(name.to_string());
    }
    Ok(strata)
}

/// The cycle closed by the negative edge `from -> to`, written as a name
/// sequence that starts and ends at `from`.
fn negative_cycle(
    graph: &DiGraph<&str, bool>,
    from: NodeIndex,
    to: NodeIndex,
    component_of: &[usize],
) -> Vec<String> {
    let comp = component_of[from.index()];
    let mut parent: HashMap<NodeIndex, NodeIndex> = HashMap::new();
    let mut queue = VecDeque::from([to]);
    let mut found = to == from;
    while let Some(n) = queue.pop_front() {
        if found {
            break;
        }
        for m in graph.neighbors(n) {
            if component_of[m.index()] != comp || m == to || parent.contains_key(&m) {
                continue;
            }
            parent.insert(m, n);
            if m == from {
                found = true;
                break;
            }
            queue.push_back(m);
        }
    }
    let mut back = vec![from];
    let mut cur = from;
    while cur != to {
        cur = parent[&cur];
        back.push(cur);
    }
    let mut cycle: Vec<String> = vec![graph[from].to_string()];
    cycle.extend(back.iter().rev().map(|n| graph[*n].to_string()));
    cycle
}
