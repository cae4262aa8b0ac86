//! Plain digraph algorithms over adjacency lists. Elementary circuits come
//! from Johnson's algorithm on top of a strongly connected split.
//!
//! All routines are iterative so that deep graphs do not exhaust the stack.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

/// Component id per vertex (Kosaraju). Ids are assigned in an order that is
/// a deterministic function of the adjacency lists.
pub fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&w) = adj[v].get(*next) {
                *next += 1;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }

    let mut radj = vec![Vec::new(); n];
    for (v, ws) in adj.iter().enumerate() {
        for &w in ws {
            radj[w].push(v);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut next_id = 0;
    for &root in order.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        comp[root] = next_id;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &w in &radj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = next_id;
                    stack.push(w);
                }
            }
        }
        next_id += 1;
    }
    comp
}

/// Johnson's algorithm. Calls `visit` with the vertex sequence of every
/// elementary circuit; each circuit starts at its least vertex and circuits
/// are produced in increasing order of that vertex. `adj` must not contain
/// duplicate targets. Returning `Break` stops the search.
pub fn elementary_circuits<F>(adj: &[Vec<usize>], mut visit: F) -> ControlFlow<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    let n = adj.len();
    let mut blocked = vec![false; n];
    let mut blocked_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut in_scope = vec![false; n];

    for s in 0..n {
        // restrict to the strongly connected component of s in the subgraph
        // induced by vertices >= s
        let sub: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                if v < s {
                    Vec::new()
                } else {
                    adj[v].iter().copied().filter(|&w| w >= s).collect()
                }
            })
            .collect();
        let comp = strongly_connected_components(&sub);
        let has_cycle = comp.iter().enumerate().any(|(v, &c)| v > s && c == comp[s])
            || adj[s].contains(&s);
        if !has_cycle {
            continue;
        }
        for v in 0..n {
            in_scope[v] = v >= s && comp[v] == comp[s];
            blocked[v] = false;
            blocked_by[v].clear();
        }

        let mut path = vec![s];
        let mut frames = vec![(s, 0usize, false)];
        blocked[s] = true;
        while let Some(frame) = frames.last_mut() {
            let (v, ref mut next, ref mut found) = *frame;
            if let Some(&w) = adj[v].get(*next) {
                *next += 1;
                if !in_scope[w] {
                    continue;
                }
                if w == s {
                    *found = true;
                    visit(&path)?;
                } else if !blocked[w] {
                    blocked[w] = true;
                    path.push(w);
                    frames.push((w, 0, false));
                }
            } else {
                let found = *found;
                frames.pop();
                path.pop();
                if found {
                    unblock(v, &mut blocked, &mut blocked_by);
                } else {
                    for &w in &adj[v] {
                        if in_scope[w] && !blocked_by[w].contains(&v) {
                            blocked_by[w].push(v);
                        }
                    }
                }
                if let Some(parent) = frames.last_mut() {
                    parent.2 |= found;
                }
            }
        }
    }
    ControlFlow::Continue(())
}

fn unblock(v: usize, blocked: &mut [bool], blocked_by: &mut [Vec<usize>]) {
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        if !blocked[u] {
            continue;
        }
        blocked[u] = false;
        stack.append(&mut blocked_by[u]);
    }
}

/// Shortest path from `from` to `to` as a sequence of edge ids, using only
/// edges accepted by `allow`. `out` lists `(edge id, target)` per vertex.
/// Returns an empty path when `from == to`.
pub fn shortest_path<A>(out: &[Vec<(usize, usize)>], from: usize, to: usize, mut allow: A) -> Option<Vec<usize>>
where
    A: FnMut(usize, usize) -> bool,
{
    if from == to {
        return Some(Vec::new());
    }
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; out.len()];
    let mut seen = vec![false; out.len()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        for &(e, w) in &out[v] {
            if seen[w] || !allow(e, w) {
                continue;
            }
            seen[w] = true;
            parent[w] = Some((e, v));
            if w == to {
                let mut edges = Vec::new();
                let mut cur = to;
                while let Some((e, p)) = parent[cur] {
                    edges.push(e);
                    cur = p;
                }
                edges.reverse();
                return Some(edges);
            }
            queue.push_back(w);
        }
    }
    None
}
