//! Exact optimal transport via the transportation simplex.
//!
//! The solver returns a vertex of the transportation polytope (a basic
//! feasible solution with at most `2n - 1` support entries), which the
//! uniqueness certificate downstream requires. Initial basis comes from the
//! Vogel approximation; degenerate stalls fall back to a restart with
//! lexicographically perturbed marginals.

use nalgebra::DMatrix;

use crate::coupling::Coupling;
use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::simplex::Histogram;

/// Outcome of an exact solve: optimal value, vertex coupling, pivot count.
#[derive(Debug, Clone)]
pub struct OtSolution {
    pub value: f64,
    pub coupling: Coupling,
    pub iterations: usize,
}

/// Marginal perturbation step used to break degenerate cycling.
const PERTURBATION: f64 = 1e-13;

/// Minimum-cost transport between `a` and `b` under ground cost `c`.
pub fn solve_exact(c: &CostMatrix, a: &Histogram, b: &Histogram) -> Result<OtSolution> {
    if c.n() != a.len() || c.n() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "solve_exact",
            left: c.n(),
            right: a.len().max(b.len()),
        });
    }
    let cost = c.to_row_major();
    let plan = solve_dense(&cost, a.as_slice(), b.as_slice())?;
    finish(plan, &cost, a, b)
}

fn finish(
    plan: PlanResult,
    cost: &[f64],
    a: &Histogram,
    b: &Histogram,
) -> Result<OtSolution> {
    let n_cols = b.len();
    let coupling = Coupling::new(plan.matrix, a, b)?;
    let value = coupling.cost_against(cost, n_cols);
    Ok(OtSolution {
        value,
        coupling,
        iterations: plan.pivots,
    })
}

struct PlanResult {
    matrix: DMatrix<f64>,
    pivots: usize,
}

fn solve_dense(cost: &[f64], a: &[f64], b: &[f64]) -> Result<PlanResult> {
    let mut simplex = TransportSimplex::new(cost, a.to_vec(), b.to_vec());
    match simplex.run() {
        Ok(()) => Ok(PlanResult {
            matrix: simplex.plan(),
            pivots: simplex.pivots,
        }),
        Err(Error::SolverStall { .. }) => solve_perturbed(cost, a, b),
        Err(e) => Err(e),
    }
}

/// Restart with marginals nudged by `(index + 1) * PERTURBATION`, rebalanced
/// on the last demand. The optimal basis of the perturbed problem is then
/// re-evaluated against the original marginals.
fn solve_perturbed(cost: &[f64], a: &[f64], b: &[f64]) -> Result<PlanResult> {
    let n_r = a.len();
    let n_c = b.len();
    let mut a_pert = a.to_vec();
    let mut b_pert = b.to_vec();
    let mut added = 0.0;
    for (i, v) in a_pert.iter_mut().enumerate() {
        *v += (i + 1) as f64 * PERTURBATION;
        added += (i + 1) as f64 * PERTURBATION;
    }
    b_pert[n_c - 1] += added;

    let mut simplex = TransportSimplex::new(cost, a_pert, b_pert);
    simplex.allow_stall_restart = false;
    simplex.run()?;

    // Recompute tree flows for the original marginals; the basis stays
    // optimal because reduced costs do not depend on the marginals.
    simplex.supply = a.to_vec();
    simplex.demand = b.to_vec();
    simplex.recompute_tree_flows();
    let mut feasible = true;
    for arc in &mut simplex.arcs {
        if arc.flow < -1e3 * PERTURBATION * (n_r * n_r) as f64 {
            feasible = false;
        }
        arc.flow = arc.flow.max(0.0);
    }
    if feasible {
        return Ok(PlanResult {
            matrix: simplex.plan(),
            pivots: simplex.pivots,
        });
    }
    // Last resort: Bland's rule terminates without perturbation.
    let mut bland = TransportSimplex::new(cost, a.to_vec(), b.to_vec());
    bland.allow_stall_restart = false;
    bland.bland_rule = true;
    bland.run()?;
    Ok(PlanResult {
        matrix: bland.plan(),
        pivots: bland.pivots,
    })
}

#[derive(Debug, Clone, Copy)]
struct Arc {
    row: usize,
    col: usize,
    flow: f64,
}

struct TransportSimplex<'a> {
    cost: &'a [f64],
    n_r: usize,
    n_c: usize,
    supply: Vec<f64>,
    demand: Vec<f64>,
    arcs: Vec<Arc>,
    /// Adjacency of the basis tree: node -> arc indices. Rows are nodes
    /// `0..n_r`, columns are nodes `n_r..n_r + n_c`.
    adjacency: Vec<Vec<usize>>,
    pivots: usize,
    allow_stall_restart: bool,
    bland_rule: bool,
}

impl<'a> TransportSimplex<'a> {
    fn new(cost: &'a [f64], supply: Vec<f64>, demand: Vec<f64>) -> Self {
        let n_r = supply.len();
        let n_c = demand.len();
        Self {
            cost,
            n_r,
            n_c,
            supply,
            demand,
            arcs: Vec::new(),
            adjacency: vec![Vec::new(); n_r + n_c],
            pivots: 0,
            allow_stall_restart: true,
            bland_rule: false,
        }
    }

    #[inline]
    fn c(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.n_c + j]
    }

    fn run(&mut self) -> Result<()> {
        self.vogel_basis();
        debug_assert_eq!(self.arcs.len(), self.n_r + self.n_c - 1);

        let scale = self
            .cost
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
            .max(1e-300);
        let tol = 1e-13 * scale;
        let max_pivots = 400 * (self.n_r + self.n_c) * (self.n_r + self.n_c) + 1000;
        let stall_limit = 8 * (self.n_r + self.n_c) + 64;
        let mut degenerate_run = 0usize;

        loop {
            if self.pivots > max_pivots {
                return Err(Error::SolverStall {
                    iterations: self.pivots,
                });
            }
            let (u, v) = self.potentials();
            let entering = if self.bland_rule {
                self.entering_bland(&u, &v, tol)
            } else {
                self.entering_dantzig(&u, &v, tol)
            };
            let Some((ei, ej)) = entering else {
                return Ok(());
            };
            let theta = self.pivot(ei, ej);
            self.pivots += 1;
            if theta <= tol.min(1e-15) {
                degenerate_run += 1;
                if self.allow_stall_restart && degenerate_run > stall_limit {
                    return Err(Error::SolverStall {
                        iterations: self.pivots,
                    });
                }
            } else {
                degenerate_run = 0;
            }
        }
    }

    /// Vogel approximation: repeatedly allocate at the cheapest cell of the
    /// line with the largest regret (gap between its two smallest costs).
    fn vogel_basis(&mut self) {
        let n_r = self.n_r;
        let n_c = self.n_c;
        let mut sup = self.supply.clone();
        let mut dem = self.demand.clone();
        let mut row_active = vec![true; n_r];
        let mut col_active = vec![true; n_c];
        let mut rows_left = n_r;
        let mut cols_left = n_c;

        while rows_left > 1 && cols_left > 1 {
            let mut best_penalty = f64::NEG_INFINITY;
            // (is_row, index) of the max-regret line; ties resolve to the
            // first row, then the first column, for determinism.
            let mut best_line: Option<(bool, usize)> = None;
            for i in 0..n_r {
                if !row_active[i] {
                    continue;
                }
                let p = self.line_penalty(true, i, &row_active, &col_active);
                if p > best_penalty {
                    best_penalty = p;
                    best_line = Some((true, i));
                }
            }
            for j in 0..n_c {
                if !col_active[j] {
                    continue;
                }
                let p = self.line_penalty(false, j, &row_active, &col_active);
                if p > best_penalty {
                    best_penalty = p;
                    best_line = Some((false, j));
                }
            }
            let (is_row, idx) = best_line.expect("active lines remain");
            let (i, j) = if is_row {
                (idx, self.cheapest_in_row(idx, &col_active))
            } else {
                (self.cheapest_in_col(idx, &row_active), idx)
            };
            let delta = sup[i].min(dem[j]);
            self.add_arc(i, j, delta);
            sup[i] -= delta;
            dem[j] -= delta;
            if sup[i] <= dem[j] && sup[i] <= 0.0 {
                row_active[i] = false;
                rows_left -= 1;
                sup[i] = 0.0;
            } else {
                col_active[j] = false;
                cols_left -= 1;
                dem[j] = 0.0;
            }
        }

        // Endgame: a single row or a single column absorbs what is left.
        if rows_left == 1 {
            let i = (0..n_r).find(|&i| row_active[i]).expect("one row left");
            for j in 0..n_c {
                if col_active[j] {
                    self.add_arc(i, j, dem[j]);
                }
            }
        } else {
            let j = (0..n_c).find(|&j| col_active[j]).expect("one col left");
            for i in 0..n_r {
                if row_active[i] {
                    self.add_arc(i, j, sup[i]);
                }
            }
        }
    }

    fn line_penalty(
        &self,
        is_row: bool,
        idx: usize,
        row_active: &[bool],
        col_active: &[bool],
    ) -> f64 {
        let mut smallest = f64::INFINITY;
        let mut second = f64::INFINITY;
        let mut feed = |c: f64| {
            if c < smallest {
                second = smallest;
                smallest = c;
            } else if c < second {
                second = c;
            }
        };
        if is_row {
            for j in 0..self.n_c {
                if col_active[j] {
                    feed(self.c(idx, j));
                }
            }
        } else {
            for i in 0..self.n_r {
                if row_active[i] {
                    feed(self.c(i, idx));
                }
            }
        }
        if second.is_finite() {
            second - smallest
        } else {
            smallest
        }
    }

    fn cheapest_in_row(&self, i: usize, col_active: &[bool]) -> usize {
        let mut best = f64::INFINITY;
        let mut best_j = 0;
        for j in 0..self.n_c {
            if col_active[j] && self.c(i, j) < best {
                best = self.c(i, j);
                best_j = j;
            }
        }
        best_j
    }

    fn cheapest_in_col(&self, j: usize, row_active: &[bool]) -> usize {
        let mut best = f64::INFINITY;
        let mut best_i = 0;
        for i in 0..self.n_r {
            if row_active[i] && self.c(i, j) < best {
                best = self.c(i, j);
                best_i = i;
            }
        }
        best_i
    }

    fn add_arc(&mut self, row: usize, col: usize, flow: f64) {
        let id = self.arcs.len();
        self.arcs.push(Arc { row, col, flow });
        self.adjacency[row].push(id);
        self.adjacency[self.n_r + col].push(id);
    }

    /// Dual potentials from the basis tree, rooted at node 0 (u[0] = 0).
    fn potentials(&self) -> (Vec<f64>, Vec<f64>) {
        let nodes = self.n_r + self.n_c;
        let mut potential = vec![0.0; nodes];
        let mut seen = vec![false; nodes];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(node) = stack.pop() {
            for &arc_id in &self.adjacency[node] {
                let arc = self.arcs[arc_id];
                let (rn, cn) = (arc.row, self.n_r + arc.col);
                let other = if rn == node { cn } else { rn };
                if !seen[other] {
                    seen[other] = true;
                    // u_i + v_j = c_ij on basic arcs.
                    potential[other] = self.c(arc.row, arc.col) - potential[node];
                    stack.push(other);
                }
            }
        }
        let (u, v) = potential.split_at(self.n_r);
        (u.to_vec(), v.to_vec())
    }

    fn entering_dantzig(&self, u: &[f64], v: &[f64], tol: f64) -> Option<(usize, usize)> {
        let mut best = -tol;
        let mut cell = None;
        for i in 0..self.n_r {
            let base = i * self.n_c;
            for j in 0..self.n_c {
                let rc = self.cost[base + j] - u[i] - v[j];
                if rc < best {
                    best = rc;
                    cell = Some((i, j));
                }
            }
        }
        cell
    }

    fn entering_bland(&self, u: &[f64], v: &[f64], tol: f64) -> Option<(usize, usize)> {
        for i in 0..self.n_r {
            let base = i * self.n_c;
            for j in 0..self.n_c {
                if self.cost[base + j] - u[i] - v[j] < -tol {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Brings cell `(ei, ej)` into the basis; returns the pivot step size.
    fn pivot(&mut self, ei: usize, ej: usize) -> f64 {
        let path = self.tree_path(ei, self.n_r + ej);

        // Walking the cycle from the entering cell, signs alternate: arcs an
        // odd number of steps along the path give mass back.
        let mut theta = f64::INFINITY;
        let mut leaving: Option<usize> = None;
        for (k, &arc_id) in path.iter().enumerate() {
            if k % 2 == 0 {
                let f = self.arcs[arc_id].flow;
                if f < theta {
                    theta = f;
                    leaving = Some(arc_id);
                }
            }
        }
        let leaving = leaving.expect("cycle has at least one reverse arc");
        let theta = theta.max(0.0);

        for (k, &arc_id) in path.iter().enumerate() {
            if k % 2 == 0 {
                self.arcs[arc_id].flow = (self.arcs[arc_id].flow - theta).max(0.0);
            } else {
                self.arcs[arc_id].flow += theta;
            }
        }
        self.arcs[leaving].flow = 0.0;

        // Replace the leaving arc by the entering cell.
        let old = self.arcs[leaving];
        self.detach(leaving, old.row);
        self.detach(leaving, self.n_r + old.col);
        self.arcs[leaving] = Arc {
            row: ei,
            col: ej,
            flow: theta,
        };
        self.adjacency[ei].push(leaving);
        self.adjacency[self.n_r + ej].push(leaving);
        theta
    }

    fn detach(&mut self, arc_id: usize, node: usize) {
        let list = &mut self.adjacency[node];
        let pos = list.iter().position(|&a| a == arc_id).expect("arc listed");
        list.swap_remove(pos);
    }

    /// Arc ids along the unique tree path between two nodes. The first arc is
    /// incident to `from`; the cycle through the entering cell starts there.
    fn tree_path(&self, from: usize, to: usize) -> Vec<usize> {
        let nodes = self.n_r + self.n_c;
        let mut parent_arc: Vec<Option<usize>> = vec![None; nodes];
        let mut parent_node: Vec<usize> = vec![usize::MAX; nodes];
        let mut seen = vec![false; nodes];
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(from);
        seen[from] = true;
        while let Some(node) = queue.pop_front() {
            if node == to {
                break;
            }
            for &arc_id in &self.adjacency[node] {
                let arc = self.arcs[arc_id];
                let (rn, cn) = (arc.row, self.n_r + arc.col);
                let other = if rn == node { cn } else { rn };
                if !seen[other] {
                    seen[other] = true;
                    parent_arc[other] = Some(arc_id);
                    parent_node[other] = node;
                    queue.push_back(other);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = to;
        while node != from {
            let arc_id = parent_arc[node].expect("tree connects all nodes");
            path.push(arc_id);
            node = parent_node[node];
        }
        // Order from the `from` side so the alternation starts adjacent to
        // the entering cell.
        path.reverse();
        path
    }

    /// Solves for the unique tree flows matching the current marginals.
    fn recompute_tree_flows(&mut self) {
        let nodes = self.n_r + self.n_c;
        let mut degree = vec![0usize; nodes];
        for node in 0..nodes {
            degree[node] = self.adjacency[node].len();
        }
        let mut balance: Vec<f64> = self
            .supply
            .iter()
            .copied()
            .chain(self.demand.iter().copied())
            .collect();
        let mut used = vec![false; self.arcs.len()];
        let mut leaves: Vec<usize> = (0..nodes).filter(|&n| degree[n] == 1).collect();
        while let Some(node) = leaves.pop() {
            let Some(&arc_id) = self
                .adjacency[node]
                .iter()
                .find(|&&a| !used[a])
            else {
                continue;
            };
            used[arc_id] = true;
            let arc = self.arcs[arc_id];
            let (rn, cn) = (arc.row, self.n_r + arc.col);
            let other = if rn == node { cn } else { rn };
            self.arcs[arc_id].flow = balance[node];
            balance[other] -= balance[node];
            balance[node] = 0.0;
            degree[node] -= 1;
            degree[other] -= 1;
            if degree[other] == 1 {
                leaves.push(other);
            }
        }
    }

    fn plan(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_r, self.n_c);
        for arc in &self.arcs {
            m[(arc.row, arc.col)] += arc.flow.max(0.0);
        }
        m
    }
}

/// Exhaustive optimal value by enumerating every spanning-tree vertex of the
/// transportation polytope. Independent of the simplex path; intended for
/// tests, hence the tight size cap.
pub fn brute_force_oracle(c: &CostMatrix, a: &Histogram, b: &Histogram) -> Result<f64> {
    if c.n() != a.len() || c.n() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "brute_force_oracle",
            left: c.n(),
            right: a.len().max(b.len()),
        });
    }
    if a.len() > 5 || b.len() > 5 {
        return Err(Error::OracleTooLarge {
            rows: a.len(),
            cols: b.len(),
        });
    }
    let cost = c.to_row_major();
    Ok(brute_force_dense(&cost, a.as_slice(), b.as_slice()))
}

fn brute_force_dense(cost: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let n_r = a.len();
    let n_c = b.len();
    let nodes = n_r + n_c;
    let target = nodes - 1;
    let cells: Vec<(usize, usize)> = (0..n_r)
        .flat_map(|i| (0..n_c).map(move |j| (i, j)))
        .collect();

    struct Search<'s> {
        cells: &'s [(usize, usize)],
        cost: &'s [f64],
        a: &'s [f64],
        b: &'s [f64],
        n_r: usize,
        n_c: usize,
        target: usize,
        chosen: Vec<usize>,
        parent: Vec<usize>,
        trail: Vec<(usize, usize)>,
        best: f64,
    }

    impl Search<'_> {
        fn find(&self, mut x: usize) -> usize {
            while self.parent[x] != x {
                x = self.parent[x];
            }
            x
        }

        fn recurse(&mut self, start: usize) {
            if self.chosen.len() == self.target {
                self.evaluate();
                return;
            }
            let remaining = self.target - self.chosen.len();
            for k in start..=(self.cells.len() - remaining) {
                let (i, j) = self.cells[k];
                let (ri, rj) = (self.find(i), self.find(self.n_r + j));
                if ri == rj {
                    continue; // would close a cycle
                }
                self.parent[ri] = rj;
                self.trail.push((ri, rj));
                self.chosen.push(k);
                self.recurse(k + 1);
                self.chosen.pop();
                let (ri, _) = self.trail.pop().expect("union recorded");
                self.parent[ri] = ri;
            }
        }

        /// Leaf elimination determines the unique flows on the tree; keep the
        /// value when they are all (numerically) non-negative.
        fn evaluate(&mut self) {
            let nodes = self.n_r + self.n_c;
            let mut degree = vec![0usize; nodes];
            let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nodes];
            for (slot, &k) in self.chosen.iter().enumerate() {
                let (i, j) = self.cells[k];
                degree[i] += 1;
                degree[self.n_r + j] += 1;
                incident[i].push(slot);
                incident[self.n_r + j].push(slot);
            }
            let mut balance: Vec<f64> = self
                .a
                .iter()
                .copied()
                .chain(self.b.iter().copied())
                .collect();
            let mut used = vec![false; self.chosen.len()];
            let mut flows = vec![0.0; self.chosen.len()];
            let mut leaves: Vec<usize> = (0..nodes).filter(|&n| degree[n] == 1).collect();
            while let Some(node) = leaves.pop() {
                let Some(&slot) = incident[node].iter().find(|&&s| !used[s]) else {
                    continue;
                };
                used[slot] = true;
                let (i, j) = self.cells[self.chosen[slot]];
                let other = if i == node { self.n_r + j } else { i };
                flows[slot] = balance[node];
                balance[other] -= balance[node];
                balance[node] = 0.0;
                degree[node] -= 1;
                degree[other] -= 1;
                if degree[other] == 1 {
                    leaves.push(other);
                }
            }
            let mut value = 0.0;
            for (slot, &k) in self.chosen.iter().enumerate() {
                if flows[slot] < -1e-12 {
                    return; // infeasible vertex
                }
                let (i, j) = self.cells[k];
                value += flows[slot].max(0.0) * self.cost[i * self.n_c + j];
            }
            if value < self.best {
                self.best = value;
            }
        }
    }

    let mut search = Search {
        cells: &cells,
        cost,
        a,
        b,
        n_r,
        n_c,
        target,
        chosen: Vec::with_capacity(target),
        parent: (0..nodes).collect(),
        trail: Vec::with_capacity(target),
        best: f64::INFINITY,
    };
    search.recurse(0);
    search.best
}
