//! Minimum-cost b-matching between workers and team slots: an exact
//! Hungarian solver on the slot-expanded square matrix, and the sorted-edge
//! greedy approximation.

use crate::error::{Error, Result};
use crate::partition::CostMatrix;

/// Exact minimum-cost perfect matching on a square matrix (potentials /
/// shortest augmenting path formulation, O(n^3)). Returns row -> column.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-indexed with column 0 as the sentinel root.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // matched_row[j] = row matched to column j
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if reduced < min_slack[j] {
                    min_slack[j] = reduced;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        // Unwind the augmenting path.
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![usize::MAX; n];
    for j in 1..=n {
        if matched_row[j] > 0 {
            assignment[matched_row[j] - 1] = j - 1;
        }
    }
    assignment
}

fn check_feasible(costs: &CostMatrix, sizes: &[usize]) -> Result<()> {
    if sizes.len() != costs.teams {
        return Err(Error::Infeasible(format!(
            "{} sizes for {} teams",
            sizes.len(),
            costs.teams
        )));
    }
    let total: usize = sizes.iter().sum();
    if total != costs.workers {
        return Err(Error::Infeasible(format!(
            "sizes sum to {total}, population is {}",
            costs.workers
        )));
    }
    Ok(())
}

/// Optimal reassignment: expand each team into unit-capacity slots and solve
/// the worker x slot assignment exactly. Returns the team of each worker.
pub fn reassign_exact(costs: &CostMatrix, sizes: &[usize]) -> Result<Vec<u32>> {
    check_feasible(costs, sizes)?;
    let n = costs.workers;
    let mut slot_team = Vec::with_capacity(n);
    for (j, &size) in sizes.iter().enumerate() {
        slot_team.extend(std::iter::repeat_n(j as u32, size));
    }
    let expanded: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            slot_team
                .iter()
                .map(|&j| costs.get(i, j as usize))
                .collect()
        })
        .collect();
    let assignment = hungarian(&expanded);
    Ok(assignment.into_iter().map(|slot| slot_team[slot]).collect())
}

/// Greedy reassignment: scan all (worker, team) edges in ascending
/// (cost, worker, team) order, assigning whenever the worker is free and the
/// team below capacity.
pub fn reassign_greedy(costs: &CostMatrix, sizes: &[usize]) -> Result<Vec<u32>> {
    check_feasible(costs, sizes)?;
    let n = costs.workers;
    let l = costs.teams;
    let mut edges: Vec<(f64, u32, u32)> = Vec::with_capacity(n * l);
    for i in 0..n {
        for j in 0..l {
            edges.push((costs.get(i, j), i as u32, j as u32));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut assignment = vec![u32::MAX; n];
    let mut capacity: Vec<usize> = sizes.to_vec();
    let mut unassigned = n;
    for (_, i, j) in edges {
        if unassigned == 0 {
            break;
        }
        if assignment[i as usize] == u32::MAX && capacity[j as usize] > 0 {
            assignment[i as usize] = j;
            capacity[j as usize] -= 1;
            unassigned -= 1;
        }
    }
    Ok(assignment)
}

/// Total cost of an assignment under a cost matrix.
pub fn assignment_cost(costs: &CostMatrix, assignment: &[u32]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| costs.get(i, j as usize))
        .sum()
}
