//! Exact minimum-cost transportation between finite weight vectors.
//!
//! Successive shortest augmenting paths with node potentials: Dijkstra runs
//! on the bipartite residual graph with reduced costs, potentials absorb the
//! distances after every augmentation, and each augmentation saturates a
//! supply, a demand, or cancels a residual arc. For nonnegative costs this
//! terminates with an optimal flow, so the returned cost equals the
//! transportation linear program's optimum up to float rounding.

use crate::error::{Error, Result};

const MASS_EPS: f64 = 1e-15;

struct Dijkstra {
    ds: Vec<f64>,
    dd: Vec<f64>,
    settled_s: Vec<bool>,
    settled_d: Vec<bool>,
    parent_of_demand: Vec<usize>,
    parent_of_supply: Vec<usize>,
}

/// Minimum cost of moving `supply` onto `demand` with arc costs
/// `cost(i, j) >= 0`. The totals must agree up to measure tolerance; the
/// common total is transported.
pub(crate) fn min_cost_transport(
    supply: &[f64],
    demand: &[f64],
    cost: impl Fn(usize, usize) -> f64,
) -> Result<f64> {
    let ns = supply.len();
    let nd = demand.len();
    if ns == 0 || nd == 0 {
        return Ok(0.0);
    }

    let c: Vec<f64> = (0..ns * nd).map(|k| cost(k / nd, k % nd)).collect();
    if c.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParam("transport costs must be finite and >= 0".into()));
    }

    let mut r = supply.to_vec();
    let mut b = demand.to_vec();
    let mut flow = vec![0.0f64; ns * nd];
    let mut u = vec![0.0f64; ns];
    let mut v = vec![0.0f64; nd];

    let mut remaining = r.iter().sum::<f64>().min(b.iter().sum::<f64>());
    let budget = 50 * (ns + nd) + 1000;

    for _ in 0..budget {
        if remaining <= MASS_EPS {
            break;
        }

        let mut dj = Dijkstra {
            ds: vec![f64::INFINITY; ns],
            dd: vec![f64::INFINITY; nd],
            settled_s: vec![false; ns],
            settled_d: vec![false; nd],
            parent_of_demand: vec![usize::MAX; nd],
            parent_of_supply: vec![usize::MAX; ns],
        };
        for (i, &ri) in r.iter().enumerate() {
            if ri > MASS_EPS {
                dj.ds[i] = 0.0;
            }
        }

        let target = run_dijkstra(&mut dj, &c, &flow, &b, &u, &v, ns, nd);
        let Some(jstar) = target else {
            break; // no active demand reachable: nothing left to move
        };
        let cap = dj.dd[jstar];

        // Trace the augmenting path back to a supply root and find the
        // bottleneck.
        let mut arcs_fwd: Vec<(usize, usize)> = Vec::new();
        let mut arcs_bwd: Vec<(usize, usize)> = Vec::new();
        let mut delta = b[jstar];
        let mut j = jstar;
        let root = loop {
            let i = dj.parent_of_demand[j];
            arcs_fwd.push((i, j));
            if dj.parent_of_supply[i] == usize::MAX {
                delta = delta.min(r[i]);
                break i;
            }
            let back_j = dj.parent_of_supply[i];
            arcs_bwd.push((i, back_j));
            delta = delta.min(flow[i * nd + back_j]);
            j = back_j;
        };

        if delta <= MASS_EPS {
            break; // residual dust only
        }
        for &(i, jj) in &arcs_fwd {
            flow[i * nd + jj] += delta;
        }
        for &(i, jj) in &arcs_bwd {
            flow[i * nd + jj] -= delta;
        }
        r[root] -= delta;
        b[jstar] -= delta;
        remaining -= delta;

        // Absorb distances into the potentials so reduced costs stay >= 0.
        for (i, ui) in u.iter_mut().enumerate() {
            *ui += dj.ds[i].min(cap);
        }
        for (j, vj) in v.iter_mut().enumerate() {
            *vj += dj.dd[j].min(cap);
        }
    }

    if remaining > 1e-9 {
        return Err(Error::NoConvergence(format!(
            "transport left {remaining} mass unmoved"
        )));
    }

    Ok(flow
        .iter()
        .enumerate()
        .filter(|(_, &f)| f > 0.0)
        .map(|(k, &f)| f * c[k])
        .sum())
}

/// Dense Dijkstra over supplies and demands; stops when the nearest demand
/// with remaining deficit is settled and returns it.
#[allow(clippy::too_many_arguments)]
fn run_dijkstra(
    dj: &mut Dijkstra,
    c: &[f64],
    flow: &[f64],
    b: &[f64],
    u: &[f64],
    v: &[f64],
    ns: usize,
    nd: usize,
) -> Option<usize> {
    loop {
        // Pick the unsettled node with the smallest tentative distance.
        let mut best = f64::INFINITY;
        let mut pick_s = usize::MAX;
        let mut pick_d = usize::MAX;
        for i in 0..ns {
            if !dj.settled_s[i] && dj.ds[i] < best {
                best = dj.ds[i];
                pick_s = i;
                pick_d = usize::MAX;
            }
        }
        for j in 0..nd {
            if !dj.settled_d[j] && dj.dd[j] < best {
                best = dj.dd[j];
                pick_d = j;
                pick_s = usize::MAX;
            }
        }
        if best.is_infinite() {
            return None;
        }

        if pick_d != usize::MAX {
            let j = pick_d;
            dj.settled_d[j] = true;
            if b[j] > MASS_EPS {
                return Some(j);
            }
            // Backward arcs ride flow-carrying forward arcs, which are tight,
            // so their reduced cost is zero.
            for i in 0..ns {
                if !dj.settled_s[i] && flow[i * nd + j] > MASS_EPS && dj.dd[j] < dj.ds[i] {
                    dj.ds[i] = dj.dd[j];
                    dj.parent_of_supply[i] = j;
                }
            }
        } else {
            let i = pick_s;
            dj.settled_s[i] = true;
            for j in 0..nd {
                if dj.settled_d[j] {
                    continue;
                }
                let rc = (c[i * nd + j] + u[i] - v[j]).max(0.0);
                let cand = dj.ds[i] + rc;
                if cand < dj.dd[j] {
                    dj.dd[j] = cand;
                    dj.parent_of_demand[j] = i;
                }
            }
        }
    }
}
