//! Finite local-field ensemble approximation of the root neighborhood.
//!
//! Tracks N independent copies of a star (root plus its neighbor
//! slots). Per time step the copies' own jump rates are pooled into
//! conditional-rate tables over (state, partner-state) cells; roots
//! advance with their true rate, neighbor slots advance with the pooled
//! conditional rate read from the cell matching their own state and the
//! root's state. As N grows the empirical law of a copy converges to
//! the solution of the neighborhood law ODE.

use std::collections::HashMap;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::graphs::DegreeDistribution;
use crate::lfode::ConfigSpace;
use crate::models::{Mark, ModelSpec};
use crate::parallel::for_each_chunk_mut;
use crate::rng::{stream, SimRng};
use rand::Rng;

#[derive(Debug, Clone)]
pub struct MlfeOptions {
    pub n_copies: usize,
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    pub parallel: bool,
    /// Times at which to record; snapped to the nearest step boundary.
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MlfeOutput {
    pub times: Vec<f64>,
    /// Root marginal per recorded time.
    pub marginals: Vec<Vec<f64>>,
    /// Empirical class law per recorded time (representative values),
    /// when a configuration space was supplied.
    pub class_laws: Option<Vec<Vec<f64>>>,
}

struct Copy {
    root: u8,
    slots: SmallVec<[u8; 8]>,
}

/// RNG stream reserved for dealing out the initial conditions; copy
/// streams occupy the low indices.
const INIT_STREAM: u64 = u64::MAX - 1;

/// Integer quotas for `total` items with target weights `w` (largest
/// remainder rounding), so the empirical initial law matches the target
/// exactly up to indivisibility instead of carrying O(1/sqrt(N)) noise.
fn stratified_counts(w: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = w.iter().sum();
    let mut counts = vec![0usize; w.len()];
    let mut rema: Vec<(f64, usize)> = Vec::with_capacity(w.len());
    let mut assigned = 0usize;
    for (i, &wi) in w.iter().enumerate() {
        let exact = wi / sum * total as f64;
        counts[i] = exact.floor() as usize;
        assigned += counts[i];
        rema.push((exact - exact.floor(), i));
    }
    rema.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    for &(_, i) in rema.iter().take(total - assigned) {
        counts[i] += 1;
    }
    counts
}

/// Draws the jumper positions for a homogeneous pool of `n` sites that
/// each jump with probability `p` this step: the pool-level count is
/// floor(n*p) plus a Bernoulli on the remainder, assigned to uniformly
/// chosen distinct positions.
fn draw_jumpers(n: usize, p: f64, rng: &mut SimRng) -> Vec<usize> {
    if p <= 0.0 {
        return Vec::new();
    }
    let lambda = n as f64 * p;
    let mut count = lambda.floor() as usize;
    if rng.random::<f64>() < lambda - lambda.floor() {
        count += 1;
    }
    let count = count.min(n);
    let mut pos: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = i + rng.random_range(0..n - i);
        pos.swap(i, j);
    }
    pos.truncate(count);
    pos
}

/// Builds a shuffled list with exactly `counts[v]` occurrences of `v`.
fn dealt_values(counts: &[usize], rng: &mut SimRng) -> Vec<u8> {
    let mut out: Vec<u8> = counts
        .iter()
        .enumerate()
        .flat_map(|(v, &c)| std::iter::repeat_n(v as u8, c))
        .collect();
    use rand::seq::SliceRandom;
    out.shuffle(rng);
    out
}

/// Runs the ensemble and records root marginals (and class laws when
/// `space` is given) at the requested grid times.
pub fn mlfe_ensemble(
    model: &ModelSpec,
    theta: &DegreeDistribution,
    q0: &[f64],
    space: Option<&ConfigSpace>,
    opts: &MlfeOptions,
) -> Result<MlfeOutput> {
    let m = model.m();
    if q0.len() != m {
        return Err(Error::Config("initial marginal has the wrong length".into()));
    }
    if (q0.iter().sum::<f64>() - 1.0).abs() > 1e-9 || q0.iter().any(|&v| v < 0.0) {
        return Err(Error::Config("initial marginal is not a probability vector".into()));
    }
    if opts.n_copies == 0 || opts.dt <= 0.0 || opts.t_end < 0.0 {
        return Err(Error::Config("ensemble size, step and horizon must be positive".into()));
    }
    let max_env = model.rate_bound(theta.d_max() + 1, opts.t_end);
    if opts.dt * max_env > 0.1 + 1e-12 {
        return Err(Error::Config(format!(
            "step {} is too coarse for the envelope rate {max_env}: dt * bound must stay below 0.1",
            opts.dt
        )));
    }
    let states = model.states();
    let jumps = model.jumps();
    let nj = jumps.len();
    let degrees: Vec<usize> = theta.support().collect();
    let degree_probs: Vec<f64> = degrees.iter().map(|&k| theta.prob(k)).collect();

    // Stratified initial conditions: degree counts, root states and the
    // pooled slot states all match their target laws exactly (up to
    // indivisibility) and are dealt out by one deterministic shuffle.
    // This removes the O(1/sqrt(N)) initialization noise, which would
    // otherwise dominate the ensemble's error over moderate horizons.
    let mut init_rng = stream(opts.seed, INIT_STREAM);
    let degree_deal = {
        let counts = stratified_counts(&degree_probs, opts.n_copies);
        let mut out: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(degrees[i], c))
            .collect();
        use rand::seq::SliceRandom;
        out.shuffle(&mut init_rng);
        out
    };
    let root_deal = dealt_values(&stratified_counts(q0, opts.n_copies), &mut init_rng);
    let total_slots: usize = degree_deal.iter().sum();
    let slot_deal = dealt_values(&stratified_counts(q0, total_slots), &mut init_rng);

    let mut slot_cursor = 0usize;
    let mut copies: Vec<Copy> = (0..opts.n_copies)
        .map(|i| {
            let k = degree_deal[i];
            let root = root_deal[i];
            let slots = slot_deal[slot_cursor..slot_cursor + k].iter().copied().collect();
            slot_cursor += k;
            Copy { root, slots }
        })
        .collect();
    let mut ens_rng = init_rng;

    let n_steps = (opts.t_end / opts.dt).round() as usize;
    let mut grid_iter = opts.grid.iter().copied().peekable();
    let mut times = Vec::new();
    let mut marginals = Vec::new();
    let mut class_laws: Option<Vec<Vec<f64>>> = space.map(|_| Vec::new());

    let mut num = vec![0.0; nj * m * m];
    let mut den = vec![0.0; m * m];
    let mut rates = vec![0.0; opts.n_copies * nj];

    for step in 0..=n_steps {
        let t = step as f64 * opts.dt;
        // Record every grid point that this step boundary is closest to.
        while let Some(&g) = grid_iter.peek() {
            if g <= t + opts.dt / 2.0 || step == n_steps {
                times.push(t);
                marginals.push(root_marginal(&copies, m));
                if let (Some(space), Some(laws)) = (space, class_laws.as_mut()) {
                    laws.push(class_law(&copies, space));
                }
                grid_iter.next();
            } else {
                break;
            }
        }
        if step == n_steps {
            break;
        }

        // Evaluate every copy's true jump rates against the pre-step
        // configuration. Chunks of the rate table line up with blocks
        // of 256 copies, so this runs the same way in both lanes.
        for_each_chunk_mut(&mut rates, 256 * nj, opts.parallel, |ci, chunk| {
            let mut marks: SmallVec<[Mark; 8]> = SmallVec::new();
            for (off, block) in chunk.chunks_mut(nj).enumerate() {
                let c = &copies[ci * 256 + off];
                marks.clear();
                marks.extend(c.slots.iter().map(|&s| Mark::State(states[s as usize])));
                for (jj, &j) in jumps.iter().enumerate() {
                    block[jj] = model
                        .rate(j, t, Mark::State(states[c.root as usize]), &marks)
                        .max(0.0);
                }
            }
        });

        // Pool the rates into per-cell tables: a copy in root state x
        // with a slot in state s contributes its own rate to the cell
        // (x, s); a slot reads the cell indexed by its state paired
        // with its root's state. Simultaneously group the sites into
        // statistically homogeneous pools — copies sharing a
        // neighborhood class have identical rate vectors, as do slots
        // sharing a (state, root-state) cell.
        num.fill(0.0);
        den.fill(0.0);
        let mut classes: HashMap<SmallVec<[u8; 9]>, Vec<u32>> = HashMap::new();
        let mut cell_members: Vec<Vec<(u32, u8)>> = vec![Vec::new(); m * m];
        for (i, c) in copies.iter().enumerate() {
            let x = c.root as usize;
            for (si, &s) in c.slots.iter().enumerate() {
                let cell = x * m + s as usize;
                den[cell] += 1.0;
                for jj in 0..nj {
                    num[jj * m * m + cell] += rates[i * nj + jj];
                }
                cell_members[s as usize * m + x].push((i as u32, si as u8));
            }
            let mut key: SmallVec<[u8; 9]> = SmallVec::with_capacity(c.slots.len() + 1);
            key.push(c.root);
            key.extend(c.slots.iter().copied());
            key[1..].sort_unstable();
            classes.entry(key).or_default().push(i as u32);
        }
        let psi = |jj: usize, x: usize, s: usize| -> f64 {
            let d = den[x * m + s];
            if d <= 0.0 {
                0.0
            } else {
                (num[jj * m * m + x * m + s] / d).max(0.0)
            }
        };

        // Stratified synchronous Euler step. Within each homogeneous
        // pool the number of jumpers is drawn as floor(lambda) plus a
        // Bernoulli on the fraction (lambda = pool size * rate * dt)
        // and assigned to uniformly chosen members, so each site keeps
        // the exact marginal jump probability rate * dt while the
        // pool-level thinning noise drops from binomial to at most one
        // count. Jumps land after selection, i.e. every transition is
        // decided against the pre-step configuration.
        let idx_of_code = |code: i32| states.iter().position(|&c| c == code);
        let mut root_updates: Vec<(u32, u8)> = Vec::new();
        let mut slot_updates: Vec<(u32, u8, u8)> = Vec::new();
        let mut class_keys: Vec<&SmallVec<[u8; 9]>> = classes.keys().collect();
        class_keys.sort_unstable();
        for key in class_keys {
            let members = &classes[key];
            let rep = members[0] as usize;
            let root0 = key[0] as usize;
            let total: f64 = (0..nj).map(|jj| rates[rep * nj + jj]).sum();
            for &i in draw_jumpers(members.len(), total * opts.dt, &mut ens_rng)
                .iter()
                .map(|&pos| &members[pos])
            {
                let mut u: f64 = ens_rng.random::<f64>() * total;
                for (jj, &j) in jumps.iter().enumerate() {
                    let r = rates[i as usize * nj + jj];
                    if u < r {
                        if let Some(up) = idx_of_code(states[root0] + j) {
                            root_updates.push((i, up as u8));
                        }
                        break;
                    }
                    u -= r;
                }
            }
        }
        for s0 in 0..m {
            for x in 0..m {
                let members = &cell_members[s0 * m + x];
                if members.is_empty() {
                    continue;
                }
                let total: f64 = (0..nj).map(|jj| psi(jj, s0, x)).sum();
                for &(i, si) in draw_jumpers(members.len(), total * opts.dt, &mut ens_rng)
                    .iter()
                    .map(|&pos| &members[pos])
                {
                    let mut u: f64 = ens_rng.random::<f64>() * total;
                    for (jj, &j) in jumps.iter().enumerate() {
                        let r = psi(jj, s0, x);
                        if u < r {
                            if let Some(up) = idx_of_code(states[s0] + j) {
                                slot_updates.push((i, si, up as u8));
                            }
                            break;
                        }
                        u -= r;
                    }
                }
            }
        }
        for (i, up) in root_updates {
            copies[i as usize].root = up;
        }
        for (i, si, up) in slot_updates {
            copies[i as usize].slots[si as usize] = up;
        }
    }
    Ok(MlfeOutput {
        times,
        marginals,
        class_laws,
    })
}

fn root_marginal(copies: &[Copy], m: usize) -> Vec<f64> {
    let mut mu = vec![0.0; m];
    for c in copies {
        mu[c.root as usize] += 1.0;
    }
    let n = copies.len() as f64;
    for v in mu.iter_mut() {
        *v /= n;
    }
    mu
}

fn class_law(copies: &[Copy], space: &ConfigSpace) -> Vec<f64> {
    let mut law = vec![0.0; space.len()];
    let mut total = 0.0;
    for c in copies {
        if let Some(class) = space.class_of(c.root, &c.slots) {
            law[class] += 1.0;
            total += 1.0;
        }
    }
    if total > 0.0 {
        for (i, v) in law.iter_mut().enumerate() {
            *v /= total * space.multiplicity(i);
        }
    }
    law
}
