//! Seeded Monte Carlo oracles that sample model runs directly, with no
//! grammar or diagram in between.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Distribution, Dtmc, Port, Rmc};
use crate::symbol::Sym;

/// Estimate of a probability from `runs` samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub runs: usize,
    /// Runs cut off at the step horizon, counted as failures.
    pub truncated: usize,
}

impl Estimate {
    /// Half-width of a 99.9% normal confidence interval, widened by the
    /// truncated fraction.
    pub fn tolerance(&self) -> f64 {
        let n = self.runs.max(1) as f64;
        3.3 * (self.value * (1.0 - self.value) / n).sqrt().max(1.0 / n) + self.truncated as f64 / n
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SimConfig {
    pub runs: usize,
    pub horizon: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            runs: 100_000,
            horizon: 10_000,
            seed: 0,
        }
    }
}

fn sample(d: &Distribution, rng: &mut ChaCha8Rng) -> Sym {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for &(v, p) in d.outcomes() {
        acc += p;
        if u < acc {
            return v;
        }
    }
    d.outcomes().last().expect("distribution has outcomes").0
}

/// Probability that a run from `from` stays in `left` states until it
/// enters a `right` state. `left = None` means every state.
pub fn simulate_until(
    dtmc: &Dtmc,
    left: Option<&[bool]>,
    right: &[bool],
    from: Sym,
    cfg: &SimConfig,
) -> Result<Estimate> {
    let start = dtmc.require(from)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut hits, mut truncated) = (0, 0);
    for _ in 0..cfg.runs {
        let mut s = start;
        let mut steps = 0;
        loop {
            if right[s] {
                hits += 1;
                break;
            }
            if left.is_some_and(|l| !l[s]) {
                break;
            }
            let Some(d) = dtmc.switch_at(s) else { break };
            if steps == cfg.horizon {
                truncated += 1;
                break;
            }
            s = dtmc.require(sample(d, &mut rng))?;
            steps += 1;
        }
    }
    Ok(Estimate {
        value: hits as f64 / cfg.runs.max(1) as f64,
        runs: cfg.runs,
        truncated,
    })
}

/// Probability that the successor of `from` is a `right` state.
pub fn simulate_next(dtmc: &Dtmc, right: &[bool], from: Sym, cfg: &SimConfig) -> Result<Estimate> {
    let d = dtmc.switch_at(dtmc.require(from)?);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut hits = 0;
    if let Some(d) = d {
        for _ in 0..cfg.runs {
            hits += usize::from(right[dtmc.require(sample(d, &mut rng))?]);
        }
    }
    Ok(Estimate {
        value: hits as f64 / cfg.runs.max(1) as f64,
        runs: cfg.runs,
        truncated: 0,
    })
}

/// Probability of reaching any of `targets` from `from`.
pub fn simulate_reach(dtmc: &Dtmc, from: Sym, targets: &[Sym], cfg: &SimConfig) -> Result<Estimate> {
    let mut right = vec![false; dtmc.len()];
    for &t in targets {
        right[dtmc.require(t)?] = true;
    }
    simulate_until(dtmc, None, &right, from, cfg)
}

/// Probability that `component`, entered at `node` (its entry by default),
/// returns through exit `exit` (1-based).
pub fn simulate_rmc_exit(
    rmc: &Rmc,
    component: Sym,
    node: Option<Sym>,
    exit: usize,
    cfg: &SimConfig,
) -> Result<Estimate> {
    let top = rmc
        .component(component)
        .ok_or_else(|| Error::Model(format!("unknown component {component}")))?;
    let start = node.unwrap_or(top.entry);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut hits, mut truncated) = (0, 0);
    for _ in 0..cfg.runs {
        // frames of (component, box it was called through in the caller)
        let mut stack: Vec<(Sym, Option<Sym>)> = vec![(component, None)];
        let mut port = Port::Node(start);
        let mut steps = 0;
        loop {
            let (cn, _) = *stack.last().expect("frame");
            let c = rmc.component(cn).expect("validated component");
            if let Port::Node(n) = port {
                if let Some(k) = c.exit_index(n) {
                    let (_, via) = stack.pop().expect("frame");
                    match via {
                        None => {
                            hits += usize::from(k == exit);
                            break;
                        }
                        Some(b) => {
                            port = Port::Ret(b, k);
                            continue;
                        }
                    }
                }
            }
            if let Port::Call(b) = port {
                let callee = rmc
                    .component(c.find_box(b).expect("validated box").callee)
                    .expect("callee");
                stack.push((callee.name, Some(b)));
                port = Port::Node(callee.entry);
                continue;
            }
            let Some(d) = c.trans.get(&port) else { break };
            if steps == cfg.horizon {
                truncated += 1;
                break;
            }
            let next = sample(d, &mut rng);
            port = Port::parse(next.as_str()).ok_or_else(|| Error::Model(format!("bad port {next}")))?;
            steps += 1;
        }
    }
    Ok(Estimate {
        value: hits as f64 / cfg.runs.max(1) as f64,
        runs: cfg.runs,
        truncated,
    })
}
