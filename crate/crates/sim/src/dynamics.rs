//! Event-driven simulation by uniformization.
//!
//! Every ordered bond `(j, j+1)` proposes events at the common rate `R`, the
//! largest total jump rate of any pair of neighbouring states. A proposal for
//! the pair `(a, b)` picks the channel `(a, b) -> (c, d)` with probability
//! `rate / R` and is otherwise rejected. This is exact in law.

use rand::Rng;
use sha2::Digest;
use twocons_model::SpinModel;

use crate::error::SimError;
use crate::plan::ScalingPlan;
use crate::state::LatticeState;

/// Jump channels of each neighbour pair under `lambda r + kappa s`.
#[derive(Debug, Clone)]
pub struct RateTable {
    k: usize,
    /// `channels[a * k + b]` lists `(c, d, rate)` with positive rate.
    channels: Vec<Vec<(u8, u8, f64)>>,
    pub max_rate: f64,
}

impl RateTable {
    pub fn new(model: &SpinModel, lambda: f64, kappa: f64) -> Self {
        let k = model.size();
        let mut channels = vec![Vec::new(); k * k];
        let mut max_rate = 0.0_f64;
        for a in 0..k {
            for b in 0..k {
                let mut total = 0.0;
                for c in 0..k {
                    for d in 0..k {
                        if (a, b) == (c, d) {
                            continue;
                        }
                        let rate = lambda * model.r(a, b, c, d) + kappa * model.s(a, b, c, d);
                        if rate > 0.0 {
                            channels[a * k + b].push((c as u8, d as u8, rate));
                            total += rate;
                        }
                    }
                }
                max_rate = max_rate.max(total);
            }
        }
        Self { k, channels, max_rate }
    }

    pub fn for_plan(model: &SpinModel, plan: &ScalingPlan) -> Self {
        Self::new(model, plan.lambda_speed, plan.kappa_speed)
    }

    pub fn channels(&self, a: u8, b: u8) -> &[(u8, u8, f64)] {
        &self.channels[a as usize * self.k + b as usize]
    }

    /// Total outgoing rate of the pair `(a, b)`.
    pub fn total(&self, a: u8, b: u8) -> f64 {
        self.channels(a, b).iter().map(|c| c.2).sum()
    }
}

/// One accepted jump on bond `(bond, bond + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub bond: usize,
    pub from: (u8, u8),
    pub to: (u8, u8),
}

/// Runs the chain to macroscopic time `t_end`, calling `observer` with the
/// state at each requested time in `(state.time, t_end]`.
///
/// Conserved totals are re-verified at every observer tick and at the end.
pub fn simulate(
    state: LatticeState,
    model: &SpinModel,
    plan: &ScalingPlan,
    t_end: f64,
    observe_at: &[f64],
    observer: &mut dyn FnMut(&LatticeState),
) -> Result<LatticeState, SimError> {
    let table = RateTable::for_plan(model, plan);
    simulate_traced(state, model, &table, t_end, observe_at, observer, &mut |_| {})
}

/// As [`simulate`] with an explicit rate table and a hook on every accepted event.
pub fn simulate_traced(
    mut state: LatticeState,
    model: &SpinModel,
    table: &RateTable,
    t_end: f64,
    observe_at: &[f64],
    observer: &mut dyn FnMut(&LatticeState),
    on_event: &mut dyn FnMut(&Event),
) -> Result<LatticeState, SimError> {
    let n = state.n();
    let clock = n as f64 * table.max_rate;
    let mut ticks: Vec<f64> = observe_at.iter().copied().filter(|&t| t > state.time && t <= t_end).collect();
    ticks.sort_by(f64::total_cmp);
    let mut next_tick = 0;
    let initial = state.totals;
    let mut fire = |state: &mut LatticeState, upto: f64, next_tick: &mut usize| -> Result<(), SimError> {
        while *next_tick < ticks.len() && ticks[*next_tick] < upto {
            let t_now = state.time;
            state.time = ticks[*next_tick];
            state.check_totals(model)?;
            if state.totals != initial {
                return Err(SimError::ConservationViolated { before: initial, after: state.totals });
            }
            observer(state);
            state.time = t_now.max(state.time);
            *next_tick += 1;
        }
        Ok(())
    };
    if clock <= 0.0 {
        fire(&mut state, f64::INFINITY, &mut next_tick)?;
        state.time = t_end;
        return Ok(state);
    }
    loop {
        let dt = -(1.0 - state.rng.random::<f64>()).ln() / clock;
        let t_next = state.time + dt;
        if t_next > t_end {
            break;
        }
        fire(&mut state, t_next, &mut next_tick)?;
        state.time = t_next;
        state.proposals += 1;
        let bond = state.rng.random_range(0..n);
        let right = if bond + 1 == n { 0 } else { bond + 1 };
        let (a, b) = (state.spins[bond], state.spins[right]);
        let mut x = state.rng.random::<f64>() * table.max_rate;
        for &(c, d, rate) in table.channels(a, b) {
            if x < rate {
                state.spins[bond] = c;
                state.spins[right] = d;
                let eta = |s: u8| i64::from(model.eta[s as usize]);
                let zeta = |s: u8| model.zeta_half_units(s as usize);
                state.totals.0 += eta(c) + eta(d) - eta(a) - eta(b);
                state.totals.1 += zeta(c) + zeta(d) - zeta(a) - zeta(b);
                state.events += 1;
                let mut rec = [0u8; 10];
                rec[..8].copy_from_slice(&(bond as u64).to_le_bytes());
                rec[8] = c;
                rec[9] = d;
                state.hasher.update(rec);
                on_event(&Event { time: t_next, bond, from: (a, b), to: (c, d) });
                break;
            }
            x -= rate;
        }
    }
    fire(&mut state, f64::INFINITY, &mut next_tick)?;
    state.time = t_end;
    state.check_totals(model)?;
    if state.totals != initial {
        return Err(SimError::ConservationViolated { before: initial, after: state.totals });
    }
    Ok(state)
}
