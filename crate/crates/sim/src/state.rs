//! Lattice configurations, local-equilibrium sampling and state dumps.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use twocons_model::{site_law, SpinModel};

use crate::error::SimError;
use crate::plan::ScalingPlan;

/// Random stream used for the initial draw of a replica.
pub(crate) fn sampling_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * replica);
    rng
}

/// Random stream driving the dynamics of a replica.
pub(crate) fn dynamics_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * replica + 1);
    rng
}

/// Spins on the torus of length `n`, the macroscopic clock and the random
/// stream of the trajectory.
#[derive(Debug, Clone)]
pub struct LatticeState {
    pub spins: Vec<u8>,
    pub time: f64,
    pub seed: u64,
    pub replica: u64,
    pub(crate) rng: ChaCha8Rng,
    /// `(sum eta, sum 2 zeta_raw)`, both exact integers.
    pub(crate) totals: (i64, i64),
    pub events: u64,
    pub proposals: u64,
    pub(crate) hasher: Sha256,
}

impl LatticeState {
    pub fn from_spins(model: &SpinModel, spins: Vec<u8>, seed: u64, replica: u64) -> Self {
        let totals = totals_of(model, &spins);
        Self {
            spins,
            time: 0.0,
            seed,
            replica,
            rng: dynamics_rng(seed, replica),
            totals,
            events: 0,
            proposals: 0,
            hasher: Sha256::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.spins.len()
    }

    /// Cached conserved totals `(N, 2 Z / v0)`.
    pub fn totals(&self) -> (i64, i64) {
        self.totals
    }

    /// Recomputes the totals from the spins and compares with the cache.
    pub fn check_totals(&self, model: &SpinModel) -> Result<(), SimError> {
        let now = totals_of(model, &self.spins);
        if now != self.totals {
            return Err(SimError::ConservationViolated { before: self.totals, after: now });
        }
        Ok(())
    }

    /// SHA-256 of the accepted event sequence so far, in hex.
    pub fn event_hash(&self) -> String {
        self.hasher.clone().finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Site reversal `j -> -j` combined with the spin involution.
    pub fn mirrored(&self, model: &SpinModel) -> Self {
        let n = self.n();
        let spins = (0..n).map(|j| model.involution[self.spins[(n - j) % n] as usize] as u8).collect();
        Self::from_spins(model, spins, self.seed, self.replica)
    }

    /// Writes a restart dump: a fixed header followed by one byte per site.
    ///
    /// The random stream position is stored, so a restarted run continues the
    /// same trajectory; the event hash restarts from empty.
    pub fn write_dump<W: Write>(&self, model: &SpinModel, mut out: W) -> std::io::Result<()> {
        out.write_all(b"TCLS")?;
        out.write_all(&(self.n() as u64).to_le_bytes())?;
        out.write_all(&(model.size() as u32).to_le_bytes())?;
        out.write_all(&self.seed.to_le_bytes())?;
        out.write_all(&self.replica.to_le_bytes())?;
        out.write_all(&self.time.to_le_bytes())?;
        out.write_all(&self.events.to_le_bytes())?;
        out.write_all(&self.rng.get_word_pos().to_le_bytes())?;
        out.write_all(&self.spins)
    }

    pub fn read_dump<R: Read>(model: &SpinModel, mut input: R) -> Result<Self, SimError> {
        let bad = |m: &str| SimError::BadDump(m.to_string());
        let mut buf = Vec::new();
        input.read_to_end(&mut buf).map_err(|e| SimError::BadDump(e.to_string()))?;
        const HEAD: usize = 4 + 8 + 4 + 8 + 8 + 8 + 8 + 16;
        if buf.len() < HEAD || &buf[..4] != b"TCLS" {
            return Err(bad("missing header"));
        }
        let mut at = 4;
        let mut take = |k: usize| {
            let s = &buf[at..at + k];
            at += k;
            s.to_vec()
        };
        let n = u64::from_le_bytes(take(8).try_into().unwrap()) as usize;
        let k = u32::from_le_bytes(take(4).try_into().unwrap()) as usize;
        let seed = u64::from_le_bytes(take(8).try_into().unwrap());
        let replica = u64::from_le_bytes(take(8).try_into().unwrap());
        let time = f64::from_le_bytes(take(8).try_into().unwrap());
        let events = u64::from_le_bytes(take(8).try_into().unwrap());
        let word_pos = u128::from_le_bytes(take(16).try_into().unwrap());
        if k != model.size() {
            return Err(bad("state count differs from the model"));
        }
        if buf.len() != HEAD + n {
            return Err(bad("body length differs from n"));
        }
        let spins = buf[HEAD..].to_vec();
        if spins.iter().any(|&s| s as usize >= k) {
            return Err(bad("spin index out of range"));
        }
        let mut st = Self::from_spins(model, spins, seed, replica);
        st.time = time;
        st.events = events;
        st.rng.set_word_pos(word_pos);
        Ok(st)
    }
}

pub(crate) fn totals_of(model: &SpinModel, spins: &[u8]) -> (i64, i64) {
    spins.iter().fold((0, 0), |(a, b), &s| {
        (a + i64::from(model.eta[s as usize]), b + model.zeta_half_units(s as usize))
    })
}

fn draw(p: &[f64], x: f64) -> u8 {
    let mut acc = 0.0;
    for (w, &pw) in p.iter().enumerate() {
        acc += pw;
        if x < acc {
            return w as u8;
        }
    }
    (p.len() - 1) as u8
}

/// Independent site draws from the product measure with site `j` distributed
/// by `pi_{rho(j/n), u(j/n)}`, profiles rescaled by the plan.
pub fn sample_local_equilibrium(
    model: &SpinModel,
    rho: &dyn Fn(f64) -> f64,
    u: &dyn Fn(f64) -> f64,
    plan: &ScalingPlan,
    seed: u64,
    replica: u64,
) -> Result<LatticeState, SimError> {
    let n = plan.n;
    let mut rng = sampling_rng(seed, replica);
    let mut cache: Option<((u64, u64), Vec<f64>)> = None;
    let mut spins = Vec::with_capacity(n);
    for j in 0..n {
        let x = j as f64 / n as f64;
        let (r, v) = plan.to_microscopic(rho(x), u(x));
        let key = (r.to_bits(), v.to_bits());
        let law = match &cache {
            Some((k, p)) if *k == key => p,
            _ => {
                let p = site_law(model, r, v).map_err(|_| SimError::OutOfDomain { site: j, rho: r, u: v })?;
                &cache.insert((key, p)).1
            }
        };
        spins.push(draw(law, rng.random::<f64>()));
    }
    Ok(LatticeState::from_spins(model, spins, seed, replica))
}
