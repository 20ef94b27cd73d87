//! Continuous-time simulation of the asymmetric simple exclusion process
//! with two-sided Bernoulli initial data, plus the scaling pipelines that
//! connect it to the crossover distributions: height/flux bookkeeping, the
//! weakly-asymmetric fluctuation field, the microscopic Hopf-Cole transform,
//! and coupled-noise experiments (FKG, equilibrium sandwich).
//!
//! Conventions: `q ≥ p` (drift to the left), asymmetry γ = q − p, and under
//! the weak-asymmetry scaling γ = ε^{1/2}, t = ε^{-3/2}T, x = 2^{1/3}t^{2/3}X.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::kernels::CBRT2;
use crate::{Error, Result};

/// Weak-asymmetry scaling arithmetic: (t, γ, t/γ) for given (ε, T).
pub fn scales(eps: f64, big_t: f64) -> (f64, f64, f64) {
    let t = eps.powf(-1.5) * big_t;
    let gamma = eps.sqrt();
    (t, gamma, t / gamma)
}

/// λ_ε = ½ log(q/p) and ν_ε = p + q − 2√(pq) at asymmetry γ = ε^{1/2}.
pub fn lambda_nu(eps: f64) -> (f64, f64) {
    let g = eps.sqrt();
    let q = 0.5 * (1.0 + g);
    let p = 0.5 * (1.0 - g);
    (0.5 * (q / p).ln(), 1.0 - 2.0 * (p * q).sqrt())
}

#[derive(Clone, Debug)]
pub struct AsepConfig {
    /// Right-jump probability (p ≤ q, p + q = 1).
    pub p: f64,
    pub q: f64,
    /// Density on x ≤ 0.
    pub rho_minus: f64,
    /// Density on x > 0.
    pub rho_plus: f64,
    /// Lattice window is [−L, L].
    pub half_width: i64,
    /// Sites whose statistics the run is meant to report; breach detection
    /// is relative to [−obs_radius, obs_radius].
    pub obs_radius: i64,
    /// Simulation horizon in Poisson-clock time units.
    pub t_end: f64,
    pub seed: u64,
}

impl AsepConfig {
    /// Window sized so that boundary effects cannot plausibly reach the
    /// observation sites: L = obs_radius + 5·t_end + 50 (activity spreads at
    /// Poisson speed ≤ 1 per clock unit; 5× the mean leaves < 1e-10 breach
    /// probability at desk scales).
    pub fn sized(
        p: f64,
        q: f64,
        rho_minus: f64,
        rho_plus: f64,
        obs_radius: i64,
        t_end: f64,
        seed: u64,
    ) -> Result<Self> {
        let cfg = AsepConfig {
            p,
            q,
            rho_minus,
            rho_plus,
            half_width: obs_radius + (5.0 * t_end).ceil() as i64 + 50,
            obs_radius,
            t_end,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 0.0 && self.q >= 0.0 && (self.p + self.q - 1.0).abs() < 1e-12) {
            return Err(Error::Arg(format!(
                "jump probabilities p = {}, q = {} must be nonnegative with p + q = 1",
                self.p, self.q
            )));
        }
        if self.q < self.p {
            return Err(Error::Arg("left-drift convention requires q >= p".into()));
        }
        for (name, rho) in [("rho_minus", self.rho_minus), ("rho_plus", self.rho_plus)] {
            if !(0.0..=1.0).contains(&rho) {
                return Err(Error::Arg(format!("{name} = {rho} outside [0, 1]")));
            }
        }
        if self.half_width < 2 {
            return Err(Error::Arg("window half-width must be >= 2".into()));
        }
        if self.obs_radius < 0 || self.obs_radius > self.half_width {
            return Err(Error::Arg(format!(
                "observation radius {} outside window [0, {}]",
                self.obs_radius, self.half_width
            )));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::Arg(format!("t_end = {} must be >= 0", self.t_end)));
        }
        Ok(())
    }
}

/// Seed override from the environment (`KPZ_SEED`), if present and parseable.
pub fn seed_from_env(default: u64) -> u64 {
    std::env::var("KPZ_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(default)
}

// Directed-bond classes for the Gillespie rate bookkeeping. Bond b sits
// between sites x = b − L and x + 1; a (1,0) bond fires right at rate p, a
// (0,1) bond fires left at rate q.
const BOND_NONE: u8 = 0;
const BOND_RIGHT: u8 = 1;
const BOND_LEFT: u8 = 2;

#[derive(Clone, Debug)]
pub struct AsepState {
    pub cfg: AsepConfig,
    /// Occupations η(x) ∈ {0,1} indexed by x + L.
    occ: Vec<u8>,
    /// Net number of particles that crossed from site 1 to site 0.
    pub flux: i64,
    pub time: f64,
    /// Set once the boundary-influence light cone reaches within 2 sites of
    /// the observation region; results at the observation sites are then
    /// suspect. The cone starts at the window edges (whose sites see a
    /// truncated neighborhood) and can only spread by one site per jump on
    /// a bond touching it.
    pub breached: bool,
    contaminated_left: i64,
    contaminated_right: i64,
    rng: ChaCha8Rng,
    // Allowed-move index pools: class per bond, pool slot per bond, and the
    // two pools of bond indices, giving O(1) updates per executed jump.
    bond_class: Vec<u8>,
    bond_slot: Vec<u32>,
    right_pool: Vec<u32>,
    left_pool: Vec<u32>,
}

/// Independent Bernoulli occupations: ρ₋ for x ≤ 0, ρ₊ for x > 0.
pub fn init_two_sided_bernoulli(cfg: &AsepConfig, rng: &mut ChaCha8Rng) -> Result<AsepState> {
    cfg.validate()?;
    let l = cfg.half_width;
    let occ = (-l..=l)
        .map(|x| {
            let rho = if x > 0 { cfg.rho_plus } else { cfg.rho_minus };
            u8::from(rng.gen::<f64>() < rho)
        })
        .collect();
    AsepState::from_occupations(cfg.clone(), occ, rng.clone())
}

impl AsepState {
    /// Build a state from explicit occupations (used for couplings and
    /// deterministic test setups).
    pub fn from_occupations(cfg: AsepConfig, occ: Vec<u8>, rng: ChaCha8Rng) -> Result<Self> {
        let n = (2 * cfg.half_width + 1) as usize;
        if occ.len() != n {
            return Err(Error::Arg(format!(
                "occupation vector has {} sites, window needs {n}",
                occ.len()
            )));
        }
        if occ.iter().any(|&o| o > 1) {
            return Err(Error::Arg("occupations must be 0/1".into()));
        }
        let mut st = AsepState {
            occ,
            flux: 0,
            time: 0.0,
            breached: false,
            contaminated_left: -cfg.half_width,
            contaminated_right: cfg.half_width,
            cfg,
            rng,
            bond_class: vec![BOND_NONE; n - 1],
            bond_slot: vec![u32::MAX; n - 1],
            right_pool: vec![],
            left_pool: vec![],
        };
        for b in 0..n - 1 {
            st.reclassify_bond(b);
        }
        Ok(st)
    }

    fn idx(&self, x: i64) -> Result<usize> {
        let l = self.cfg.half_width;
        if x < -l || x > l {
            return Err(Error::Window(format!("site {x} outside [-{l}, {l}]")));
        }
        Ok((x + l) as usize)
    }

    pub fn occupation(&self, x: i64) -> Result<u8> {
        Ok(self.occ[self.idx(x)?])
    }

    /// Spin η̂ = 2η − 1.
    pub fn spin(&self, x: i64) -> Result<i64> {
        Ok(2 * self.occupation(x)? as i64 - 1)
    }

    pub fn particle_count(&self) -> usize {
        self.occ.iter().map(|&o| o as usize).sum()
    }

    fn pool_remove(&mut self, b: usize) {
        let class = self.bond_class[b];
        if class == BOND_NONE {
            return;
        }
        let pool = if class == BOND_RIGHT {
            &mut self.right_pool
        } else {
            &mut self.left_pool
        };
        let slot = self.bond_slot[b] as usize;
        let last = pool.pop().unwrap();
        if (last as usize) != b {
            pool[slot] = last;
            self.bond_slot[last as usize] = slot as u32;
        }
        self.bond_class[b] = BOND_NONE;
        self.bond_slot[b] = u32::MAX;
    }

    fn reclassify_bond(&mut self, b: usize) {
        self.pool_remove(b);
        let class = match (self.occ[b], self.occ[b + 1]) {
            (1, 0) => BOND_RIGHT,
            (0, 1) => BOND_LEFT,
            _ => BOND_NONE,
        };
        if class != BOND_NONE {
            let pool = if class == BOND_RIGHT {
                &mut self.right_pool
            } else {
                &mut self.left_pool
            };
            self.bond_slot[b] = pool.len() as u32;
            pool.push(b as u32);
            self.bond_class[b] = class;
        }
    }

    /// Execute the jump on bond b (swap its endpoints), maintaining flux,
    /// breach flag and the three affected bond classes.
    fn fire_bond(&mut self, b: usize) {
        let going_right = self.bond_class[b] == BOND_RIGHT;
        self.occ.swap(b, b + 1);
        let l = self.cfg.half_width;
        // Bond at sites (0, 1) has index L: a left firing moves a particle
        // from site 1 to site 0.
        if b as i64 == l {
            self.flux += if going_right { -1 } else { 1 };
        }
        let x = b as i64 - l;
        if x <= self.contaminated_left {
            self.contaminated_left = self.contaminated_left.max(x + 1);
        }
        if x + 1 >= self.contaminated_right {
            self.contaminated_right = self.contaminated_right.min(x);
        }
        let obs = self.cfg.obs_radius;
        if self.contaminated_left >= -obs - 2 || self.contaminated_right <= obs + 2 {
            self.breached = true;
        }
        let lo = b.saturating_sub(1);
        let hi = (b + 1).min(self.bond_class.len() - 1);
        for bb in lo..=hi {
            self.reclassify_bond(bb);
        }
    }

    /// Height function h_γ(t, x) = 2N(t) + Σ_{0<y≤x} η̂(t,y) (mirrored sum
    /// for x < 0).
    pub fn height(&self, x: i64) -> Result<i64> {
        self.idx(x)?;
        let mut h = 2 * self.flux;
        if x > 0 {
            for y in 1..=x {
                h += self.spin(y)?;
            }
        } else {
            for y in (x + 1)..=0 {
                h -= self.spin(y)?;
            }
        }
        Ok(h)
    }
}

/// Exact Gillespie evolution to `t_end`: total rate p·#(right-allowed) +
/// q·#(left-allowed), exponential waiting times, uniform choice inside the
/// chosen class.
pub fn run_ctmc(state: &mut AsepState, t_end: f64) -> Result<()> {
    if t_end < state.time {
        return Err(Error::Arg(format!(
            "t_end = {t_end} is before current time {}",
            state.time
        )));
    }
    let (p, q) = (state.cfg.p, state.cfg.q);
    loop {
        let rate_r = p * state.right_pool.len() as f64;
        let rate_l = q * state.left_pool.len() as f64;
        let total = rate_r + rate_l;
        if total == 0.0 {
            break;
        }
        let wait = -(1.0 - state.rng.gen::<f64>()).ln() / total;
        if state.time + wait > t_end {
            break;
        }
        state.time += wait;
        let b = if state.rng.gen::<f64>() * total < rate_r {
            state.right_pool[state.rng.gen_range(0..state.right_pool.len())]
        } else {
            state.left_pool[state.rng.gen_range(0..state.left_pool.len())]
        } as usize;
        state.fire_bond(b);
    }
    state.time = t_end;
    Ok(())
}

/// Hydrodynamic limit shape of h_γ(t/γ, vt)/t for two-sided Bernoulli data:
/// linear outside the characteristics v = 2ρ± − 1, parabolic (rarefaction
/// fan) between them.
pub fn hydrodynamic_profile(rho_minus: f64, rho_plus: f64, v: f64) -> f64 {
    let a = 2.0 * rho_minus - 1.0;
    let b = 2.0 * rho_plus - 1.0;
    if v <= a {
        2.0 * rho_minus * (1.0 - rho_minus) + a * v
    } else if v >= b {
        2.0 * rho_plus * (1.0 - rho_plus) + b * v
    } else {
        (1.0 + v * v) / 2.0
    }
}

/// Microscopic Hopf-Cole field
/// Z_ε(T, X) = exp{−λ_ε h_γ(ε^{-3/2}T/γ, ε^{-1}X) + ν_ε ε^{-3/2}T/γ},
/// read off a state that has been evolved to clock time ε^{-3/2}T/γ = ε^{-2}T.
pub fn hopf_cole_field(state: &AsepState, eps: f64, big_t: f64, big_x: f64) -> Result<f64> {
    let site = (big_x / eps).round() as i64;
    let (lambda, nu) = lambda_nu(eps);
    let t_micro = big_t / (eps * eps);
    if (state.time - t_micro).abs() > 1e-9 * (1.0 + t_micro) {
        return Err(Error::Arg(format!(
            "state at clock time {} but Z_eps(T = {big_t}) needs {t_micro}",
            state.time
        )));
    }
    let h = state.height(site)? as f64;
    Ok((-lambda * h + nu * t_micro).exp())
}

/// One sample of the edge fluctuation field
/// h^fluc = (h_γ(t/γ, x) − t/2)/t^{1/3} at x = 2^{1/3}t^{2/3}X, with
/// t = ε^{-3/2}T and γ = ε^{1/2}. The event compared against the analytic
/// distributions downstream is {h^fluc ≥ 2^{-1/3}(X² − s)}.
pub fn fluctuation_sample(
    eps: f64,
    big_t: f64,
    big_x: f64,
    rho_minus: f64,
    rho_plus: f64,
    seed: u64,
    trial: u64,
) -> Result<f64> {
    let (t, gamma, t_over_gamma) = scales(eps, big_t);
    if t_over_gamma > 5e6 {
        return Err(Error::Budget {
            what: "ASEP clock horizon t/gamma",
            estimate: t_over_gamma,
            tol: 5e6,
            size: 0,
        });
    }
    let x = (CBRT2 * t.powf(2.0 / 3.0) * big_x).round() as i64;
    let q = 0.5 * (1.0 + gamma);
    let cfg = AsepConfig::sized(1.0 - q, q, rho_minus, rho_plus, x.abs(), t_over_gamma, seed)?;
    let mut rng = trial_rng(seed, trial, 0);
    let mut state = init_two_sided_bernoulli(&cfg, &mut rng)?;
    run_ctmc(&mut state, t_over_gamma)?;
    if state.breached {
        return Err(Error::Window(
            "activity reached the window edge; enlarge the window".into(),
        ));
    }
    Ok((state.height(x)? as f64 - t / 2.0) / t.powf(1.0 / 3.0))
}

/// Parallel batch of fluctuation samples with reproducible per-trial RNG
/// streams derived from (seed, trial).
pub fn fluctuation_samples(
    eps: f64,
    big_t: f64,
    big_x: f64,
    rho_minus: f64,
    rho_plus: f64,
    n_trials: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    (0..n_trials)
        .into_par_iter()
        .map(|trial| fluctuation_sample(eps, big_t, big_x, rho_minus, rho_plus, seed, trial))
        .collect()
}

fn trial_rng(seed: u64, trial: u64, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_mul(8).wrapping_add(lane));
    rng
}

/// Position of the m-th particle from the left (the leftmost is particle 1).
/// Labels are preserved by the exclusion rule, so at any time this is the
/// m-th smallest occupied site.
pub fn mth_particle_position(state: &AsepState, m: u32) -> Result<i64> {
    if m == 0 {
        return Err(Error::Arg("particle index m must be >= 1".into()));
    }
    let l = state.cfg.half_width;
    let mut seen = 0u32;
    for x in -l..=l {
        if state.occupation(x)? == 1 {
            seen += 1;
            if seen == m {
                return Ok(x);
            }
        }
    }
    Err(Error::Window(format!(
        "fewer than {m} particles in the window"
    )))
}

/// Monte Carlo samples of x(t/γ, m) under step Bernoulli data (ρ₋ = 0,
/// density ρ₊ right of the origin), q − p = γ = ε^{1/2}.  The transform
/// time variable `t` matches the exact-CDF convention: the particle system
/// runs to time t/γ.
pub fn particle_position_samples(
    eps: f64,
    rho_plus: f64,
    t: f64,
    m: u32,
    n_trials: u64,
    seed: u64,
) -> Result<Vec<i64>> {
    let gamma = eps.sqrt();
    let t_end = t / gamma;
    if t_end > 5e6 {
        return Err(Error::Budget {
            what: "ASEP clock horizon t/gamma",
            estimate: t_end,
            tol: 5e6,
            size: 0,
        });
    }
    let q = 0.5 * (1.0 + gamma);
    let obs = (t_end + m as f64 / rho_plus + 20.0).ceil() as i64;
    let cfg = AsepConfig::sized(1.0 - q, q, 0.0, rho_plus, obs, t_end, seed)?;
    (0..n_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial, 0);
            let mut state = init_two_sided_bernoulli(&cfg, &mut rng)?;
            run_ctmc(&mut state, t_end)?;
            if state.breached {
                return Err(Error::Window(
                    "activity reached the window edge; enlarge the window".into(),
                ));
            }
            mth_particle_position(&state, m)
        })
        .collect()
}

/// Max residual of the four Gärtner-transformation case equations
/// (spin pairs 11, (−1)(−1), 1(−1), (−1)1) at λ = ½log(q/p), D = 2√(pq),
/// ν = p + q − 2√(pq); the identity is exact, so this is a pure arithmetic
/// check (the common factor ε^{-2} is divided out).
pub fn gartner_identity_check(eps: f64) -> f64 {
    let g = eps.sqrt();
    let q = 0.5 * (1.0 + g);
    let p = 0.5 * (1.0 - g);
    let lambda = 0.5 * (q / p).ln();
    let d = 2.0 * (p * q).sqrt();
    let nu = p + q - d;
    let el = lambda.exp();
    let einv = (-lambda).exp();
    let r = [
        0.5 * d * (einv - 2.0 + el) - nu,
        0.5 * d * (el - 2.0 + einv) - nu,
        0.5 * d * (el - 2.0 + el) - (nu + (el * el - 1.0) * p),
        0.5 * d * (einv - 2.0 + einv) - (nu + (einv * einv - 1.0) * q),
    ];
    r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Shared randomness for coupled runs: a Poisson field of attempted jumps
/// (rate-1 clock per site) with pre-assigned direction coins (left with
/// probability q). Two states evolved under the same stream are coupled
/// deterministically.
#[derive(Clone, Debug)]
pub struct GraphicalCoupling {
    /// (time, site, jumps-left) sorted by time.
    pub events: Vec<(f64, i64, bool)>,
    pub half_width: i64,
    pub t_end: f64,
}

impl GraphicalCoupling {
    pub fn generate(cfg: &AsepConfig, rng: &mut ChaCha8Rng) -> Self {
        let l = cfg.half_width;
        let n_sites = (2 * l + 1) as f64;
        let mut events = vec![];
        let mut t = 0.0;
        loop {
            t += -(1.0 - rng.gen::<f64>()).ln() / n_sites;
            if t > cfg.t_end {
                break;
            }
            let site = rng.gen_range(-l..=l);
            let left = rng.gen::<f64>() < cfg.q;
            events.push((t, site, left));
        }
        GraphicalCoupling {
            events,
            half_width: l,
            t_end: cfg.t_end,
        }
    }

    /// Replay the event stream on a state: when a site's clock rings and it
    /// holds a particle, the particle attempts the pre-assigned direction
    /// (suppressed under exclusion). Does not consume the state's RNG.
    pub fn apply(&self, state: &mut AsepState) -> Result<()> {
        if state.cfg.half_width != self.half_width {
            return Err(Error::Arg("coupling window mismatch".into()));
        }
        let l = self.half_width;
        for &(t, site, left) in &self.events {
            let target = if left { site - 1 } else { site + 1 };
            if target < -l || target > l {
                state.breached = true;
                continue;
            }
            let b = if left { site - 1 + l } else { site + l } as usize;
            let wanted = if left { BOND_LEFT } else { BOND_RIGHT };
            if state.occ[(site + l) as usize] == 1 && state.bond_class[b] == wanted {
                state.fire_bond(b);
            }
            state.time = t;
        }
        state.time = self.t_end;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FkgResult {
    pub joint: f64,
    pub marg1: f64,
    pub marg2: f64,
    pub se_joint: f64,
    pub se1: f64,
    pub se2: f64,
    pub n_trials: u64,
}

/// Monte Carlo check of the FKG inequality for the Hopf-Cole field: two
/// independent initial conditions evolved under a shared graphical
/// construction; estimates P(Z₁ ≤ s₁ ∧ Z₂ ≤ s₂) against the product of
/// marginals. The events {Z ≤ s} are increasing in the direction coins, so
/// joint ≥ product up to sampling error.
#[allow(clippy::too_many_arguments)]
pub fn fkg_experiment(
    eps: f64,
    big_t: f64,
    big_x: f64,
    rho_minus: f64,
    rho_plus: f64,
    s1: f64,
    s2: f64,
    n_trials: u64,
    seed: u64,
) -> Result<FkgResult> {
    let t_micro = big_t / (eps * eps);
    let obs = (big_x.abs() / eps).ceil() as i64;
    let gamma = eps.sqrt();
    let q = 0.5 * (1.0 + gamma);
    let cfg = AsepConfig::sized(1.0 - q, q, rho_minus, rho_plus, obs, t_micro, seed)?;
    let counts = (0..n_trials)
        .into_par_iter()
        .map(|trial| -> Result<(u64, u64, u64)> {
            let coupling = GraphicalCoupling::generate(&cfg, &mut trial_rng(seed, trial, 0));
            let mut hits = [false; 2];
            for (lane, hit) in hits.iter_mut().enumerate() {
                let mut rng = trial_rng(seed, trial, 1 + lane as u64);
                let mut st = init_two_sided_bernoulli(&cfg, &mut rng)?;
                coupling.apply(&mut st)?;
                let z = hopf_cole_field(&st, eps, big_t, big_x)?;
                *hit = z <= if lane == 0 { s1 } else { s2 };
            }
            Ok((
                u64::from(hits[0] && hits[1]),
                u64::from(hits[0]),
                u64::from(hits[1]),
            ))
        })
        .try_reduce(
            || (0, 0, 0),
            |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2)),
        )?;
    let n = n_trials as f64;
    let se = |p: f64| (p * (1.0 - p) / n).sqrt();
    let (joint, marg1, marg2) = (
        counts.0 as f64 / n,
        counts.1 as f64 / n,
        counts.2 as f64 / n,
    );
    Ok(FkgResult {
        joint,
        marg1,
        marg2,
        se_joint: se(joint),
        se1: se(marg1),
        se2: se(marg2),
        n_trials,
    })
}

/// Per-sample algebraic sandwich for the equilibrium solution assembled from
/// two half solutions, Z^eq = Z₊ + Z₋:
/// −log2 + min(H₊, H₋) ≤ H^eq ≤ −log2 + max(H₊, H₋) with H = −log Z.
pub fn sandwich_check(z_plus: f64, z_minus: f64) -> bool {
    if !(z_plus > 0.0 && z_minus > 0.0) {
        return false;
    }
    let h_eq = -(z_plus + z_minus).ln();
    let (hp, hm) = (-z_plus.ln(), -z_minus.ln());
    let slack = 1e-12 * (1.0 + h_eq.abs() + hp.abs() + hm.abs());
    let ln2 = std::f64::consts::LN_2;
    (-ln2 + hp.min(hm) - slack <= h_eq) && (h_eq <= -ln2 + hp.max(hm) + slack)
}

/// Sorted sample set with Kolmogorov-Smirnov distance against a reference
/// CDF.
#[derive(Clone, Debug)]
pub struct EmpiricalCdf {
    samples: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Arg("empty sample set".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Arg("non-finite sample".into()));
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(EmpiricalCdf { samples })
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    /// P̂(sample ≤ x).
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.samples.partition_point(|&s| s <= x);
        k as f64 / self.samples.len() as f64
    }

    /// sup_x |F̂(x) − F(x)| over the sample jump points.
    pub fn ks_distance(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.samples.len() as f64;
        self.samples
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let fx = f(x);
                (((i + 1) as f64 / n) - fx).abs().max((i as f64 / n - fx).abs())
            })
            .fold(0.0, f64::max)
    }
}
