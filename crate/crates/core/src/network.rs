//! The alliance network and its timestep.
//!
//! A timestep is a synchronous status update followed by a sequential
//! rewiring phase. During the update every individual pools a fraction `r`
//! of its status evenly over its incident links (outgoing and incoming). The
//! pooled amount on a link `i -> j` is split so that `j` receives a fraction
//! `q` and `i` keeps `1 - q`. Total status is conserved.
//!
//! During rewiring each individual, visited in a fresh random order, drops
//! its least valuable outgoing link with probability `w` and links to a
//! uniformly chosen individual it is not yet connected to.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::params::ModelParams;
use crate::rng::RngStream;

/// Which individuals count as "already linked" when picking a new target.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewireRule {
    /// Excludes anyone with a link to or from the actor.
    #[default]
    EitherDirection,
    /// Excludes only the actor's current outgoing targets.
    OutgoingOnly,
}

/// One replaced link, recorded for observers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RewireEvent {
    pub actor: usize,
    pub old_target: usize,
    pub new_target: usize,
    /// Timestep (1-based) during which the rewire happened.
    pub step: u64,
}

/// Statuses and directed links of the population.
#[derive(Clone, Debug)]
pub struct NetworkState {
    n: usize,
    lambda: usize,
    statuses: Vec<f64>,
    /// Row-major `n x lambda` out-lists.
    targets: Vec<usize>,
    in_degree: Vec<u32>,
    /// Dense `n x n` adjacency, `linked[i * n + j]` iff `i -> j`.
    linked: Vec<bool>,
    step: u64,
    contrib: Vec<f64>,
    next: Vec<f64>,
    order: Vec<usize>,
    ties: Vec<usize>,
}

impl PartialEq for NetworkState {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.lambda == other.lambda
            && self.step == other.step
            && self.targets == other.targets
            && self.statuses == other.statuses
    }
}

impl NetworkState {
    /// Every status starts at 1 and every individual links to `lambda`
    /// distinct others drawn uniformly without replacement.
    pub fn random(params: &ModelParams, rng: &mut RngStream) -> Result<Self, ModelError> {
        params.validate()?;
        let (n, lambda) = (params.n, params.lambda);
        let mut out_links = Vec::with_capacity(n);
        let mut pool: Vec<usize> = Vec::with_capacity(n - 1);
        for i in 0..n {
            pool.clear();
            pool.extend((0..n).filter(|&j| j != i));
            // Partial Fisher-Yates: the first `lambda` slots are a uniform sample.
            for k in 0..lambda {
                let pick = k + rng.index(pool.len() - k);
                pool.swap(k, pick);
            }
            out_links.push(pool[..lambda].to_vec());
        }
        Self::from_links(vec![1.0; n], &out_links)
    }

    /// Builds a state from explicit statuses and out-lists, checking structure.
    pub fn from_links(statuses: Vec<f64>, out_links: &[Vec<usize>]) -> Result<Self, ModelError> {
        let n = statuses.len();
        if n < 2 {
            return Err(ModelError::InvalidNetwork(format!(
                "need at least 2 individuals, got {n}"
            )));
        }
        if out_links.len() != n {
            return Err(ModelError::InvalidNetwork(format!(
                "{} out-lists for {n} individuals",
                out_links.len()
            )));
        }
        let lambda = out_links[0].len();
        if lambda == 0 {
            return Err(ModelError::InvalidNetwork(
                "individuals need at least one out-link".into(),
            ));
        }
        if let Some((i, s)) = statuses
            .iter()
            .enumerate()
            .find(|(_, s)| !(s.is_finite() && **s >= 0.0))
        {
            return Err(ModelError::InvalidNetwork(format!("status of {i} is {s}")));
        }
        let mut state = Self {
            n,
            lambda,
            statuses,
            targets: Vec::with_capacity(n * lambda),
            in_degree: vec![0; n],
            linked: vec![false; n * n],
            step: 0,
            contrib: vec![0.0; n],
            next: vec![0.0; n],
            order: (0..n).collect(),
            ties: Vec::with_capacity(lambda),
        };
        for (i, outs) in out_links.iter().enumerate() {
            if outs.len() != lambda {
                return Err(ModelError::InvalidNetwork(format!(
                    "individual {i} has {} out-links, expected {lambda}",
                    outs.len()
                )));
            }
            for &j in outs {
                if j >= n || j == i || state.linked[i * n + j] {
                    return Err(ModelError::InvalidNetwork(format!("bad link {i} -> {j}")));
                }
                state.linked[i * n + j] = true;
                state.in_degree[j] += 1;
                state.targets.push(j);
            }
        }
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn statuses(&self) -> &[f64] {
        &self.statuses
    }

    pub fn total_status(&self) -> f64 {
        self.statuses.iter().sum()
    }

    pub fn out_links(&self, i: usize) -> &[usize] {
        &self.targets[i * self.lambda..(i + 1) * self.lambda]
    }

    pub fn has_link(&self, from: usize, to: usize) -> bool {
        self.linked[from * self.n + to]
    }

    /// Number of individuals linking to `i`.
    pub fn in_degree(&self, i: usize) -> usize {
        self.in_degree[i] as usize
    }

    pub fn in_degrees(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.in_degree.iter().map(|&d| d as usize)
    }

    /// Links touching `i`: its `lambda` outgoing links plus all incoming ones.
    pub fn incident_degree(&self, i: usize) -> usize {
        self.lambda + self.in_degree[i] as usize
    }

    /// All links as `(source, target)` pairs in out-list order.
    pub fn links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.targets
            .iter()
            .enumerate()
            .map(move |(k, &j)| (k / self.lambda, j))
    }

    /// Status `from` gets back from its link to `to` in one status update.
    pub fn link_value(
        &self,
        params: &ModelParams,
        from: usize,
        to: usize,
    ) -> Result<f64, ModelError> {
        if from >= self.n || to >= self.n || !self.has_link(from, to) {
            return Err(ModelError::MissingLink { from, to });
        }
        let c = |i: usize| params.r * self.statuses[i] / self.incident_degree(i) as f64;
        Ok((1.0 - params.q) * (c(from) + c(to)))
    }

    /// Synchronous status update from the pre-update statuses.
    pub fn status_update(&mut self, params: &ModelParams) {
        let (r, q) = (params.r, params.q);
        for i in 0..self.n {
            self.contrib[i] = r * self.statuses[i] / self.incident_degree(i) as f64;
            self.next[i] = (1.0 - r) * self.statuses[i];
        }
        for i in 0..self.n {
            let ci = self.contrib[i];
            for &j in &self.targets[i * self.lambda..(i + 1) * self.lambda] {
                let pooled = ci + self.contrib[j];
                self.next[i] += (1.0 - q) * pooled;
                self.next[j] += q * pooled;
            }
        }
        std::mem::swap(&mut self.statuses, &mut self.next);
    }

    /// Rewiring phase. Appends one event per replaced link to `events`.
    pub fn rewire(
        &mut self,
        params: &ModelParams,
        rng: &mut RngStream,
        events: &mut Vec<RewireEvent>,
    ) {
        let n = self.n;
        let event_step = self.step + 1;
        // With (1 - q) r = 0 every link is worth nothing, so all tie.
        let values_differ = (1.0 - params.q) * params.r > 0.0;

        let mut order = std::mem::take(&mut self.order);
        rng.shuffle(&mut order);
        for &actor in &order {
            if !rng.chance(params.w) {
                continue;
            }
            let eligible = self.eligible_count(actor, params.rewire_rule);
            if eligible == 0 {
                continue;
            }
            let slot = self.least_valued_slot(actor, values_differ, rng);
            let new_target = self.pick_new_target(actor, eligible, params.rewire_rule, rng);

            let k = actor * self.lambda + slot;
            let old_target = self.targets[k];
            self.targets[k] = new_target;
            self.linked[actor * n + old_target] = false;
            self.linked[actor * n + new_target] = true;
            self.in_degree[old_target] -= 1;
            self.in_degree[new_target] += 1;
            events.push(RewireEvent {
                actor,
                old_target,
                new_target,
                step: event_step,
            });
        }
        self.order = order;
    }

    /// One full timestep: status update, then rewiring.
    pub fn advance(
        &mut self,
        params: &ModelParams,
        rng: &mut RngStream,
        events: &mut Vec<RewireEvent>,
    ) {
        events.clear();
        self.status_update(params);
        self.rewire(params, rng, events);
        self.step += 1;
    }

    fn eligible(&self, actor: usize, candidate: usize, rule: RewireRule) -> bool {
        candidate != actor
            && !self.linked[actor * self.n + candidate]
            && (rule == RewireRule::OutgoingOnly || !self.linked[candidate * self.n + actor])
    }

    fn eligible_count(&self, actor: usize, rule: RewireRule) -> usize {
        let neighbours = match rule {
            RewireRule::OutgoingOnly => self.lambda,
            RewireRule::EitherDirection => {
                let mutual = self
                    .out_links(actor)
                    .iter()
                    .filter(|&&t| self.linked[t * self.n + actor])
                    .count();
                self.lambda + self.in_degree[actor] as usize - mutual
            }
        };
        self.n - 1 - neighbours
    }

    fn least_valued_slot(
        &mut self,
        actor: usize,
        values_differ: bool,
        rng: &mut RngStream,
    ) -> usize {
        self.ties.clear();
        if values_differ {
            // The actor's own contribution is common to all its links, so the
            // ordering is that of status per incident link of the target.
            let mut best = f64::INFINITY;
            for slot in 0..self.lambda {
                let t = self.targets[actor * self.lambda + slot];
                let key = self.statuses[t] / self.incident_degree(t) as f64;
                if key < best {
                    best = key;
                    self.ties.clear();
                    self.ties.push(slot);
                } else if key == best {
                    self.ties.push(slot);
                }
            }
        } else {
            self.ties.extend(0..self.lambda);
        }
        match self.ties.len() {
            1 => self.ties[0],
            len => self.ties[rng.index(len)],
        }
    }

    fn pick_new_target(
        &self,
        actor: usize,
        eligible: usize,
        rule: RewireRule,
        rng: &mut RngStream,
    ) -> usize {
        if eligible * 4 >= self.n {
            loop {
                let j = rng.index(self.n);
                if self.eligible(actor, j, rule) {
                    return j;
                }
            }
        }
        let mut k = rng.index(eligible);
        for j in 0..self.n {
            if self.eligible(actor, j, rule) {
                if k == 0 {
                    return j;
                }
                k -= 1;
            }
        }
        unreachable!("eligible count out of sync with adjacency")
    }

    /// Full structural scan: out-degree, self-links, duplicates, degree and
    /// adjacency bookkeeping.
    pub fn check_structure(&self) -> Result<(), ModelError> {
        let n = self.n;
        let mut in_degree = vec![0u32; n];
        let mut linked = vec![false; n * n];
        for i in 0..n {
            let outs = self.out_links(i);
            if outs.len() != self.lambda {
                return Err(ModelError::InvalidNetwork(format!(
                    "{i} has {} out-links",
                    outs.len()
                )));
            }
            for &j in outs {
                if j >= n || j == i {
                    return Err(ModelError::InvalidNetwork(format!("bad link {i} -> {j}")));
                }
                if linked[i * n + j] {
                    return Err(ModelError::InvalidNetwork(format!(
                        "duplicate link {i} -> {j}"
                    )));
                }
                linked[i * n + j] = true;
                in_degree[j] += 1;
            }
        }
        if in_degree != self.in_degree || linked != self.linked {
            return Err(ModelError::InvalidNetwork(
                "degree bookkeeping out of sync".into(),
            ));
        }
        Ok(())
    }
}
