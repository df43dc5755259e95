use crate::error::ModelError;
use crate::network::{NetworkState, RewireEvent};
use crate::params::ModelParams;
use crate::rng::RngStream;

/// Called after every timestep with the 1-based step index.
pub trait Observer {
    fn observe(&mut self, step: u64, state: &NetworkState, events: &[RewireEvent]);
}

impl<F> Observer for F
where
    F: FnMut(u64, &NetworkState, &[RewireEvent]),
{
    fn observe(&mut self, step: u64, state: &NetworkState, events: &[RewireEvent]) {
        self(step, state, events)
    }
}

/// A run in progress: parameters, state and the run's random stream.
#[derive(Clone, Debug)]
pub struct Simulation {
    params: ModelParams,
    state: NetworkState,
    rng: RngStream,
    events: Vec<RewireEvent>,
}

impl Simulation {
    pub fn new(params: ModelParams) -> Result<Self, ModelError> {
        let mut rng = RngStream::from_seed(params.seed);
        let state = NetworkState::random(&params, &mut rng)?;
        Ok(Self {
            params,
            state,
            rng,
            events: Vec::new(),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    /// Advances one timestep and returns its rewire events.
    pub fn step(&mut self) -> &[RewireEvent] {
        self.state
            .advance(&self.params, &mut self.rng, &mut self.events);
        &self.events
    }

    pub fn into_state(self) -> NetworkState {
        self.state
    }
}

/// Runs `params.steps` timesteps from a fresh network seeded by `params.seed`.
pub fn simulate(
    params: &ModelParams,
    observers: &mut [&mut dyn Observer],
) -> Result<NetworkState, ModelError> {
    let mut sim = Simulation::new(*params)?;
    for _ in 0..params.steps {
        sim.step();
        let step = sim.state.step();
        for obs in observers.iter_mut() {
            obs.observe(step, &sim.state, &sim.events);
        }
    }
    Ok(sim.into_state())
}
