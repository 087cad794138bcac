use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ObservableTrace, OmniscientTrace, Step};
use crate::automaton::{Edge, HybridAutomaton, ModeId};
use crate::error::{Error, Result};
use crate::geometry::Interval;

/// Sampled values are snapped to multiples of this step when the snapped
/// value stays in range, which keeps generated arithmetic exact for
/// dyadic flows.
const GRID: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub max_steps: usize,
    pub delay_min: f64,
    pub delay_max: f64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            max_steps: 20,
            delay_min: 1.0,
            delay_max: 10.0,
        }
    }
}

impl WalkConfig {
    pub fn with_max_steps(max_steps: usize) -> Self {
        WalkConfig {
            max_steps,
            ..Self::default()
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        let ok = self.delay_min > 0.0 && self.delay_min <= self.delay_max && self.delay_max.is_finite();
        if !ok {
            return Err(Error::Config(format!(
                "delay range [{}, {}] must be positive and finite",
                self.delay_min, self.delay_max
            )));
        }
        Ok(())
    }
}

fn draw(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    let u = rng.gen_range(lo..=hi);
    let snapped = (u * GRID).round() / GRID;
    if (lo..=hi).contains(&snapped) {
        snapped
    } else {
        u
    }
}

/// Samples timed steps through an automaton. Shared by random walks and
/// the benchmark's path-guided trace generation.
pub(crate) struct Walker<'a> {
    a: &'a HybridAutomaton,
    cfg: WalkConfig,
    rng: ChaCha8Rng,
}

impl<'a> Walker<'a> {
    pub(crate) fn new(a: &'a HybridAutomaton, cfg: WalkConfig, seed: u64) -> Result<Self> {
        cfg.check()?;
        Ok(Walker {
            a,
            cfg,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Delays in `m` from `x` with a sampled rate and delay.
    pub(crate) fn delay(&mut self, m: ModeId, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let flow = self.a.flow(m)?;
        for (d, i) in flow.intervals().iter().enumerate() {
            if !i.is_bounded() {
                return Err(Error::UnboundedFlow { mode: m.0, dim: d });
            }
        }
        let rates: Vec<f64> = flow
            .intervals()
            .iter()
            .map(|i: &Interval| draw(&mut self.rng, i.lo(), i.hi()))
            .collect();
        let delay = draw(&mut self.rng, self.cfg.delay_min, self.cfg.delay_max);
        let next = x.iter().zip(&rates).map(|(v, r)| v + delay * r).collect();
        Ok((delay, next))
    }

    /// Walks from the initial state, asking `choose` for the next edge
    /// among the enabled ones. Stops at `max_steps` or when `choose`
    /// returns `None`.
    pub(crate) fn walk<F>(&mut self, mut choose: F) -> Result<OmniscientTrace>
    where
        F: FnMut(&mut ChaCha8Rng, usize, &[&Edge]) -> Option<usize>,
    {
        let a = self.a;
        let x0 = a.init_x().to_vec();
        let mut mode = a.init_mode();
        let (delay, mut x) = self.delay(mode, &x0)?;
        let mut steps = vec![Step {
            label: None,
            delay,
            x: x.clone(),
        }];
        let mut edges = Vec::new();
        while steps.len() < self.cfg.max_steps {
            let enabled: Vec<&Edge> = a
                .outgoing(mode)
                .filter(|(_, g)| g.contains_point(&x).unwrap_or(false))
                .map(|(e, _)| e)
                .collect();
            if enabled.is_empty() {
                break;
            }
            let Some(k) = choose(&mut self.rng, edges.len(), &enabled) else {
                break;
            };
            let e = enabled[k].clone();
            mode = e.dst;
            let (delay, next) = self.delay(mode, &x)?;
            x = next;
            steps.push(Step {
                label: Some(e.label.clone()),
                delay,
                x: x.clone(),
            });
            edges.push(e);
        }
        Ok(OmniscientTrace {
            trace: ObservableTrace { x0, steps },
            edges,
        })
    }
}

/// A random walk from the initial state: per step a rate is drawn
/// uniformly from the mode's flow, a delay uniformly from the configured
/// range, and the next edge uniformly among those whose guard holds.
pub fn random_walk(a: &HybridAutomaton, cfg: &WalkConfig, seed: u64) -> Result<OmniscientTrace> {
    let mut w = Walker::new(a, *cfg, seed)?;
    w.walk(|rng, _, enabled| Some(rng.gen_range(0..enabled.len())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::traces::validate_omniscient;

    fn looped() -> HybridAutomaton {
        let mut h =
            HybridAutomaton::new(ModeId(0), Rect::from_bounds(&[(0.5, 2.0), (-1.0, 1.0)]).unwrap(), vec![0.0, 0.0])
                .unwrap();
        h.set_mode(ModeId(1), Rect::from_bounds(&[(-3.0, 0.1), (0.0, 0.0)]).unwrap(), None)
            .unwrap();
        let full = Rect::full(2).unwrap();
        h.set_edge(Edge::new(ModeId(0), "a", ModeId(1)), full.clone()).unwrap();
        h.set_edge(Edge::new(ModeId(1), "b", ModeId(0)), full.clone()).unwrap();
        h.set_edge(Edge::new(ModeId(1), "c", ModeId(1)), Rect::from_bounds(&[(0.0, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY)]).unwrap())
            .unwrap();
        h
    }

    #[test]
    fn terminal_mode_gives_single_delay() {
        let h = HybridAutomaton::new(ModeId(0), Rect::singular(&[1.0]).unwrap(), vec![0.0]).unwrap();
        let t = random_walk(&h, &WalkConfig::default(), 3).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.edges.is_empty());
    }

    #[test]
    fn walks_are_valid_bounded_and_deterministic() {
        let h = looped();
        let cfg = WalkConfig::with_max_steps(30);
        for seed in 0..200 {
            let t = random_walk(&h, &cfg, seed).unwrap();
            assert!(t.len() <= 30);
            assert_eq!(validate_omniscient(&h, &t), Ok(()), "seed {seed}");
            assert_eq!(t, random_walk(&h, &cfg, seed).unwrap());
        }
    }

    #[test]
    fn unbounded_flow_is_an_input_error() {
        let h = HybridAutomaton::new(ModeId(0), Rect::full(1).unwrap(), vec![0.0]).unwrap();
        assert!(matches!(
            random_walk(&h, &WalkConfig::default(), 0),
            Err(Error::UnboundedFlow { mode: 0, dim: 0 })
        ));
    }

    #[test]
    fn config_is_checked() {
        let h = HybridAutomaton::new(ModeId(0), Rect::singular(&[1.0]).unwrap(), vec![0.0]).unwrap();
        assert!(random_walk(&h, &WalkConfig::with_max_steps(0), 0).is_err());
        let cfg = WalkConfig {
            delay_min: 0.0,
            ..WalkConfig::default()
        };
        assert!(random_walk(&h, &cfg, 0).is_err());
    }
}
