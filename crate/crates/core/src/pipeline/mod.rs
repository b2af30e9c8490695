//! Concurrent dataflow engine.
//!
//! Stage graph, one thread per stage, bounded streams between them:
//!
//! ```text
//! ingest -> time-points -> scheduler -> survival[0..V] -> default-probability
//!        -> payment -> payoff -> accrual -> accumulate -> combine -> emit
//! ```
//!
//! `ingest`, `accumulate -> combine` and `combine -> emit` carry one message
//! per option. Between `time-points` and `accumulate` each option is an
//! [`OptionHead`] followed by frames of time points. The scheduler hands
//! messages to the survival workers cyclically and `default-probability`
//! reads them back in the same cycle, so ordering is structural.
//!
//! All stages start once per batch and drain their input until the
//! end-of-batch marker, which every stage forwards (fan-out stages forward
//! it on each output). Per-option failures travel as data and come out at
//! the option's position.

mod probe;
mod round_robin;
mod stage;
mod stream;

use std::thread;

pub use probe::{Probe, StageStats};
pub use round_robin::{round_robin_gather, round_robin_scatter};
pub use stream::{bounded, StreamError, StreamReceiver, StreamSender};

use self::stage::{Fault, StageCtx, StageError, StageResult};
use crate::curves::{self, CurveKind, TermStructure};
use crate::error::{CdsError, Result};
use crate::pricing::{fair_spread, LegValues, SpreadResult};
use crate::reduce::{LaneAccumulator, DEFAULT_LANES};
use crate::schedule::{generate_time_points, CdsOption};

/// Randomised scheduling perturbation applied around every stream operation.
/// Used to exercise ordering under adversarial interleavings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Jitter {
    pub seed: u64,
    pub max_sleep_micros: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    /// Partial sums used by every accumulation (`L`).
    pub lanes: usize,
    /// Replicated survival workers behind the scheduler (`V`).
    pub replication: usize,
    /// Bounded capacity of every stream, in messages.
    pub stream_capacity: usize,
    /// Independent engines the batch is split across (`N`); see [`crate::scaler`].
    pub engines: usize,
    /// Time points per frame message.
    pub frame_size: usize,
    pub jitter: Option<Jitter>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            lanes: DEFAULT_LANES,
            replication: 6,
            stream_capacity: 64,
            engines: 1,
            frame_size: 32,
            jitter: None,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(CdsError::InvalidConfig(what.to_owned()))
            }
        };
        check(self.lanes >= 1, "lanes must be >= 1")?;
        check(self.replication >= 1, "replication must be >= 1")?;
        check(self.stream_capacity >= 2, "stream capacity must be >= 2")?;
        check(self.engines >= 1, "engines must be >= 1")?;
        check(self.frame_size >= 1, "frame size must be >= 1")?;
        Ok(())
    }
}

/// Per-option header: how many time points follow.
#[derive(Debug, Clone, Copy)]
struct OptionHead {
    index: usize,
    recovery: f64,
    points: usize,
}

/// Per-time-point state, filled in stage by stage.
#[derive(Debug, Clone, Copy, Default)]
struct PointState {
    t_prev: f64,
    t: f64,
    s_prev: f64,
    s: f64,
    premium: f64,
    protection: f64,
    accrual: f64,
}

#[derive(Debug)]
struct PointFrame {
    index: usize,
    points: Vec<PointState>,
}

#[derive(Debug)]
enum Flow {
    Head(OptionHead),
    Frame(PointFrame),
    Failed(usize, CdsError),
}

#[derive(Debug)]
enum Totals {
    Legs {
        index: usize,
        recovery: f64,
        premium: f64,
        protection: f64,
        accrual: f64,
    },
    Failed(usize, CdsError),
}

pub type BatchResults = Vec<Result<SpreadResult>>;

/// Prices `options` through one engine. Results come back in input order,
/// one per option; a failing option yields an `Err` at its position without
/// disturbing the rest. The outer error reports a dead stage.
pub fn run_pipeline(
    options: &[CdsOption],
    interest: &TermStructure,
    hazard: &TermStructure,
    config: &EngineConfig,
) -> Result<BatchResults> {
    run_graph(
        options.iter().copied(),
        0,
        "",
        interest,
        hazard,
        config,
        None,
        None,
    )
}

/// [`run_pipeline`] with per-stage counters recorded into `probe`.
pub fn run_pipeline_probed(
    options: &[CdsOption],
    interest: &TermStructure,
    hazard: &TermStructure,
    config: &EngineConfig,
    probe: &Probe,
) -> Result<BatchResults> {
    run_graph(
        options.iter().copied(),
        0,
        "",
        interest,
        hazard,
        config,
        Some(probe),
        None,
    )
}

/// Streams options from an iterator; end-of-batch is sent when it runs out.
pub fn run_pipeline_stream<I>(
    options: I,
    interest: &TermStructure,
    hazard: &TermStructure,
    config: &EngineConfig,
    probe: Option<&Probe>,
) -> Result<BatchResults>
where
    I: IntoIterator<Item = CdsOption>,
    I::IntoIter: Send,
{
    run_graph(
        options.into_iter(),
        0,
        "",
        interest,
        hazard,
        config,
        probe,
        None,
    )
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn run_graph<I>(
    options: I,
    base_index: usize,
    prefix: &str,
    interest: &TermStructure,
    hazard: &TermStructure,
    config: &EngineConfig,
    probe: Option<&Probe>,
    fault: Option<&Fault>,
) -> Result<BatchResults>
where
    I: Iterator<Item = CdsOption> + Send,
{
    config.validate()?;
    if interest.kind() != CurveKind::Interest {
        return Err(CdsError::Domain("interest curve has the wrong kind".into()));
    }
    if hazard.kind() != CurveKind::Hazard {
        return Err(CdsError::Domain("hazard curve has the wrong kind".into()));
    }

    let cap = config.stream_capacity;
    let v = config.replication;
    let lanes = config.lanes;
    let frame_size = config.frame_size;
    let ctx = |name: &str| StageCtx::new(format!("{prefix}{name}"), probe, config.jitter, fault);
    let link = |from: &str, to: &str| format!("{prefix}{from} -> {prefix}{to}");

    let (ingest_tx, ingest_rx) = bounded::<(usize, CdsOption)>(link("ingest", "time-points"), cap);
    let (grid_tx, grid_rx) = bounded::<Flow>(link("time-points", "scheduler"), cap);
    let mut to_workers = Vec::with_capacity(v);
    let mut worker_in = Vec::with_capacity(v);
    let mut worker_out = Vec::with_capacity(v);
    let mut from_workers = Vec::with_capacity(v);
    for i in 0..v {
        let (tx, rx) = bounded::<Flow>(link("scheduler", &format!("survival[{i}]")), cap);
        to_workers.push(tx);
        worker_in.push(rx);
        let (tx, rx) = bounded::<Flow>(link(&format!("survival[{i}]"), "default-probability"), cap);
        worker_out.push(tx);
        from_workers.push(rx);
    }
    let (dp_tx, dp_rx) = bounded::<Flow>(link("default-probability", "payment"), cap);
    let (pay_tx, pay_rx) = bounded::<Flow>(link("payment", "payoff"), cap);
    let (payoff_tx, payoff_rx) = bounded::<Flow>(link("payoff", "accrual"), cap);
    let (accr_tx, accr_rx) = bounded::<Flow>(link("accrual", "accumulate"), cap);
    let (sum_tx, sum_rx) = bounded::<Totals>(link("accumulate", "combine"), cap);
    let (out_tx, out_rx) = bounded::<Result<SpreadResult>>(link("combine", "emit"), cap);

    thread::scope(|s| {
        let mut stages: Vec<(String, thread::ScopedJoinHandle<'_, StageResult<()>>)> = Vec::new();
        stages.push(spawn_stage(s, ctx("ingest"), move |c| {
            for (i, option) in options.enumerate() {
                c.send(&ingest_tx, (base_index + i, option))?;
            }
            c.finish(ingest_tx)
        }));

        stages.push(spawn_stage(s, ctx("time-points"), move |c| {
            time_point_stage(c, &ingest_rx, grid_tx, frame_size)
        }));

        stages.push(spawn_stage(s, ctx("scheduler"), move |c| {
            round_robin::scatter_with(c, &grid_rx, to_workers).map(drop)
        }));

        for (i, (rx, tx)) in worker_in.into_iter().zip(worker_out).enumerate() {
            stages.push(spawn_stage(s, ctx(&format!("survival[{i}]")), move |c| {
                survival_worker(c, &rx, tx, hazard, lanes)
            }));
        }

        stages.push(spawn_stage(s, ctx("default-probability"), move |c| {
            let mut s_prev = 1.0;
            round_robin::gather_with(
                c,
                &from_workers,
                |msg| {
                    match msg {
                        Flow::Head(_) => s_prev = 1.0,
                        Flow::Frame(frame) => {
                            for p in &mut frame.points {
                                p.s_prev = s_prev;
                                s_prev = p.s;
                            }
                        }
                        Flow::Failed(..) => {}
                    }
                    Ok(())
                },
                &dp_tx,
            )?;
            c.finish(dp_tx)
        }));

        stages.push(spawn_stage(s, ctx("payment"), move |c| {
            point_stage(c, &dp_rx, pay_tx, |p| {
                let df = curves::discount_factor(interest, p.t)?;
                p.premium = (p.t - p.t_prev) * df * p.s;
                Ok(())
            })
        }));

        stages.push(spawn_stage(s, ctx("payoff"), move |c| {
            point_stage(c, &pay_rx, payoff_tx, |p| {
                let df_mid = curves::discount_factor(interest, 0.5 * (p.t_prev + p.t))?;
                p.protection = df_mid * (p.s_prev - p.s);
                Ok(())
            })
        }));

        stages.push(spawn_stage(s, ctx("accrual"), move |c| {
            point_stage(c, &payoff_rx, accr_tx, |p| {
                p.accrual = 0.5 * (p.t - p.t_prev) * p.protection;
                Ok(())
            })
        }));

        stages.push(spawn_stage(s, ctx("accumulate"), move |c| {
            accumulate_stage(c, &accr_rx, sum_tx, lanes)
        }));

        stages.push(spawn_stage(s, ctx("combine"), move |c| {
            combine_stage(c, &sum_rx, out_tx)
        }));

        let mut emit_ctx = ctx("emit");
        let emitter = thread::Builder::new()
            .name(emit_ctx.name().to_owned())
            .spawn_scoped(s, move || {
                emit_ctx.started();
                let out = emit_stage(&mut emit_ctx, &out_rx, base_index);
                emit_ctx.stopped();
                out
            })
            .expect("failed to spawn pipeline stage");

        let mut failures: Vec<StageError> = Vec::new();
        let mut collect = |name: &str, joined: thread::Result<StageResult<()>>| match joined {
            Ok(Ok(())) => {}
            Ok(Err(e)) => failures.push(e),
            Err(payload) => failures.push(StageError {
                error: CdsError::Stage {
                    stage: name.to_owned(),
                    reason: format!("panicked: {}", panic_message(payload.as_ref())),
                },
                propagated: false,
            }),
        };
        for (name, handle) in stages {
            collect(&name, handle.join());
        }
        let emitted = match emitter.join() {
            Ok(Ok(results)) => Some(results),
            other => {
                collect(&format!("{prefix}emit"), other.map(|r| r.map(drop)));
                None
            }
        };

        // Report the stage that died first-hand, not the ones that saw it go.
        if let Some(root) = failures.iter().position(|f| !f.propagated) {
            return Err(failures.swap_remove(root).error);
        }
        if let Some(first) = failures.into_iter().next() {
            return Err(first.error);
        }
        Ok(emitted.expect("emitter succeeded when no stage failed"))
    })
}

fn spawn_stage<'scope, F>(
    scope: &'scope thread::Scope<'scope, '_>,
    mut ctx: StageCtx,
    body: F,
) -> (String, thread::ScopedJoinHandle<'scope, StageResult<()>>)
where
    F: FnOnce(&mut StageCtx) -> StageResult<()> + Send + 'scope,
{
    let name = ctx.name().to_owned();
    let handle = thread::Builder::new()
        .name(name.clone())
        .spawn_scoped(scope, move || {
            ctx.started();
            let out = body(&mut ctx);
            ctx.stopped();
            out
        })
        .expect("failed to spawn pipeline stage");
    (name, handle)
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_owned()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "unknown panic".to_owned()
    }
}

fn time_point_stage(
    c: &mut StageCtx,
    input: &StreamReceiver<(usize, CdsOption)>,
    output: StreamSender<Flow>,
    frame_size: usize,
) -> StageResult<()> {
    while let Some((index, option)) = c.recv(input)? {
        let grid = match generate_time_points(&option) {
            Ok(grid) => grid,
            Err(e) => {
                c.send(&output, Flow::Failed(index, e))?;
                continue;
            }
        };
        c.send(
            &output,
            Flow::Head(OptionHead {
                index,
                recovery: option.recovery_rate,
                points: grid.len(),
            }),
        )?;
        let mut periods = grid.periods();
        loop {
            let points: Vec<PointState> = periods
                .by_ref()
                .take(frame_size)
                .map(|(t_prev, t)| PointState {
                    t_prev,
                    t,
                    ..PointState::default()
                })
                .collect();
            if points.is_empty() {
                break;
            }
            c.send(&output, Flow::Frame(PointFrame { index, points }))?;
        }
    }
    c.finish(output)
}

fn survival_worker(
    c: &mut StageCtx,
    input: &StreamReceiver<Flow>,
    output: StreamSender<Flow>,
    hazard: &TermStructure,
    lanes: usize,
) -> StageResult<()> {
    while let Some(mut msg) = c.recv(input)? {
        if let Flow::Frame(frame) = &mut msg {
            c.count_items(frame.points.len());
            for p in &mut frame.points {
                p.s = curves::survival_probability_strided(hazard, p.t, lanes)
                    .map_err(|e| c.fail(format!("survival at t = {}: {e}", p.t)))?;
            }
        }
        c.send(&output, msg)?;
    }
    c.finish(output)
}

/// Applies `f` to every time point of every frame, in order.
fn point_stage(
    c: &mut StageCtx,
    input: &StreamReceiver<Flow>,
    output: StreamSender<Flow>,
    mut f: impl FnMut(&mut PointState) -> Result<()>,
) -> StageResult<()> {
    while let Some(mut msg) = c.recv(input)? {
        if let Flow::Frame(frame) = &mut msg {
            c.count_items(frame.points.len());
            for p in &mut frame.points {
                f(p).map_err(|e| c.fail(format!("option {}: {e}", frame.index)))?;
            }
        }
        c.send(&output, msg)?;
    }
    c.finish(output)
}

struct OpenOption {
    head: OptionHead,
    seen: usize,
    premium: LaneAccumulator,
    protection: LaneAccumulator,
    accrual: LaneAccumulator,
}

fn accumulate_stage(
    c: &mut StageCtx,
    input: &StreamReceiver<Flow>,
    output: StreamSender<Totals>,
    lanes: usize,
) -> StageResult<()> {
    let new_acc = || LaneAccumulator::new(lanes).expect("lanes validated");
    let mut open: Option<OpenOption> = None;
    while let Some(msg) = c.recv(input)? {
        match msg {
            Flow::Head(head) => {
                if let Some(prev) = &open {
                    return Err(c.fail(format!(
                        "option {} started before option {} received all {} points",
                        head.index, prev.head.index, prev.head.points
                    )));
                }
                open = Some(OpenOption {
                    head,
                    seen: 0,
                    premium: new_acc(),
                    protection: new_acc(),
                    accrual: new_acc(),
                });
            }
            Flow::Frame(frame) => {
                c.count_items(frame.points.len());
                let Some(acc) = open.as_mut().filter(|o| o.head.index == frame.index) else {
                    return Err(
                        c.fail(format!("frame for option {} without a header", frame.index))
                    );
                };
                for p in &frame.points {
                    acc.premium.push(p.premium);
                    acc.protection.push(p.protection);
                    acc.accrual.push(p.accrual);
                }
                acc.seen += frame.points.len();
                if acc.seen > acc.head.points {
                    return Err(c.fail(format!("option {} received too many points", frame.index)));
                }
                if acc.seen == acc.head.points {
                    let done = open.take().expect("checked above");
                    c.send(
                        &output,
                        Totals::Legs {
                            index: done.head.index,
                            recovery: done.head.recovery,
                            premium: done.premium.total(),
                            protection: done.protection.total(),
                            accrual: done.accrual.total(),
                        },
                    )?;
                }
            }
            Flow::Failed(index, e) => c.send(&output, Totals::Failed(index, e))?,
        }
    }
    if let Some(o) = open {
        return Err(c.fail(format!("batch ended inside option {}", o.head.index)));
    }
    c.finish(output)
}

fn combine_stage(
    c: &mut StageCtx,
    input: &StreamReceiver<Totals>,
    output: StreamSender<Result<SpreadResult>>,
) -> StageResult<()> {
    while let Some(msg) = c.recv(input)? {
        let result = match msg {
            Totals::Legs {
                index,
                recovery,
                premium,
                protection,
                accrual,
            } => {
                let legs = LegValues {
                    premium_pv: premium,
                    payoff_pv: (1.0 - recovery) * protection,
                    accrual_pv: accrual,
                };
                fair_spread(&legs)
                    .map(|spread_bps| SpreadResult {
                        option_index: index,
                        spread_bps,
                        legs,
                    })
                    .map_err(|e| e.at_option(index))
            }
            Totals::Failed(index, e) => Err(e.at_option(index)),
        };
        c.send(&output, result)?;
    }
    c.finish(output)
}

fn emit_stage(
    c: &mut StageCtx,
    input: &StreamReceiver<Result<SpreadResult>>,
    base_index: usize,
) -> StageResult<BatchResults> {
    let mut results = Vec::new();
    while let Some(result) = c.recv(input)? {
        let expected = base_index + results.len();
        let index = match &result {
            Ok(r) => r.option_index,
            Err(CdsError::Option { index, .. }) => *index,
            Err(e) => return Err(c.fail(format!("untagged result error: {e}"))),
        };
        if index != expected {
            return Err(c.fail(format!(
                "result for option {index} arrived in slot {expected}"
            )));
        }
        results.push(result);
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::RatePoint;
    use crate::pricing::price_option;

    fn curves() -> (TermStructure, TermStructure) {
        let ir = TermStructure::new(
            CurveKind::Interest,
            (1..=40).map(|i| RatePoint::new(0.25 * f64::from(i), 0.01 + 0.001 * f64::from(i % 7))),
        )
        .unwrap();
        let hz = TermStructure::new(
            CurveKind::Hazard,
            (0..40).map(|i| RatePoint::new(0.25 * f64::from(i), 0.005 + 0.002 * f64::from(i % 5))),
        )
        .unwrap();
        (ir, hz)
    }

    fn options(n: usize) -> Vec<CdsOption> {
        (0..n)
            .map(|i| {
                CdsOption::new(
                    0.5 + (i % 13) as f64 * 0.7,
                    [1, 2, 4, 12][i % 4],
                    (i % 9) as f64 / 10.0,
                )
                .unwrap()
            })
            .collect()
    }

    fn assert_matches_oracle(
        results: &BatchResults,
        opts: &[CdsOption],
        ir: &TermStructure,
        hz: &TermStructure,
    ) {
        assert_eq!(results.len(), opts.len());
        for (i, (got, opt)) in results.iter().zip(opts).enumerate() {
            let want = price_option(opt, ir, hz, i).unwrap();
            let got = got.as_ref().unwrap();
            assert_eq!(got.option_index, i);
            let rel = (got.spread_bps - want.spread_bps).abs() / want.spread_bps.abs().max(1e-300);
            assert!(
                rel <= 1e-12 || got.spread_bps == want.spread_bps,
                "option {i}: {rel}"
            );
        }
    }

    #[test]
    fn single_option_matches_oracle() {
        let (ir, hz) = curves();
        let opts = options(1);
        let out = run_pipeline(&opts, &ir, &hz, &EngineConfig::default()).unwrap();
        assert_matches_oracle(&out, &opts, &ir, &hz);
    }

    #[test]
    fn many_configs_match_oracle() {
        let (ir, hz) = curves();
        let opts = options(150);
        for (v, cap, frame, lanes) in [(1, 2, 1, 1), (3, 2, 5, 7), (6, 64, 32, 7), (8, 5, 3, 16)] {
            let cfg = EngineConfig {
                replication: v,
                stream_capacity: cap,
                frame_size: frame,
                lanes,
                ..EngineConfig::default()
            };
            let out = run_pipeline(&opts, &ir, &hz, &cfg).unwrap();
            assert_matches_oracle(&out, &opts, &ir, &hz);
        }
    }

    #[test]
    fn zero_hazard_prices_to_zero() {
        let (ir, _) = curves();
        let hz = TermStructure::flat(CurveKind::Hazard, 0.0).unwrap();
        let out = run_pipeline(&options(20), &ir, &hz, &EngineConfig::default()).unwrap();
        for r in out {
            let r = r.unwrap();
            assert_eq!(r.spread_bps, 0.0);
            assert_eq!(r.legs.payoff_pv, 0.0);
        }
    }

    #[test]
    fn bad_option_is_reported_in_place() {
        let (ir, hz) = curves();
        let mut opts = options(5);
        opts[2].maturity = -3.0;
        opts[4].recovery_rate = 2.0;
        let out = run_pipeline(&opts, &ir, &hz, &EngineConfig::default()).unwrap();
        assert!(out[0].is_ok() && out[1].is_ok() && out[3].is_ok());
        assert!(matches!(out[2], Err(CdsError::Option { index: 2, .. })));
        assert!(matches!(out[4], Err(CdsError::Option { index: 4, .. })));
    }

    #[test]
    fn invalid_config_rejected() {
        let (ir, hz) = curves();
        for cfg in [
            EngineConfig {
                lanes: 0,
                ..Default::default()
            },
            EngineConfig {
                replication: 0,
                ..Default::default()
            },
            EngineConfig {
                stream_capacity: 1,
                ..Default::default()
            },
            EngineConfig {
                frame_size: 0,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                run_pipeline(&options(2), &ir, &hz, &cfg),
                Err(CdsError::InvalidConfig(_))
            ));
        }
        assert!(run_pipeline(&options(2), &hz, &ir, &EngineConfig::default()).is_err());
    }

    #[test]
    fn dead_stage_is_named() {
        let (ir, hz) = curves();
        let opts = options(200);
        for stage in ["payoff", "survival[2]", "time-points", "combine"] {
            let fault = Fault {
                stage: stage.to_owned(),
                after_sends: 10,
            };
            let err = run_graph(
                opts.iter().copied(),
                0,
                "",
                &ir,
                &hz,
                &EngineConfig::default(),
                None,
                Some(&fault),
            )
            .unwrap_err();
            match err {
                CdsError::Stage { stage: s, reason } => {
                    assert_eq!(s, stage);
                    assert!(reason.contains("injected fault"), "{reason}");
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn end_of_batch_after_k_options() {
        let (ir, hz) = curves();
        let opt = options(1)[0];
        let k = 37;
        let out = run_pipeline_stream(
            std::iter::repeat_n(opt, k),
            &ir,
            &hz,
            &EngineConfig::default(),
            None,
        )
        .unwrap();
        assert_eq!(out.len(), k);
        let first = out[0].as_ref().unwrap().spread_bps;
        assert!(out
            .iter()
            .all(|r| r.as_ref().unwrap().spread_bps.to_bits() == first.to_bits()));
    }

    #[test]
    fn empty_batch_starts_and_stops_cleanly() {
        let (ir, hz) = curves();
        let probe = Probe::new();
        let out = run_pipeline_probed(&[], &ir, &hz, &EngineConfig::default(), &probe).unwrap();
        assert!(out.is_empty());
        assert!(probe
            .snapshot()
            .iter()
            .all(|s| s.starts == 1 && s.stops == 1));
    }

    #[test]
    fn point_counts_reach_accumulator() {
        let (ir, hz) = curves();
        let opts = options(64);
        let total: usize = opts
            .iter()
            .map(|o| generate_time_points(o).unwrap().len())
            .sum();
        let probe = Probe::new();
        run_pipeline_probed(&opts, &ir, &hz, &EngineConfig::default(), &probe).unwrap();
        assert_eq!(probe.get("accumulate").unwrap().items_in, total as u64);
        assert_eq!(probe.get("payment").unwrap().items_in, total as u64);
        let survival: u64 = probe
            .snapshot()
            .iter()
            .filter(|s| s.stage.starts_with("survival["))
            .map(|s| s.items_in)
            .sum();
        assert_eq!(survival, total as u64);
        assert_eq!(probe.get("combine").unwrap().messages_in, 64);
        assert_eq!(probe.get("emit").unwrap().messages_in, 64);
    }
}
