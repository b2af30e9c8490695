//! Cyclic scatter/gather over `V` replicated workers.
//!
//! Message `k` goes to worker `k mod V`, and the gatherer reads worker
//! `k mod V` for output slot `k`, so output order equals input order no
//! matter how the workers are scheduled.

use super::stage::{StageCtx, StageResult};
use super::stream::{StreamReceiver, StreamSender};
use crate::error::CdsError;

pub(crate) fn scatter_with<T>(
    ctx: &mut StageCtx,
    input: &StreamReceiver<T>,
    workers: Vec<StreamSender<T>>,
) -> StageResult<Vec<usize>> {
    if workers.is_empty() {
        return Err(ctx.fail("scatter needs at least one worker"));
    }
    let mut loads = vec![0usize; workers.len()];
    let mut next = 0;
    while let Some(item) = ctx.recv(input)? {
        ctx.send(&workers[next], item)?;
        loads[next] += 1;
        next = (next + 1) % workers.len();
    }
    for worker in workers {
        ctx.finish(worker)?;
    }
    Ok(loads)
}

pub(crate) fn gather_with<T>(
    ctx: &mut StageCtx,
    workers: &[StreamReceiver<T>],
    mut on_item: impl FnMut(&mut T) -> StageResult<()>,
    output: &StreamSender<T>,
) -> StageResult<usize> {
    if workers.is_empty() {
        return Err(ctx.fail("gather needs at least one worker"));
    }
    let mut slot = 0usize;
    loop {
        let from = slot % workers.len();
        match ctx.recv(&workers[from])? {
            Some(mut item) => {
                on_item(&mut item)?;
                ctx.send(output, item)?;
                slot += 1;
            }
            None => {
                // Every other worker must be at its end marker too.
                for (i, rx) in workers.iter().enumerate().filter(|(i, _)| *i != from) {
                    if ctx.recv(rx)?.is_some() {
                        return Err(ctx.fail(format!(
                            "worker {i} produced output after worker {from} ended"
                        )));
                    }
                }
                return Ok(slot);
            }
        }
    }
}

fn detached_error(e: super::stage::StageError) -> CdsError {
    e.error
}

/// Distributes `input` cyclically over `workers`, then sends end-of-batch to
/// each. Returns the number of items each worker received.
pub fn round_robin_scatter<T>(
    input: &StreamReceiver<T>,
    workers: Vec<StreamSender<T>>,
) -> Result<Vec<usize>, CdsError> {
    scatter_with(&mut StageCtx::detached("scatter"), input, workers).map_err(detached_error)
}

/// Reads `workers` cyclically into `output` until end-of-batch, then closes
/// `output`. Returns the number of items forwarded.
pub fn round_robin_gather<T>(
    workers: &[StreamReceiver<T>],
    output: StreamSender<T>,
) -> Result<usize, CdsError> {
    let mut ctx = StageCtx::detached("gather");
    let n = gather_with(&mut ctx, workers, |_| Ok(()), &output).map_err(detached_error)?;
    ctx.finish(output).map_err(detached_error)?;
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::super::stream::bounded;
    use super::*;

    fn run(n: usize, v: usize) -> (Vec<usize>, Vec<usize>) {
        let (in_tx, in_rx) = bounded::<usize>("in", 4);
        let (out_tx, out_rx) = bounded::<usize>("out", 4);
        let (w_tx, w_rx): (Vec<_>, Vec<_>) =
            (0..v).map(|i| bounded::<usize>(format!("w{i}"), 2)).unzip();
        std::thread::scope(|s| {
            s.spawn(move || {
                for k in 0..n {
                    in_tx.send(k).unwrap();
                }
                in_tx.finish().unwrap();
            });
            let scatter = s.spawn(|| round_robin_scatter(&in_rx, w_tx).unwrap());
            s.spawn(move || round_robin_gather(&w_rx, out_tx).unwrap());
            let mut out = Vec::new();
            while let Some(x) = out_rx.recv().unwrap() {
                out.push(x);
            }
            (scatter.join().unwrap(), out)
        })
    }

    #[test]
    fn single_worker_is_identity() {
        let (loads, out) = run(17, 1);
        assert_eq!(loads, vec![17]);
        assert_eq!(out, (0..17).collect::<Vec<_>>());
    }

    #[test]
    fn ten_over_three() {
        let (loads, out) = run(10, 3);
        assert_eq!(loads, vec![4, 3, 3]);
        assert_eq!(out, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn empty_input() {
        let (loads, out) = run(0, 4);
        assert_eq!(loads, vec![0; 4]);
        assert!(out.is_empty());
    }

    #[test]
    fn order_preserved_with_random_worker_delays() {
        use rand::{Rng, SeedableRng};
        for seed in 0..20u64 {
            let v = 1 + (seed as usize % 6);
            let n = 200;
            let (in_tx, in_rx) = bounded::<usize>("in", 3);
            let (out_tx, out_rx) = bounded::<usize>("out", 3);
            let (w_tx, w_rx): (Vec<_>, Vec<_>) =
                (0..v).map(|i| bounded::<usize>(format!("w{i}"), 2)).unzip();
            let (r_tx, r_rx): (Vec<_>, Vec<_>) =
                (0..v).map(|i| bounded::<usize>(format!("r{i}"), 2)).unzip();
            let out = std::thread::scope(|s| {
                s.spawn(move || {
                    for k in 0..n {
                        in_tx.send(k).unwrap();
                    }
                    in_tx.finish().unwrap();
                });
                s.spawn(|| round_robin_scatter(&in_rx, w_tx).unwrap());
                for (i, (rx, tx)) in w_rx.into_iter().zip(r_tx).enumerate() {
                    s.spawn(move || {
                        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed * 100 + i as u64);
                        while let Some(x) = rx.recv().unwrap() {
                            if rng.random_bool(0.3) {
                                std::thread::sleep(std::time::Duration::from_micros(
                                    rng.random_range(0..50),
                                ));
                            } else {
                                std::thread::yield_now();
                            }
                            tx.send(x).unwrap();
                        }
                        tx.finish().unwrap();
                    });
                }
                s.spawn(move || round_robin_gather(&r_rx, out_tx).unwrap());
                let mut out = Vec::new();
                while let Some(x) = out_rx.recv().unwrap() {
                    out.push(x);
                }
                out
            });
            assert_eq!(out, (0..n).collect::<Vec<_>>(), "seed {seed}");
        }
    }

    #[test]
    fn dead_worker_poisons_gather() {
        let (out_tx, _out_rx) = bounded::<usize>("out", 4);
        let (a_tx, a_rx) = bounded::<usize>("worker-0", 2);
        let (b_tx, b_rx) = bounded::<usize>("worker-1", 2);
        a_tx.send(1).unwrap();
        drop(b_tx);
        drop(a_tx);
        let err = round_robin_gather(&[a_rx, b_rx], out_tx).unwrap_err();
        assert!(err.to_string().contains("worker-1"), "{err}");
    }
}
