//! Constant curve data is shared by every engine, not copied per engine.
//! Checked by tracking peak heap usage while pricing against a very large
//! hazard curve.

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicUsize, Ordering};

use cds_core::{run_engines, CdsOption, CurveKind, EngineConfig, RatePoint, TermStructure};

struct Tracking;

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Tracking {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = unsafe { System.alloc(layout) };
        if !p.is_null() {
            let now = CURRENT.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
            PEAK.fetch_max(now, Ordering::Relaxed);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        unsafe { System.dealloc(ptr, layout) };
        CURRENT.fetch_sub(layout.size(), Ordering::Relaxed);
    }
}

#[global_allocator]
static GLOBAL: Tracking = Tracking;

fn peak_during(f: impl FnOnce()) -> usize {
    let base = CURRENT.load(Ordering::Relaxed);
    PEAK.store(base, Ordering::Relaxed);
    f();
    PEAK.load(Ordering::Relaxed) - base
}

#[test]
fn curve_memory_does_not_scale_with_engines() {
    let nodes = 1_000_000;
    let hazard = TermStructure::new(
        CurveKind::Hazard,
        (0..nodes).map(|i| RatePoint::new(i as f64 * 1e-4, 0.01 + (i % 10) as f64 * 1e-3)),
    )
    .unwrap();
    let interest = TermStructure::new(
        CurveKind::Interest,
        (0..nodes).map(|i| RatePoint::new(i as f64 * 1e-4, 0.03)),
    )
    .unwrap();
    let curve_bytes = 2 * nodes * 2 * std::mem::size_of::<f64>();
    let options = vec![CdsOption::new(0.25, 4, 0.4).unwrap(); 64];

    let run = |engines| {
        peak_during(|| {
            let cfg = EngineConfig {
                engines,
                ..EngineConfig::default()
            };
            run_engines(&options, &interest, &hazard, &cfg).unwrap();
        })
    };
    let one = run(1);
    let eight = run(8);
    // Copying the curves into each extra engine would add 7 × 32 MB.
    assert!(
        eight < one + curve_bytes,
        "peak with 8 engines {eight} B vs 1 engine {one} B (curves {curve_bytes} B)"
    );
    assert!(one < curve_bytes, "single engine allocated {one} B");
}
