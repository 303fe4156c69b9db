use penalab_core::harness::suite::{run_criterion, SuiteConfig};
use penalab_core::penalized_mc::{penalized_event, PenaltyKind};
use penalab_core::{DensitySpec, RectEvent, RngStream};

#[test]
fn estimates_are_bitwise_reproducible() {
    let pen = PenaltyKind::PhiOfMax(DensitySpec::uniform(1.0).unwrap());
    let ev = RectEvent::new(1.0, 0.0, 0.5).unwrap();
    let a = penalized_event(&pen, &ev, 64.0, 20_000, RngStream::new(5, 1)).unwrap();
    let b = penalized_event(&pen, &ev, 64.0, 20_000, RngStream::new(5, 1)).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    let one_thread = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = one_thread.install(|| penalized_event(&pen, &ev, 64.0, 20_000, RngStream::new(5, 1)).unwrap());
    assert_eq!(a.value.to_bits(), c.value.to_bits());
}

#[test]
fn suite_reports_are_reproducible() {
    let cfg = SuiteConfig { seed: 3, scale: 0.05 };
    let a = run_criterion(6, &cfg);
    let b = run_criterion(6, &cfg);
    assert_eq!(a, b);
    assert!(run_criterion(99, &cfg).error.is_some());
}
