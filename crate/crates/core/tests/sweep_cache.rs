use std::collections::BTreeSet;

use lel_core::sieve::{shape_classes, sweep, SweepMode, SweepOptions, SweepTable};
use lel_core::store::{CacheRecord, Store, ENGINE_VERSION};

fn opts(max_len: usize, mode: SweepMode, dedup: bool) -> SweepOptions {
    SweepOptions { max_len, mode, precision: 192, dedup }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn bits(t: &SweepTable) -> Vec<(usize, u64, String)> {
    t.rows.iter().map(|r| (r.len, r.count, r.s.to_string_radix(16, None))).collect()
}

#[test]
fn thread_count_does_not_change_the_table() {
    for (mode, dedup) in [(SweepMode::Numeric, true), (SweepMode::Numeric, false), (SweepMode::Exact, true)] {
        let a = in_pool(1, || sweep(&opts(10, mode, dedup), None).unwrap());
        let b = in_pool(4, || sweep(&opts(10, mode, dedup), None).unwrap());
        assert_eq!(bits(&a.table), bits(&b.table), "{mode:?} dedup {dedup}");
    }
}

#[test]
fn dedup_agrees_with_per_polygon_sweep() {
    let a = sweep(&opts(10, SweepMode::Numeric, true), None).unwrap();
    let b = sweep(&opts(10, SweepMode::Numeric, false), None).unwrap();
    assert_eq!(b.computed, 708);
    for (x, y) in a.table.rows.iter().zip(&b.table.rows) {
        assert_eq!(x.count, y.count);
        let d = rug::Float::with_val(192, &x.s - &y.s).abs().to_f64();
        assert!(d < 1e-50, "L = {}: {d:e}", x.len);
    }
}

#[test]
fn exact_and_numeric_modes_agree() {
    let a = sweep(&opts(10, SweepMode::Exact, true), None).unwrap();
    let b = sweep(&opts(10, SweepMode::Numeric, true), None).unwrap();
    for (x, y) in a.table.rows.iter().zip(&b.table.rows) {
        let d = rug::Float::with_val(192, &x.s - &y.s).abs().to_f64();
        assert!(d < 1e-50, "L = {}: {d:e}", x.len);
    }
}

#[test]
fn multiplicities_cover_every_anchored_polygon() {
    let classes = shape_classes(12);
    let total: u64 = classes.iter().map(|c| c.multiplicity).sum();
    assert_eq!(total, 3684);
    for c in classes.iter().filter(|c| c.ell >= 4) {
        assert_eq!(c.multiplicity % (2 * c.ell as u64), 0, "{}", c.representative);
    }
}

#[test]
fn resume_after_interruption() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.lel.jsonl");
    let o = opts(10, SweepMode::Exact, true);

    let mut store = Store::open(&path, false).unwrap();
    let full = sweep(&o, Some(&mut store)).unwrap();
    assert_eq!(full.cached, 0);
    drop(store);

    // Keep the first half of the lines, as if the run had been killed.
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let half = lines.len() / 2;
    std::fs::write(&path, lines[..half].join("\n") + "\n").unwrap();
    let kept: BTreeSet<String> =
        lines[..half].iter().map(|l| serde_json::from_str::<CacheRecord>(l).unwrap().shape_key).collect();

    let mut store = Store::open(&path, false).unwrap();
    let all: BTreeSet<String> = shape_classes(10).iter().map(|c| c.key.encode()).collect();
    let pending = store.resume_sweep(10);
    assert_eq!(pending, all.difference(&kept).cloned().collect());

    let resumed = in_pool(3, || sweep(&o, Some(&mut store)).unwrap());
    assert_eq!(resumed.computed, pending.len());
    assert_eq!(resumed.cached, kept.len());
    assert_eq!(bits(&resumed.table), bits(&full.table));
    drop(store);

    let mut store = Store::open(&path, false).unwrap();
    assert!(store.resume_sweep(10).is_empty());
    let replay = sweep(&o, Some(&mut store)).unwrap();
    assert_eq!(replay.computed, 0);
    assert_eq!(bits(&replay.table), bits(&full.table));
}

#[test]
fn stale_records_are_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.lel.jsonl");
    let o = opts(6, SweepMode::Numeric, true);
    let mut store = Store::open(&path, false).unwrap();
    let fresh = sweep(&o, Some(&mut store)).unwrap();
    drop(store);

    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut r: CacheRecord = serde_json::from_str(&lines[0]).unwrap();
    r.engine_version = "lel-0.0.1".into();
    r.numeric = "1".into();
    lines[0] = serde_json::to_string(&r).unwrap();
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();

    let mut store = Store::open(&path, false).unwrap();
    assert_eq!(store.stale_count(), 1);
    let again = sweep(&o, Some(&mut store)).unwrap();
    assert_eq!(again.computed, 1);
    assert_eq!(bits(&again.table), bits(&fresh.table));
    assert_eq!(store.lookup(&r.shape_key).unwrap().engine_version, ENGINE_VERSION);
    drop(store);

    // One line per shape key after the recompute.
    let text = std::fs::read_to_string(&path).unwrap();
    let keys: Vec<String> =
        text.lines().map(|l| serde_json::from_str::<CacheRecord>(l).unwrap().shape_key).collect();
    let unique: BTreeSet<&String> = keys.iter().collect();
    assert_eq!(keys.len(), unique.len());
}

#[test]
fn precision_mismatch_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.lel.jsonl");
    let mut store = Store::open(&path, false).unwrap();
    sweep(&opts(6, SweepMode::Numeric, true), Some(&mut store)).unwrap();
    let other = SweepOptions { precision: 128, ..opts(6, SweepMode::Numeric, true) };
    let again = sweep(&other, Some(&mut store)).unwrap();
    assert_eq!(again.cached, 0);
}
