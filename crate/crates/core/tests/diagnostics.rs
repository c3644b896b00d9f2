use proptest::prelude::*;

use swbench::checkpoint::{read_checkpoint, write_checkpoint};
use swbench::diagnostics::apriori::{check_apriori, cutoff_tail, select_cutoff};
use swbench::diagnostics::ledger::{build_ledger, EstimateLedger};
use swbench::diagnostics::sweeps::hybrid_decay_table;
use swbench::friedrichs::{run, RunConfig};
use swbench::initial_data::InitialData;
use swbench::littlewood_paley::make_partition;
use swbench::PeriodicGrid;

fn small_run() -> (
    swbench::littlewood_paley::DyadicPartition,
    swbench::friedrichs::Trajectory,
) {
    let g = PeriodicGrid::new(2, 32).unwrap();
    let p = make_partition(&g);
    let d = InitialData::Multiscale {
        q_target: 0.1,
        u_target: 0.1,
        decay: 0.5,
        j_lo: 0,
        j_hi: 3,
        k_max: 10.0,
        seed: 5,
    }
    .generate(&p)
    .unwrap();
    let mut cfg = RunConfig::new(0.1, 10.0);
    cfg.dt = Some(0.01);
    let t = run(&d.q0, &d.u0, &cfg).unwrap();
    (p, t)
}

#[test]
fn ledger_is_monotone_and_nonnegative() {
    let (p, t) = small_run();
    let l = build_ledger(&p, &t);
    assert_eq!(l.rows.len(), t.states.len());
    assert!(l.is_monotone());
    for r in &l.rows {
        for x in [
            r.q_cl,
            r.ubar_cl,
            r.ubar_l1,
            r.beta,
            r.v,
            r.h1,
            r.ul_cl_22,
            r.ul_l1_22,
            r.div_ul_l1,
        ] {
            assert!(x >= 0.0 && x.is_finite());
        }
    }
    let (ubar, ul) = l.regularity_pair();
    assert!(ubar.is_finite() && ubar > 0.0 && ul.is_finite() && ul > 0.0);
    assert_eq!(l.ubar_l1_profile.len(), p.block_count());
    assert_eq!(EstimateLedger::column_names().len(), 16);
}

#[test]
fn ledger_recomputed_from_checkpoint_is_bit_identical() {
    let (p, t) = small_run();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    write_checkpoint(&path, &t.states).unwrap();
    let states = read_checkpoint(&path).unwrap();
    let mut t2 = t.clone();
    t2.states = states;
    let a = build_ledger(&p, &t);
    let b = build_ledger(&p, &t2);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a, b);
}

#[test]
fn hypothesis_gate_withholds_conclusions() {
    let (p, t) = small_run();
    let l = build_ledger(&p, &t);
    let r = check_apriori(&l, 0.1, 3, None);
    // Over t = 0.1 the 2^{αm} T^{α/2} term alone exceeds η².
    assert!(!r.hypotheses_hold());
    assert!(r.conclusions.is_none());
    assert!(r.first_violation.as_deref().unwrap().starts_with("H"));
}

#[test]
fn single_mode_cutoff_is_first_empty_tail() {
    let g = PeriodicGrid::new(2, 128).unwrap();
    let p = make_partition(&g);
    for j0 in 0..5 {
        let k = 1i64 << j0;
        let q = swbench::SpectralField::from_fn(g, 1, |x, _| 1e-3 * (k as f64 * x[0]).cos());
        let m = select_cutoff(&p, &q, 1e-2).unwrap();
        // Only round-off from sampling remains beyond the cut-off.
        assert!(cutoff_tail(&p, &q, m) <= 1e-15);
        assert!(cutoff_tail(&p, &q, m - 1) > 1e-4);
        assert_eq!(m, j0 + 1);
    }
}

#[test]
fn hybrid_table_shows_high_frequency_damping() {
    let g = PeriodicGrid::new(2, 64).unwrap();
    let p = make_partition(&g);
    let q0 = swbench::SpectralField::from_fn(g, 1, |x, _| 0.1 * x[0].cos() + 0.1 * (16.0 * x[1]).cos());
    let u0 = swbench::SpectralField::zeros(g, 2);
    let rows = hybrid_decay_table(&p, &q0, &u0, 1.0, 2.0, 2, &[0.0, 1.0, 2.0]).unwrap();
    assert!(rows[1].high < rows[0].high && rows[2].high < rows[1].high);
    // High modes decay at about P/ν = 1/2 per unit time, not like heat e^{−256 t}.
    let rate = (rows[1].high / rows[2].high).ln();
    assert!((rate - 0.5).abs() < 0.05, "rate {rate}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn cutoff_is_monotone_in_eta(seed in 0u64..1000, e1 in 0.05f64..1.0, e2 in 0.05f64..1.0) {
        let g = PeriodicGrid::new(2, 32).unwrap();
        let p = make_partition(&g);
        let d = InitialData::Multiscale { q_target: 0.3, u_target: 0.1, decay: 0.6, j_lo: 0, j_hi: 3, k_max: 15.0, seed }
            .generate(&p)
            .unwrap();
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let m_lo = select_cutoff(&p, &d.q0, lo).unwrap();
        let m_hi = select_cutoff(&p, &d.q0, hi).unwrap();
        prop_assert!(m_lo >= m_hi);
    }
}
