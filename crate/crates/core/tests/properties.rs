use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tenkit::balance::{assign_slice_blocks, split_fibers, split_hbcsf, SplitConfig};
use tenkit::formats::{classify_slices, storage_words, CsfTensor, HbCsfTensor, SliceClass};
use tenkit::kernels::{max_relative_row_deviation, mttkrp_coo, FactorMatrix, Mttkrp};
use tenkit::sim::{simulate, MachineModel};
use tenkit::{cp_als, CooTensor, CpdConfig, Exec, Format, ModeOrder, ModeReps};

fn random_coo(seed: u64, order: usize, max_dim: usize, max_nnz: usize) -> CooTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims: Vec<usize> = (0..order).map(|_| rng.gen_range(1..=max_dim)).collect();
    let m = rng.gen_range(1..=max_nnz);
    let entries: Vec<(Vec<u32>, f64)> = (0..m)
        .map(|_| {
            let idx = dims
                .iter()
                .map(|&d| {
                    let u: f64 = rng.gen();
                    ((u * u * d as f64) as usize).min(d - 1) as u32
                })
                .collect();
            (idx, rng.gen_range(-1.0..1.0))
        })
        .collect();
    CooTensor::from_entries(dims, entries).unwrap().canonicalize()
}

fn random_order(seed: u64, n: usize) -> ModeOrder {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x9e37));
    ModeOrder::new(p).unwrap()
}

fn factors(seed: u64, dims: &[usize], rank: usize) -> Vec<FactorMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    dims.iter().map(|&d| FactorMatrix::random(d, rank, &mut rng)).collect()
}

fn multiset(t: &CooTensor) -> Vec<(Vec<u32>, u64)> {
    let mut v: Vec<_> = t.entries().map(|(i, x)| (i.to_vec(), x.to_bits())).collect();
    v.sort();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn builds_preserve_nonzeros(seed in any::<u64>(), order in 3usize..=4) {
        let t = random_coo(seed, order, 9, 200);
        let mo = random_order(seed, order);
        let want = multiset(&t);
        prop_assert_eq!(multiset(&CsfTensor::build(&t, &mo).unwrap().flatten()), want.clone());
        prop_assert_eq!(multiset(&HbCsfTensor::build(&t, &mo).unwrap().flatten()), want);
    }

    #[test]
    fn storage_orderings(seed in any::<u64>()) {
        let t = random_coo(seed, 3, 30, 400);
        let mo = random_order(seed, 3);
        let csf = CsfTensor::build(&t, &mo).unwrap();
        let hb = HbCsfTensor::build(&t, &mo).unwrap();
        let (s, f, m) = (csf.slice_count(), csf.fiber_count(), t.nnz());
        let w_coo = storage_words(&t).index_words;
        let w_csf = storage_words(&csf).index_words;
        let w_hb = storage_words(&hb).index_words;
        prop_assert_eq!(w_csf <= w_coo, 2 * s + 2 * f <= 2 * m);
        prop_assert!(w_hb <= w_csf);
        prop_assert!(w_hb >= m && w_hb <= 3 * m + 2 * s + 2 * f);
        if w_hb > 3 * m {
            eprintln!("HB-CSF uses {w_hb} words for M={m}, above the 3M summary band");
        }
    }

    #[test]
    fn slice_classes_partition(seed in any::<u64>()) {
        let t = random_coo(seed, 3, 20, 300);
        let csf = CsfTensor::build(&t, &ModeOrder::identity(3)).unwrap();
        let classes = classify_slices(&csf);
        prop_assert_eq!(classes.len(), csf.slice_count());
        let hb = HbCsfTensor::build(&t, &ModeOrder::identity(3)).unwrap();
        let (a, b, c) = hb.census();
        prop_assert_eq!(a + b + c, csf.slice_count());
        prop_assert_eq!(a, classes.iter().filter(|&&k| k == SliceClass::Coo).count());
        prop_assert_eq!(hb.coo_part().nnz() + hb.csl_part().nnz() + hb.csf_part().nnz(), t.nnz());
    }

    #[test]
    fn formats_agree_with_coo(seed in any::<u64>(), order in 3usize..=4, rank in 1usize..=9) {
        let t = random_coo(seed, order, 10, 300);
        let f = factors(seed.wrapping_add(1), t.dims(), rank);
        let mode = (seed % order as u64) as usize;
        let (want, ops) = mttkrp_coo(&t, &f, mode, Exec::Sequential).unwrap();
        prop_assert_eq!(ops.total(), (order * t.nnz() * rank) as u64);
        let mo = ModeOrder::for_mode(t.dims(), mode).unwrap();
        let reps: Vec<Box<dyn Mttkrp>> = vec![
            Box::new(CsfTensor::build(&t, &mo).unwrap()),
            Box::new(HbCsfTensor::build(&t, &mo).unwrap()),
            Box::new(split_hbcsf(&HbCsfTensor::build(&t, &mo).unwrap(), 2).unwrap()),
        ];
        for r in &reps {
            for exec in [Exec::Sequential, Exec::Parallel] {
                let (got, _) = r.mttkrp(&f, mode, exec).unwrap();
                prop_assert!(max_relative_row_deviation(&got, &want) <= 1e-12);
            }
        }
    }

    #[test]
    fn doubling_scales_exactly(seed in any::<u64>()) {
        let t = random_coo(seed, 3, 12, 200);
        let f = factors(seed, t.dims(), 4);
        let mo = ModeOrder::for_mode(t.dims(), 1).unwrap();
        let a = HbCsfTensor::build(&t, &mo).unwrap().mttkrp(&f, 1, Exec::Sequential).unwrap().0;
        let b = HbCsfTensor::build(&t.scaled(2.0), &mo).unwrap().mttkrp(&f, 1, Exec::Sequential).unwrap().0;
        prop_assert_eq!(a.scaled(2.0), b);
    }

    #[test]
    fn split_and_schedule(seed in any::<u64>(), tau in 1usize..6, block in 1usize..5) {
        let t = random_coo(seed, 3, 8, 400);
        let csf = CsfTensor::build(&t, &ModeOrder::identity(3)).unwrap();
        let split = split_fibers(&csf, tau).unwrap();
        split.validate().unwrap();
        prop_assert!((0..split.fiber_count()).all(|x| split.fiber_nnz(x) <= tau));
        prop_assert_eq!(multiset(&split.flatten()), multiset(&csf.flatten()));
        let cfg = SplitConfig { fiber_threshold: tau, block_size: block * 2, warp_size: 2 };
        let schedule = assign_slice_blocks(&split, &cfg).unwrap();
        schedule.check_covers(&split).unwrap();
        for s in 0..split.slice_count() {
            let m = split.slice_nnz(s);
            prop_assert_eq!(schedule.multiplicity()[s], m.div_ceil(cfg.block_size).max(1));
        }
        let machine = MachineModel { num_sms: 3, warps_per_block: block, warp_size: 2, blocks_per_sm: 2 };
        let rep = simulate(&schedule, &split, &machine).unwrap();
        let longest = rep.per_block_cycles.iter().copied().max().unwrap_or(0);
        let capacity = (machine.slots() * machine.warps_per_block) as u64;
        prop_assert!(rep.makespan_cycles >= longest);
        prop_assert!(rep.makespan_cycles >= rep.total_work_cycles.div_ceil(capacity));
        prop_assert!(rep.sm_efficiency_proxy <= 1.0 + 1e-12 && rep.occupancy_proxy <= 1.0 + 1e-12);
    }
}

#[test]
fn cp_als_is_monotone_on_sparse_data() {
    for seed in 0..6u64 {
        let t = random_coo(seed, 3, 15, 300);
        let reps = ModeReps::build(&t, Format::Bcsf, &SplitConfig { fiber_threshold: 3, ..Default::default() }).unwrap();
        let out = cp_als(&reps, &CpdConfig { rank: 3, max_iters: 25, fit_tol: 0.0, seed, exec: Exec::Parallel }).unwrap();
        for w in out.history.windows(2) {
            assert!(w[1].fit >= w[0].fit - 1e-8, "seed {seed}: {} -> {}", w[0].fit, w[1].fit);
        }
        for f in &out.model.factors {
            for n in f.column_norms() {
                assert!((n - 1.0).abs() < 1e-12 || n == 0.0);
            }
        }
    }
}

#[test]
fn formats_have_the_same_fit_history() {
    let t = random_coo(42, 3, 12, 400);
    let cfg = CpdConfig { rank: 4, max_iters: 15, fit_tol: 0.0, seed: 3, exec: Exec::Sequential };
    let split = SplitConfig { fiber_threshold: 2, ..Default::default() };
    let base = cp_als(&ModeReps::build(&t, Format::Coo, &split).unwrap(), &cfg).unwrap();
    for format in [Format::Csf, Format::Bcsf, Format::Hbcsf] {
        let other = cp_als(&ModeReps::build(&t, format, &split).unwrap(), &cfg).unwrap();
        for (a, b) in base.history.iter().zip(&other.history) {
            assert!((a.fit - b.fit).abs() <= 1e-7, "{format}: {} vs {}", a.fit, b.fit);
        }
    }
}

#[test]
fn slice_ids_survive_every_format() {
    let t = random_coo(7, 4, 6, 150);
    let mo = ModeOrder::for_mode(t.dims(), 2).unwrap();
    let want: BTreeSet<u32> = t.entries().map(|(i, _)| i[2]).collect();
    let hb = HbCsfTensor::build(&t, &mo).unwrap();
    let got: BTreeSet<u32> = hb.flatten().entries().map(|(i, _)| i[2]).collect();
    assert_eq!(got, want);
}
