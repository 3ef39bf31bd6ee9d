//! Module invariants as named checks. Each returns `Err` with a short
//! description of the first counterexample.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twr_pcd::bp::bp_decode;
use twr_pcd::catalog::MappingCatalog;
use twr_pcd::channel::{ma_superimpose, snr_to_sigma2, ChannelState, Constellation, C64};
use twr_pcd::codes::{regular_504, toy_code};
use twr_pcd::gf::{GfField, GfSymbol};
use twr_pcd::ldpc::{lift_to_gfq, syndrome, ParityCheckMatrix, SystematicEncoder};
use twr_pcd::mapping::{msmm, symbol_med, xor_map, ClusterMap, MapKind};
use twr_pcd::outage::{capacity_mc, outage_lower_bound, OutageBudget};
use twr_pcd::par::Exec;
use twr_pcd::pcd::{CheckKernel, PcdDecoder, PcdGraph};
use twr_pcd::sim::{run_experiment, run_point, write_curve_csv, ExperimentConfig, FrameContext, Scheme};
use twr_pcd::tab::{build_decoder_tab, build_encoder_tab, CorrelativeRow};

use super::oracles::{codebook, gf4_poly_mul};

pub type Check = fn() -> Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

/// Every named invariant check.
pub fn all() -> Vec<(&'static str, Check)> {
    vec![
        ("gf field axioms", gf_field_axioms),
        ("gf inverses", gf_inverses),
        ("gf multiplication table", gf_mul_table),
        ("ldpc encoded words have zero syndrome", ldpc_encode_syndrome),
        ("ldpc bp ignores check order", ldpc_bp_check_order),
        ("ldpc lifted codes share codewords", ldpc_lift_relabel),
        ("channel noiseless linearity", channel_linearity),
        ("channel seed reproducibility", channel_reproducible),
        ("channel sigma2 decreasing", channel_sigma2_decreasing),
        ("mapping rotation and scaling", mapping_rotation_scaling),
        ("mapping refinement", mapping_refinement),
        ("mapping msmm keeps exclusive law", mapping_msmm_exclusive),
        ("tab round trip", tab_round_trip),
        ("tab backing assignments", tab_backing),
        ("tab weight and prior consistency", tab_weight_prior),
        ("tab uniform rows identical", tab_uniform_rows),
        ("pcd message normalization", pcd_normalization),
        ("pcd satisfied words pass hard tab", pcd_decide_consistent),
        ("pcd more iterations help", pcd_iteration_benefit),
        ("outage capacity bounds", outage_capacity_bounds),
        ("outage circular symmetry", outage_circular_symmetry),
        ("outage reproducibility", outage_reproducible),
        ("sim byte-identical csv", sim_csv_reproducible),
        ("sim parallel equals sequential", sim_parallel_sequential),
        ("sim converged frames satisfy hard tab", sim_converged_satisfies),
        ("sim intervals bracket estimates", sim_intervals),
    ]
}

fn run<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&s, f).map_err(|e| e.to_string())
}

fn gf4() -> GfField {
    GfField::new(4).unwrap()
}

pub fn gf_field_axioms() -> Result<(), String> {
    let f = gf4();
    let s = |v: u8| GfSymbol(v);
    for a in 0..4u8 {
        for b in 0..4u8 {
            ensure!(f.add(s(a), s(b)).unwrap() == f.add(s(b), s(a)).unwrap(), "add not commutative at {a},{b}");
            ensure!(f.mul(s(a), s(b)).unwrap() == f.mul(s(b), s(a)).unwrap(), "mul not commutative at {a},{b}");
            for c in 0..4u8 {
                let ab = f.add(s(a), s(b)).unwrap();
                let bc = f.add(s(b), s(c)).unwrap();
                ensure!(f.add(ab, s(c)).unwrap() == f.add(s(a), bc).unwrap(), "add not associative");
                let ab = f.mul(s(a), s(b)).unwrap();
                let bc = f.mul(s(b), s(c)).unwrap();
                ensure!(f.mul(ab, s(c)).unwrap() == f.mul(s(a), bc).unwrap(), "mul not associative");
                let lhs = f.mul(s(a), f.add(s(b), s(c)).unwrap()).unwrap();
                let rhs = f.add(f.mul(s(a), s(b)).unwrap(), f.mul(s(a), s(c)).unwrap()).unwrap();
                ensure!(lhs == rhs, "not distributive at {a},{b},{c}");
            }
        }
    }
    Ok(())
}

pub fn gf_inverses() -> Result<(), String> {
    for q in [2, 4, 8, 16, 256] {
        let f = GfField::new(q).unwrap();
        for a in f.nonzero() {
            let inv = f.inv(GfSymbol(a)).unwrap();
            ensure!(f.mul(GfSymbol(a), inv).unwrap() == GfSymbol(1), "a * inv(a) != 1 for a={a}, q={q}");
        }
    }
    Ok(())
}

pub fn gf_mul_table() -> Result<(), String> {
    let f = gf4();
    for a in 0..4u8 {
        for b in 0..4u8 {
            ensure!(f.mul_raw(a, b) == gf4_poly_mul(a, b), "mul({a},{b}) differs from polynomial product");
        }
    }
    Ok(())
}

fn random_word(rng: &mut ChaCha8Rng, n: usize, q: usize) -> Vec<u8> {
    (0..n).map(|_| rng.gen_range(0..q as u8)).collect()
}

pub fn ldpc_encode_syndrome() -> Result<(), String> {
    let f = gf4();
    let codes = [toy_code(), lift_to_gfq(&toy_code(), GfSymbol(3), &f).unwrap(), lift_to_gfq(&regular_504(), GfSymbol(2), &f).unwrap()];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for h in &codes {
        let enc = SystematicEncoder::new(h);
        for _ in 0..1000 {
            let info = random_word(&mut rng, enc.dimension(), h.field().order());
            let c = enc.encode(&info).unwrap();
            ensure!(syndrome(h, &c).unwrap().iter().all(|s| s.0 == 0), "nonzero syndrome");
            ensure!(enc.extract_info(&c) == info, "information symbols not recovered");
        }
    }
    Ok(())
}

/// Per-symbol priors of a codeword of `h` sent alone over AWGN.
fn single_user_priors(h: &ParityCheckMatrix, c: &[u8], sigma2: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let k = Constellation::for_order(h.field().order());
    let ch = ChannelState::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), sigma2);
    let x = k.modulate(c).unwrap();
    let zero = vec![C64::new(0.0, 0.0); x.len()];
    let y = ma_superimpose(&x, &zero, &ch, rng).unwrap();
    let mut out = vec![0.0; c.len() * k.order()];
    for (n, &yn) in y.iter().enumerate() {
        k.likelihoods(yn, ch.h_ac, sigma2, &mut out[n * k.order()..(n + 1) * k.order()]);
        let s: f64 = out[n * k.order()..(n + 1) * k.order()].iter().sum();
        out[n * k.order()..(n + 1) * k.order()].iter_mut().for_each(|v| *v /= s);
    }
    out
}

pub fn ldpc_bp_check_order() -> Result<(), String> {
    let f = gf4();
    let h = lift_to_gfq(&toy_code(), GfSymbol(2), &f).unwrap();
    let dense: Vec<Vec<u8>> = (0..h.rows()).map(|m| (0..h.cols()).map(|n| h.get(m, n)).collect()).collect();
    let enc = SystematicEncoder::new(&h);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for perm in [[3usize, 2, 1, 0], [1, 3, 0, 2], [2, 0, 3, 1]] {
        let hp = ParityCheckMatrix::from_dense(f.clone(), &perm.iter().map(|&m| dense[m].clone()).collect::<Vec<_>>()).unwrap();
        for _ in 0..200 {
            let c = enc.encode(&random_word(&mut rng, enc.dimension(), 4)).unwrap();
            let pri = single_user_priors(&h, &c, 0.4, &mut rng);
            let a = bp_decode(&h, &pri, 30);
            let b = bp_decode(&hp, &pri, 30);
            if a.converged && b.converged {
                ensure!(a.word == b.word, "row permutation {perm:?} changed a converged decision");
            }
        }
    }
    Ok(())
}

pub fn ldpc_lift_relabel() -> Result<(), String> {
    let f = gf4();
    let mut books: Vec<Vec<Vec<u8>>> = (1..4u8)
        .map(|eta| {
            let mut b = codebook(&lift_to_gfq(&toy_code(), GfSymbol(eta), &f).unwrap());
            b.sort();
            b
        })
        .collect();
    let first = books.remove(0);
    ensure!(books.iter().all(|b| *b == first), "lifted codes differ in codeword sets");
    Ok(())
}

fn c64() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(r, i)| C64::new(r, i))
}

pub fn channel_linearity() -> Result<(), String> {
    run(64, (c64(), c64(), prop::collection::vec((c64(), c64(), c64()), 1..8), -3.0f64..3.0), |(ha, hb, xs, c)| {
        let ch = ChannelState::noiseless(ha, hb);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let xa: Vec<C64> = xs.iter().map(|x| x.0).collect();
        let xa2: Vec<C64> = xs.iter().map(|x| x.1).collect();
        let xb: Vec<C64> = xs.iter().map(|x| x.2).collect();
        let sum: Vec<C64> = xa.iter().zip(&xa2).map(|(a, b)| a + b * c).collect();
        let y1 = ma_superimpose(&xa, &xb, &ch, &mut rng).unwrap();
        let y2 = ma_superimpose(&xa2, &vec![C64::new(0.0, 0.0); xs.len()], &ch, &mut rng).unwrap();
        let ys = ma_superimpose(&sum, &xb, &ch, &mut rng).unwrap();
        for n in 0..xs.len() {
            prop_assert!((ys[n] - (y1[n] + y2[n] * c)).norm() < 1e-9);
        }
        Ok(())
    })
}

pub fn channel_reproducible() -> Result<(), String> {
    let draw = |seed: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = ChannelState::new(C64::new(0.7, 0.2), C64::new(-0.1, 1.1), 0.3);
        let k = Constellation::qpsk();
        let xa = k.modulate(&[0, 1, 2, 3, 1]).unwrap();
        let xb = k.modulate(&[3, 2, 1, 0, 0]).unwrap();
        ma_superimpose(&xa, &xb, &ch, &mut rng).unwrap()
    };
    let (a, b) = (draw(5), draw(5));
    ensure!(a.iter().zip(&b).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()), "outputs differ");
    ensure!(draw(5) != draw(6), "different seeds gave equal outputs");
    Ok(())
}

pub fn channel_sigma2_decreasing() -> Result<(), String> {
    run(256, (-20.0f64..40.0, 0.01f64..10.0, 0.05f64..1.0), |(s, d, r)| {
        prop_assert!(snr_to_sigma2(s, r).unwrap() > snr_to_sigma2(s + d, r).unwrap());
        Ok(())
    })
}

pub fn mapping_rotation_scaling() -> Result<(), String> {
    let cat = MappingCatalog::qpsk4();
    let k = Constellation::qpsk();
    run(64, (0.1f64..3.0, -3.2f64..3.2, -3.2f64..3.2, 0.2f64..3.0), |(g, theta, phi, scale)| {
        let ha = C64::new(1.0, 0.0);
        let hb = C64::from_polar(g, theta);
        let base = ChannelState::noiseless(ha, hb);
        let rot = C64::from_polar(1.0, phi);
        let turned = ChannelState::noiseless(ha * rot, hb * rot);
        let sel = cat.select(&base, &k).unwrap();
        let sel_t = cat.select(&turned, &k).unwrap();
        prop_assert_eq!((sel.first_index, sel.second_index), (sel_t.first_index, sel_t.second_index));
        let c = C64::from_polar(scale, phi);
        let scaled = ChannelState::noiseless(ha * c, hb * c);
        for m in cat.second_stage() {
            let d0 = symbol_med(m, &base, &k).unwrap();
            let d1 = symbol_med(m, &scaled, &k).unwrap();
            prop_assert!((d1 - scale * scale * d0).abs() <= 1e-9 * (1.0 + d1.abs()));
        }
        Ok(())
    })
}

pub fn mapping_refinement() -> Result<(), String> {
    let cat = MappingCatalog::qpsk4();
    for (j, block) in cat.blocks().iter().enumerate() {
        let mh = &cat.second_stage()[j];
        for &i in block {
            let ms = &cat.first_stage()[i];
            for cl in ms.clusters() {
                let parents: std::collections::BTreeSet<usize> = cl.iter().map(|&(a, b)| mh.get(a, b)).collect();
                ensure!(parents.len() == 1, "first-stage map {i} cluster straddles second-stage map {j}");
            }
        }
    }
    Ok(())
}

/// A Latin square of order 4 from row, column and symbol permutations of the
/// addition table of Z_2 x Z_2.
fn latin_map(rows: &[usize], cols: &[usize], syms: &[usize]) -> ClusterMap {
    let table: Vec<usize> = (0..16).map(|p| syms[rows[p / 4] ^ cols[p % 4]]).collect();
    ClusterMap::from_table(4, &table, MapKind::Traditional).unwrap()
}

fn perm4() -> impl Strategy<Value = Vec<usize>> {
    Just(vec![0usize, 1, 2, 3]).prop_shuffle()
}

pub fn mapping_msmm_exclusive() -> Result<(), String> {
    let k = Constellation::qpsk();
    run(64, (perm4(), perm4(), perm4(), 0.1f64..3.0, -3.2f64..3.2), |(r, c, s, g, theta)| {
        let mt = latin_map(&r, &c, &s);
        prop_assert!(mt.satisfies_exclusive_law());
        let ch = ChannelState::noiseless(C64::new(1.0, 0.0), C64::from_polar(g, theta));
        let (ms, mh) = msmm(&mt, &ch, &k).unwrap();
        prop_assert!(ms.satisfies_exclusive_law());
        prop_assert!(mh.satisfies_exclusive_law());
        prop_assert!(ms.projection_onto(&mh).is_some());
        Ok(())
    })
}

fn all_maps() -> Vec<ClusterMap> {
    let cat = MappingCatalog::qpsk4();
    let mut v: Vec<ClusterMap> = cat.first_stage().to_vec();
    v.extend(cat.second_stage().iter().cloned());
    v.push(xor_map(4).unwrap());
    v
}

fn row_strategy() -> impl Strategy<Value = (CorrelativeRow, usize)> {
    (2usize..=4).prop_flat_map(|r| {
        (
            prop::collection::vec(1u8..4, r),
            prop::collection::vec(1u8..4, r),
            0usize..19,
        )
            .prop_map(move |(eta, xi, m)| {
                (
                    CorrelativeRow {
                        positions: (0..r).collect(),
                        eta,
                        xi,
                    },
                    m,
                )
            })
    })
}

pub fn tab_round_trip() -> Result<(), String> {
    let maps = all_maps();
    let f = gf4();
    run(48, row_strategy(), |(row, mi)| {
        let m = &maps[mi];
        let e = build_encoder_tab(&row, &f, m).unwrap();
        let d = build_decoder_tab(&e);
        let orig: Vec<(Vec<u16>, f64)> = e.tuples().map(|(t, c)| (t, c as f64)).collect();
        for slot in 0..row.weight() {
            prop_assert_eq!(&d.regenerate_counts(slot, e.cluster_sizes()), &orig);
        }
        Ok(())
    })
}

pub fn tab_backing() -> Result<(), String> {
    let maps = all_maps();
    let f = gf4();
    run(32, row_strategy(), |(row, mi)| {
        let m = &maps[mi];
        let e = build_encoder_tab(&row, &f, m).unwrap();
        for (t, c) in e.tuples().take(64) {
            let backs = e.backing_assignments(&t, &f, m);
            prop_assert_eq!(backs.len(), c as usize);
            for pairs in backs {
                let (mut sa, mut sb) = (0u8, 0u8);
                for (i, &(a, b)) in pairs.iter().enumerate() {
                    sa ^= f.mul_raw(row.eta[i], a);
                    sb ^= f.mul_raw(row.xi[i], b);
                }
                prop_assert_eq!((sa, sb), (0, 0));
            }
        }
        Ok(())
    })
}

pub fn tab_weight_prior() -> Result<(), String> {
    let maps = all_maps();
    let f = gf4();
    run(48, row_strategy(), |(row, mi)| {
        let m = &maps[mi];
        let p = m.priors();
        let e = build_encoder_tab(&row, &f, m).unwrap();
        let d = build_decoder_tab(&e);
        for slot in 0..row.weight() {
            for (k, &pk) in p.iter().enumerate() {
                let s: f64 = d.rows(slot, k).map(|(others, fw)| fw * others.iter().map(|&o| p[o as usize]).product::<f64>()).sum();
                prop_assert!((s - pk).abs() < 1e-12, "slot {} output {}: {} vs {}", slot, k, s, pk);
            }
        }
        Ok(())
    })
}

pub fn tab_uniform_rows() -> Result<(), String> {
    let f = gf4();
    let h = lift_to_gfq(&regular_504(), GfSymbol(2), &f).unwrap();
    let cat = MappingCatalog::qpsk4();
    for m in [&cat.second_stage()[0], &cat.second_stage()[2]] {
        let first = build_encoder_tab(&CorrelativeRow::from_matrices(&h, &h, 0).unwrap(), &f, m).unwrap();
        let t0: Vec<(Vec<u16>, u32)> = first.tuples().collect();
        for r in [1, 17, 251] {
            let e = build_encoder_tab(&CorrelativeRow::from_matrices(&h, &h, r).unwrap(), &f, m).unwrap();
            ensure!(e.tuples().collect::<Vec<_>>() == t0, "row {r} tab differs from row 0");
        }
    }
    Ok(())
}

fn is_distribution(v: &[f64], q: usize) -> bool {
    v.chunks_exact(q).all(|c| c.iter().all(|&x| x >= 0.0) && (c.iter().sum::<f64>() - 1.0).abs() <= 1e-9)
}

/// A noisy two-source frame on the lifted 504 code.
fn frame_504(h: &ParityCheckMatrix, ch: &ChannelState, rng: &mut ChaCha8Rng) -> (Vec<u8>, Vec<u8>, Vec<C64>) {
    let enc = SystematicEncoder::new(h);
    let k = Constellation::qpsk();
    let ca = enc.encode(&random_word(rng, enc.dimension(), 4)).unwrap().0;
    let cb = enc.encode(&random_word(rng, enc.dimension(), 4)).unwrap().0;
    let y = ma_superimpose(&k.modulate(&ca).unwrap(), &k.modulate(&cb).unwrap(), ch, rng).unwrap();
    (ca, cb, y)
}

pub fn pcd_normalization() -> Result<(), String> {
    let f = gf4();
    let h = lift_to_gfq(&regular_504(), GfSymbol(2), &f).unwrap();
    let cat = MappingCatalog::qpsk4();
    let k = Constellation::qpsk();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let ch = ChannelState::new(C64::new(1.0, 0.0), C64::new(0.5, 0.5), snr_to_sigma2(9.0, 0.5).unwrap());
    let sel = cat.select(&ch, &k).unwrap();
    let g = PcdGraph::new(&h, &h, &sel.first, &sel.second, CheckKernel::Auto).unwrap();
    let qp = sel.first.q_prime();
    for _ in 0..3 {
        let (_, _, y) = frame_504(&h, &ch, &mut rng);
        for it in 1..=3 {
            let mut dec = PcdDecoder::new(&g);
            dec.decode(&y, &ch, &k, it).unwrap();
            ensure!(is_distribution(dec.symbol_messages(), qp), "symbol messages not normalized after {it} iterations");
            ensure!(is_distribution(dec.check_messages(), qp), "check messages not normalized after {it} iterations");
            ensure!(is_distribution(dec.soft_decision(), qp), "soft decision not normalized after {it} iterations");
        }
    }
    Ok(())
}

pub fn pcd_decide_consistent() -> Result<(), String> {
    let f = gf4();
    let h = lift_to_gfq(&regular_504(), GfSymbol(2), &f).unwrap();
    let cat = MappingCatalog::qpsk4();
    let k = Constellation::qpsk();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for (hb, snr) in [(C64::new(1.0, 0.0), 6.5), (C64::new(0.5, 0.5), 10.0), (C64::new(0.0, 1.0), 6.0)] {
        let ch = ChannelState::new(C64::new(1.0, 0.0), hb, snr_to_sigma2(snr, 0.5).unwrap());
        let sel = cat.select(&ch, &k).unwrap();
        let g = PcdGraph::new(&h, &h, &sel.first, &sel.second, CheckKernel::Auto).unwrap();
        for _ in 0..10 {
            let (_, _, y) = frame_504(&h, &ch, &mut rng);
            let out = PcdDecoder::new(&g).decode(&y, &ch, &k, 30).unwrap();
            if out.converged {
                ensure!(g.hard_word_satisfies(&out.word), "converged word fails the hard-map rows");
            }
        }
    }
    Ok(())
}

/// A deterministic-gain config; relay-only unless `extra` sets
/// `decode_sources`.
fn det_config(schemes: &str, h_bc: [f64; 2], snr: &str, frames: usize, extra: &str) -> ExperimentConfig {
    let sources = if extra.contains("decode_sources") { "" } else { ", \"decode_sources\": false" };
    ExperimentConfig::from_json(&format!(
        r#"{{"schemes": [{schemes}], "channel": {{"mode": "deterministic", "h_ac": [1, 0], "h_bc": [{}, {}]}},
            "snr_db": [{snr}], "max_frames": {frames} {sources} {extra}}}"#,
        h_bc[0], h_bc[1]
    ))
    .unwrap()
}

pub fn pcd_iteration_benefit() -> Result<(), String> {
    let run_with = |iters: usize| {
        let cfg = det_config("\"ts-cnc-pcd\"", [1.0, 0.0], "6.25", 128, &format!(", \"max_iter\": {iters}, \"max_frame_errors\": 100000, \"seed\": 3"));
        let ctx = FrameContext::new(&cfg).unwrap();
        run_point(&ctx, Scheme::TsCncPcd, 0, Exec::Parallel).unwrap()
    };
    let (p10, p30) = (run_with(10), run_with(30));
    let n = p10.symbols as f64;
    let sd = ((p10.ser_relay() * (1.0 - p10.ser_relay()) + p30.ser_relay() * (1.0 - p30.ser_relay())) / n).sqrt();
    ensure!(
        p30.ser_relay() <= p10.ser_relay() + 3.0 * sd,
        "SER after 30 iterations {} exceeds SER after 10 iterations {}",
        p30.ser_relay(),
        p10.ser_relay()
    );
    Ok(())
}

pub fn outage_capacity_bounds() -> Result<(), String> {
    run(32, (c64(), 0.01f64..20.0, prop::sample::select(vec![2usize, 4, 8])), |(alpha, s2, q)| {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = capacity_mc(alpha, q, s2, 500, &mut rng).unwrap();
        prop_assert!(c <= (q as f64).log2() + 1e-12);
        prop_assert!(c >= -1e-2);
        Ok(())
    })
}

pub fn outage_circular_symmetry() -> Result<(), String> {
    let stats = |alpha: C64, seed: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..20).map(|_| capacity_mc(alpha, 4, 0.5, 200, &mut rng).unwrap()).collect();
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (m, var / v.len() as f64)
    };
    for (i, alpha) in [C64::new(0.3, 0.8), C64::new(-1.1, 0.4), C64::new(0.0, -0.6)].into_iter().enumerate() {
        let (m1, v1) = stats(alpha, 100 + i as u64);
        let (m2, v2) = stats(C64::new(alpha.norm(), 0.0), 200 + i as u64);
        ensure!((m1 - m2).abs() <= 3.0 * (v1 + v2).sqrt(), "capacity at {alpha} differs from capacity at |alpha|: {m1} vs {m2}");
    }
    Ok(())
}

pub fn outage_reproducible() -> Result<(), String> {
    let b = OutageBudget { n_fades: 200, n_noise: 20 };
    let a = outage_lower_bound(&[10.0, 20.0], 4, 0.5, b, 9).unwrap();
    let c = outage_lower_bound(&[10.0, 20.0], 4, 0.5, b, 9).unwrap();
    ensure!(a.iter().zip(&c).all(|(x, y)| x.to_bits() == y.to_bits()), "outage curve not reproducible");
    Ok(())
}

fn small_sim() -> ExperimentConfig {
    det_config(
        "\"uncoded-xor\", \"uncoded-cnc\", \"xor-bp\", \"ts-cnc-pcd\"",
        [0.5, 0.5],
        "8, 11",
        24,
        ", \"decode_sources\": true, \"batch\": 8, \"max_frame_errors\": 10, \"seed\": 77",
    )
}

fn csv_of(cfg: &ExperimentConfig, exec: Exec) -> Vec<u8> {
    let pts = run_experiment(cfg, exec).unwrap();
    let mut out = Vec::new();
    write_curve_csv(&pts, &mut out).unwrap();
    out
}

pub fn sim_csv_reproducible() -> Result<(), String> {
    let cfg = small_sim();
    ensure!(csv_of(&cfg, Exec::Sequential) == csv_of(&cfg, Exec::Sequential), "CSV differs between identical runs");
    Ok(())
}

pub fn sim_parallel_sequential() -> Result<(), String> {
    let cfg = small_sim();
    ensure!(csv_of(&cfg, Exec::Parallel) == csv_of(&cfg, Exec::Sequential), "parallel and sequential CSV differ");
    Ok(())
}

pub fn sim_converged_satisfies() -> Result<(), String> {
    let cfg = det_config("\"ts-cnc-pcd\", \"xor-bp\"", [0.5, 0.5], "9, 11", 16, ", \"seed\": 5");
    let ctx = FrameContext::new(&cfg).unwrap();
    for scheme in [Scheme::TsCncPcd, Scheme::XorBp] {
        for point in 0..2 {
            for frame in 0..16 {
                let r = ctx.run_frame(scheme, point, frame).unwrap();
                if r.converged {
                    ensure!(r.broadcast_satisfies == Some(true), "{} frame {frame} converged but fails the hard-map rows", scheme.name());
                }
            }
        }
    }
    Ok(())
}

pub fn sim_intervals() -> Result<(), String> {
    let pts = run_experiment(&small_sim(), Exec::Parallel).unwrap();
    for p in pts {
        ensure!(p.ci_low <= p.ser_relay() && p.ser_relay() <= p.ci_high, "interval does not bracket SER at {} {}", p.snr_db, p.scheme.name());
        ensure!(0.0 <= p.ci_low && p.ci_high <= 1.0, "interval outside [0, 1]");
    }
    Ok(())
}
