//! Behaviour of the chip-level simulator.

use backcom_core::analytic;
use backcom_core::simulator::*;
use backcom_core::thss::overlap_probs;
use backcom_core::topology::*;
use backcom_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn static_cfg(ch: ChannelRealization) -> SystemConfig {
    let mut cfg = SystemConfig::symmetric_defaults(ch.links());
    cfg.channel_model = ChannelModel::Static;
    cfg.static_coeffs = Some(ch);
    cfg
}

fn generic_static() -> SystemConfig {
    let mut ch = ChannelRealization::zeros(2);
    ch.forward[(0, 0)] = c(0.021, -0.013);
    ch.forward[(0, 1)] = c(-0.004, 0.006);
    ch.forward[(1, 0)] = c(0.015, 0.017);
    ch.forward[(1, 1)] = c(0.018, 0.009);
    ch.tag_tag[(1, 0)] = c(0.3, -0.7);
    ch.tag_tag[(0, 1)] = c(0.3, -0.7);
    ch.reader_reader[(1, 0)] = c(0.002, 0.001);
    ch.reader_reader[(0, 1)] = c(0.002, 0.001);
    let mut cfg = static_cfg(ch);
    cfg.seq_len = 8;
    cfg
}

fn assert_within(analytic: f64, est: Estimate, what: &str) {
    let se = est.stderr.max(1.0 / 1e6);
    assert!(
        (analytic - est.mean).abs() < 3.0 * se,
        "{what}: analytic {analytic} vs simulated {} ± {}",
        est.mean,
        est.stderr
    );
}

#[test]
fn same_seed_same_report_and_block_partition_does_not_matter() {
    let cfg = SystemConfig::two_link_defaults();
    let n = 3 * BLOCK_SIZE + 17;
    let a = run_trials(&cfg, n, 9, Timing::Sync, SimOptions::default()).unwrap();
    let b = run_trials(&cfg, n, 9, Timing::Sync, SimOptions::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.config_digest, cfg.digest());

    // Blocks merged in order reproduce the serial report bit for bit.
    let key = trial_key(9);
    let mut sim = Simulator::new(&cfg, Timing::Sync, SimOptions::default()).unwrap();
    let tallies: Vec<Tally> = (0..block_count(n))
        .rev()
        .map(|blk| run_block(&mut sim, &key, block_range(n, blk)))
        .collect();
    let mut merged = Tally::default();
    for t in tallies.iter().rev() {
        merged.merge(t);
    }
    assert_eq!(merged.report(9, cfg.digest()), a);

    // Any other split gives the same per-trial outcomes.
    let mut odd = Tally::default();
    let mut start = 0;
    for len in [1u64, 999, 5000, 2, n] {
        let end = (start + len).min(n);
        odd.merge(&run_block(&mut sim, &key, start..end));
        start = end;
    }
    assert_eq!(odd.trials, merged.trials);
    assert_eq!(odd.reader_errors, merged.reader_errors);
    assert_eq!(odd.tag_errors, merged.tag_errors);
    assert_eq!(odd.outages, merged.outages);
    assert!(((odd.energy_sum - merged.energy_sum) / merged.energy_sum).abs() < 1e-12);

    let other = run_trials(&cfg, n, 10, Timing::Sync, SimOptions::default()).unwrap();
    assert_ne!(other.etr.mean, a.etr.mean);
}

#[test]
fn single_trial_report_is_the_trial() {
    let cfg = SystemConfig::two_link_defaults();
    let r = run_trials(&cfg, 1, 4, Timing::Sync, SimOptions::default()).unwrap();
    let mut sim = Simulator::new(&cfg, Timing::Sync, SimOptions::default()).unwrap();
    let t = sim.simulate_symbol(&mut trial_rng(&trial_key(4), 0));
    assert_eq!(r.reader_ber.mean, !t.reader_bit_ok as u8 as f64);
    assert_eq!(r.tag_ber.mean, !t.tag_bit_ok as u8 as f64);
    assert_eq!(r.outage_prob.mean, t.outage as u8 as f64);
    assert_eq!(r.etr.mean, t.energy_harvested);
    assert_eq!(r.etr.stderr, 0.0);
    assert!(run_trials(&cfg, 0, 4, Timing::Sync, SimOptions::default()).is_err());
}

#[test]
fn overlap_frequencies_match_pattern_probabilities() {
    let mut cfg = SystemConfig::two_link_defaults();
    cfg.seq_len = 6;
    let n = 400_000u64;
    let mut sim = Simulator::new(&cfg, Timing::Sync, SimOptions::default()).unwrap();
    let t = run_block(&mut sim, &trial_key(1), 0..n);
    let p = overlap_probs(6).unwrap();
    for (count, want) in t.overlap.iter().zip([p.p0, p.p1, p.p2]) {
        let f = *count as f64 / n as f64;
        assert!((f - want).abs() < 3.0 * (want * (1.0 - want) / n as f64).sqrt(), "{f} vs {want}");
    }
}

#[test]
fn isolated_link_is_error_free_with_exact_energy() {
    let mut ch = ChannelRealization::zeros(2);
    ch.forward[(0, 0)] = c(0.02, 0.01);
    ch.forward[(1, 1)] = c(0.02, 0.01);
    let mut cfg = static_cfg(ch);
    cfg.noise_reader = 0.0;
    cfg.noise_tag = 0.0;
    let mut sim = Simulator::new(&cfg, Timing::Sync, SimOptions::default()).unwrap();
    let want = cfg.symbol_duration / cfg.seq_len as f64
        * cfg.harvest_efficiency
        * cfg.tx_power
        * (1.0 - cfg.reflection)
        * 5e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let t = sim.simulate_symbol(&mut rng);
        assert!(t.reader_bit_ok && t.tag_bit_ok);
        assert!((t.energy_harvested - want).abs() < 1e-12 * want);
    }
}

#[test]
fn near_total_reflection_leaves_tag_guessing() {
    let mut ch = ChannelRealization::zeros(2);
    ch.forward[(0, 0)] = c(0.02, 0.0);
    let mut cfg = static_cfg(ch);
    cfg.reflection = 1.0;
    assert!(Simulator::new(&cfg, Timing::Sync, SimOptions::default()).is_err());
    cfg.reflection = 1.0 - f64::EPSILON;
    cfg.noise_tag = 0.0;
    cfg.noise_reader = 0.0;
    let r = run_trials(&cfg, 200_000, 2, Timing::Sync, SimOptions::default()).unwrap();
    assert_eq!(r.reader_ber.mean, 0.0);
    // Residual on-chip energy is tiny but nonzero, so detection still works.
    assert_eq!(r.tag_ber.mean, 0.0);
    let mut ch = ChannelRealization::zeros(2);
    ch.forward[(1, 1)] = c(0.02, 0.0);
    let mut cfg = static_cfg(ch);
    cfg.noise_tag = 0.0;
    let r = run_trials(&cfg, 200_000, 2, Timing::Sync, SimOptions::default()).unwrap();
    assert!((r.tag_ber.mean - 0.5).abs() < 3.0 * r.tag_ber.stderr);
}

#[test]
fn static_zero_noise_matches_indicator_forms() {
    let mut cfg = generic_static();
    cfg.noise_tag = 0.0;
    cfg.noise_reader = 0.0;
    let n = 1_000_000;
    let r = run_trials(&cfg, n, 5, Timing::Sync, SimOptions::default()).unwrap();
    assert_within(analytic::tag_ber_static(&cfg, true).unwrap(), r.tag_ber, "static tag BER");
    assert_within(analytic::outage_static(&cfg).unwrap(), r.outage_prob, "static outage");
    let etr = analytic::etr_static(&cfg).unwrap();
    assert!(((r.etr.mean - etr) / etr).abs() < 0.01);
    assert!((r.etr.mean - etr).abs() < 3.0 * r.etr.stderr);
    assert!(r.reader_ber.mean <= analytic::reader_ber_sync(&cfg).unwrap() + 3.0 * r.reader_ber.stderr);
}

#[test]
fn static_noisy_detection_matches_exact_energy_comparison() {
    let mut cfg = generic_static();
    // Low enough SNR that detection noise matters.
    cfg.tx_power = 2e-8;
    let n = 1_000_000;
    let r = run_trials(&cfg, n, 6, Timing::Sync, SimOptions::default()).unwrap();
    let exact = analytic::tag_ber_static(&cfg, false).unwrap();
    let indicator = analytic::tag_ber_static(&cfg, true).unwrap();
    assert!((exact - indicator).abs() > 5.0 * r.tag_ber.stderr);
    assert_within(exact, r.tag_ber, "noisy static tag BER");
}

#[test]
fn async_rejects_unsupported_setups() {
    let mut cfg = SystemConfig::symmetric_defaults(3);
    cfg.delay_offset = 0.3;
    assert!(matches!(
        Simulator::new(&cfg, Timing::Async, SimOptions::default()),
        Err(Error::Unsupported(_))
    ));
    let cfg = SystemConfig::two_link_defaults();
    let coupled = SimOptions {
        couple_tag_detection: true,
    };
    assert!(matches!(Simulator::new(&cfg, Timing::Async, coupled), Err(Error::Unsupported(_))));
}

#[test]
fn async_with_zero_offset_is_sync() {
    let cfg = SystemConfig::two_link_defaults();
    let a = run_trials(&cfg, 20_000, 7, Timing::Sync, SimOptions::default()).unwrap();
    let b = run_trials(&cfg, 20_000, 7, Timing::Async, SimOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn coupled_detection_changes_little_at_high_snr() {
    let cfg = SystemConfig::two_link_defaults();
    let coupled = SimOptions {
        couple_tag_detection: true,
    };
    let n = 400_000;
    let a = run_trials(&cfg, n, 8, Timing::Sync, SimOptions::default()).unwrap();
    let b = run_trials(&cfg, n, 8, Timing::Sync, coupled).unwrap();
    // A wrong chip estimate removes the tag's reply, so the reader does worse.
    assert!(b.reader_ber.mean >= a.reader_ber.mean - 3.0 * a.reader_ber.stderr);
    assert!((a.etr.mean - b.etr.mean).abs() < 0.01 * a.etr.mean);
    assert!((a.tag_ber.mean - b.tag_ber.mean).abs() < 5.0 * a.tag_ber.stderr.max(b.tag_ber.stderr));
}

fn coefficient() -> impl Strategy<Value = Complex64> {
    (-0.05f64..0.05, -0.05f64..0.05).prop_map(|(re, im)| c(re, im))
}

fn static_system() -> impl Strategy<Value = SystemConfig> {
    (2usize..5, 4usize..12, 0.05f64..0.95, any::<bool>())
        .prop_flat_map(|(k, n, rho, noisy)| {
            (
                proptest::collection::vec(coefficient(), k * k),
                proptest::collection::vec(coefficient(), k * k),
                Just((k, n, rho, noisy)),
            )
        })
        .prop_map(|(fwd, tt, (k, n, rho, noisy))| {
            let mut ch = ChannelRealization::zeros(k);
            for m in 0..k {
                for j in 0..k {
                    ch.forward[(m, j)] = fwd[m * k + j];
                    if m != j {
                        ch.tag_tag[(m, j)] = tt[m * k + j] * 20.0;
                        ch.reader_reader[(m, j)] = tt[m * k + j];
                    }
                }
            }
            let mut cfg = static_cfg(ch);
            cfg.seq_len = n;
            cfg.reflection = rho;
            if !noisy {
                cfg.noise_tag = 0.0;
                cfg.noise_reader = 0.0;
            }
            cfg
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn harvested_energy_respects_the_incident_bound(cfg in static_system(), seed in any::<u64>()) {
        let ch = cfg.static_coeffs.clone().unwrap();
        let k = cfg.links;
        let sr = cfg.reflection.sqrt();
        // Triangle-inequality bound on the amplitude in any single chip.
        let mut amp = 0.0;
        for j in 0..k {
            amp += ch.forward[(j, 0)].norm();
            for m in 1..k {
                amp += sr * ch.tag_tag[(m, 0)].norm() * ch.forward[(j, m)].norm();
            }
        }
        let bound = cfg.symbol_duration / cfg.seq_len as f64
            * cfg.harvest_efficiency * cfg.tx_power * k as f64 * amp * amp;
        let mut sim = Simulator::new(&cfg, Timing::Sync, SimOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let t = sim.simulate_symbol(&mut rng);
            prop_assert!(t.energy_harvested >= 0.0);
            prop_assert!(t.energy_harvested <= bound * (1.0 + 1e-12));
            prop_assert_eq!(t.outage, t.energy_harvested < cfg.energy_requirement);
            prop_assert!(t.overlap <= 2);
        }
    }

    #[test]
    fn reports_are_probabilities(cfg in static_system(), seed in any::<u64>(), beta in 0.0f64..0.99) {
        let mut cfg = cfg;
        let timing = if cfg.links == 2 && cfg.seq_len >= 6 {
            cfg.delay_offset = beta;
            Timing::Async
        } else {
            Timing::Sync
        };
        let r = run_trials(&cfg, 300, seed, timing, SimOptions::default()).unwrap();
        for e in [r.reader_ber, r.tag_ber, r.outage_prob] {
            prop_assert!((0.0..=1.0).contains(&e.mean));
            prop_assert!(e.stderr >= 0.0);
        }
        prop_assert!(r.etr.mean >= 0.0);
    }
}
