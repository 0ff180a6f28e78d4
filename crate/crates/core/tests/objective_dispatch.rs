use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pifilter_bocs::encoding::{enumerate_canonical, DecodeOutcome, DesignVector, DESIGN_BITS, ELEMENT_BITS};
use pifilter_bocs::harness::{enumerate_and_rank, RunConfig};
use pifilter_bocs::objective::{BlackBox, Branch};

/// Direct transcription of the objective: count pair violations, then either
/// the penalty line or the circuit value.
fn reference_y(bits: &[bool], s21: impl Fn() -> f64) -> (u32, f64) {
    let mut z = 0u32;
    for m in 0..ELEMENT_BITS / 2 {
        let d = bits[2 * m] as i32 + bits[2 * m + 1] as i32 - 1;
        z += (d * d) as u32;
    }
    if z != 0 {
        (z, -60.0 + 10.0 * z as f64)
    } else {
        (0, s21())
    }
}

#[test]
fn evaluation_matches_reference_on_all_element_patterns() {
    let cfg = RunConfig::default();
    let f = cfg.objective();
    let board = cfg.board();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut checked = 0;
    for elem in 0u32..1 << ELEMENT_BITS {
        for _ in 0..16 {
            let mut bits = [false; DESIGN_BITS];
            for (i, b) in bits.iter_mut().enumerate().take(ELEMENT_BITS) {
                *b = elem >> (ELEMENT_BITS - 1 - i) & 1 == 1;
            }
            for b in &mut bits[ELEMENT_BITS..] {
                *b = rng.random();
            }
            let x = DesignVector::new(bits);
            let obs = f.evaluate(&x, checked).unwrap();
            let (z, y) = reference_y(&bits, || match board.decode(&x) {
                DecodeOutcome::Feasible(g) => {
                    pifilter_bocs::circuit::evaluate_s21(&g, &cfg.grid, &cfg.material, &cfg.circuit).unwrap()
                }
                DecodeOutcome::OneHotViolation(_) => unreachable!(),
            });
            assert_eq!(obs.z, z);
            assert_eq!(obs.y, y, "{x}");
            assert_eq!(obs.branch == Branch::Penalty, z != 0);
            checked += 1;
        }
    }
    assert_eq!(checked, 1024 * 16);
}

#[test]
fn all_pairs_violated_scores_minus_ten() {
    let f = RunConfig::default().objective();
    for s in ["0000000000100100100100", "1111111111000000000000", "0011001100111111111111"] {
        let obs = f.evaluate(&s.parse().unwrap(), 0).unwrap();
        assert_eq!((obs.z, obs.y), (5, -10.0), "{s}");
    }
}

#[test]
fn disconnected_segments_evaluate_worse_than_best_canonical() {
    let f = RunConfig::default().objective();
    let x: DesignVector = "1001011001000001000100".parse().unwrap();
    let obs = f.evaluate(&x, 0).unwrap();
    assert_eq!(obs.branch, Branch::S21);
    let best = enumerate_canonical()
        .map(|c| f.s21_db(&c).unwrap().unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!(obs.y > best);
}

#[test]
fn penalty_dominance_is_measured() {
    // Reported, not assumed. Shorted canonical layouts can sit above the
    // z = 1 penalty; the optimum must not.
    let f = RunConfig::default().objective();
    let table = enumerate_and_rank(&f).unwrap();
    let best_penalty = -60.0 + 10.0;
    let above = table.rows.iter().filter(|r| r.s21_db >= best_penalty).count();
    println!(
        "canonical s21 range [{:.3}, {:.3}] dB; {above}/{} at or above the z = 1 penalty ({best_penalty} dB)",
        table.best().unwrap().s21_db,
        table.rows.last().unwrap().s21_db,
        table.len()
    );
    assert!(table.best().unwrap().s21_db < best_penalty);
    assert!(above < table.len() / 2);
}
