use super::conv::{CONSTRAINT_LENGTH, GENERATORS};

const STATES: usize = 1 << (CONSTRAINT_LENGTH - 1);

/// Max-log Viterbi decoder over the 64-state trellis.
///
/// `mother_llrs` holds two LLRs per step in the mother-code layout. The
/// path metric is `sum c * LLR`, maximized. With `terminated`, traceback
/// starts from state 0; otherwise from the best state.
pub fn viterbi_decode(mother_llrs: &[f64], terminated: bool) -> Vec<u8> {
    let steps = mother_llrs.len() / 2;
    // Branch outputs indexed by the full 7-bit register.
    let outputs: Vec<(f64, f64)> = (0..1u32 << CONSTRAINT_LENGTH)
        .map(|reg| {
            let p = |g: u32| f64::from((reg & g).count_ones() & 1);
            (p(GENERATORS[0]), p(GENERATORS[1]))
        })
        .collect();
    let mut metric = [f64::NEG_INFINITY; STATES];
    metric[0] = 0.0;
    let mut next = [0.0f64; STATES];
    let mut decisions = Vec::with_capacity(steps);
    for t in 0..steps {
        let (l0, l1) = (mother_llrs[2 * t], mother_llrs[2 * t + 1]);
        let mut word = 0u64;
        for (ns, slot) in next.iter_mut().enumerate() {
            // State holds the last six inputs, newest in bit 5.
            let b = ns >> 5;
            let base = (ns & 31) << 1;
            let mut best = f64::NEG_INFINITY;
            let mut pick = 0;
            for x in 0..2 {
                let ps = base | x;
                let reg = (b << 6) | ps;
                let (c0, c1) = outputs[reg];
                let m = metric[ps] + c0 * l0 + c1 * l1;
                if m > best {
                    best = m;
                    pick = x;
                }
            }
            *slot = best;
            word |= (pick as u64) << ns;
        }
        metric = next;
        decisions.push(word);
    }
    let mut state = if terminated {
        0
    } else {
        (0..STATES)
            .max_by(|&a, &b| metric[a].total_cmp(&metric[b]).then(b.cmp(&a)))
            .unwrap_or(0)
    };
    let mut bits = vec![0u8; steps];
    for t in (0..steps).rev() {
        bits[t] = (state >> 5) as u8;
        let x = ((decisions[t] >> state) & 1) as usize;
        state = ((state & 31) << 1) | x;
    }
    bits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fec::encode_mother;
    use crate::rng::seeded;
    use rand::Rng;

    /// Hard-decision Viterbi keeping whole survivor paths.
    fn hard_viterbi(received: &[u8]) -> Vec<u8> {
        let steps = received.len() / 2;
        let mut paths: Vec<Option<(u32, Vec<u8>)>> = vec![None; 64];
        paths[0] = Some((0, Vec::new()));
        for t in 0..steps {
            let mut fresh: Vec<Option<(u32, Vec<u8>)>> = vec![None; 64];
            for s in 0..64usize {
                let Some((d, p)) = &paths[s] else { continue };
                for b in 0..2u8 {
                    let mut msg = p.clone();
                    msg.push(b);
                    let reg = ((b as usize) << 6) | s;
                    let c0 = ((reg as u32 & 0o133).count_ones() & 1) as u8;
                    let c1 = ((reg as u32 & 0o171).count_ones() & 1) as u8;
                    let nd = d + u32::from(c0 != received[2 * t]) + u32::from(c1 != received[2 * t + 1]);
                    let ns = reg >> 1;
                    let better = match &fresh[ns] {
                        None => true,
                        Some((od, _)) => nd < *od,
                    };
                    if better {
                        fresh[ns] = Some((nd, msg));
                    }
                }
            }
            paths = fresh;
        }
        paths[0].clone().unwrap().1
    }

    #[test]
    fn soft_with_hard_inputs_matches_hard_decision_oracle() {
        let mut rng = seeded(21);
        for _ in 0..200 {
            let mut msg: Vec<u8> = (0..24).map(|_| rng.random_range(0..2)).collect();
            msg.extend([0; 6]);
            let mut rx = encode_mother(&msg);
            for _ in 0..4 {
                let i = rng.random_range(0..rx.len());
                rx[i] ^= 1;
            }
            let llrs: Vec<f64> = rx.iter().map(|&b| if b == 1 { 1.0 } else { -1.0 }).collect();
            let soft = viterbi_decode(&llrs, true);
            let hard = hard_viterbi(&rx);
            // Ties can pick different survivors; compare path distances instead.
            let dist = |m: &[u8]| encode_mother(m).iter().zip(&rx).filter(|(a, b)| a != b).count();
            assert_eq!(dist(&soft), dist(&hard));
            if dist(&soft) <= 2 {
                assert_eq!(soft, hard);
            }
        }
    }

    #[test]
    fn unterminated_uses_best_state() {
        let msg = vec![1u8, 0, 1, 1, 0, 0, 1, 0, 1, 1];
        let llrs: Vec<f64> = encode_mother(&msg).iter().map(|&b| if b == 1 { 5.0 } else { -5.0 }).collect();
        assert_eq!(viterbi_decode(&llrs, false), msg);
    }
}
