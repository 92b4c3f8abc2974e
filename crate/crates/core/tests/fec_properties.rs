use gbcd_core::fec::{
    decode, depuncture, encode, encode_mother, puncture, punctured_len, CodeConfig, CodeRate, TAIL_BITS,
};
use proptest::prelude::*;

fn rate() -> impl Strategy<Value = CodeRate> {
    prop::sample::select(CodeRate::ALL.to_vec())
}

fn bits(n: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..2, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encoder_is_linear(r in rate(), (a, b) in (10usize..200).prop_flat_map(|n| (bits(n), bits(n)))) {
        let code = CodeConfig::new(r, punctured_len(a.len() + TAIL_BITS, r), 0).unwrap();
        prop_assume!(code.payload_len() == a.len());
        let x: Vec<u8> = a.iter().zip(&b).map(|(p, q)| p ^ q).collect();
        let ea = encode(&a, &code).unwrap();
        let eb = encode(&b, &code).unwrap();
        let ex = encode(&x, &code).unwrap();
        prop_assert_eq!(ex, ea.iter().zip(&eb).map(|(p, q)| p ^ q).collect::<Vec<_>>());
    }

    #[test]
    fn depuncture_restores_kept_positions(r in rate(), msg in (1usize..100).prop_flat_map(bits)) {
        let mother = encode_mother(&msg);
        let llrs: Vec<f64> = mother.iter().enumerate().map(|(i, &b)| (i + 1) as f64 * if b == 1 { 1.0 } else { -1.0 }).collect();
        let kept = puncture(&llrs, r);
        let back = depuncture(&kept, r, msg.len()).unwrap();
        prop_assert_eq!(back.len(), mother.len());
        for (orig, got) in llrs.iter().zip(&back) {
            prop_assert!(*got == 0.0 || got == orig);
        }
        prop_assert_eq!(back.iter().filter(|&&x| x != 0.0).count(), kept.len());
    }

    #[test]
    fn noiseless_round_trip(r in rate(), n_sym in 20usize..150, seed in any::<u64>()) {
        let code = CodeConfig::for_block(r, n_sym, 4, seed).unwrap();
        let msg: Vec<u8> = (0..code.payload_len()).map(|i| ((seed >> (i % 64)) & 1) as u8).collect();
        let cw = encode(&msg, &code).unwrap();
        let llrs: Vec<f64> = cw.iter().map(|&b| if b == 1 { 4.0 } else { -4.0 }).collect();
        prop_assert_eq!(decode(&llrs, &code).unwrap(), msg);
    }
}
