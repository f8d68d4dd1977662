// SPDX-License-Identifier: Apache-2.0
use kws_toolchain::{parse_simulation, parse_sta, parse_synthesis, ToolReport, ToolStatus};
use proptest::prelude::*;

fn well_formed(r: &ToolReport, raw: &[u8]) {
    assert!(r.validate().is_ok());
    assert_eq!(r.raw_capture, String::from_utf8_lossy(raw));
    if r.status == ToolStatus::Pass {
        assert!(r.failures.is_empty());
    }
}

// fragments of real reports, spliced at random, reach the parsers' happy paths
fn fragment() -> impl Strategy<Value = Vec<u8>> {
    prop_oneof![
        any::<Vec<u8>>(),
        Just(b"TEST PASS\n".to_vec()),
        Just(b"TEST FAIL: overflow\n".to_vec()),
        Just(b"   Number of cells:   42\n".to_vec()),
        Just(b"worst slack max -0.40\n".to_vec()),
        Just(b"worst slack 1e3\n".to_vec()),
        "[0-9 .eE+-]{0,12}".prop_map(String::into_bytes),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn parsers_are_total(parts in proptest::collection::vec(fragment(), 0..6)) {
        let raw: Vec<u8> = parts.concat();
        for parse in [parse_simulation, parse_synthesis, parse_sta] {
            let r = parse(&raw);
            well_formed(&r, &raw);
            // identical capture, identical digest
            prop_assert_eq!(r.digest(), parse(&raw).digest());
        }
    }

    #[test]
    fn slack_sign_decides_status(slack in -1000.0f64..1000.0) {
        let r = parse_sta(format!("worst slack max {slack}\n").as_bytes());
        prop_assert_eq!(r.worst_slack_ns, Some(slack));
        prop_assert_eq!(r.status == ToolStatus::Pass, slack >= 0.0);
    }

    #[test]
    fn cell_count_round_trips(n in any::<u64>()) {
        let r = parse_synthesis(format!("   Number of cells:  {n}\n").as_bytes());
        prop_assert_eq!(r.cell_count, Some(n));
    }
}
