use regent::docs::to_json;
use regent::suite::{instance_for, replay, run_suite, statements, Outcome, SuiteConfig};

fn small(seed: u64) -> SuiteConfig {
    SuiteConfig {
        seed,
        instances: 24,
        product_instances: 12,
        mincover_instances: 40,
        ..SuiteConfig::default()
    }
}

#[test]
fn reports_are_byte_identical() {
    let a = to_json(&run_suite(&small(5)));
    let b = to_json(&run_suite(&small(5)));
    assert_eq!(a, b);
    assert_ne!(a, to_json(&run_suite(&small(6))));
}

#[test]
fn small_suite_passes() {
    let r = run_suite(&small(11));
    assert!(r.all_passed, "{}", to_json(&r));
    assert_eq!(r.statements.len(), statements().len());
    for s in &r.statements {
        assert_eq!(s.tried, s.applicable + s.skipped.values().sum::<usize>());
        assert_eq!(s.passed + s.failures.len(), s.applicable);
    }
}

#[test]
fn replay_reproduces_outcomes() {
    let cfg = small(3);
    for (id, _, _) in statements() {
        for i in 0..3 {
            let inst = instance_for(&cfg, id, i).unwrap();
            let a = replay(id, &inst).unwrap();
            let b = replay(id, &inst).unwrap();
            assert_eq!(a, b);
            if let Outcome::Checked { failures, .. } = a {
                assert!(failures.is_empty(), "{id} #{i}: {failures:?}");
            }
        }
    }
    assert!(replay("no-such-statement", &instance_for(&cfg, "relative-bounds", 0).unwrap()).is_none());
}

#[test]
fn filters_select_statements() {
    let cfg = SuiteConfig {
        theorems: vec!["limit".into()],
        ..small(1)
    };
    let r = run_suite(&cfg);
    assert_eq!(r.statements.len(), 1);
    let cfg = SuiteConfig {
        sections: vec!["product".into()],
        ..small(1)
    };
    assert!(run_suite(&cfg).statements.iter().all(|s| s.section == "product"));
}

#[test]
fn config_defaults_fill_missing_fields() {
    let cfg: SuiteConfig = regent::docs::parse_doc("config", r#"{"seed": 9}"#).unwrap();
    assert_eq!(cfg, SuiteConfig { seed: 9, ..SuiteConfig::default() });
    assert!(regent::docs::parse_doc::<SuiteConfig>("config", r#"{"seeds": 9}"#).is_err());
}
