use levy_exit::catalog::{builtin_scenarios, witnesses};
use levy_exit::scenario::{model_to_toml, parse_model, parse_scenarios, scenarios_to_toml};

#[test]
fn builtin_scenarios_roundtrip_through_toml() {
    let scenarios = builtin_scenarios();
    let text = scenarios_to_toml(&scenarios);
    assert!(text.starts_with("schema = \"levy-exit/1\""));
    assert_eq!(parse_scenarios(&text).unwrap(), scenarios);
    for s in &scenarios {
        let one = scenarios_to_toml(std::slice::from_ref(s));
        assert_eq!(parse_scenarios(&one).unwrap(), vec![s.clone()]);
    }
}

#[test]
fn witness_models_roundtrip_through_toml() {
    for w in witnesses() {
        assert_eq!(parse_model(&model_to_toml(&w.model)).unwrap(), w.model, "{}", w.name);
    }
}
