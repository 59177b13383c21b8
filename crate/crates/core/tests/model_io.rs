use persuade_core::generate::{generate_congestion, random_instance, static_persuasion, CongestionParams, Family, RandomParams};
use persuade_core::model::{load_problem, parse_problem, save_problem, to_json, Variant};
use persuade_core::{Error, Spec, Spec32};

#[test]
fn json_round_trip() {
    let mut specs = vec![static_persuasion(0.3), generate_congestion(&CongestionParams::default()).unwrap()];
    for v in [Variant::FixedAction, Variant::JointMessageAction, Variant::MultiAgent] {
        let mut p = RandomParams::new(v, Family::Revealing);
        p.belief_overrides = true;
        specs.push(random_instance(4, &p));
    }
    for spec in specs {
        let text = to_json(&spec).unwrap();
        let back: Spec = parse_problem(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(to_json(&back).unwrap(), text);
    }
}

#[test]
fn file_round_trip_and_single_precision() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let spec = static_persuasion(0.25);
    save_problem(&spec, &path).unwrap();
    assert_eq!(load_problem::<f64>(&path).unwrap(), spec);
    let narrow: Spec32 = load_problem(&path).unwrap();
    assert_eq!(narrow.initial.p_x1, vec![0.75f32, 0.25]);
}

fn edit(spec: &Spec, f: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v: serde_json::Value = serde_json::from_str(&to_json(spec).unwrap()).unwrap();
    f(&mut v);
    v.to_string()
}

#[test]
fn rejects_bad_documents() {
    let spec = static_persuasion(0.3);
    assert!(matches!(parse_problem::<f64>("{"), Err(Error::Parse(_))));
    let text = edit(&spec, |v| v["format_version"] = "0".into());
    assert!(matches!(parse_problem::<f64>(&text), Err(Error::Parse(m)) if m.contains("format_version")));

    let text = edit(&spec, |v| v["initial"]["p_x1"] = serde_json::json!([0.5, 0.6]));
    match parse_problem::<f64>(&text) {
        Err(Error::Validation(d)) => assert!(d.iter().any(|d| d.field.eq_ignore_ascii_case("p_x1")), "{d:?}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn validation_names_the_field() {
    let mut spec = static_persuasion(0.3);
    spec.h0 = Some(spec.targets[0].clone());
    spec.spaces.noise = vec![1, 1];
    let diags = spec.validate();
    assert!(diags.iter().any(|d| d.field == "h0"), "{diags:?}");
    assert!(diags.iter().any(|d| d.field == "spaces.noise"), "{diags:?}");

    let bad = CongestionParams { rho: 1.5, ..CongestionParams::default() };
    match generate_congestion(&bad) {
        Err(Error::Validation(d)) => assert_eq!(d[0].field, "rho"),
        other => panic!("{other:?}"),
    }
}
