use qsl_steering::assemblage::{assemblage_from_lhs, mt_witness, DiscreteAssemblage};
use qsl_steering::gaussian::TmssParams;
use qsl_steering::random::{random_hermitian, random_lhs_model, stream_rng};
use qsl_steering::Constants;

#[test]
fn assemblage_roundtrips_through_json() {
    let mut rng = stream_rng(1, 0);
    let model = random_lhs_model(&mut rng, 3, 4, 2, 2).unwrap();
    let asm = assemblage_from_lhs(&model, &["a", "b"], &["+", "-"]).unwrap();
    let text = serde_json::to_string(&asm).unwrap();
    let back: DiscreteAssemblage = serde_json::from_str(&text).unwrap();
    assert_eq!(back, asm);
}

#[test]
fn invalid_assemblage_json_is_rejected() {
    let text = r#"{"dim": 1, "settings": [{"label": "x", "outcomes": [
        {"label": "0", "probability": 0.7, "state": {"re": [[1.0]], "im": [[0.0]]}}]}]}"#;
    assert!(serde_json::from_str::<DiscreteAssemblage>(text).is_err());
}

#[test]
fn reports_and_params_roundtrip() {
    let mut rng = stream_rng(2, 0);
    let model = random_lhs_model(&mut rng, 2, 3, 2, 2).unwrap();
    let asm = assemblage_from_lhs(&model, &["a", "b"], &["+", "-"]).unwrap();
    let r = mt_witness(
        &asm,
        &random_hermitian(&mut rng, 2),
        &random_hermitian(&mut rng, 2),
        &Constants::NATURAL,
    )
    .unwrap();
    let back = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(r, back);
    let p = TmssParams::from_ratio(0.5, 0.3, 1.0, 2.0, 1.0, &Constants::NATURAL).unwrap();
    let back: TmssParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(p, back);
}
