use linkinf::document::SurfaceDocument;
use linkinf::{gallery, Error};

#[test]
fn fixtures_roundtrip_through_json() {
    assert!(gallery::names().len() >= 9);
    for d in gallery::all() {
        let s = d.to_spec().unwrap();
        let back = SurfaceDocument::parse(&SurfaceDocument::from_spec(&s).to_json()).unwrap();
        assert_eq!(back.to_spec().unwrap().functions(), s.functions(), "{}", d.label);
        assert_eq!(SurfaceDocument::parse(&d.to_json()).unwrap(), d);
    }
}

#[test]
fn unknown_names_and_keys() {
    assert!(matches!(gallery::fixture("nope"), Err(Error::UnknownFixture(_))));
    let mut text = gallery::fixture("example2_N2").unwrap().to_json();
    text = text.replace("\"conformal\": true", "\"conformal\": true, \"genus\": 0");
    let err = SurfaceDocument::parse(&text).unwrap_err();
    assert!(matches!(err, Error::Parse { .. }));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn approximate_coefficients() {
    let text = r#"{"label": "approx parabola",
        "f1": {"terms": {"1": "1"}}, "f2": {"terms": {"1": "1.0"}, "approx": true},
        "f3": {"terms": {"1": "0.5"}, "approx": true}, "f4": {"terms": {"1": "-2"}}}"#;
    let s = SurfaceDocument::parse(text).unwrap().to_spec().unwrap();
    assert!(linkinf::surface::check_conformal(&s).unwrap().holds());
}
