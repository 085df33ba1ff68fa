use attrest::{load_population, moments, read_population, synthesize, Error, SynthParams};

#[test]
fn reads_the_documented_format() {
    let pop = read_population("y,phi\r\n1,0\r\n2,0\r\n\r\n3,1\r\n4,1\r\n".as_bytes()).unwrap();
    assert_eq!(pop.size(), 4);
    assert_eq!(pop.ybar(), 2.5);
    assert_eq!(pop.proportion(), 0.5);
    let ms = moments(&pop);
    assert!((ms.c(2, 0) - 1.0).abs() < 1e-15);
    assert!((ms.c(1, 1) - 0.4).abs() < 1e-15);
    assert!((ms.c(0, 2) - 0.2).abs() < 1e-15);

    let headerless = read_population("1,0\n2,0\n3,1\n4,1\n".as_bytes()).unwrap();
    assert_eq!(headerless, pop);
}

#[test]
fn reports_bad_rows_with_context() {
    let err = read_population("y,phi\n1,0\n2,2\n3,1\n4,1\n".as_bytes()).unwrap_err();
    assert!(err.to_string().contains("non-binary attribute"), "{err}");
    assert!(err.to_string().contains('3'), "line number missing: {err}");

    let err = read_population("1,1\n2,1\n3,1\n4,1\n".as_bytes()).unwrap_err();
    assert!(
        err.to_string().contains("degenerate proportion P=1"),
        "{err}"
    );

    assert!(matches!(
        read_population("1,0\n2,1\n".as_bytes()),
        Err(Error::TooFewUnits(2))
    ));
    assert!(matches!(
        read_population("1,0\nabc,1\n".as_bytes()),
        Err(Error::Parse { .. })
    ));
    assert!(matches!(
        read_population("-1,0\n1,1\n-1,0\n1,1\n".as_bytes()),
        Err(Error::ZeroMean)
    ));
}

#[test]
fn csv_round_trip_through_a_file() {
    let params = SynthParams::from_targets(40, 0.25, 10.0, 0.5, 0.6).unwrap();
    let pop = synthesize(&params, 9).unwrap();
    let path = std::env::temp_dir().join(format!("attrest-roundtrip-{}.csv", std::process::id()));
    std::fs::write(&path, pop.to_csv()).unwrap();
    let back = load_population(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(back, pop);
    assert!(matches!(load_population(&path), Err(Error::Io { .. })));
}

#[test]
fn synthetic_correlation_hits_its_target_on_average() {
    for target in [-0.6, 0.0, 0.3, 0.6, 0.8] {
        let params = SynthParams::from_targets(200, 0.25, 10.0, 0.5, target).unwrap();
        let mean: f64 = (0..20u64)
            .map(|seed| {
                let pop = synthesize(&params, seed).unwrap();
                assert_eq!(pop.attribute_count(), 50);
                moments(&pop).point_biserial()
            })
            .sum::<f64>()
            / 20.0;
        assert!(
            (mean - target).abs() <= 0.05,
            "target {target}: mean {mean}"
        );
    }
}
