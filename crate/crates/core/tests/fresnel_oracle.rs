mod common;

use ncmech::fresnel::{fresnel, SERIES_LIMIT};

// High-precision reference values (40-digit arithmetic).
const TABLE: [(f64, f64, f64); 8] = [
    (0.5, 0.492_344_225_871_446_4, 0.064_732_432_859_999_28),
    (1.0, 0.779_893_400_376_822_8, 0.438_259_147_390_354_77),
    (1.6, 0.365_461_683_440_487_7, 0.638_887_683_509_380_9),
    (2.0, 0.488_253_406_075_340_75, 0.343_415_678_363_698_24),
    (3.7, 0.541_945_662_154_487_6, 0.574_980_349_887_472_8),
    (10.0, 0.499_898_694_205_515_7, 0.468_169_978_584_882_24),
    (27.3, 0.510_472_919_706_433_5, 0.505_125_085_169_697_4),
    (50.0, 0.499_999_189_430_727_97, 0.493_633_802_585_938_74),
];

#[test]
fn matches_reference_table() {
    for (z, c, s) in TABLE {
        let (fc, fs) = fresnel(z);
        assert!((fc - c).abs() < 1e-14, "C({z}) = {fc}, want {c}");
        assert!((fs - s).abs() < 1e-14, "S({z}) = {fs}, want {s}");
    }
}

#[test]
fn simpson_oracle_agrees_with_table() {
    let zs: Vec<f64> = TABLE.iter().map(|r| r.0).collect();
    let oracle = common::fresnel_oracle(&zs, 1e-15);
    for ((z, c, s), (oc, os)) in TABLE.iter().zip(oracle) {
        assert!((oc - c).abs() < 1e-13, "oracle C({z})");
        assert!((os - s).abs() < 1e-13, "oracle S({z})");
    }
}

#[test]
fn derivative_matches_integrand() {
    let h = 1e-5;
    for i in 0..=60 {
        let z = -3.0 + 0.1 * i as f64;
        let (cp, sp) = fresnel(z + h);
        let (cm, sm) = fresnel(z - h);
        let arg = std::f64::consts::FRAC_PI_2 * z * z;
        assert!(((cp - cm) / (2.0 * h) - arg.cos()).abs() < 1e-8, "C' at {z}");
        assert!(((sp - sm) / (2.0 * h) - arg.sin()).abs() < 1e-8, "S' at {z}");
    }
}

#[test]
fn monotone_on_unit_interval() {
    let mut prev = (0.0, 0.0);
    for i in 1..=1000 {
        let cur = fresnel(i as f64 / 1000.0);
        assert!(cur.0 > prev.0 && cur.1 > prev.1);
        prev = cur;
    }
}

#[test]
fn continuous_across_switchover() {
    let h = 1e-9;
    let below = fresnel(SERIES_LIMIT);
    let above = fresnel(SERIES_LIMIT + h);
    let (sin, cos) = (std::f64::consts::FRAC_PI_2 * SERIES_LIMIT * SERIES_LIMIT).sin_cos();
    assert!((above.0 - below.0 - h * cos).abs() < 1e-14);
    assert!((above.1 - below.1 - h * sin).abs() < 1e-14);
}
