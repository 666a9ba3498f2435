//! The bundled data files stay in lockstep with the code that generates
//! them: the committed population is exactly `synthesize(295, 1)`, the
//! anchor file matches the built-in series, and the reference config equals
//! the library defaults.

use std::path::{Path, PathBuf};

use agridiff::calibrate::AnchorSeries;
use agridiff::config::AppConfig;
use agridiff::population::Population;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

#[test]
fn bundled_population_is_the_seeded_synthesis() {
    let loaded = Population::load_csv(&data("farms_295.csv")).unwrap();
    assert_eq!(loaded.len(), 295);
    let regenerated = Population::synthesize(295, 1).unwrap();
    assert_eq!(loaded, regenerated);

    // Byte-exact echo: rewriting the fixture reproduces the committed file.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("echo.csv");
    regenerated.write_csv(&path).unwrap();
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(data("farms_295.csv")).unwrap()
    );
}

#[test]
fn bundled_anchors_match_the_builtin_series() {
    let loaded = AnchorSeries::load_csv(&data("anchors.csv")).unwrap();
    let bundled = AnchorSeries::bundled();
    assert_eq!(loaded.rows, bundled.rows);
    assert_eq!(loaded.train_through, bundled.train_through);
    assert_eq!(loaded.rows.iter().filter(|r| !r.interpolated).count(), 3);
}

#[test]
fn reference_config_equals_the_defaults() {
    let loaded = AppConfig::load(&data("default.toml")).unwrap();
    assert_eq!(loaded, AppConfig::default());
}

#[test]
fn malformed_population_files_name_row_and_column() {
    let dir = tempfile::tempdir().unwrap();

    // Missing a required column.
    let missing = dir.path().join("missing.csv");
    std::fs::write(&missing, "id,land_area_ha\n0,10.0\n").unwrap();
    let err = Population::load_csv(&missing).unwrap_err().to_string();
    assert!(err.contains("milk_production_kg"), "{err}");

    // A non-numeric cell in row 3.
    let full = std::fs::read_to_string(data("farms_295.csv")).unwrap();
    let mut lines: Vec<String> = full.lines().map(str::to_string).collect();
    let mut fields: Vec<String> = lines[3].split(',').map(str::to_string).collect();
    fields[4] = "not-a-number".to_string();
    lines[3] = fields.join(",");
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, lines.join("\n")).unwrap();
    let err = Population::load_csv(&bad).unwrap_err().to_string();
    assert!(err.contains("row 3"), "{err}");
}
