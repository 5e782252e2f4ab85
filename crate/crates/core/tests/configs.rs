use std::path::Path;

use knotspace::ExperimentSpec;

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let spec = ExperimentSpec::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            spec.ambient.build().unwrap();
            seen += 1;
        }
    }
    assert!(seen >= 2, "no configs found in {}", dir.display());
}
