use std::fs;
use std::path::Path;

fn exported_functions(src: &str) -> Vec<String> {
    src.lines()
        .filter_map(|l| {
            l.trim()
                .strip_prefix("pub unsafe extern \"C\" fn ")
                .or_else(|| l.trim().strip_prefix("pub extern \"C\" fn "))
        })
        .map(|rest| rest.split('(').next().unwrap().to_string())
        .collect()
}

#[test]
fn header_declares_every_exported_symbol() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = fs::read_to_string(root.join("include/overparam.h")).expect("header is generated by the build script");
    let src = fs::read_to_string(root.join("src/lib.rs")).unwrap();
    let names = exported_functions(&src);
    assert!(names.len() >= 20, "found only {names:?}");
    for name in &names {
        assert!(header.contains(&format!(" {name}(")), "{name} missing from header");
    }
    for ty in [
        "typedef struct OpNetwork OpNetwork;",
        "typedef struct OpDataset OpDataset;",
        "typedef struct OpTrace OpTrace;",
    ] {
        assert!(header.contains(ty), "{ty} missing");
    }
    assert!(header.contains("OP_STATUS_OK = 0"));
    assert!(header.contains("#ifndef OVERPARAM_H"));
}
