//! CLI surface tests: strict config parsing with named offending keys,
//! exit codes, output-file structure, and SVG well-formedness.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_helmres2d")
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("helmres2d-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

const GOOD: &str = "[geometry]\nkind = \"disk\"\nradius = 1.0\nepsilon = 0.01\n\n[medium]\nrho = 1.0\nkappa = 1.0\nrho_b = 0.0001\nkappa_b = 0.0001\n";

#[test]
fn unknown_key_rejected_with_name() {
    let d = scratch("badkey");
    let cfg = d.join("bad.toml");
    std::fs::write(&cfg, format!("{GOOD}\n[solver]\nprofile_samples = 10\nmisspelled_knob = 3\n")).unwrap();
    let out = Command::new(bin())
        .args(["resonance", "--config", cfg.to_str().unwrap(), "--out", d.join("o").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "config errors exit 1");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("misspelled_knob"),
        "offending key must be named, got: {stderr}"
    );
    let _ = std::fs::remove_dir_all(&d);
}

#[test]
fn negative_parameter_rejected() {
    let d = scratch("negparam");
    let cfg = d.join("bad.toml");
    std::fs::write(
        &cfg,
        "[geometry]\nkind = \"disk\"\nradius = 1.0\nepsilon = -0.01\n\n[medium]\nrho = 1.0\nkappa = 1.0\nrho_b = 0.0001\nkappa_b = 0.0001\n",
    )
    .unwrap();
    let out = Command::new(bin())
        .args(["resonance", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon"));
    let _ = std::fs::remove_dir_all(&d);
}

#[test]
fn usage_errors_exit_1() {
    let out = Command::new(bin()).args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(bin()).args(["resonance"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(bin())
        .args(["resonance", "--config", "/nonexistent/definitely-not-here.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn resonance_csv_structure_and_determinism() {
    let d = scratch("rescsv");
    let cfg = d.join("config.toml");
    std::fs::write(&cfg, GOOD).unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let o = d.join(format!("o{run}"));
        let st = Command::new(bin())
            .args(["resonance", "--config", cfg.to_str().unwrap(), "--out", o.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
        outputs.push(std::fs::read_to_string(o.join("resonances.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "reruns must be byte-identical");
    let text = &outputs[0];
    let mut lines = text.lines();
    let prov = lines.next().unwrap();
    assert!(prov.starts_with("# helmres2d") && prov.contains("config_fnv1a="));
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "mode,re_omega,im_omega,sigma_min,leading_omega,rel_gap,alpha12_minus_alpha11,iterations"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2, "one row per mode");
    assert!(rows[0].starts_with("monopole,"));
    assert!(rows[1].starts_with("dipole,"));
    // every float field round-trips at 17 significant digits
    for row in rows {
        for field in row.split(',').skip(1) {
            let v: f64 = field.parse().expect("numeric field");
            assert!(v.is_finite());
        }
    }
    // dipole rel_gap column within the acceptance window
    let dip: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    let rel_gap: f64 = dip[5].parse().unwrap();
    assert!(rel_gap <= 0.1, "dipole rel_gap column {rel_gap}");
    let _ = std::fs::remove_dir_all(&d);
}

/// Minimal XML well-formedness scan: tags balance, attributes quoted.
fn assert_well_formed_svg(path: &Path) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("<?xml"));
    let mut stack: Vec<String> = Vec::new();
    let mut rest = text.as_str();
    while let Some(i) = rest.find('<') {
        rest = &rest[i + 1..];
        let j = rest.find('>').expect("unclosed tag");
        let tag = &rest[..j];
        rest = &rest[j + 1..];
        if tag.starts_with('?') || tag.starts_with('!') {
            continue;
        }
        if let Some(name) = tag.strip_prefix('/') {
            let open = stack.pop().unwrap_or_else(|| panic!("unbalanced </{name}>"));
            assert_eq!(open, name, "mismatched tags");
        } else if !tag.ends_with('/') {
            let name: String =
                tag.split_whitespace().next().unwrap().chars().take_while(|c| *c != '/').collect();
            stack.push(name);
            // attribute values must be quoted: an even number of quotes
            assert!(tag.matches('"').count() % 2 == 0, "unquoted attribute in <{tag}>");
        }
    }
    assert!(stack.is_empty(), "unclosed tags: {stack:?}");
}

#[test]
fn sweep_outputs_csv_and_svg() {
    let d = scratch("sweep");
    let cfg = d.join("config.toml");
    // four epsilons spanning two decades, the acceptance ladder
    std::fs::write(
        &cfg,
        format!(
            "{GOOD}\n[sweep]\nepsilons = [1e-2, 3.1622776601683794e-3, 1e-3, 3.1622776601683794e-4]\n"
        ),
    )
    .unwrap();
    let o = d.join("out");
    let st = Command::new(bin())
        .args(["sweep", "--config", cfg.to_str().unwrap(), "--out", o.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));

    // alpha sweep: fitted slope column -0.5 +- 0.03, no failures
    let alpha_csv = std::fs::read_to_string(o.join("sweep_alpha.csv")).unwrap();
    let mut slope = f64::NAN;
    for line in alpha_csv.lines().skip(2) {
        let f: Vec<&str> = line.split(',').collect();
        assert!(f[7].is_empty(), "failure recorded: {line}");
        slope = f[5].parse().unwrap();
    }
    assert!((slope + 0.5).abs() <= 0.03, "alpha slope column {slope}");

    // gradient sweep: dipole slope -1.0 +- 0.1
    let grad_csv = std::fs::read_to_string(o.join("sweep_gradient.csv")).unwrap();
    let mut gslope = f64::NAN;
    for line in grad_csv.lines().skip(2) {
        let f: Vec<&str> = line.split(',').collect();
        if f[2] == "dipole" {
            gslope = f[7].parse().unwrap();
        }
    }
    assert!((gslope + 1.0).abs() <= 0.1, "gradient slope column {gslope}");

    // SVG plots well-formed with data-covering axes
    for name in ["sweep_alpha.svg", "sweep_gradient.svg"] {
        let p = o.join(name);
        assert_well_formed_svg(&p);
        let svg = std::fs::read_to_string(&p).unwrap();
        assert!(svg.contains("<polyline"), "{name} has data");
        assert!(svg.contains("1e-2") || svg.contains("1e-3"), "{name} has decade ticks");
    }
    let _ = std::fs::remove_dir_all(&d);
}

#[test]
fn profile_outputs() {
    let d = scratch("profile");
    let cfg = d.join("config.toml");
    std::fs::write(&cfg, GOOD).unwrap();
    let o = d.join("out");
    let st = Command::new(bin())
        .args(["profile", "--config", cfg.to_str().unwrap(), "--out", o.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    for mode in ["monopole", "dipole"] {
        let text = std::fs::read_to_string(o.join(format!("profile_{mode}.csv"))).unwrap();
        let header = text.lines().nth(1).unwrap();
        assert!(header.starts_with("x1,x2,delta_x1,"));
        assert!(text.lines().count() > 10);
    }
    // the dipole profile peaks at the gap center at roughly 2/eps
    let text = std::fs::read_to_string(o.join("profile_dipole.csv")).unwrap();
    let mut peak = 0.0f64;
    for line in text.lines().skip(2) {
        let f: Vec<&str> = line.split(',').collect();
        let g: f64 = f[9].parse().unwrap();
        peak = peak.max(g);
    }
    assert!((peak - 200.0).abs() <= 0.2 * 200.0, "profile peak {peak}");
    let _ = std::fs::remove_dir_all(&d);
}
