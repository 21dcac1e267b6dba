#![allow(dead_code)]

use cymoduli::cli::{run, Outcome};

pub struct Case {
    pub name: String,
    pub args: Vec<String>,
}

fn case(name: &str, args: &[&str]) -> Case {
    let mut v = vec!["cymoduli".to_string()];
    v.extend(args.iter().map(|s| s.to_string()));
    Case { name: name.to_string(), args: v }
}

pub const QUINTIC: &str = "models/quintic.toml";
pub const TORUS: &str = "models/torus.toml";

pub fn cases() -> Vec<Case> {
    let mut out = Vec::new();
    for cmd in [
        "periods",
        "mirror-map",
        "yukawa",
        "wp-curvature",
        "dj-check",
        "chsv-flatness",
        "quantize-transport",
        "holonomy",
        "master-check",
        "z0-check",
        "mc-solve",
        "lattice-transport",
        "rational-plane",
        "abelian-map",
    ] {
        out.push(case(&format!("quintic_{cmd}"), &[cmd, "--model", QUINTIC]));
    }
    out.push(case("quintic_instantons", &["instantons", "--model", QUINTIC, "--order", "15"]));
    for cmd in [
        "periods",
        "mirror-map",
        "yukawa",
        "instantons",
        "wp-curvature",
        "dj-check",
        "chsv-flatness",
        "quantize-transport",
        "holonomy",
        "master-check",
        "z0-check",
        "mc-solve",
        "lattice-transport",
        "rational-plane",
        "abelian-map",
    ] {
        out.push(case(&format!("torus_{cmd}"), &[cmd, "--model", TORUS]));
    }
    out.push(case("quintic_chsv_phase_csv", &["chsv-flatness", "--model", QUINTIC, "--t-phase", "-0.5", "--format", "csv"]));
    out.push(case("quintic_z0_order2", &["z0-check", "--model", QUINTIC, "--lambda-order", "2"]));
    out.push(case("quintic_z0_too_deep", &["z0-check", "--model", QUINTIC, "--lambda-order", "12"]));
    out.push(case("quintic_master_order0", &["master-check", "--model", QUINTIC, "--lambda-order", "0", "--steps", "50"]));
    out.push(case("torus_rational_plane_seed3", &["rational-plane", "--model", TORUS, "--seed", "3"]));
    out.push(case("random_mc_seed", &["mc-solve", "--model", "tests/fixtures/random_dgla.toml", "--seed", "11"]));
    out.push(case("bad_model", &["periods", "--model", "tests/fixtures/bad_model.toml"]));
    out
}

pub fn render(o: &Outcome) -> String {
    format!("exit = {}\n--- stdout\n{}--- stderr\n{}", o.code, o.stdout, o.stderr)
}

pub fn run_case(c: &Case) -> String {
    render(&run(c.args.clone()))
}

pub fn golden_path(c: &Case) -> String {
    format!("tests/golden/{}.txt", c.name)
}
