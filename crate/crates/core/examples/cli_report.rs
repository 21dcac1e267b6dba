//! Drives the command-line front end in process and prints a CSV report.

fn main() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let model = format!("{dir}/models/quintic.toml");
    let out = cymoduli::cli::run(["cymoduli", "wp-curvature", "--model", &model, "--format", "csv"]);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    println!("exit code {}", out.code);
}
