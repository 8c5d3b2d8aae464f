// The command-line pipeline driven in-process: generate the two-stage
// dataset, build a 50-node spectrum of dC/dN, histogram it.

use lebesgue_quadrature::cli::main_entry;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let steps: [Vec<String>; 3] = [
        vec!["gen-two-stage".into(), "--output".into(), p("cycles.tsv")],
        vec![
            "quadrature".into(),
            "--input".into(),
            p("cycles.tsv"),
            "--columns".into(),
            "2:0:1".into(),
            "--n".into(),
            "50".into(),
            "--f-mode".into(),
            "derivative-dx".into(),
            "--output".into(),
            p("spectrum.tsv"),
        ],
        vec!["histogram".into(), "--input".into(), p("spectrum.tsv"), "--output".into(), p("hist.tsv")],
    ];
    for args in steps {
        let code = main_entry(std::iter::once("lebesgue".to_string()).chain(args.clone()));
        if code != 0 {
            return Err(format!("{} exited with {code}", args[0]).into());
        }
    }
    for line in std::fs::read_to_string(p("hist.tsv"))?.lines() {
        if !line.ends_with("\t0.0") {
            println!("{line}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
