use balescu::verify::{run_all, VerifyConfig};

fn main() {
    let c = run_all(&VerifyConfig::default()).expect("campaign");
    for r in &c.checks {
        println!(
            "{:<40} {:>12.6e} {:>12.6e} {:>9.2e} {:5} {:.2}s",
            r.name, r.target, r.achieved, r.tolerance, r.pass, r.runtime_s
        );
    }
    for o in &c.observations {
        println!("{:<50} {:.6e}", o.name, o.value);
    }
}
