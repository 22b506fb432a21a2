// Estimates CZ and measurement error over a small T1/T2 grid and resolves
// target error rates to noise models.
//
// ```bash
// cargo run --release --example error_surface
// ```

use vqc_bench::noise::{default_grid, error_surface, ErrorLookup, OpKind};

pub fn run() -> vqc_bench::Result<()> {
    let grid = default_grid(4)?;
    let points = error_surface(&grid, &[OpKind::Cz, OpKind::Measure], 4000, 1)?;
    println!("{:>8} {:>8} {:>8} {:>8}", "t1_ns", "t2_ns", "op", "error");
    for p in &points {
        println!(
            "{:>8.0} {:>8.0} {:>8} {:>8.4}",
            p.t1_ns, p.t2_ns, p.op_kind, p.estimated_error
        );
    }

    let lookup = ErrorLookup::build(OpKind::Cz, &default_grid(10)?, 4000, 2)?;
    for target in [0.01, 0.1, 0.2, 0.35] {
        let (model, est) = lookup.model_for_target(target)?;
        let (t1, t2) = model.times().expect("lookup models carry a channel");
        println!("CZ target {target:.2}: t1 = {t1:.0} ns, t2 = {t2:.0} ns, estimated {est:.4}");
    }
    Ok(())
}

fn main() -> vqc_bench::Result<()> {
    run()
}
