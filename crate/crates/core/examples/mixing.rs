// Monte Carlo correlations: the rigid half rotation and the toy f^m.

use abc_core::diagnostics::mixing::{hat_eta_gammas, mixing_correlation, stage_mixing, PtmSet};
use abc_core::map::MapExpr;
use abc_core::partition::Partition;
use abc_core::rational::ratio;
use abc_core::schedule::stage;
use abc_core::stage::AssembledStage;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let part = Partition::from_parts(1, 2, 1)?;
    let left = PtmSet::Box { theta: (0.0, 0.5), r: (0.0, 1.0), t: (0.0, 1.0) };
    let half = MapExpr::rotation(ratio(1, 2));
    let r = mixing_correlation(&part, &half, "1", &[left.clone()], &[left], 100_000, 1, 0.2)?;
    println!("R_1/2: correlation {} (se {})", r.pairs[0].correlation, r.pairs[0].std_error);

    let st = AssembledStage::build(&stage(1, 2, 4, 2, 1, ratio(3, 8))?, None)?;
    let part = Partition::new(&st.stage)?;
    let gammas = hat_eta_gammas(&part, 1, 0, 2);
    let squares = [PtmSet::SquareFiber { theta0: 0.0, r0: 0.0, side: 0.5, k: 0 }];
    let rep = stage_mixing(&st, &part, &gammas, &squares, 20_000, 3, 1.0)?;
    for p in &rep.pairs {
        println!("f^{}: {} vs {}: normalized {:+.3} (loss {:.2})", rep.m, p.gamma, p.c, p.normalized, p.loss_fraction);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("mixing example");
}
