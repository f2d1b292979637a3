// Distribution constants of Φ on an η̂ element at a stage with small
// offset 𝔞, against the identity map.

use abc_core::diagnostics::{distribution_constants, DistributionInput};
use abc_core::map::MapExpr;
use abc_core::partition::{CellIndex, Partition};
use abc_core::rational::ratio;
use abc_core::schedule::stage;
use abc_core::stage::AssembledStage;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let st = AssembledStage::build(&stage(1, 2, 8192, 2, 1, ratio(3, 8))?, None)?;
    let part = Partition::new(&st.stage)?;
    let element = CellIndex::hat(1, 16, 0);
    let r = distribution_constants(&DistributionInput::for_stage(&st, &part), &element, 20_000, 5)?;
    println!(
        "Phi: gamma {:.4e} (target {:.4e}), delta {:.3}, eps1 {:.3}, eps2 {:.3}, loss {:.3}, shift law {:.3}",
        r.gamma, r.targets[0], r.delta, r.eps1, r.eps2, r.loss_budget, r.shift_law_fraction
    );
    let id = MapExpr::Identity;
    let b = distribution_constants(&DistributionInput::plain(&part, &id, 1), &element, 20_000, 5)?;
    println!("identity: gamma {:.4e}, delta {:.3}, satisfied {}", b.gamma, b.delta, b.satisfied);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("distribution example");
}
