// Deviation from isometry on GOOD ζ cells, norm estimates and the shear
// distribution estimate.

use abc_core::diagnostics::{deviation, norm_estimate, shear_distribution_check};
use abc_core::partition::{Level, Partition};
use abc_core::rational::ratio;
use abc_core::schedule::stage;
use abc_core::stage::AssembledStage;
use abc_core::torus::TorusPoint;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let st = AssembledStage::build(&stage(1, 2, 4, 2, 1, ratio(3, 8))?, None)?;
    let part = Partition::new(&st.stage)?;
    let cell = part.locate(Level::Zeta, TorusPoint::new(0.1, 0.3)).ok_or("point in a gap")?;
    let d = deviation(&st.h, &part, &cell, 100, 64, 7)?;
    println!("dev of h on a zeta cell: {:.3e} ({:.0}% GOOD)", d.dev, 100.0 * d.good_fraction);
    let n = norm_estimate(&st.g, 2, 64)?;
    println!("|||g|||_2 ~ {:.6e} per order {:?}, bound {:?}", n.estimate, n.per_order, n.paper_bound);
    let lemma = shear_distribution_check(&st.shear.profile, 2, 29, &ratio(0, 1), &ratio(1, 64), &ratio(1, 8), &ratio(3, 8), 200)?;
    println!("shear estimate: lhs {:.4e} <= rhs {:.4e}: {}", lemma.lhs, lemma.rhs, lemma.satisfied);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("isometry example");
}
