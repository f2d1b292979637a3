// Exact coverage of the four partial partitions and point location.

use abc_core::partition::{Level, Partition};
use abc_core::rational::{fmt_rational, to_f64};
use abc_core::torus::TorusPoint;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let part = Partition::from_parts(1, 2, 1)?;
    for level in [Level::Eta, Level::Zeta, Level::TildeEta, Level::HatEta] {
        let c = part.coverage(level);
        println!(
            "{level:?}: {} cells, coverage {} ~ {:.4}, bound {}",
            c.cell_count,
            fmt_rational(&c.total_measure),
            to_f64(&c.total_measure),
            fmt_rational(&c.paper_bound)
        );
    }
    assert_eq!(part.cell_count(Level::Eta), 3600);
    let p = TorusPoint::new(0.3, 0.6);
    let cell = part.locate(Level::Eta, p).ok_or("point in a gap")?;
    println!("eta cell of {p:?}: u = {:?}, v0 = {}, box {}", &cell.u[..3], cell.v0(), part.cell_box(&cell).csv_bounds());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("partitions example");
}
