// Trigonometric approximation of the toy shear profile and strip norms.

use abc_core::analytic::{approximate_profile, distance_report, AnalyticShear, Scheme};
use abc_core::map::MapExpr;
use abc_core::rational::ratio;
use abc_core::shear::{ShearMap, StepProfile};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let sp = StepProfile::new(32, 1, ratio(1, 2048))?;
    let g = MapExpr::prim(ShearMap::new(sp.clone(), 1));
    for n in [32, 64] {
        let profile = approximate_profile(&sp, n, Scheme::Fejer)?;
        let strip = profile.strip_norm(0.01)?;
        let a = AnalyticShear::new(profile, 1, 1);
        let r = distance_report(&g, &a, 4096, &ratio(1, 100))?;
        println!("N = {n}: d0 {:.6e}, d1 {:.6e}, |P|_(0.01) <= {strip:.6e}", r.distances[0], r.distances[1]);
    }
    let p = approximate_profile(&sp, 64, Scheme::Truncation)?;
    let rescaled = p.periodic_rescale(4)?;
    println!("rescaled by 4: supported on multiples of 4 = {}", rescaled.supported_on_multiples(4));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("analytic example");
}
