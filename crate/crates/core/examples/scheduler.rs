// Stage parameters, the rotation-number recursion, mixing times and the
// growth conditions.

use abc_core::rational::{fmt_rational, ratio};
use abc_core::schedule::{check_conditions, mixing_time, next_alpha, stage, ConditionName, NormEstimates};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let toy = stage(1, 2, 4, 2, 1, ratio(3, 8))?;
    let (alpha, q_next, p_next) = next_alpha(&toy);
    let m = mixing_time(&toy.q, &q_next, &p_next)?;
    println!("toy: alpha_2 = {}, m_1 = {}, frak_a = {}", fmt_rational(&alpha), m.m, fmt_rational(&m.frak_a));
    println!("toy: shear a = {}, b = {}, eps = {}", toy.shear_a(), toy.shear_b(), fmt_rational(toy.shear_eps()));
    assert_eq!(alpha, ratio(17, 32));

    let est = NormEstimates { h_norm: Some(1.0), c_hat: Some(1.0), r: 1, ..Default::default() };
    let toy_report = &check_conditions(&[toy], &[est.clone()])?[0];
    let flagship = stage(1, 2, 4, 257, 1, ratio(3, 8))?;
    let flag_report = &check_conditions(&[flagship], &[est])?[0];
    for name in [ConditionName::P3, ConditionName::P4] {
        println!("{name:?}: toy {}, q = 257 {}", toy_report.get(name).satisfied, flag_report.get(name).satisfied);
    }
    assert!(!toy_report.get(ConditionName::P3).satisfied);
    assert!(flag_report.get(ConditionName::P3).satisfied);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("scheduler example");
}
