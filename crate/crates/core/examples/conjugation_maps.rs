// The toy stage assembled: shear g, digit permutation φ̃, block rotation
// i and the conjugated rotation f, with derivatives and GOOD tags.

use abc_core::map::MapExpr;
use abc_core::rational::ratio;
use abc_core::schedule::stage;
use abc_core::stage::AssembledStage;
use abc_core::torus::{ProjPoint, TorusPoint};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let st = AssembledStage::build(&stage(1, 2, 4, 2, 1, ratio(3, 8))?, None)?;
    let p = TorusPoint::new(0.1, 0.3);
    let maps: [(&str, &MapExpr); 5] = [("g", &st.g), ("phi", &st.phi), ("h", &st.h), ("f", &st.f), ("Phi", &st.big_phi)];
    for (name, m) in maps {
        let r = m.eval_jet(p);
        println!(
            "{name}({:.4}, {:.4}) = ({:.6}, {:.6}) tag {:?} det {:.12}",
            p.theta,
            p.r,
            r.jet.point.theta,
            r.jet.point.r,
            r.tag,
            r.jet.deriv.determinant()
        );
    }
    let (img, tag) = st.f.eval_proj(ProjPoint::new(0.33, 0.21, 0.1));
    println!("(f, df)(0.33, 0.21, t = 0.1) = ({:.6}, {:.6}, t = {:.6}) {tag:?}", img.point.theta, img.point.r, img.t);
    let a = st.phi_map.type_a.translation_exact(5, 2);
    println!("type A translation of (u2, v0) = (5, 2): ({}, {})", a.0, a.1);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("conjugation maps example");
}
