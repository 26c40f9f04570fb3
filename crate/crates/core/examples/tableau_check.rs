//! Symplecticity defects `max |b_i a_ij + b_j a_ji - b_i b_j|` of the
//! built-in tableaux.
//!
//!     cargo run --example tableau_check

use zr_fprk::tableau::Tableau;

fn main() -> zr_fprk::Result<()> {
    for name in ["gauss1", "gauss2", "gauss3", "euler-implicit", "euler-explicit", "rk4"] {
        let t = Tableau::by_name(name)?;
        println!(
            "{name:<15} s = {}  defect = {:.3e}  cond(A) = {:.3e}",
            t.s,
            t.symplectic_defect(),
            t.condition_number()
        );
    }
    let mut bent = Tableau::gauss(2)?;
    *bent.a_mut(0, 0) += 1e-3;
    println!("gauss2, a11 + 1e-3  defect = {:.3e}", bent.symplectic_defect());
    Ok(())
}
