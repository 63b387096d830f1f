//! The measure suite on magic-state tensor powers: stabilizer fidelity
//! against its closed form, extent with a certified duality gap, the
//! flatness-based rank bound, and the Gowers U3 norm.

use stabrank::dense::DenseState;
use stabrank::rank;
use stabrank::stab::{DictKind, Dictionary};
use stabrank::Result;

fn main() -> Result<()> {
    for m in 1..=2 {
        let psi = DenseState::magic_t_power(m)?;
        let dict = Dictionary::enumerate(m, DictKind::Stab)?;
        let rep = rank::measure_report(&psi, &dict)?;

        let cos2 = (std::f64::consts::PI / 8.0).cos().powi(2);
        println!("T^{m}:");
        println!(
            "  fidelity        {:.12}   (cos^{{2m}}(pi/8) = {:.12})",
            rep.fidelity,
            cos2.powi(m as i32)
        );
        println!(
            "  extent          {:.12}   duality gap {:.2e}",
            rep.extent, rep.extent_gap
        );
        println!("  xi * F          {:.12}", rep.xi_times_fidelity);
        if let Some(g) = rep.gowers_u3 {
            println!("  gowers U3       {g:.12}");
        }
        if let Some(b) = rep.f_chi_lower_bound {
            println!("  flatness bound  {b:.12}   (~0.0762 per copy)");
        }
        assert!((rep.fidelity - cos2.powi(m as i32)).abs() < 1e-9);
        // For T tensor powers up to 2, extent * fidelity = 1 exactly.
        assert!((rep.xi_times_fidelity - 1.0).abs() < 1e-6);
        assert!(rep.all_checks_hold);
    }

    // The extent of a product is the product of extents here, and 1/F is
    // always a lower bound for xi.
    let t1 = rank::measure_report(
        &DenseState::magic_t_power(1)?,
        &Dictionary::enumerate(1, DictKind::Stab)?,
    )?;
    let t2 = rank::measure_report(
        &DenseState::magic_t_power(2)?,
        &Dictionary::enumerate(2, DictKind::Stab)?,
    )?;
    println!(
        "xi(T)^2 = {:.9} vs xi(T^2) = {:.9}",
        t1.extent * t1.extent,
        t2.extent
    );
    assert!((t1.extent * t1.extent - t2.extent).abs() < 1e-5);
    Ok(())
}
