//! Mutually unbiased bases in prime and prime-power dimensions.
//!
//! `cargo run --example mub_bases -- 4`

use hdsteer::quantum::mub::{
    max_mubs, max_unbiasedness_violation, mub_bases, orthonormality_violation,
};

fn main() -> hdsteer::Result<()> {
    let d: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(4);
    let Some(k) = max_mubs(d) else {
        println!("no construction for d = {d}");
        return Ok(());
    };
    let bases = mub_bases(d, k)?;
    println!("d = {d}: {k} bases");
    for (x, b) in bases.iter().enumerate() {
        println!(
            "  basis {x}: orthonormality error {:.1e}",
            orthonormality_violation(b)
        );
    }
    println!(
        "max | |<e|f>|^2 - 1/d | over pairs: {:.1e}",
        max_unbiasedness_violation(&bases)
    );
    Ok(())
}
