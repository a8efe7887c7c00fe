//! Schmidt-number certificates from a lower bound on the steering robustness.
//!
//! `cargo run --example certify_dimension -- 0.8716 5`

use hdsteer::certify::certified_schmidt_number;

fn main() -> hdsteer::Result<()> {
    let mut args = std::env::args().skip(1);
    let sr: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.8716);
    let k: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let cert = certified_schmidt_number(sr, k)?;
    for e in &cert.witness_trace {
        let tag = if e.excluded { "ruled out" } else { "possible" };
        println!(
            "n = {:<2} ceiling {:.4} ({:<19}) {tag}",
            e.n,
            e.sr_ceiling,
            e.source.as_str()
        );
    }
    if let Some(w) = cert.closed_form_n {
        println!("closed-form witness gives n >= {w:.4}");
    }
    for w in &cert.warnings {
        println!("warning: {w}");
    }
    println!("genuine {}-dimensional steering", cert.certified_n);
    Ok(())
}
