//! Smallest isotropic-state visibility that still certifies Schmidt number
//! above n, for pairs (closed form) and for three or four MUBs (SDP).

use hdsteer::certify::{noise_threshold, noise_threshold_pairs};

fn main() -> hdsteer::Result<()> {
    for (k, d, n) in [
        (3, 3, 2),
        (3, 4, 2),
        (3, 4, 3),
        (4, 3, 2),
        (4, 4, 2),
        (3, 3, 3),
    ] {
        let t = noise_threshold(d, k, n)?;
        // two measurements never certify n = d
        let pair = noise_threshold_pairs(d, n).ok();
        match t.v_star {
            Some(v) => println!(
                "k={k} d={d} n={n}: v* = {v:.5} ({}), pairs {}{}",
                t.method.as_str(),
                pair.map_or("none".into(), |p| format!("{p:.4}")),
                if pair.is_none_or(|p| v < p) {
                    ", more noise tolerant"
                } else {
                    ""
                }
            ),
            None => println!(
                "k={k} d={d} n={n}: SR(1) = {:.4} does not exceed the ceiling {:.4}",
                t.sr_at_one, t.sr_ceiling
            ),
        }
    }
    Ok(())
}
