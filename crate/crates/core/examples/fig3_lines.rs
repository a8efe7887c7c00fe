//! SR of a noisy maximally entangled state as a function of visibility, in
//! d = 4 with two to four MUBs, written as CSV on stdout.

use hdsteer::report::{fig3_default, fig3_rows, write_rows, Format};
use hdsteer::sdp::SdpConfig;

fn main() -> hdsteer::Result<()> {
    let data = fig3_default(11, &SdpConfig::default())?;
    for line in &data.lines {
        if let Some(fit) = line.fit {
            eprintln!(
                "k={}: SR = {:.4} v {:+.4}, onset {:.4}",
                line.k,
                fit.slope,
                fit.intercept,
                fit.onset()
            );
        }
    }
    write_rows(&fig3_rows(&data), Format::Csv, std::io::stdout().lock())
}
