//! Closed-form block solvers against brute-force oracles.

use semantic_mec::verify;

fn main() -> semantic_mec::Result<()> {
    for report in verify::run_all(200, 42)? {
        println!("{report}");
    }
    Ok(())
}
