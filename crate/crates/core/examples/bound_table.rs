//! Steering-robustness ceilings for k measurements on Schmidt number n,
//! with the formula that gives each one.

use hdsteer::bounds::{crossover_k, table1};

fn main() -> hdsteer::Result<()> {
    let grid = table1(8, 6)?;
    print!("k\\n");
    for n in 2..=6 {
        print!("{n:>10}");
    }
    println!();
    for row in &grid {
        print!("{:<3}", row[0].k);
        for b in &row[1..] {
            let mark = match b.source.as_str() {
                "qubit_triplet_exact" => "*",
                "cloning" => " ",
                _ => "+",
            };
            print!("{:>9}{mark}", b.render());
        }
        println!();
    }
    println!("+ improves on cloning, * exact for qubit triplets");
    for n in [2, 3, 6, 100] {
        println!(
            "recursive bound beats cloning up to k = {} at n = {n}",
            crossover_k(n)?
        );
    }
    Ok(())
}
