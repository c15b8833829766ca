//! Prints the DF-to-penalty curve for a few (alpha, beta) settings.
//!
//! `cargo run --example activation_curve`

use dfflops::reg::{activ, ActivationParams};

fn main() {
    let settings = [(0.1, 10.0), (0.1, 1.0), (0.01, 5.0), (0.5, 5.0)];
    print!("{:>8}", "df/|C|");
    for (a, b) in settings {
        print!("  {:>14}", format!("a={a} b={b}"));
    }
    println!();
    for x in [0.0, 0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0] {
        print!("{x:>8}");
        for (a, b) in settings {
            let p = ActivationParams::new(a, b).expect("valid curve");
            print!("  {:>14.6}", activ(x, &p));
        }
        println!();
    }
}
