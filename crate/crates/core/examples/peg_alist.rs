//! Writes a regular PEG-style code in alist format to stdout.
//!
//! `cargo run --example peg_alist -- <n> <dv> <dc> [seed] [min_girth]`

use errfloor::construct::peg_regular_with_girth;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let num = |i: usize, default: Option<u64>| -> u64 {
        match args.get(i) {
            Some(s) => s.parse().unwrap_or_else(|_| panic!("argument {} must be an integer", i + 1)),
            None => default.expect("usage: peg_alist <n> <dv> <dc> [seed] [min_girth]"),
        }
    };
    let (n, dv, dc) = (num(0, None) as usize, num(1, None) as usize, num(2, None) as usize);
    let code = peg_regular_with_girth(n, dv, dc, num(4, Some(6)) as usize, num(3, Some(1)), 100)
        .unwrap_or_else(|e| panic!("{e}"));
    print!("{}", code.to_alist());
}
