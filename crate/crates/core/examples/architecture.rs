//! Prints the layer chain for a few input/output sizes.
//!
//! ```text
//! cargo run --example architecture -- 5459 5703 4
//! ```

use aime::aime::build_architecture;

fn main() -> aime::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let cases = match args.as_slice() {
        [p, q, d] => vec![(*p, *q, *d)],
        _ => vec![(5459, 5703, 4), (40, 40, 4), (3, 3, 2)],
    };
    for (p, q, d) in cases {
        let arch = build_architecture(p, q, d)?;
        let chain: Vec<String> = arch.widths().iter().map(usize::to_string).collect();
        let net = arch.init_network(0)?;
        println!("p={p} q={q} d={d}");
        println!("  widths     {}", chain.join(" -> "));
        println!("  dropout    {:?}", arch.layer_dropout());
        println!("  parameters {}", net.parameter_count());
    }
    Ok(())
}
