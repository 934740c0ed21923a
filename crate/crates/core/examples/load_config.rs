//! Parse a config, override a sweepable parameter and print its hash.

use semantic_mec::SystemConfig;

fn main() -> semantic_mec::Result<()> {
    let cfg = SystemConfig::from_toml_str(
        r#"
        num_tds = 4
        V = 1e16
        R_avg = 3e6
        arrival_mode = "fixed"
        distances = [120.0, 160.0, 200.0, 250.0]
        "#,
    )?;
    println!("noise power {:.3e} W over {} Hz", cfg.noise_power(), cfg.bandwidth);
    for n in 0..cfg.num_tds {
        println!("td {n}: {} m, lambda {:.1e} bits", cfg.distance(n), cfg.arrival_mean_lambda.at(n));
    }
    println!("hash {}", cfg.hash_hex());

    let louder = cfg.with_param("V", 1e17)?;
    println!("V=1e17 hash {}", louder.hash_hex());
    assert!(cfg.with_param("bandwidth", 1.0).is_err());
    print!("{}", louder.to_toml_string());
    Ok(())
}
