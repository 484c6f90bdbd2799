//! A minimal config is expanded to the full echo; the echo parses back to
//! the same hash.

use thornsim::io::config::parse_config_str;

fn main() -> thornsim::Result<()> {
    let cfg = parse_config_str(r#"{"preset": "Si", "E_MeV": 855, "run": {"n_trajectories": 100}}"#)?;
    let echo = cfg.to_json();
    println!("{echo}");
    let back = parse_config_str(&echo)?;
    println!("hash {} (round trip {})", cfg.hash(), if back.hash() == cfg.hash() { "identical" } else { "differs" });
    Ok(())
}
