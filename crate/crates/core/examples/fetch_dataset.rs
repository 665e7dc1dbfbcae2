//! Downloads the public recording and validates its shape.
//!
//!     cargo run --example fetch_dataset -- [url] [dest]

use std::path::PathBuf;

use fecg_anc::fetch::{fetch_dataset, DAISY_URL};

fn main() {
    let mut args = std::env::args().skip(1);
    let url = args.next().unwrap_or_else(|| DAISY_URL.to_string());
    let dest = args.next().map_or_else(|| PathBuf::from("foetal_ecg.dat"), PathBuf::from);
    match fetch_dataset(&url, &dest) {
        Ok(rec) => println!("saved {}x{} to {}", rec.len(), rec.channel_count(), dest.display()),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    }
}
