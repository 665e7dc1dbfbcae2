//! Scoring detected beats against a reference annotation.

use fecg_anc::metrics::{detection_report, fmt_percent, match_peaks, MatchResult};
use fecg_anc::qrs::PeakList;

fn row(label: &str, m: &MatchResult) {
    let r = detection_report(m).rounded();
    println!(
        "{label:<12} {:>3} {:>3} {:>3} {:>7} {:>7} {:>7} {:>7}",
        m.tp,
        m.fp,
        m.fn_,
        fmt_percent(r.sensitivity),
        fmt_percent(r.ppv),
        fmt_percent(r.accuracy),
        fmt_percent(r.f1)
    );
}

fn main() -> fecg_anc::Result<()> {
    println!("{:<12} {:>3} {:>3} {:>3} {:>7} {:>7} {:>7} {:>7}", "", "tp", "fp", "fn", "se", "ppv", "acc", "f1");
    for (label, tp, fp, fn_) in [("channel 2", 20, 2, 1), ("channel 1", 21, 1, 0), ("no beats", 0, 0, 0)] {
        row(label, &MatchResult { tp, fp, fn_, pairs: Vec::new() });
    }

    // Matching with a 50 ms window at 250 Hz.
    let truth = PeakList::new(vec![100, 210, 320, 430, 540], 250.0)?;
    let found = PeakList::new(vec![102, 215, 250, 428, 545, 600], 250.0)?;
    let m = match_peaks(&truth, &found, 50.0)?;
    row("matched", &m);
    println!("pairs {:?}", m.pairs);
    Ok(())
}
