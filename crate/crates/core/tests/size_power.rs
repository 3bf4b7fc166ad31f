mod common;

use common::{power_checks, size_checks, stability_rates};

#[test]
fn sizes_at_five_percent() {
    let checks = size_checks();
    for c in &checks {
        println!("{:<45} {:.4}  [{}, {}]", c.name, c.rate, c.lo, c.hi);
    }
    let bad: Vec<_> = checks.iter().filter(|c| !c.ok()).collect();
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn powers_under_alternatives() {
    let checks = power_checks();
    for c in &checks {
        println!("{:<55} {:.4}  >= {}", c.name, c.rate, c.lo);
    }
    let bad: Vec<_> = checks.iter().filter(|c| !c.ok()).collect();
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn cusum_stable_and_break() {
    let (stable, detected) = stability_rates(500, 120, 31);
    println!("stable verdicts {stable:.3}, break detected {detected:.3}");
    assert!(stable >= 0.9, "stable DGP judged stable only {stable}");
    assert!(
        detected >= 0.7,
        "mid-sample slope break detected only {detected}"
    );
}
