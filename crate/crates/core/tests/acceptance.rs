use std::time::Instant;

use coarse_lab::suite::{run_row, SuiteConfig};

fn criterion(id: usize) {
    let cfg = SuiteConfig::default();
    let start = Instant::now();
    let row = run_row(id, &cfg).expect("suite input is valid");
    println!("{} [{:.1}s]", row.summary(), start.elapsed().as_secs_f64());
    assert!(row.pass, "criterion {id} failed: {}", row.detail);
}

#[test]
fn criterion_01() {
    criterion(1);
}
#[test]
fn criterion_02() {
    criterion(2);
}
#[test]
fn criterion_03() {
    criterion(3);
}
#[test]
fn criterion_04() {
    criterion(4);
}
#[test]
fn criterion_05() {
    criterion(5);
}
#[test]
fn criterion_06() {
    criterion(6);
}
#[test]
fn criterion_07() {
    criterion(7);
}
#[test]
fn criterion_08() {
    criterion(8);
}
#[test]
fn criterion_09() {
    criterion(9);
}
#[test]
fn criterion_10() {
    criterion(10);
}
#[test]
fn criterion_11() {
    criterion(11);
}
#[test]
fn criterion_12() {
    criterion(12);
}
