// Writes two samples to wide CSV files, reads them back and tests them.

use std::fs::File;

use pbf::curves::{GridSpec, ReprKind};
use pbf::harness::{ingest_pair, write_curves_csv, HeaderMode};
use pbf::permute::permutation_test;
use pbf::simgen::{gen_shifted_wiener, gen_wiener, MeanShift};
use pbf::statistic::PhiKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("pbf-csv-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let grid = GridSpec::unit_interval(93)?;
    let xs = gen_wiener(25, &grid, 1)?;
    let ys = gen_shifted_wiener(25, MeanShift::Exponential, 0.5, &grid, 2)?;
    let (x_path, y_path) = (dir.join("x.csv"), dir.join("y.csv"));
    write_curves_csv(File::create(&x_path)?, &xs, Some(&grid))?;
    write_curves_csv(File::create(&y_path)?, &ys, Some(&grid))?;

    let got = ingest_pair(&x_path, &y_path, ReprKind::Grid, None, HeaderMode::Auto)?;
    println!(
        "read {} + {} curves on {} grid points, {} rows dropped",
        got.sample.n(),
        got.sample.m(),
        got.sample.grid().map_or(0, |g| g.len()),
        got.dropped
    );
    let r = permutation_test(&got.sample, PhiKind::Log, 299, 3)?;
    println!("log: p = {:.3}", r.p_value);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
