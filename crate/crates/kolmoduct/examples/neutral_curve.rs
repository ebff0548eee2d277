//! Neutral curve R_c(kx) for the j = 1 family and the location of its
//! minimum (the first instability of the basic flow).

use kolmoduct::linstab::neutral_curve;

fn main() {
    let grid: Vec<f64> = (0..26).map(|i| 0.40 + 0.02 * i as f64).collect();
    let curve = neutral_curve(20.0, 4, 1, &grid).unwrap();

    println!("{:>6}  {:>12}", "k_x", "R_c");
    for point in &curve.points {
        match &point.critical_reynolds {
            Ok(rc) => println!("{:>6.2}  {rc:>12.3}", point.kx),
            Err(e) => println!("{:>6.2}  failed: {e}", point.kx),
        }
    }
    if let Some((kx, rc)) = curve.minimum {
        println!("\nminimum: R_c = {rc:.3} at k_x = {kx}");
    }
}
