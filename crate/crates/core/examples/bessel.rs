//! The planar-element kernel J₁(x)/x against its high-order series.

use lis_core::specfun::{j1_over_x_asymptotic, j1_over_x_double, j1_over_x_series, j1_series_oracle, SERIES_LIMIT};

fn main() {
    println!("{:>6} {:>24} {:>10}", "x", "J1(x)/x", "rel err");
    for x in [0.0, 0.5, 2.0, 7.0155866, 12.0, 19.5] {
        let v = j1_over_x_double(x);
        let r = if x == 0.0 { 0.5 } else { j1_series_oracle(x, 90).expect("oracle domain") / x };
        let err = if r == 0.0 { (v - r).abs() } else { ((v - r) / r).abs() };
        println!("{x:>6} {v:>24.17e} {err:>10.1e}");
    }
    let x = SERIES_LIMIT;
    println!(
        "at the branch switch x = {x}: series {:.17e}, asymptotic {:.17e}",
        j1_over_x_series(x),
        j1_over_x_asymptotic(x)
    );
}
