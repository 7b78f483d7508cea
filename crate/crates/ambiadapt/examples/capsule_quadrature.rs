//! Builtin capsule grids and what makes them valid: enough capsules for
//! the order, weights summing to 4 pi, and discrete SH orthonormality.
//!
//! Run: `cargo run --example capsule_quadrature`

use ambiadapt::ambi::CapsuleArray;

fn main() {
    println!("order_limit  capsules  (N+1)^2  weight_sum     max |<Y,Y> - I|");
    for limit in 0..=3u32 {
        let array = CapsuleArray::builtin_grid(limit).expect("builtin grid");
        let weight_sum: f64 = array.weights().iter().sum();
        println!(
            "{limit:>11}  {:>8}  {:>7}  {weight_sum:.9}  {:.3e}",
            array.len(),
            (limit + 1) * (limit + 1),
            array.max_orthonormality_error(),
        );
    }

    // The same validation applies to layouts loaded from config text.
    let base = CapsuleArray::builtin_grid(1).unwrap();
    let mut toml = String::from("order_limit = 1\n");
    for (dir, w) in base.directions().iter().zip(base.weights()) {
        toml.push_str(&format!(
            "[[capsules]]\nazimuth_deg = {:.12}\ncolatitude_deg = {:.12}\nweight = {:.12}\n",
            dir.azimuth.to_degrees(),
            dir.colatitude.to_degrees(),
            w,
        ));
    }
    let loaded = CapsuleArray::from_toml_str(&toml).expect("valid layout file");
    println!();
    println!(
        "reloaded the order-1 grid from TOML: {} capsules, error {:.3e}",
        loaded.len(),
        loaded.max_orthonormality_error()
    );

    // Crowding all capsules into one hemisphere breaks the quadrature and
    // the constructor refuses it.
    let q = 20;
    let dirs: Vec<_> = (0..q)
        .map(|i| ambiadapt::ambi::Direction::new(0.3 * i as f64, 0.4 + 0.05 * (i % 5) as f64))
        .collect();
    let w = 4.0 * std::f64::consts::PI / q as f64;
    match CapsuleArray::new(dirs, vec![w; q], 3) {
        Err(e) => println!("hemisphere cluster rejected as expected: {e}"),
        Ok(_) => unreachable!("clustered grid must not validate"),
    }
}
