use fermi_qfi::bogoliubov::*;
use fermi_qfi::linalg::{CMat, logm, max_abs};
use num_complex::Complex64;

fn main() {
    let theta = std::f64::consts::PI;
    let u = CMat::from_element(2, 2, Complex64::new(0.0, 0.0));
    let mut u = u;
    u[(0,0)] = Complex64::new(theta.cos(), 0.0);
    u[(1,1)] = Complex64::new(theta.cos(), 0.0);
    let mut v = CMat::zeros(2, 2);
    v[(0,1)] = Complex64::new(theta.sin(), 0.0);
    v[(1,0)] = Complex64::new(-theta.sin(), 0.0);
    let map = BogoliubovMap::new(u, v).unwrap();
    println!("valid: {:?}", map.validate());
    let w = map.w();
    println!("W = {:.3e}", w);
    match logm(&w) {
        Ok(l) => { println!("logm OK, max={:.3}", max_abs(&l));
                   println!("exp(log)-w residual: {:.3e}", fermi_qfi::linalg::max_abs_diff(&fermi_qfi::linalg::expm(&l), &w)); }
        Err(e) => println!("logm error: {e}"),
    }
    match generator_matrix(&map) {
        Ok(s) => println!("S ok, commuting={} max={:.3}", s.is_commuting_case(), max_abs(s.matrix())),
        Err(e) => println!("generator error: {e}"),
    }
}
