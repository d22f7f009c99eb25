use psidelta::cbf::BernsteinSpec;
use psidelta::galerkin;
use std::time::Instant;

fn main() {
    let spec = BernsteinSpec::power(1.0).unwrap();
    let t0 = Instant::now();
    // criterion 3 dry-run: Richardson over N in {512,1024,2048,4096}
    let ns = [512usize, 1024, 2048, 4096];
    let mut spectra = Vec::new();
    for &n in &ns {
        let t = Instant::now();
        spectra.push(galerkin::spectrum_values(&spec, 1.0, n).unwrap());
        println!("N={n}: {:?}", t.elapsed());
    }
    for n in 1..=10usize {
        let vals: Vec<f64> = spectra.iter().map(|s| s.lambda(n)).collect();
        let (ext, bar) = galerkin::richardson_extrapolate(&vals);
        let target = n as f64 * std::f64::consts::PI / 2.0 - std::f64::consts::PI / 8.0;
        let err = (ext - target).abs();
        let allow = 1.0 / n as f64 + 3.0 * bar;
        println!(
            "n={n:2}: ext={ext:.9} target={target:.9} |err|={err:.3e} allow={allow:.3e} {}",
            if err <= allow { "OK" } else { "FAIL" }
        );
    }
    println!("criterion-3 total: {:?}", t0.elapsed());

    // criterion 10 dry-run: f_n distances at N = 2048 with vectors
    let t1 = Instant::now();
    let sp = galerkin::spectrum(&spec, 1.0, 2048).unwrap();
    println!("spectrum with vectors N=2048: {:?}", t1.elapsed());
    let modes = psidelta::modes::mode_table(&spec, 1.0, 20).unwrap();
    for m in modes.iter().filter(|m| m.n >= 5) {
        let d = galerkin::f_n_distance(&sp, m).unwrap();
        println!("n={:2}: f_n distance = {d:.4}", m.n);
    }
}
