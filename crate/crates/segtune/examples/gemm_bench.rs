// Throwaway throughput probe; deleted once sizing is settled.
use ndarray::Array2;
use std::time::Instant;

fn main() {
    // conv-like gemm shapes: (Cout, Cin*9) x (Cin*9, H*W)
    for &(m, k, n) in &[
        (16usize, 144usize, 16384usize),
        (32, 288, 4096),
        (64, 576, 1024),
        (128, 1152, 256),
        (64, 1152, 1024),
        (256, 256, 256),
    ] {
        let a = Array2::<f32>::from_elem((m, k), 0.5);
        let b = Array2::<f32>::from_elem((k, n), 0.25);
        let reps = (2_000_000_000 / (2 * m * k * n)).max(3);
        let t = Instant::now();
        let mut acc = 0.0f32;
        for _ in 0..reps {
            let c = a.dot(&b);
            acc += c[[0, 0]];
        }
        let secs = t.elapsed().as_secs_f64();
        let gflops = (2 * m * k * n * reps) as f64 / secs / 1e9;
        println!("({m:4},{k:5},{n:6}) reps={reps:5} {gflops:7.2} GFLOPS (acc={acc})");
    }
}
