// Temporary calibration harness (not part of the deliverable test suite).
use macdisp_core::channel::{joint_type_project, Channel, JointInput};
use macdisp_core::fbl_sim::{
    build_codebook, gaussian_approx_rates, message_counts, simulate_error, CodebookSpec,
    SimOptions,
};
use macdisp_core::infogeom::{dispersion_matrix, mean_vector};

fn bsc_mac(p: f64, delta: f64) -> Channel {
    // User 1 drives a binary symmetric channel; user 2 nudges the noise.
    let w = vec![
        1.0 - (p - delta), p - delta, // x1=0 x2=0
        1.0 - (p + delta), p + delta, // x1=0 x2=1
        p - delta, 1.0 - (p - delta), // x1=1 x2=0
        p + delta, 1.0 - (p + delta), // x1=1 x2=1
    ];
    Channel::new(2, 2, 2, w).unwrap()
}

#[test]
#[ignore]
fn calibrate_bsc_fixture() {
    for &(p, delta) in &[(0.369f64, 0.0), (0.369, 0.005), (0.362, 0.005), (0.375, 0.005)] {
        let ch = bsc_mac(p, delta);
        let p_in = JointInput::uniform(2, 2);
        let iv = mean_vector(&p_in, &ch).unwrap();
        let v = dispersion_matrix(&p_in, &ch).unwrap();
        println!(
            "p = {p}, delta = {delta}: I = ({:.5}, {:.5}), s1 = {:.4}, s12 = {:.4}",
            iv.i1, iv.i12, v.v1.sqrt(), v.v12.sqrt()
        );
        for &n in &[100usize, 200, 400] {
            let p_n = joint_type_project(&p_in, n as u64).unwrap();
            let rates = gaussian_approx_rates(&ch, &p_n, n, 0.1, 0.0, &p_n).unwrap();
            let (m1, m2) = message_counts(n, rates.achievable);
            if m1 as u128 * m2 as u128 * n as u128 > 20_000_000 {
                println!("  n = {n}: M = ({m1}, {m2}) TOO BIG");
                continue;
            }
            for gamma_a in [None, Some(0.45)] {
                let t0 = std::time::Instant::now();
                let spec =
                    CodebookSpec::with_time_sharing(n, m1, m2, &p_n, &p_n, 0.0, 4242).unwrap();
                let cb = build_codebook(&spec, &ch).unwrap();
                let opts = SimOptions { gamma_a, ..Default::default() };
                let rep = simulate_error(&cb, &ch, 100_000, &opts).unwrap();
                println!(
                    "  n = {n}: M = ({m1}, {m2}), eps_hat = {:.4} [{:.4}, {:.4}], gamma_a = {:.3}, {:.0}s",
                    rep.error_rate, rep.wilson_low, rep.wilson_high, rep.gamma_a,
                    t0.elapsed().as_secs_f64()
                );
            }
        }
    }
}
