//! Operation-count ledger mirroring the numbered cost phases of the
//! alignment pipelines. Counts are complex multiply-accumulate units of the
//! implemented loops (FFT phases use the usual `n log2 n` proxy), so the
//! benchmark harness can check that measured time tracks the ledger and that
//! per-pair work scales with the retained rank.

/// Degree-sum size `sum_l (2l + 1)^2` for `l <= l_max`.
pub fn wigner_entry_count(l_max: usize) -> u64 {
    (0..=l_max as u64).map(|l| (2 * l + 1) * (2 * l + 1)).sum()
}

fn fft_ops(n: u64) -> u64 {
    if n <= 1 {
        return 1;
    }
    let log = (n as f64).log2().ceil() as u64;
    n * log
}

/// Per-pair step 1 of the full 2-D landscape.
pub fn pair_2d_full_step1(radial: usize, angular: usize) -> u64 {
    radial as u64 * angular as u64
}

/// Per-pair step 1 over `rank` principal rings.
pub fn pair_2d_compressed_step1(rank: usize, angular: usize) -> u64 {
    rank as u64 * angular as u64
}

/// Per-pair step 2 (inverse FFT to the angle grid), either path.
pub fn pair_2d_step2(q_out: usize) -> u64 {
    fft_ops(q_out as u64)
}

/// 2-D precompute: kernel accumulation over targets.
pub fn precompute_2d_kernel(n_targets: usize, radial: usize, angular: usize) -> u64 {
    n_targets as u64 * angular as u64 * (radial as u64 * radial as u64)
}

/// 2-D precompute: projecting `n_images` onto `rank` principal rings.
pub fn precompute_2d_compress(n_images: usize, radial: usize, angular: usize, rank: usize) -> u64 {
    n_images as u64 * radial as u64 * angular as u64 * rank as u64
}

/// Per-pair step 1 of the full 3-D landscape (valid degree/order triples).
pub fn pair_3d_full_step1(radial: usize, l_max: usize) -> u64 {
    radial as u64 * wigner_entry_count(l_max)
}

/// Per-pair step 2 of the full path, dense over the stored degree axis.
pub fn pair_3d_full_step2(l_max: usize, n_beta: usize) -> u64 {
    let m = 2 * l_max as u64 + 1;
    n_beta as u64 * (l_max as u64 + 1) * m * m
}

/// Per-pair step 1 over `rank_c` principal shells.
pub fn pair_3d_compressed_step1(rank_c: usize, l_max: usize) -> u64 {
    rank_c as u64 * wigner_entry_count(l_max)
}

/// Per-pair step 1b: projecting the degree axis onto `rank_d` vectors.
pub fn pair_3d_step1b(rank_d: usize, l_max: usize) -> u64 {
    let m = 2 * l_max as u64 + 1;
    rank_d as u64 * (l_max as u64 + 1) * m * m
}

/// Per-pair step 2 of the compressed path.
pub fn pair_3d_compressed_step2(rank_d: usize, l_max: usize, n_beta: usize) -> u64 {
    let m = 2 * l_max as u64 + 1;
    n_beta as u64 * rank_d as u64 * m * m
}

/// Per-pair step 3 (2-D FFTs over the orders), either path.
pub fn pair_3d_step3(l_max: usize, n_beta: usize) -> u64 {
    let m = 2 * l_max as u64 + 1;
    n_beta as u64 * fft_ops(m * m)
}

/// Total per-pair ledger for the full 2-D path.
pub fn pair_2d_full_total(radial: usize, angular: usize, q_out: usize) -> u64 {
    pair_2d_full_step1(radial, angular) + pair_2d_step2(q_out)
}

/// Total per-pair ledger for the compressed 2-D path.
pub fn pair_2d_compressed_total(rank: usize, angular: usize, q_out: usize) -> u64 {
    pair_2d_compressed_step1(rank, angular) + pair_2d_step2(q_out)
}

/// Total per-pair ledger for the full 3-D path.
pub fn pair_3d_full_total(radial: usize, l_max: usize, n_beta: usize) -> u64 {
    pair_3d_full_step1(radial, l_max)
        + pair_3d_full_step2(l_max, n_beta)
        + pair_3d_step3(l_max, n_beta)
}

/// Total per-pair ledger for the compressed 3-D path (includes projecting the
/// probe volume, which is per-pair when the target is shared).
pub fn pair_3d_compressed_total(
    radial: usize,
    l_max: usize,
    rank_c: usize,
    rank_d: usize,
    n_beta: usize,
) -> u64 {
    let m = 2 * l_max as u64 + 1;
    let compress_probe = radial as u64 * (l_max as u64 + 1) * (l_max as u64 + 1) * rank_c as u64;
    let _ = m;
    compress_probe
        + pair_3d_compressed_step1(rank_c, l_max)
        + pair_3d_step1b(rank_d, l_max)
        + pair_3d_compressed_step2(rank_d, l_max, n_beta)
        + pair_3d_step3(l_max, n_beta)
}
