use super::{Layout, SimError};

/// For each PRR count, a uniform split of the fabric and a skewed split in
/// which every region is 1.5x the previous one. Sizes are floored and the
/// remainder goes to the last region. Skewed splits that would leave a
/// region empty are skipped; duplicates (a count of 1) are dropped.
pub fn enumerate_layouts(fabric_area: u64, prr_counts: &[usize]) -> Result<Vec<Layout>, SimError> {
    let mut out: Vec<Layout> = Vec::new();
    for &n in prr_counts {
        if n == 0 {
            return Err(SimError::InvalidPlatform("PRR count 0 is not a layout".into()));
        }
        if n as u64 > fabric_area {
            return Err(SimError::InvalidPlatform(format!(
                "fabric area {fabric_area} cannot hold {n} PRRs"
            )));
        }
        // Weights 1.5^i scaled to integers: 3^i * 2^(n-1-i).
        let weights: Vec<u128> = (0..n)
            .map(|i| 3u128.pow(i as u32) * 2u128.pow((n - 1 - i) as u32))
            .collect();
        for w in [vec![1u128; n], weights] {
            let total: u128 = w.iter().sum();
            let mut sizes: Vec<u64> = w.iter().map(|&wi| (fabric_area as u128 * wi / total) as u64).collect();
            let rem = fabric_area - sizes.iter().sum::<u64>();
            *sizes.last_mut().expect("n >= 1") += rem;
            if sizes.contains(&0) {
                continue;
            }
            let layout = Layout::new(fabric_area, sizes)?;
            if !out.iter().any(|l| l.prr_sizes == layout.prr_sizes) {
                out.push(layout);
            }
        }
    }
    Ok(out)
}
