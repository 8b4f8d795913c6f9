/// Projects `-s` onto the cone `{w : w[order[0]] >= w[order[1]] >= ..}`.
///
/// Classic pool-adjacent-violators: scan along `order`, pool neighbouring
/// blocks whenever their means increase, emit block means.
pub fn pav_refine(s: &[f64], order: &[usize]) -> Vec<f64> {
    assert_eq!(s.len(), order.len());
    // (sum, count) per pooled block, in scan order
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(order.len());
    for &j in order {
        let mut block = (-s[j], 1usize);
        while let Some(&(sum, count)) = blocks.last() {
            if sum / count as f64 >= block.0 / block.1 as f64 {
                break;
            }
            block = (block.0 + sum, block.1 + count);
            blocks.pop();
        }
        blocks.push(block);
    }
    let mut w = vec![0.0; s.len()];
    let mut pos = 0;
    for (sum, count) in blocks {
        let mean = sum / count as f64;
        for &j in &order[pos..pos + count] {
            w[j] = mean;
        }
        pos += count;
    }
    w
}
