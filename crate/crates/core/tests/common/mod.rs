use semantic_mec::queueing::ChiBatch;

/// `new` must be `old` with some leading batches gone, the oldest survivor
/// possibly shortened, and at most one batch appended; or empty apart from
/// a single appended batch.
pub fn fifo_successor(old: &[ChiBatch], new: &[ChiBatch]) -> bool {
    let tail_ok = |kept: &[ChiBatch]| {
        if kept.len() > old.len() {
            return false;
        }
        let rest = &old[old.len() - kept.len()..];
        kept.iter().zip(rest).enumerate().all(|(i, (k, o))| {
            k.factor == o.factor
                && if i == 0 {
                    k.remaining_bits <= o.remaining_bits
                } else {
                    k.remaining_bits == o.remaining_bits
                }
        })
    };
    tail_ok(new) || (!new.is_empty() && tail_ok(&new[..new.len() - 1]))
}
