use std::ops::Range;

/// Contiguous column ranges of width `sbsize`; the last one may be narrower.
pub fn split_blocks(k_act: usize, sbsize: usize) -> Vec<Range<usize>> {
    assert!(sbsize >= 1, "sbsize must be at least 1");
    (0..k_act)
        .step_by(sbsize)
        .map(|start| start..(start + sbsize).min(k_act))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_division() {
        assert_eq!(split_blocks(10, 5), vec![0..5, 5..10]);
    }

    #[test]
    fn remainder_block() {
        assert_eq!(split_blocks(7, 5), vec![0..5, 5..7]);
    }

    #[test]
    fn empty_and_single() {
        assert!(split_blocks(0, 3).is_empty());
        assert_eq!(split_blocks(3, 8), vec![0..3]);
        assert_eq!(split_blocks(3, 1), vec![0..1, 1..2, 2..3]);
    }
}
