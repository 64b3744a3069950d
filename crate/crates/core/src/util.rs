//! Small helpers shared across modules.

/// Intersection of two strictly-increasing slices.
pub(crate) fn intersect_sorted(xs: &[u32], ys: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < xs.len() && j < ys.len() {
        match xs[i].cmp(&ys[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(xs[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Membership test in a strictly-increasing slice.
pub(crate) fn contains_sorted(xs: &[u32], x: u32) -> bool {
    xs.binary_search(&x).is_ok()
}
