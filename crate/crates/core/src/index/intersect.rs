//! Counting intersections of ascending id lists.

/// First position `>= begin` whose element is not less than `target`.
///
/// Exponential probe from `begin`, then binary search inside the last
/// bracket. Cost is logarithmic in the distance skipped, not in the list
/// length, so a cursor that moves forward through a long list stays cheap.
pub fn gallop(list: &[u32], begin: usize, target: u32) -> usize {
    if begin >= list.len() || list[begin] >= target {
        return begin;
    }
    // invariant: list[lo] < target
    let mut lo = begin;
    let mut step = 1;
    while lo + step < list.len() && list[lo + step] < target {
        lo += step;
        step <<= 1;
    }
    let hi = (lo + step).min(list.len());
    lo + 1 + list[lo + 1..hi].partition_point(|&x| x < target)
}

/// Size of the intersection of all `lists`.
///
/// The lists are visited shortest first: every id of the shortest list is
/// a candidate and each longer list is probed with a forward-only galloping
/// cursor. No intermediate sets are allocated.
pub fn intersection_count(lists: &mut [&[u32]]) -> usize {
    match lists.len() {
        0 => return 0,
        1 => return lists[0].len(),
        _ => {}
    }
    lists.sort_by_key(|l| l.len());
    let (driver, others) = lists.split_first().unwrap();
    if driver.is_empty() {
        return 0;
    }
    let mut cursors = vec![0usize; others.len()];
    let mut count = 0;
    'candidates: for &id in driver.iter() {
        for (list, cursor) in others.iter().zip(cursors.iter_mut()) {
            *cursor = gallop(list, *cursor, id);
            match list.get(*cursor) {
                None => break 'candidates,
                Some(&x) if x != id => continue 'candidates,
                Some(_) => {}
            }
        }
        count += 1;
    }
    count
}
