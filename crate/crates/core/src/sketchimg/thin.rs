//! Iterative stroke thinning.
//!
//! Uses the classic two-subpass deletion conditions (neighborhood ink count
//! in 2..=6, crossing number 1, and the per-subpass side conditions) applied
//! until a full pass removes nothing. Deletions take effect immediately in
//! scan order, so every removed pixel is 8-simple at the moment it is
//! removed; this keeps the number of 8-connected components stable for
//! components of two or more pixels, and single pixels are never touched.

use super::BinaryMask;

/// Thin ink strokes toward unit width. The output is a subset of the input
/// and a fixpoint: `thin(thin(m)) == thin(m)`.
pub fn thin(mask: &BinaryMask) -> BinaryMask {
    let mut out = mask.clone();
    loop {
        let removed = subpass(&mut out, true) + subpass(&mut out, false);
        if removed == 0 {
            return out;
        }
    }
}

fn subpass(mask: &mut BinaryMask, first: bool) -> usize {
    let (w, h) = (mask.width(), mask.height());
    let mut removed = 0;
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) && deletable(mask, x, y, first) {
                mask.set(x, y, false);
                removed += 1;
            }
        }
    }
    removed
}

fn deletable(mask: &BinaryMask, x: usize, y: usize, first: bool) -> bool {
    // Neighbors in the circular order N, NE, E, SE, S, SW, W, NW.
    let at = |dx: i64, dy: i64| -> bool {
        let nx = x as i64 + dx;
        let ny = y as i64 + dy;
        nx >= 0
            && ny >= 0
            && nx < mask.width() as i64
            && ny < mask.height() as i64
            && mask.get(nx as usize, ny as usize)
    };
    let n = [
        at(0, -1),
        at(1, -1),
        at(1, 0),
        at(1, 1),
        at(0, 1),
        at(-1, 1),
        at(-1, 0),
        at(-1, -1),
    ];
    let ink_neighbors = n.iter().filter(|&&b| b).count();
    if !(2..=6).contains(&ink_neighbors) {
        return false;
    }
    let transitions = (0..8).filter(|&i| !n[i] && n[(i + 1) % 8]).count();
    if transitions != 1 {
        return false;
    }
    let (north, east, south, west) = (n[0], n[2], n[4], n[6]);
    if first {
        !(north && east && south) && !(east && south && west)
    } else {
        !(north && east && west) && !(north && south && west)
    }
}
