use crate::raster::BinaryMask;

/// Closed boundary chain of pixel coordinates `(x, y)`.
pub type Chain = Vec<(i64, i64)>;

/// Neighbor offsets in counter-clockwise screen order starting east.
const DIRS: [(i64, i64); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];
const WEST: usize = 4;

fn dir_index(from: (i64, i64), to: (i64, i64)) -> usize {
    let d = (to.0 - from.0, to.1 - from.1);
    DIRS.iter().position(|&o| o == d).expect("8-neighbors")
}

/// Outer boundary of every 8-connected foreground component, one chain per
/// component in raster order of their first pixel. Holes are not traced.
pub fn find_outer_contours(mask: &BinaryMask) -> Vec<Chain> {
    let (w, h) = (mask.width(), mask.height());
    let mut seen = vec![false; w * h];
    let mut chains = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) || seen[y * w + x] {
                continue;
            }
            mark_component(mask, &mut seen, x, y);
            chains.push(follow_border(mask, (x as i64, y as i64)));
        }
    }
    chains
}

fn mark_component(mask: &BinaryMask, seen: &mut [bool], x: usize, y: usize) {
    let w = mask.width();
    let mut stack = vec![(x as i64, y as i64)];
    seen[y * w + x] = true;
    while let Some((px, py)) = stack.pop() {
        for (dx, dy) in DIRS {
            let (qx, qy) = (px + dx, py + dy);
            if mask.get_signed(qx, qy) && !seen[qy as usize * w + qx as usize] {
                seen[qy as usize * w + qx as usize] = true;
                stack.push((qx, qy));
            }
        }
    }
}

/// Border following from the raster-first pixel of a component, whose west
/// neighbor is background.
fn follow_border(mask: &BinaryMask, start: (i64, i64)) -> Chain {
    let on = |p: (i64, i64)| mask.get_signed(p.0, p.1);
    let step = |p: (i64, i64), d: usize| (p.0 + DIRS[d].0, p.1 + DIRS[d].1);

    // clockwise from the west neighbor
    let Some(first) = (0..8)
        .map(|k| (WEST + 8 - k) % 8)
        .map(|d| step(start, d))
        .find(|&q| on(q))
    else {
        return vec![start];
    };

    let mut chain = vec![start];
    let (mut prev, mut cur) = (first, start);
    loop {
        // counter-clockwise around `cur`, starting after `prev`
        let from = dir_index(cur, prev);
        let next = (1..=8)
            .map(|k| step(cur, (from + k) % 8))
            .find(|&q| on(q))
            .expect("prev is foreground");
        if next == start && cur == first {
            break;
        }
        prev = cur;
        cur = next;
        chain.push(cur);
    }
    chain
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    fn boundary_oracle(mask: &BinaryMask) -> HashSet<(i64, i64)> {
        // foreground pixels with a 4-neighbor in the background
        let mut out = HashSet::new();
        for y in 0..mask.height() as i64 {
            for x in 0..mask.width() as i64 {
                if mask.get_signed(x, y)
                    && [(1, 0), (-1, 0), (0, 1), (0, -1)]
                        .iter()
                        .any(|(dx, dy)| !mask.get_signed(x + dx, y + dy))
                {
                    out.insert((x, y));
                }
            }
        }
        out
    }

    #[test]
    fn empty_and_single_pixel() {
        assert!(find_outer_contours(&BinaryMask::filled(4, 4, false)).is_empty());
        let m = BinaryMask::from_fn(3, 3, |x, y| x == 1 && y == 2);
        assert_eq!(find_outer_contours(&m), vec![vec![(1, 2)]]);
    }

    #[test]
    fn two_blocks() {
        let m = BinaryMask::from_fn(10, 5, |x, y| (1..4).contains(&y) && (x < 3 || (6..9).contains(&x)));
        let chains = find_outer_contours(&m);
        assert_eq!(chains.len(), 2);
        for c in &chains {
            assert_eq!(c.len(), 8);
            assert_eq!(c.iter().collect::<HashSet<_>>().len(), 8);
        }
        assert_eq!(chains[0][0], (0, 1));
        assert_eq!(chains[1][0], (6, 1));
    }

    #[test]
    fn chain_steps_are_eight_adjacent() {
        let m = BinaryMask::from_fn(20, 20, |x, y| {
            let (dx, dy) = (x as f64 - 9.5, y as f64 - 9.5);
            dx * dx + dy * dy < 64.0
        });
        let chains = find_outer_contours(&m);
        assert_eq!(chains.len(), 1);
        let c = &chains[0];
        for i in 0..c.len() {
            let (a, b) = (c[i], c[(i + 1) % c.len()]);
            assert!((a.0 - b.0).abs() <= 1 && (a.1 - b.1).abs() <= 1);
        }
        assert_eq!(c.iter().copied().collect::<HashSet<_>>(), boundary_oracle(&m));
    }

    #[test]
    fn holes_are_ignored() {
        let m = BinaryMask::from_fn(7, 7, |x, y| {
            (1..6).contains(&x) && (1..6).contains(&y) && !(x == 3 && y == 3)
        });
        let chains = find_outer_contours(&m);
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].len(), 16);
    }

    #[test]
    fn diagonal_pixels_form_one_component() {
        let m = BinaryMask::from_fn(4, 4, |x, y| x == y);
        let chains = find_outer_contours(&m);
        assert_eq!(chains.len(), 1);
        // one-pixel-wide strokes are traced out and back
        assert_eq!(chains[0], vec![(0, 0), (1, 1), (2, 2), (3, 3), (2, 2), (1, 1)]);
    }
}
