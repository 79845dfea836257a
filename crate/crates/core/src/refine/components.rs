use std::collections::VecDeque;

use crate::raster::BinaryMask;

use super::Connectivity;

const FOUR: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const EIGHT: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];

impl Connectivity {
    fn offsets(self) -> &'static [(i64, i64)] {
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

/// Labels foreground components in row-major discovery order.
///
/// Returns per-pixel labels (0 = background, components numbered from 1)
/// and the size of each component.
pub fn label_components(mask: &BinaryMask, connectivity: Connectivity) -> (Vec<u32>, Vec<u64>) {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let bits = mask.bits();
    let mut labels = vec![0u32; bits.len()];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..bits.len() {
        if !bits[start] || labels[start] != 0 {
            continue;
        }
        sizes.push(0u64);
        let label = sizes.len() as u32;
        labels[start] = label;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            sizes[label as usize - 1] += 1;
            let (x, y) = (p as i64 % w, p as i64 / w);
            for &(dx, dy) in connectivity.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let q = (ny * w + nx) as usize;
                if bits[q] && labels[q] == 0 {
                    labels[q] = label;
                    queue.push_back(q);
                }
            }
        }
    }
    (labels, sizes)
}

/// Keeps only the largest component. Ties go to the component whose first
/// pixel comes earliest in row-major order.
pub fn largest_connected_component(mask: &BinaryMask, connectivity: Connectivity) -> BinaryMask {
    let (labels, sizes) = label_components(mask, connectivity);
    let mut best: Option<(u32, u64)> = None;
    for (i, &size) in sizes.iter().enumerate() {
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((i as u32 + 1, size));
        }
    }
    match best {
        None => BinaryMask::empty(mask.width(), mask.height()),
        Some((label, _)) => BinaryMask::new(
            mask.width(),
            mask.height(),
            labels.iter().map(|&l| l == label).collect(),
        )
        .expect("same dimensions"),
    }
}

pub fn count_components(mask: &BinaryMask, connectivity: Connectivity) -> usize {
    label_components(mask, connectivity).1.len()
}
