use super::{LayoutMap, TextError};
use crate::geom::Point;

/// Uniform grid over the word boxes with one cell per character width,
/// probed ring by ring outward from a touch point.
///
/// After ring `k` has been scanned, every unscanned box is at least
/// `k * cell` away, so the scan stops once the best hit is strictly closer
/// than that. Equal distances resolve to the lower sentence index.
#[derive(Debug, Clone)]
pub struct SpiralIndex<'a> {
    layout: &'a LayoutMap,
    cell: f64,
    origin: Point,
    cols: i64,
    rows: i64,
    cells: Vec<Vec<u32>>,
}

impl<'a> SpiralIndex<'a> {
    pub fn new(layout: &'a LayoutMap) -> Result<Self, TextError> {
        if layout.word_boxes.is_empty() {
            return Err(TextError::NoText);
        }
        let cell = layout.char_width;
        let min_x = layout.word_boxes.iter().map(|b| b.rect.x).fold(f64::INFINITY, f64::min);
        let min_y = layout.word_boxes.iter().map(|b| b.rect.y).fold(f64::INFINITY, f64::min);
        let max_x = layout.word_boxes.iter().map(|b| b.rect.right()).fold(f64::NEG_INFINITY, f64::max);
        let max_y = layout.word_boxes.iter().map(|b| b.rect.bottom()).fold(f64::NEG_INFINITY, f64::max);
        let origin = Point::new(min_x, min_y);
        let cols = ((max_x - min_x) / cell).floor() as i64 + 1;
        let rows = ((max_y - min_y) / cell).floor() as i64 + 1;
        let mut cells = vec![Vec::new(); (cols * rows) as usize];
        for (i, b) in layout.word_boxes.iter().enumerate() {
            let c0 = ((b.rect.x - min_x) / cell).floor() as i64;
            let c1 = ((b.rect.right() - min_x) / cell).floor() as i64;
            let r0 = ((b.rect.y - min_y) / cell).floor() as i64;
            let r1 = ((b.rect.bottom() - min_y) / cell).floor() as i64;
            for r in r0..=r1.min(rows - 1) {
                for c in c0..=c1.min(cols - 1) {
                    cells[(r * cols + c) as usize].push(i as u32);
                }
            }
        }
        Ok(Self { layout, cell, origin, cols, rows, cells })
    }

    /// Sentence owning the word box closest to `p`.
    pub fn nearest_sentence(&self, p: Point) -> usize {
        let pc = ((p.x - self.origin.x) / self.cell).floor() as i64;
        let pr = ((p.y - self.origin.y) / self.cell).floor() as i64;
        // rings that lie entirely outside the grid hold nothing
        let gap_c = (0 - pc).max(pc - (self.cols - 1)).max(0);
        let gap_r = (0 - pr).max(pr - (self.rows - 1)).max(0);
        let first_ring = gap_c.max(gap_r);
        let last_ring = (pc.abs().max((pc - (self.cols - 1)).abs())).max(pr.abs().max((pr - (self.rows - 1)).abs()));

        let mut best: Option<(f64, usize)> = None;
        for k in first_ring..=last_ring {
            self.scan_ring(pc, pr, k, p, &mut best);
            if let Some((d2, _)) = best {
                let reach = k as f64 * self.cell;
                if d2 < reach * reach {
                    break;
                }
            }
        }
        best.expect("non-empty grid always yields a hit").1
    }

    fn scan_ring(&self, pc: i64, pr: i64, k: i64, p: Point, best: &mut Option<(f64, usize)>) {
        let mut visit = |c: i64, r: i64| {
            if c < 0 || r < 0 || c >= self.cols || r >= self.rows {
                return;
            }
            for &i in &self.cells[(r * self.cols + c) as usize] {
                let b = &self.layout.word_boxes[i as usize];
                let cand = (b.rect.distance_sq(p), b.sentence);
                match best {
                    Some(cur) if (cand.0, cand.1) >= (cur.0, cur.1) => {}
                    _ => *best = Some(cand),
                }
            }
        };
        if k == 0 {
            visit(pc, pr);
            return;
        }
        let c_lo = (pc - k).max(0);
        let c_hi = (pc + k).min(self.cols - 1);
        for c in c_lo..=c_hi {
            visit(c, pr - k);
            visit(c, pr + k);
        }
        let r_lo = (pr - k + 1).max(0);
        let r_hi = (pr + k - 1).min(self.rows - 1);
        for r in r_lo..=r_hi {
            visit(pc - k, r);
            visit(pc + k, r);
        }
    }
}

/// Nearest sentence to a touch point via an outward spiral scan.
pub fn nearest_sentence(layout: &LayoutMap, p: Point) -> Result<usize, TextError> {
    Ok(SpiralIndex::new(layout)?.nearest_sentence(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{layout_monospace, Document, LayoutConfig};

    fn layout(text: &str) -> LayoutMap {
        let cfg = LayoutConfig { char_width_px: 5.0, line_height_px: 20.0, page_width_px: 100.0 };
        layout_monospace(&Document::new(text), &cfg).unwrap()
    }

    #[test]
    fn empty_layout_is_no_text() {
        assert_eq!(nearest_sentence(&layout(""), Point::new(0.0, 0.0)), Err(TextError::NoText));
    }

    #[test]
    fn point_inside_box() {
        let l = layout("One two. Three four. Five six.");
        let b = l.word_boxes.iter().find(|b| b.sentence == 2).unwrap();
        let p = Point::new(b.rect.x + 1.0, b.rect.y + 1.0);
        assert_eq!(nearest_sentence(&l, p).unwrap(), 2);
    }

    #[test]
    fn far_away_points_terminate() {
        let l = layout("One two. Three four.");
        assert_eq!(nearest_sentence(&l, Point::new(-1e5, -1e5)).unwrap(), 0);
        let last = nearest_sentence(&l, Point::new(1e5, 1e5)).unwrap();
        assert_eq!(last, l.word_boxes.last().unwrap().sentence);
    }

    #[test]
    fn exact_tie_prefers_lower_sentence() {
        // "ab. cd." -> boxes [0,15] and [20,35]; x = 17.5 is equidistant.
        let l = layout("ab. cd.");
        assert_eq!(l.word_boxes[1].rect.x, 20.0);
        assert_eq!(nearest_sentence(&l, Point::new(17.5, 10.0)).unwrap(), 0);
        assert_eq!(nearest_sentence(&l, Point::new(17.6, 10.0)).unwrap(), 1);
    }
}
