use crate::coarea::CoverCenters;
use crate::geom::Point;
use std::collections::HashMap;

/// Cover centres bucketed on a grid of side `2r` for neighbourhood queries.
pub struct CoverIndex {
    pub cover: CoverCenters,
    side: f64,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

fn bucket(p: Point, side: f64) -> [i64; 3] {
    [(p.x() / side).floor() as i64, (p.y() / side).floor() as i64, (p.z() / side).floor() as i64]
}

impl CoverIndex {
    pub fn new(cover: CoverCenters) -> CoverIndex {
        let side = 2.0 * cover.r;
        let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, p) in cover.points.iter().enumerate() {
            buckets.entry(bucket(*p, side)).or_default().push(i);
        }
        CoverIndex { cover, side, buckets }
    }

    pub fn r(&self) -> f64 {
        self.cover.r
    }

    pub fn center(&self, l: usize) -> Point {
        self.cover.points[l]
    }

    /// Centres within `reach` of `p`, in increasing order.
    pub fn near(&self, p: Point, reach: f64) -> Vec<usize> {
        let lo = bucket(p - Point([reach; 3]), self.side);
        let hi = bucket(p + Point([reach; 3]), self.side);
        let mut out = Vec::new();
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                for k in lo[2]..=hi[2] {
                    if let Some(v) = self.buckets.get(&[i, j, k]) {
                        out.extend(v.iter().copied().filter(|&l| self.cover.points[l].dist(p) <= reach));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Centres within `reach` of the segment `a b`.
    pub fn near_segment(&self, a: Point, b: Point, reach: f64) -> Vec<usize> {
        let mid = a.lerp(b, 0.5);
        let mut out = self.near(mid, 0.5 * a.dist(b) + reach);
        out.retain(|&l| crate::geom::point_segment_dist(self.cover.points[l], a, b).0 <= reach);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarea::cover_centers;
    use crate::region::Region;

    #[test]
    fn near_matches_scan() {
        let cover = cover_centers(&Region::unit_disk(), 0.07, 2);
        let idx = CoverIndex::new(cover.clone());
        for (x, y) in [(0.0, 0.0), (0.5, -0.3), (0.99, 0.01)] {
            let p = Point::new2(x, y);
            let scan: Vec<usize> = (0..cover.len()).filter(|&l| cover.points[l].dist(p) <= 0.14).collect();
            assert_eq!(idx.near(p, 0.14), scan);
        }
    }
}
