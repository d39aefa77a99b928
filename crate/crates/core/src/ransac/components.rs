use super::points::PixelGrid;

/// Largest 8-connected group (in image space) among `members`, a subset of
/// point indices. Ties go to the group containing the smallest index. The
/// result is ascending.
pub fn largest_component(grid: &PixelGrid, members: &[u32]) -> Vec<u32> {
    let mut lookup = ComponentScratch::new(grid);
    lookup.largest(grid, members)
}

/// Reusable pixel → point map and marks.
pub(crate) struct ComponentScratch {
    point_at: Vec<u32>,
    mark: Vec<u32>,
    stamp: u32,
}

const NONE: u32 = u32::MAX;

impl ComponentScratch {
    pub(crate) fn new(grid: &PixelGrid) -> Self {
        let mut point_at = vec![NONE; grid.width * grid.height];
        for (i, &px) in grid.pixel.iter().enumerate() {
            point_at[px as usize] = i as u32;
        }
        Self { point_at, mark: vec![0; grid.pixel.len()], stamp: 0 }
    }

    pub(crate) fn largest(&mut self, grid: &PixelGrid, members: &[u32]) -> Vec<u32> {
        if members.is_empty() {
            return Vec::new();
        }
        // stamp: member; stamp + 1: visited
        if self.stamp >= u32::MAX - 3 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.stamp = 0;
        }
        let member = self.stamp + 1;
        let visited = self.stamp + 2;
        self.stamp += 2;
        for &m in members {
            self.mark[m as usize] = member;
        }
        let (w, h) = (grid.width as i64, grid.height as i64);
        let mut best: Vec<u32> = Vec::new();
        let mut comp: Vec<u32> = Vec::new();
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        for &start in &sorted {
            if self.mark[start as usize] != member {
                continue;
            }
            comp.clear();
            self.mark[start as usize] = visited;
            comp.push(start);
            let mut head = 0;
            while head < comp.len() {
                let p = comp[head];
                head += 1;
                let px = grid.pixel[p as usize] as i64;
                let (x, y) = (px % w, px / w);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (xx, yy) = (x + dx, y + dy);
                        if (dx == 0 && dy == 0) || xx < 0 || yy < 0 || xx >= w || yy >= h {
                            continue;
                        }
                        let q = self.point_at[(yy * w + xx) as usize];
                        if q != NONE && self.mark[q as usize] == member {
                            self.mark[q as usize] = visited;
                            comp.push(q);
                        }
                    }
                }
            }
            if comp.len() > best.len() {
                best = comp.clone();
            }
        }
        best.sort_unstable();
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_neighbours_connect() {
        // 4×3 image, one point per pixel
        let grid = PixelGrid { width: 4, height: 3, pixel: (0..12).collect() };
        // {0, 5} touch diagonally, {3, 7, 11} is a column
        assert_eq!(largest_component(&grid, &[5, 3, 0, 11, 7]), vec![3, 7, 11]);
        assert_eq!(largest_component(&grid, &[0, 5, 11]), vec![0, 5]);
        assert_eq!(largest_component(&grid, &[]), Vec::<u32>::new());
    }
}
