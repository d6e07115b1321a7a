#![allow(dead_code)]

use std::collections::VecDeque;

use momentforge::arrangement::{Circle, Orientation, Region, Violation};
use momentforge::exact_arith::{rat, rat_to_f64, Rat};
use momentforge::moment_map::{validate_moment_data, MomentData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn inside_all(circles: &[Circle], p: &(Rat, Rat)) -> bool {
    circles.iter().all(|c| {
        let dx = &p.0 - &c.center.0;
        let dy = &p.1 - &c.center.1;
        let v = &c.radius * &c.radius - (&dx * &dx + &dy * &dy);
        match c.orientation {
            Orientation::Inside => v > rat(0, 1),
            Orientation::Outside => v < rat(0, 1),
        }
    })
}

fn build(circles: &[Circle], seed: &(Rat, Rat)) -> Option<MomentData> {
    let k = circles.len();
    MomentData::from_circles(circles.to_vec(), seed.clone(), (1..=k).collect(), vec![1; k]).ok()
}

/// Valid random arrangement of at most six circles on a quarter grid, one group per circle,
/// all sphere dimensions 1; `None` when the draw is degenerate.
pub fn random_arrangement(seed: u64) -> Option<MomentData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..=6);
    let mut circles = vec![Circle::new(
        1,
        (rat(rng.random_range(-4..=4), 4), rat(rng.random_range(-4..=4), 4)),
        rat(rng.random_range(8..=16), 4),
        Orientation::Inside,
    )];
    for id in 2..=k {
        let o = if rng.random_bool(0.6) { Orientation::Outside } else { Orientation::Inside };
        circles.push(Circle::new(
            id,
            (rat(rng.random_range(-14..=14), 4), rat(rng.random_range(-14..=14), 4)),
            rat(rng.random_range(2..=10), 4),
            o,
        ));
    }
    let seed_pt = (0..400).find_map(|_| {
        let p = (rat(rng.random_range(-128..=128), 32), rat(rng.random_range(-128..=128), 32));
        inside_all(&circles, &p).then_some(p)
    })?;
    loop {
        let d = build(&circles, &seed_pt)?;
        let report = validate_moment_data(&d);
        let missing: Vec<usize> = report
            .violations
            .iter()
            .filter_map(|v| match v {
                Violation::MissesBoundary { circle } => Some(*circle),
                _ => None,
            })
            .collect();
        if missing.is_empty() {
            return report.passed().then_some(d);
        }
        circles.retain(|c| !missing.contains(&c.id));
        for (i, c) in circles.iter_mut().enumerate() {
            c.id = i + 1;
        }
    }
}

/// First `count` valid draws from seeds `0, 1, 2, ...`.
pub fn random_arrangements(count: usize) -> Vec<(u64, MomentData)> {
    (0u64..).filter_map(|s| random_arrangement(s).map(|d| (s, d))).take(count).collect()
}

/// Holes of D counted on a raster: components of the complement of D that do not reach the
/// edge of the box.
pub fn raster_hole_count(region: &Region, res: usize) -> usize {
    let (x0, x1, y0, y1) =
        (rat_to_f64(&region.bbox.0), rat_to_f64(&region.bbox.1), rat_to_f64(&region.bbox.2), rat_to_f64(&region.bbox.3));
    let cell = |i: usize, j: usize| {
        let x = x0 + (x1 - x0) * (i as f64 + 0.5) / res as f64;
        let y = y0 + (y1 - y0) * (j as f64 + 0.5) / res as f64;
        region.in_d_f64(x, y)
    };
    let inside: Vec<Vec<bool>> = (0..res).map(|i| (0..res).map(|j| cell(i, j)).collect()).collect();
    let mut seen = vec![vec![false; res]; res];
    let mut holes = 0;
    for i in 0..res {
        for j in 0..res {
            if inside[i][j] || seen[i][j] {
                continue;
            }
            let mut border = false;
            let mut q = VecDeque::from([(i, j)]);
            seen[i][j] = true;
            while let Some((a, b)) = q.pop_front() {
                if a == 0 || b == 0 || a + 1 == res || b + 1 == res {
                    border = true;
                }
                let nbrs = [(a.wrapping_sub(1), b), (a + 1, b), (a, b.wrapping_sub(1)), (a, b + 1)];
                for (c, e) in nbrs {
                    if c < res && e < res && !inside[c][e] && !seen[c][e] {
                        seen[c][e] = true;
                        q.push_back((c, e));
                    }
                }
            }
            if !border {
                holes += 1;
            }
        }
    }
    holes
}
