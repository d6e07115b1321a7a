//! Small named inputs used by the demo, the tests and the documentation.

use crate::arrangement::{Circle, Orientation};
use crate::exact_arith::{int, rat, Rat};
use crate::moment_map::MomentData;

fn circ(id: usize, x: Rat, y: Rat, r: Rat, o: Orientation) -> Circle {
    Circle::new(id, (x, y), r, o)
}

/// Unit disk, one group of dimension `dim`.
pub fn disk_with_dim(dim: usize) -> MomentData {
    MomentData::from_circles(
        vec![circ(1, int(0), int(0), int(1), Orientation::Inside)],
        (int(0), int(0)),
        vec![1],
        vec![dim],
    )
    .expect("disk fixture")
}

pub fn disk() -> MomentData {
    disk_with_dim(1)
}

/// Radii 2 and 1 about the origin.
pub fn annulus() -> MomentData {
    MomentData::from_circles(
        vec![
            circ(1, int(0), int(0), int(2), Orientation::Inside),
            circ(2, int(0), int(0), int(1), Orientation::Outside),
        ],
        (rat(3, 2), int(0)),
        vec![1, 1],
        vec![1],
    )
    .expect("annulus fixture")
}

/// Disk of radius 2 with a bite taken by the unit circle about `(2, 1/2)`; two groups.
pub fn crossing_pair_with_dims(dims: Vec<usize>) -> MomentData {
    MomentData::from_circles(
        vec![
            circ(1, int(0), int(0), int(2), Orientation::Inside),
            circ(2, int(2), rat(1, 2), int(1), Orientation::Outside),
        ],
        (int(0), int(0)),
        vec![1, 2],
        dims,
    )
    .expect("crossing pair fixture")
}

pub fn crossing_pair() -> MomentData {
    crossing_pair_with_dims(vec![1, 2])
}

/// Disk of radius 3 with two holes of radius 1/2 at `(-3/2, 0)` and `(3/2, 0)`.
pub fn two_hole() -> MomentData {
    MomentData::from_circles(
        vec![
            circ(1, int(0), int(0), int(3), Orientation::Inside),
            circ(2, rat(-3, 2), int(0), rat(1, 2), Orientation::Outside),
            circ(3, rat(3, 2), int(0), rat(1, 2), Orientation::Outside),
        ],
        (int(0), int(0)),
        vec![1, 1, 1],
        vec![1],
    )
    .expect("two-hole fixture")
}

/// Intersection of the unit disk and the unit disk about `(1, 1/3)`.
pub fn lens() -> MomentData {
    MomentData::from_circles(
        vec![
            circ(1, int(0), int(0), int(1), Orientation::Inside),
            circ(2, int(1), rat(1, 3), int(1), Orientation::Inside),
        ],
        (rat(1, 2), rat(1, 6)),
        vec![1, 2],
        vec![1, 1],
    )
    .expect("lens fixture")
}

/// Unit disk touched from outside by the unit circle about `(2, 0)`. Not a valid
/// arrangement; built without checks.
pub fn tangent_pair() -> MomentData {
    MomentData::unchecked(
        vec![
            circ(1, int(0), int(0), int(1), Orientation::Inside),
            circ(2, int(2), int(0), int(1), Orientation::Outside),
        ],
        (int(0), int(0)),
        vec![1, 2],
        vec![1, 1],
    )
}

/// The valid named fixtures.
pub fn all() -> Vec<(&'static str, MomentData)> {
    vec![
        ("disk", disk()),
        ("annulus", annulus()),
        ("crossing_pair", crossing_pair()),
        ("two_hole", two_hole()),
        ("lens", lens()),
    ]
}

pub fn by_name(name: &str) -> Option<MomentData> {
    match name {
        "disk" => Some(disk()),
        "annulus" => Some(annulus()),
        "crossing_pair" => Some(crossing_pair()),
        "two_hole" => Some(two_hole()),
        "lens" => Some(lens()),
        _ => None,
    }
}
