//! Generated corpora with known structure, for tests and demos.
//!
//! Subjects differ in body size, position, speed profile and recording
//! length, so the generated actions exercise smoothing, resampling and
//! normalization. Joints move with per-joint amplitudes shared by every
//! subject. The class information lives only in the movement directions.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Action, Dataset};
use crate::Point3;

/// Size and noise of a generated corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusShape {
    pub classes: usize,
    pub subjects: u32,
    pub instances: usize,
    pub joints: usize,
    /// Uniform positional jitter amplitude.
    pub noise: f64,
    pub seed: u64,
}

impl Default for CorpusShape {
    fn default() -> Self {
        CorpusShape {
            classes: 3,
            subjects: 10,
            instances: 10,
            joints: 4,
            noise: 0.005,
            seed: 0,
        }
    }
}

fn unit(v: Point3) -> Point3 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|x| x / n)
}

/// A fixed movement direction per class. The first six are the signed axes;
/// later classes spread over the sphere.
pub fn class_direction(class: usize) -> Point3 {
    const AXES: [Point3; 6] = [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, -1.0],
    ];
    if let Some(axis) = AXES.get(class) {
        return *axis;
    }
    let golden = PI * (3.0 - 5f64.sqrt());
    let i = class as f64;
    let z = 1.0 - 2.0 * ((i * 0.618_034) % 1.0);
    let r = (1.0 - z * z).sqrt();
    unit([r * (golden * i).cos(), r * (golden * i).sin(), z])
}

struct Performer<'a> {
    scale: f64,
    offsets: Vec<Point3>,
    amplitudes: &'a [f64],
}

fn performer<'a>(rng: &mut ChaCha8Rng, amplitudes: &'a [f64]) -> Performer<'a> {
    Performer {
        scale: rng.gen_range(0.7..1.4),
        offsets: (0..amplitudes.len())
            .map(|_| {
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.0..2.0),
                    rng.gen_range(2.0..3.0),
                ]
            })
            .collect(),
        amplitudes,
    }
}

/// Samples `path(u)` for `u` in `[0, 1]` at a random frame count with a
/// random monotone speed profile, for every joint.
fn record(
    rng: &mut ChaCha8Rng,
    who: &Performer,
    noise: f64,
    path: impl Fn(f64) -> Point3,
) -> Vec<Point3> {
    let frames = rng.gen_range(30..50);
    let warp = rng.gen_range(0.7..1.4);
    let joints = who.offsets.len();
    let mut positions = Vec::with_capacity(frames * joints);
    for f in 0..frames {
        let u = (f as f64 / (frames - 1) as f64).powf(warp);
        let p = path(u);
        for j in 0..joints {
            let amp = who.scale * who.amplitudes[j];
            let o = who.offsets[j];
            positions.push([
                o[0] * who.scale + amp * p[0] + rng.gen_range(-noise..=noise),
                o[1] * who.scale + amp * p[1] + rng.gen_range(-noise..=noise),
                o[2] * who.scale + amp * p[2] + rng.gen_range(-noise..=noise),
            ]);
        }
    }
    positions
}

fn build(
    shape: &CorpusShape,
    classes: usize,
    path_for: impl Fn(usize, &mut ChaCha8Rng) -> Box<dyn Fn(f64) -> Point3>,
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(shape.seed);
    let amplitudes: Vec<f64> = (0..shape.joints).map(|_| rng.gen_range(0.6..1.4)).collect();
    let mut actions = Vec::new();
    for subject in 1..=shape.subjects {
        let who = performer(&mut rng, &amplitudes);
        for class in 0..classes {
            for instance in 0..shape.instances {
                let path = path_for(class, &mut rng);
                let positions = record(&mut rng, &who, shape.noise, path);
                actions.push(
                    Action::new(
                        format!("c{class}_s{subject:02}_e{instance:02}"),
                        subject,
                        format!("c{class}"),
                        shape.joints,
                        positions,
                    )
                    .expect("generated actions are valid"),
                );
            }
        }
    }
    Dataset::new(actions).expect("generated dataset is non-empty")
}

/// Every class moves all joints along its own direction
/// ([`class_direction`]); no two classes share a movement direction.
pub fn disjoint_vocabulary(shape: &CorpusShape) -> Dataset {
    build(shape, shape.classes, |class, rng| {
        let d = class_direction(class);
        let length = rng.gen_range(0.8..1.2);
        Box::new(move |u| d.map(|x| x * length * u))
    })
}

/// Two classes tracing the same three straight strokes in opposite order:
/// `+x, +y, +z` for `c0` and `+z, +y, +x` for `c1`. The multiset of
/// directions is identical, only their order tells the classes apart.
pub fn stroke_order(shape: &CorpusShape) -> Dataset {
    build(shape, 2, |class, _| {
        let strokes: [Point3; 3] = if class == 0 {
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        } else {
            [[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]
        };
        Box::new(move |u| {
            let t = (u * 3.0).min(3.0);
            let mut p = [0.0; 3];
            for (k, s) in strokes.iter().enumerate() {
                let part = (t - k as f64).clamp(0.0, 1.0);
                for c in 0..3 {
                    p[c] += s[c] * part;
                }
            }
            p
        })
    })
}
