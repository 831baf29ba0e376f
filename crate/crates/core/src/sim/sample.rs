use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{weighted::WeightedIndex, Distribution};
use serde::{Deserialize, Serialize};

use super::{EnvBuilder, EnvironmentSpec, PlacementDataset, Result, SimError};
use crate::geometry::{Point2, Pose2, Rect};
use crate::ids::SurfaceId;

pub const ROOM_SIZE: f64 = 6.0;
pub const DOOR_WIDTH: f64 = 1.0;
const SURFACE_LONG: f64 = 1.2;
const SURFACE_SHORT: f64 = 0.6;

/// Room-local surface centers, one per corner, parallel to the nearer
/// horizontal wall and clear of the doorways at wall midpoints.
const SLOTS: [(f64, f64); 4] = [(1.6, 0.7), (4.4, 0.7), (1.6, 5.3), (4.4, 5.3)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSampleConfig {
    pub num_rooms: usize,
    pub num_surfaces: usize,
    pub objects_per_surface: usize,
    /// Object placed first (id 0) and searched for.
    pub target: String,
    /// Room and surface labels every sample must contain.
    pub required: Option<(String, String)>,
    /// Uniform placements over all surfaces, ignoring annotation scores.
    pub adversarial: bool,
    /// Occluders placed on the target's surface.
    pub occluders: usize,
    /// Chance that one object of the target's category is placed next to it.
    pub companion_prob: f64,
}

impl EnvSampleConfig {
    pub fn new(num_rooms: usize, num_surfaces: usize) -> Self {
        Self {
            num_rooms,
            num_surfaces,
            objects_per_surface: 1,
            target: "apple".into(),
            required: Some(("kitchen".into(), "table".into())),
            adversarial: false,
            occluders: 1,
            companion_prob: 0.5,
        }
    }
}

/// Probability of the target's placement on each surface of a layout given
/// as (room label, surface labels) in surface-id order: room affinity times
/// the aggregated within-room probability, renormalised.
pub fn placement_distribution(dataset: &PlacementDataset, layout: &[(String, Vec<String>)], object: &str) -> Vec<f64> {
    let mut w = Vec::new();
    for (room, surfaces) in layout {
        let affinity = dataset.room_affinity(object, room);
        let within: Vec<f64> = surfaces
            .iter()
            .map(|s| dataset.surface_probability(object, room, s))
            .collect();
        let total: f64 = within.iter().sum();
        for p in within {
            w.push(if total > 0.0 { affinity * p / total } else { 0.0 });
        }
    }
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        w.iter().map(|x| x / total).collect()
    } else {
        vec![1.0 / w.len() as f64; w.len()]
    }
}

fn split_surfaces(num_rooms: usize, num_surfaces: usize) -> Vec<usize> {
    (0..num_rooms)
        .map(|i| num_surfaces / num_rooms + usize::from(i < num_surfaces % num_rooms))
        .collect()
}

fn choose_layout<R: Rng + ?Sized>(
    dataset: &PlacementDataset,
    cfg: &EnvSampleConfig,
    rng: &mut R,
) -> Result<Vec<(String, Vec<String>)>> {
    let mut rooms = dataset.rooms();
    if rooms.len() < cfg.num_rooms {
        return Err(SimError::Generation(format!(
            "dataset has {} room types, layout needs {}",
            rooms.len(),
            cfg.num_rooms
        )));
    }
    rooms.shuffle(rng);
    if let Some((req_room, _)) = &cfg.required {
        let pos = rooms
            .iter()
            .position(|r| r == req_room)
            .ok_or_else(|| SimError::Dataset(format!("required room {req_room} not in dataset")))?;
        let r = rooms.remove(pos);
        rooms.insert(0, r);
    }
    rooms.truncate(cfg.num_rooms);

    let counts = split_surfaces(cfg.num_rooms, cfg.num_surfaces);
    let mut layout = Vec::new();
    for (i, (room, k)) in rooms.into_iter().zip(counts).enumerate() {
        if k > SLOTS.len() {
            return Err(SimError::Generation(format!("{k} surfaces do not fit in one room")));
        }
        let mut vocab = dataset.room_surfaces[&room].clone();
        if vocab.len() < k {
            return Err(SimError::Generation(format!("room {room} has only {} surface types", vocab.len())));
        }
        vocab.shuffle(rng);
        if i == 0 {
            if let Some((_, req_surface)) = &cfg.required {
                let pos = vocab
                    .iter()
                    .position(|s| s == req_surface)
                    .ok_or_else(|| SimError::Dataset(format!("required surface {req_surface} not in {room}")))?;
                let s = vocab.remove(pos);
                vocab.insert(0, s);
            }
        }
        vocab.truncate(k);
        layout.push((room, vocab));
    }
    Ok(layout)
}

fn free_pose<R: Rng + ?Sized>(fp: &Rect, occluders: &[Rect], rng: &mut R) -> Pose2 {
    let inner = fp.inflate(-0.05);
    for _ in 0..200 {
        let p = Point2::new(
            rng.random_range(inner.min.x..=inner.max.x),
            rng.random_range(inner.min.y..=inner.max.y),
        );
        if !occluders.iter().any(|o| o.inflate(0.03).contains(p)) {
            return Pose2::new(p.x, p.y, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
        }
    }
    Pose2::new(inner.center().x, inner.center().y, 0.0)
}

/// Samples a household: room and surface labels from the dataset
/// vocabulary, grid geometry with doorways between neighbouring rooms, the
/// target placed per [`placement_distribution`] (uniformly when
/// adversarial), occluders on the target's surface, then distractor objects
/// per surface weighted by their annotation scores.
pub fn sample_environment<R: Rng + ?Sized>(
    dataset: &PlacementDataset,
    cfg: &EnvSampleConfig,
    rng: &mut R,
) -> Result<EnvironmentSpec> {
    if cfg.num_rooms == 0 || cfg.num_surfaces < cfg.num_rooms {
        return Err(SimError::Generation("need at least one surface per room".into()));
    }
    let layout = choose_layout(dataset, cfg, rng)?;

    let mut b = EnvBuilder::new();
    let cols = (cfg.num_rooms as f64).sqrt().ceil() as usize;
    let mut room_ids = Vec::new();
    let mut surface_rooms = Vec::new();
    let mut surface_labels = Vec::new();
    for (i, (room, surfaces)) in layout.iter().enumerate() {
        let (col, row) = (i % cols, i / cols);
        let origin = Point2::new(col as f64 * ROOM_SIZE, row as f64 * ROOM_SIZE);
        let id = b.room(
            room.clone(),
            Rect::new(origin.x, origin.y, origin.x + ROOM_SIZE, origin.y + ROOM_SIZE),
        );
        room_ids.push(id);
        let mut slots = SLOTS.to_vec();
        slots.shuffle(rng);
        for (label, (sx, sy)) in surfaces.iter().zip(slots) {
            let c = Point2::new(origin.x + sx, origin.y + sy);
            b.surface(label.clone(), id, Rect::centered(c, SURFACE_LONG, SURFACE_SHORT));
            surface_rooms.push(i);
            surface_labels.push(label.clone());
        }
    }
    for i in 0..room_ids.len() {
        let (col, row) = (i % cols, i / cols);
        if col + 1 < cols && i + 1 < room_ids.len() {
            b.door(room_ids[i], room_ids[i + 1], DOOR_WIDTH);
        }
        if i + cols < room_ids.len() {
            let _ = row;
            b.door(room_ids[i], room_ids[i + cols], DOOR_WIDTH);
        }
    }

    // target
    let dist = if cfg.adversarial {
        vec![1.0 / surface_labels.len() as f64; surface_labels.len()]
    } else {
        placement_distribution(dataset, &layout, &cfg.target)
    };
    let target_surface = WeightedIndex::new(&dist)
        .map_err(|e| SimError::Generation(format!("placement weights: {e}")))?
        .sample(rng);
    let fp = b.surfaces()[target_surface].footprint;
    let room_center = {
        let r = surface_rooms[target_surface];
        let (col, row) = (r % cols, r / cols);
        Point2::new((col as f64 + 0.5) * ROOM_SIZE, (row as f64 + 0.5) * ROOM_SIZE)
    };
    let mut occluders = Vec::new();
    for k in 0..cfg.occluders {
        // a low box on the edge facing the room center, shifted per box
        let depth = 0.15;
        let len = 0.4;
        let offset = (k as f64 - (cfg.occluders as f64 - 1.0) / 2.0) * 0.45;
        let cx = (fp.center().x + offset + rng.random_range(-0.2..0.2)).clamp(fp.min.x + len / 2.0, fp.max.x - len / 2.0);
        let o = if room_center.y > fp.center().y {
            Rect::new(cx - len / 2.0, fp.max.y - depth, cx + len / 2.0, fp.max.y)
        } else {
            Rect::new(cx - len / 2.0, fp.min.y, cx + len / 2.0, fp.min.y + depth)
        };
        occluders.push(o);
        b.occluder(o);
    }
    let target_pose = free_pose(&fp, &occluders, rng);
    b.object(cfg.target.clone(), SurfaceId(target_surface), target_pose);

    let mut used = vec![cfg.target.clone()];
    let pool: Vec<String> = dataset.objects().into_iter().filter(|o| o != &cfg.target).collect();

    if let Some(cat) = dataset.category_of(&cfg.target) {
        if rng.random::<f64>() < cfg.companion_prob {
            let mates: Vec<&String> = cat.objects.iter().filter(|o| **o != cfg.target && pool.contains(o)).collect();
            if let Some(&mate) = mates.choose(rng) {
                let pose = free_pose(&fp, &occluders, rng);
                b.object(mate.clone(), SurfaceId(target_surface), pose);
                used.push(mate.clone());
            }
        }
    }

    for (s, label) in surface_labels.iter().enumerate() {
        let room = &layout[surface_rooms[s]].0;
        let surface_fp = b.surfaces()[s].footprint;
        let blockers: Vec<Rect> = b.occluders().iter().copied().filter(|o| surface_fp.intersects(o)).collect();
        for _ in 0..cfg.objects_per_surface {
            let candidates: Vec<&String> = pool.iter().filter(|o| !used.contains(o)).collect();
            if candidates.is_empty() {
                break;
            }
            let weights: Vec<f64> = candidates
                .iter()
                .map(|o| {
                    if cfg.adversarial {
                        1.0
                    } else {
                        dataset.surface_score(o, room, label)
                    }
                })
                .collect();
            let pick = match WeightedIndex::new(&weights) {
                Ok(w) => candidates[w.sample(rng)].clone(),
                Err(_) => (*candidates.choose(rng).expect("non-empty")).clone(),
            };
            let pose = free_pose(&surface_fp, &blockers, rng);
            b.object(pick.clone(), SurfaceId(s), pose);
            used.push(pick);
        }
    }
    b.build()
}
