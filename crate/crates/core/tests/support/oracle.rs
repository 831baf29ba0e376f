//! Brute-force enumeration of the joint over the target's and every
//! co-located object's location, one observation event at a time.

use belief_tamp::belief::{
    Detection, HierarchicalBelief, NoiseParams, ObservationEvent, SimilarityMatrix, VisibilityReport,
};
use belief_tamp::geometry::{Pose2, Rect};
use belief_tamp::sim::{EnvBuilder, EnvironmentSpec};
use belief_tamp::{ObjectId, RoomId, SurfaceId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PARTICLES: usize = 10;

pub fn layout(surfaces_per_room: &[usize], objects: usize) -> EnvironmentSpec {
    let mut b = EnvBuilder::new();
    let mut rooms = Vec::new();
    for i in 0..surfaces_per_room.len() {
        let x = 6.0 * i as f64;
        rooms.push(b.room(format!("room{i}"), Rect::new(x, 0.0, x + 6.0, 6.0)));
    }
    for w in rooms.windows(2) {
        b.door(w[0], w[1], 1.0);
    }
    let mut first = None;
    for (i, &n) in surfaces_per_room.iter().enumerate() {
        for j in 0..n {
            let x = 6.0 * i as f64 + 0.5 + 3.0 * j as f64;
            let s = b.surface(format!("s{i}_{j}"), rooms[i], Rect::new(x, 0.5, x + 1.2, 1.1));
            first.get_or_insert(s);
        }
    }
    let s0 = first.unwrap();
    for o in 0..objects {
        b.object(format!("o{o}"), s0, Pose2::new(0.8 + 0.3 * o as f64, 0.8, 0.0));
    }
    b.build().unwrap()
}

fn random_dist(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let t: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / t).collect()
}

/// Detection probabilities written out case by case.
fn obs_factor(detected_here: bool, object_here: bool, v: f64, n: &NoiseParams) -> f64 {
    if object_here {
        if detected_here { (1.0 - n.p_fn) * v } else { 1.0 - v + v * n.p_fn }
    } else if detected_here {
        n.p_fp * v
    } else {
        1.0 - v * n.p_fp
    }
}

fn look(loc: usize, detected_at: Option<usize>, v: &[f64], n: &NoiseParams) -> f64 {
    (0..v.len()).map(|l| obs_factor(detected_at == Some(l), l == loc, v[l], n)).product()
}

fn coloc(sim: f64, same: bool, r: usize) -> f64 {
    let r = r as f64;
    if sim >= 0.0 {
        (if same { sim } else { 0.0 }) + (1.0 - sim) / r
    } else {
        (if same { 0.0 } else { -sim / (r - 1.0) }) + (1.0 + sim) / r
    }
}

pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// All tuples in `[0, n)^k`.
fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

pub struct Oracle {
    pub rooms: Vec<f64>,
    pub surfaces: Vec<Vec<f64>>,
}

pub struct EventSpec {
    pub v_room: Vec<f64>,
    pub v_surf: Vec<f64>,
    pub target_at: Option<usize>,
    /// (surface, sim with the target) for each contributing detection.
    pub others: Vec<(usize, f64)>,
}

impl Oracle {
    pub fn update(&mut self, ev: &EventSpec, room_of: &[usize], room_surfaces: &[Vec<usize>], n: &NoiseParams) {
        let nr = self.rooms.len();
        let ns = room_of.len();
        let target_room = ev.target_at.map(|s| room_of[s]);
        let k = ev.others.len();

        // rooms: joint over (room_k, room_j1, ..., room_jk)
        let mut post = vec![0.0; nr];
        for rk in 0..nr {
            for t in tuples(nr, k) {
                let mut p = self.rooms[rk] * look(rk, target_room, &ev.v_room, n);
                for (i, &(surf_j, sim)) in ev.others.iter().enumerate() {
                    p *= coloc(sim, t[i] == rk, nr) * look(t[i], Some(room_of[surf_j]), &ev.v_room, n);
                }
                post[rk] += p;
            }
        }
        let z: f64 = post.iter().sum();
        self.rooms = post.into_iter().map(|x| x / z).collect();

        // surfaces given room: joint over (surface_k, surface_j1, ...) with
        // each object's room implied by its surface
        for (r, surfs) in room_surfaces.iter().enumerate() {
            let mut post = vec![0.0; surfs.len()];
            for (li, &sk) in surfs.iter().enumerate() {
                for t in tuples(ns, k) {
                    let mut p = self.surfaces[r][li] * look(sk, ev.target_at, &ev.v_surf, n);
                    for (i, &(surf_j, sim)) in ev.others.iter().enumerate() {
                        let sj = t[i];
                        let rj = room_of[sj];
                        let p_room = coloc(sim, rj == r, nr);
                        let m = room_surfaces[rj].len();
                        let p_surf = if rj != r {
                            1.0 / m as f64
                        } else if m == 1 {
                            1.0
                        } else {
                            coloc(sim, sj == sk, m)
                        };
                        p *= p_room * p_surf * look(sj, Some(surf_j), &ev.v_surf, n);
                    }
                    post[li] += p;
                }
            }
            let z: f64 = post.iter().sum();
            self.surfaces[r] = post.into_iter().map(|x| x / z).collect();
        }
    }
}

/// Worst room or surface total variation over one random instance, and its
/// number of events.
pub fn run_instance(seed: u64) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nr = rng.random_range(2..=3);
    let per_room: Vec<usize> = (0..nr).map(|_| rng.random_range(1..=2)).collect();
    let nobj = rng.random_range(1..=3);
    let env = layout(&per_room, nobj);
    let room_surfaces_ids = env.room_surfaces();
    let room_surfaces: Vec<Vec<usize>> =
        room_surfaces_ids.iter().map(|v| v.iter().map(|s| s.index()).collect()).collect();
    let room_of: Vec<usize> = env.surfaces.iter().map(|s| s.room.index()).collect();
    let ns = room_of.len();

    let noise = NoiseParams {
        p_fn: rng.random_range(0.005..0.2),
        p_fp: rng.random_range(0.005..0.2),
        ..NoiseParams::default()
    };
    let mut sim = vec![vec![1.0; nobj]; nobj];
    for i in 0..nobj {
        for j in i + 1..nobj {
            let s = rng.random_range(-1.0..=1.0);
            sim[i][j] = s;
            sim[j][i] = s;
        }
    }
    let toggles: Vec<bool> = (0..nobj).map(|_| rng.random_bool(0.8)).collect();
    let sims = SimilarityMatrix::new(sim.clone(), toggles.clone()).unwrap();

    let target = ObjectId(0);
    let mut belief = HierarchicalBelief::init_uniform(&env, target, PARTICLES, &mut rng).unwrap();
    let mut oracle = Oracle {
        rooms: random_dist(&mut rng, nr),
        surfaces: per_room.iter().map(|&m| random_dist(&mut rng, m)).collect(),
    };
    belief.set_room_belief(oracle.rooms.clone()).unwrap();
    for r in 0..nr {
        belief.set_surface_belief(RoomId(r), oracle.surfaces[r].clone()).unwrap();
    }

    let events = rng.random_range(1..=2);
    let mut worst = 0.0f64;
    for _ in 0..events {
        let seen: Vec<usize> = (0..ns).map(|_| rng.random_range(0..=PARTICLES)).collect();
        let vis = VisibilityReport::from_counts(&room_surfaces_ids, seen, vec![PARTICLES; ns]).unwrap();
        let observed: Vec<usize> = (0..ns).filter(|&s| vis.v_surface()[s] > 0.0).collect();
        let mut detections = Vec::new();
        let mut spec = EventSpec {
            v_room: vis.v_room().to_vec(),
            v_surf: vis.v_surface().to_vec(),
            target_at: None,
            others: Vec::new(),
        };
        if !observed.is_empty() {
            for o in 0..nobj {
                if !rng.random_bool(0.5) {
                    continue;
                }
                let s = observed[rng.random_range(0..observed.len())];
                detections.push(Detection { object: ObjectId(o), pose: Pose2::new(0.0, 0.0, 0.0), surface: SurfaceId(s) });
                if o == 0 {
                    spec.target_at = Some(s);
                } else if toggles[o] {
                    spec.others.push((s, sim[o][0]));
                }
            }
        }
        let event = ObservationEvent::new(target, vis, detections, Vec::new()).unwrap();
        belief.update_semantic_belief(&event, Some(&sims), &noise).unwrap();
        oracle.update(&spec, &room_of, &room_surfaces, &noise);

        worst = worst.max(tv(belief.room_belief(), &oracle.rooms));
        for r in 0..nr {
            worst = worst.max(tv(belief.surface_belief(RoomId(r)), &oracle.surfaces[r]));
        }
    }
    (worst, events)
}
