use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Result, SimError};

/// One annotator's ranking of the surfaces of a room for one object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationEntry {
    pub object: String,
    pub room: String,
    /// Most likely first.
    pub correct: Vec<String>,
    /// Least likely first.
    pub incorrect: Vec<String>,
    pub implausible: Vec<String>,
    #[serde(default)]
    pub annotator: u32,
}

impl AnnotationEntry {
    /// Number of surfaces ranked or rejected in this entry.
    pub fn num_surfaces(&self) -> usize {
        self.correct.len() + self.incorrect.len() + self.implausible.len()
    }
}

/// Integer scores for one annotation: the correct list counts down from `n`,
/// the incorrect list counts up from `-n`. Implausible surfaces get no score.
pub fn score_annotation(entry: &AnnotationEntry, n: usize) -> Result<BTreeMap<String, i64>> {
    let mut seen = BTreeSet::new();
    for s in entry.correct.iter().chain(&entry.incorrect).chain(&entry.implausible) {
        if !seen.insert(s.as_str()) {
            return Err(SimError::Dataset(format!(
                "surface {s} listed twice for {} in {}",
                entry.object, entry.room
            )));
        }
    }
    let n = n as i64;
    let mut scores = BTreeMap::new();
    for (i, s) in entry.correct.iter().enumerate() {
        scores.insert(s.clone(), n - i as i64);
    }
    for (i, s) in entry.incorrect.iter().enumerate() {
        scores.insert(s.clone(), -n + i as i64);
    }
    Ok(scores)
}

/// Aggregated placement of one object within one room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedPlacement {
    pub object: String,
    pub room: String,
    /// Summed scores of the surviving surfaces.
    pub score_sums: BTreeMap<String, i64>,
    /// Probability over surviving surfaces.
    pub probabilities: BTreeMap<String, f64>,
    pub annotators: usize,
    /// Surfaces per data point.
    pub num_surfaces: usize,
}

impl AggregatedPlacement {
    /// Best summed score mapped from `[-A*N, A*N]` to `[0, 1]`.
    pub fn room_affinity(&self) -> f64 {
        let range = (self.annotators * self.num_surfaces) as f64;
        let best = self.score_sums.values().copied().max().unwrap_or(-(range as i64)) as f64;
        if range == 0.0 {
            return 0.0;
        }
        ((best + range) / (2.0 * range)).clamp(0.0, 1.0)
    }
}

/// Sum scores over annotators, drop surfaces a strict majority called
/// implausible, min-max normalise the survivors and renormalise.
pub fn aggregate_annotations(entries: &[AnnotationEntry]) -> Result<AggregatedPlacement> {
    let first = entries
        .first()
        .ok_or_else(|| SimError::Dataset("no annotations to aggregate".into()))?;
    let n = entries.iter().map(AnnotationEntry::num_surfaces).max().unwrap_or(0);
    let mut sums: BTreeMap<String, i64> = BTreeMap::new();
    let mut implausible: BTreeMap<String, usize> = BTreeMap::new();
    for e in entries {
        if e.object != first.object || e.room != first.room {
            return Err(SimError::Dataset("entries mix object/room pairs".into()));
        }
        for (s, v) in score_annotation(e, n)? {
            *sums.entry(s).or_default() += v;
        }
        for s in &e.implausible {
            sums.entry(s.clone()).or_default();
            *implausible.entry(s.clone()).or_default() += 1;
        }
    }
    let a = entries.len();
    sums.retain(|s, _| 2 * implausible.get(s).copied().unwrap_or(0) <= a);
    if sums.is_empty() {
        return Err(SimError::Dataset(format!(
            "every surface implausible for {} in {}",
            first.object, first.room
        )));
    }
    let lo = *sums.values().min().unwrap() as f64;
    let hi = *sums.values().max().unwrap() as f64;
    let scaled: BTreeMap<String, f64> = sums
        .iter()
        .map(|(s, &v)| {
            let x = if hi > lo { (v as f64 - lo) / (hi - lo) } else { 1.0 };
            (s.clone(), x)
        })
        .collect();
    let total: f64 = scaled.values().sum();
    let probabilities = if total > 0.0 {
        scaled.into_iter().map(|(s, x)| (s, x / total)).collect()
    } else {
        let k = scaled.len() as f64;
        scaled.into_keys().map(|s| (s, 1.0 / k)).collect()
    };
    Ok(AggregatedPlacement {
        object: first.object.clone(),
        room: first.room.clone(),
        score_sums: sums,
        probabilities,
        annotators: a,
        num_surfaces: n,
    })
}

/// Object category with the vocabulary used to describe its members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Category {
    pub name: String,
    pub objects: Vec<String>,
    /// Three sentences with `{object}` placeholders.
    pub description: [String; 3],
    /// Naturally spread over the whole house.
    pub distributed: bool,
}

/// Annotation corpus plus its aggregation, indexed by object and room.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementDataset {
    pub entries: Vec<AnnotationEntry>,
    /// Surface vocabulary of each room type.
    pub room_surfaces: BTreeMap<String, Vec<String>>,
    pub categories: Vec<Category>,
    aggregated: BTreeMap<(String, String), AggregatedPlacement>,
}

impl PlacementDataset {
    pub fn new(
        entries: Vec<AnnotationEntry>,
        room_surfaces: BTreeMap<String, Vec<String>>,
        categories: Vec<Category>,
    ) -> Result<Self> {
        let mut groups: BTreeMap<(String, String), Vec<AnnotationEntry>> = BTreeMap::new();
        for e in &entries {
            groups.entry((e.object.clone(), e.room.clone())).or_default().push(e.clone());
        }
        let mut aggregated = BTreeMap::new();
        for (key, group) in groups {
            match aggregate_annotations(&group) {
                Ok(a) => {
                    aggregated.insert(key, a);
                }
                Err(SimError::Dataset(msg)) => log::debug!("skipping {key:?}: {msg}"),
                Err(e) => return Err(e),
            }
        }
        Ok(Self {
            entries,
            room_surfaces,
            categories,
            aggregated,
        })
    }

    /// Reads JSON-lines annotation rows. The room surface vocabulary is the
    /// union of the surfaces mentioned for each room.
    pub fn from_jsonl(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut entries = Vec::new();
        for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let e: AnnotationEntry = serde_json::from_str(&line)
                .map_err(|err| SimError::Dataset(format!("line {}: {err}", i + 1)))?;
            entries.push(e);
        }
        let mut room_surfaces: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for e in &entries {
            let set = room_surfaces.entry(e.room.clone()).or_default();
            set.extend(e.correct.iter().chain(&e.incorrect).chain(&e.implausible).cloned());
        }
        let room_surfaces = room_surfaces
            .into_iter()
            .map(|(r, s)| (r, s.into_iter().collect()))
            .collect();
        Self::new(entries, room_surfaces, Vec::new())
    }

    pub fn aggregated(&self, object: &str, room: &str) -> Option<&AggregatedPlacement> {
        self.aggregated.get(&(object.to_string(), room.to_string()))
    }

    pub fn objects(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.aggregated.keys().map(|(o, _)| o).collect();
        set.into_iter().cloned().collect()
    }

    pub fn rooms(&self) -> Vec<String> {
        self.room_surfaces.keys().cloned().collect()
    }

    /// Fixed-range affinity of `object` for `room`, 0 when unannotated.
    pub fn room_affinity(&self, object: &str, room: &str) -> f64 {
        self.aggregated(object, room).map_or(0.0, AggregatedPlacement::room_affinity)
    }

    /// Probability of `surface` within `room`, 0 when removed or unannotated.
    pub fn surface_probability(&self, object: &str, room: &str, surface: &str) -> f64 {
        self.aggregated(object, room)
            .and_then(|a| a.probabilities.get(surface).copied())
            .unwrap_or(0.0)
    }

    /// Fixed-range normalised score of one (room, surface) slot, used to pick
    /// which objects populate a surface.
    pub fn surface_score(&self, object: &str, room: &str, surface: &str) -> f64 {
        let Some(a) = self.aggregated(object, room) else { return 0.0 };
        let Some(&sum) = a.score_sums.get(surface) else { return 0.0 };
        let range = (a.annotators * a.num_surfaces) as f64;
        if range == 0.0 {
            0.0
        } else {
            ((sum as f64 + range) / (2.0 * range)).clamp(0.0, 1.0)
        }
    }

    pub fn category_of(&self, object: &str) -> Option<&Category> {
        self.categories.iter().find(|c| c.objects.iter().any(|o| o == object))
    }
}

struct CategoryDef {
    name: &'static str,
    objects: &'static [&'static str],
    rooms: &'static [(&'static str, f64)],
    surfaces: &'static [(&'static str, f64)],
    description: [&'static str; 3],
    distributed: bool,
}

const ROOMS: &[(&str, &[&str])] = &[
    ("kitchen", &["table", "counter", "fridge", "sink", "stove", "shelf", "microwave", "chair"]),
    ("living_room", &["coffee_table", "sofa", "tv_stand", "bookshelf", "bench", "side_table", "carpet"]),
    ("bedroom", &["bed", "nightstand", "dresser", "desk", "wardrobe", "chair", "carpet"]),
    ("bathroom", &["sink", "bathtub", "toilet", "shelf", "cabinet", "counter"]),
    ("office", &["desk", "bookshelf", "chair", "filing_cabinet", "side_table", "shelf"]),
    ("dining_room", &["table", "sideboard", "chair", "cabinet", "shelf", "bench"]),
    ("garage", &["workbench", "shelf", "tool_chest", "cabinet", "table", "bench"]),
    ("laundry_room", &["washing_machine", "dryer", "counter", "shelf", "basket", "cabinet"]),
];

const CATEGORIES: &[CategoryDef] = &[
    CategoryDef {
        name: "fruit",
        objects: &["apple", "banana", "orange", "pear", "lemon"],
        rooms: &[("kitchen", 1.0), ("dining_room", 0.6), ("living_room", -0.2)],
        surfaces: &[("table", 1.0), ("counter", 0.8), ("fridge", 0.4), ("coffee_table", 0.3), ("sideboard", 0.3)],
        description: [
            "A {object} is a fresh fruit that people eat as a sweet and healthy snack.",
            "It is usually kept in a fruit bowl on the kitchen table or counter.",
            "Many people slice it for breakfast, desserts, salads and lunch boxes.",
        ],
        distributed: false,
    },
    CategoryDef {
        name: "packaged_food",
        objects: &["cracker_box", "cereal_box", "cookie_jar", "chips", "pasta_box"],
        rooms: &[("kitchen", 1.0), ("dining_room", 0.3), ("living_room", -0.1)],
        surfaces: &[("shelf", 1.0), ("counter", 0.8), ("table", 0.5), ("cabinet", 0.5)],
        description: [
            "A {object} holds packaged dry food that people eat as a meal or snack.",
            "It is stored on a pantry shelf or a kitchen counter and opened at mealtime.",
            "People pour or take the food out when preparing breakfast or snacks.",
        ],
        distributed: false,
    },
    CategoryDef {
        name: "tool",
        objects: &["screwdriver", "hammer", "wrench", "tape_measure", "pliers"],
        rooms: &[("garage", 1.0), ("laundry_room", 0.1), ("office", -0.1)],
        surfaces: &[("workbench", 1.0), ("tool_chest", 0.9), ("shelf", 0.5), ("table", 0.3), ("cabinet", 0.3)],
        description: [
            "A {object} is a hand tool used to repair, build and assemble things.",
            "It is kept in a tool chest or on a workbench in the garage or workshop.",
            "People use it for fixing furniture, tightening hardware and home projects.",
        ],
        distributed: false,
    },
    CategoryDef {
        name: "dishware",
        objects: &["mug", "plate", "bowl", "glass", "spoon"],
        rooms: &[("kitchen", 1.0), ("dining_room", 0.8)],
        surfaces: &[("sideboard", 0.9), ("table", 0.8), ("counter", 0.8), ("sink", 0.7), ("shelf", 0.6), ("cabinet", 0.6)],
        description: [
            "A {object} is dishware used for serving and eating food or drinks.",
            "It is washed in the sink and stored in kitchen cabinets or on shelves.",
            "People set it on the dining table for meals with family and guests.",
        ],
        distributed: false,
    },
    CategoryDef {
        name: "toiletry",
        objects: &["toothbrush", "soap", "shampoo", "towel", "razor"],
        rooms: &[("bathroom", 1.0), ("bedroom", -0.3)],
        surfaces: &[("sink", 1.0), ("counter", 0.9), ("shelf", 0.7), ("bathtub", 0.6), ("cabinet", 0.6)],
        description: [
            "A {object} is a personal hygiene item used for washing and grooming.",
            "It is kept near the bathroom sink, on a shelf or beside the bathtub.",
            "People use it every morning and evening as part of their routine.",
        ],
        distributed: false,
    },
    CategoryDef {
        name: "reading",
        objects: &["book", "notebook", "pen", "magazine", "folder"],
        rooms: &[("office", 1.0), ("living_room", 0.6), ("bedroom", 0.5)],
        surfaces: &[("desk", 1.0), ("bookshelf", 0.9), ("nightstand", 0.6), ("coffee_table", 0.6), ("side_table", 0.5), ("filing_cabinet", 0.5)],
        description: [
            "A {object} is used for reading, writing and studying information on paper.",
            "It is kept on a desk, a bookshelf or a nightstand for later reading.",
            "People carry it to work, school and meetings to record notes and ideas.",
        ],
        distributed: false,
    },
    CategoryDef {
        name: "electronics",
        objects: &["remote", "multiport_hub", "charger", "headphones", "laptop"],
        rooms: &[("living_room", 0.9), ("office", 1.0), ("bedroom", 0.4)],
        surfaces: &[("tv_stand", 0.9), ("desk", 1.0), ("coffee_table", 0.7), ("side_table", 0.6), ("nightstand", 0.5), ("sofa", 0.4)],
        description: [
            "A {object} is an electronic device that connects to computers, screens or power.",
            "It is kept on a desk, a tv stand or a side table near an outlet.",
            "People use it to charge, control or connect their gadgets every day.",
        ],
        distributed: false,
    },
    CategoryDef {
        name: "clothing",
        objects: &["shoe", "sock", "hat", "jacket", "scarf"],
        rooms: &[("bedroom", 1.0), ("laundry_room", 0.7)],
        surfaces: &[("wardrobe", 1.0), ("dresser", 0.9), ("bed", 0.6), ("basket", 0.8), ("chair", 0.4)],
        description: [
            "A {object} is clothing that people wear to stay warm and look good.",
            "It is stored in a wardrobe or dresser and washed in the laundry.",
            "People put it on when getting dressed and take it off at night.",
        ],
        distributed: false,
    },
    CategoryDef {
        name: "toy",
        objects: &["teddy_bear", "puzzle", "ball", "toy_car"],
        rooms: &[("bedroom", 0.8), ("living_room", 0.9)],
        surfaces: &[("carpet", 1.0), ("bed", 0.7), ("sofa", 0.6), ("shelf", 0.5), ("coffee_table", 0.4)],
        description: [
            "A {object} is a toy that children play with for fun and learning.",
            "It is left on the carpet, the sofa or in a toy box after playtime.",
            "Kids share it with friends and bring it along on trips.",
        ],
        distributed: false,
    },
    CategoryDef {
        name: "fixture",
        objects: &["light_switch", "doorknob", "smoke_detector"],
        rooms: &[
            ("kitchen", 0.5),
            ("living_room", 0.5),
            ("bedroom", 0.5),
            ("bathroom", 0.5),
            ("office", 0.5),
            ("dining_room", 0.5),
            ("garage", 0.5),
            ("laundry_room", 0.5),
        ],
        surfaces: &[("shelf", 0.3), ("cabinet", 0.3), ("counter", 0.2)],
        description: [
            "A {object} is a fixture installed in walls, doors or ceilings.",
            "Every room and hallway of a house has one mounted near its entrance.",
            "People operate it many times a day without thinking about it.",
        ],
        distributed: true,
    },
];

/// Surface vocabulary per room type of the bundled synthetic dataset.
pub fn synthetic_room_types() -> BTreeMap<String, Vec<String>> {
    ROOMS
        .iter()
        .map(|(r, s)| (r.to_string(), s.iter().map(|x| x.to_string()).collect()))
        .collect()
}

/// Small Housekeep-style corpus: every object of every category annotated
/// in every room type by `annotators` noisy annotators. Deterministic in
/// `seed`.
pub fn synthetic_dataset(annotators: u32, seed: u64) -> PlacementDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, 0.25).expect("valid normal");
    let mut entries = Vec::new();
    for cat in CATEGORIES {
        for object in cat.objects {
            // per-object offsets so objects of a category are similar, not identical
            let offsets: BTreeMap<&str, f64> = ROOMS
                .iter()
                .flat_map(|(_, s)| s.iter())
                .map(|s| (*s, rng.random_range(-0.15..0.15)))
                .collect();
            for (room, surfaces) in ROOMS {
                let room_aff = cat.rooms.iter().find(|(r, _)| r == room).map_or(-0.6, |(_, a)| *a);
                for annotator in 0..annotators {
                    let mut utility: Vec<(f64, &str)> = surfaces
                        .iter()
                        .map(|s| {
                            let pref = cat.surfaces.iter().find(|(x, _)| x == s).map_or(-0.5, |(_, a)| *a);
                            let u = room_aff + pref - 0.5 + offsets[s] + jitter.sample(&mut rng);
                            (u, *s)
                        })
                        .collect();
                    utility.shuffle(&mut rng);
                    utility.sort_by(|a, b| b.0.total_cmp(&a.0));
                    let mut correct = Vec::new();
                    let mut incorrect = Vec::new();
                    let mut implausible = Vec::new();
                    for &(u, s) in &utility {
                        if u > 0.3 {
                            correct.push(s.to_string());
                        } else if u > -1.0 {
                            incorrect.push(s.to_string());
                        } else {
                            implausible.push(s.to_string());
                        }
                    }
                    // incorrect is listed least likely first
                    incorrect.reverse();
                    entries.push(AnnotationEntry {
                        object: object.to_string(),
                        room: room.to_string(),
                        correct,
                        incorrect,
                        implausible,
                        annotator,
                    });
                }
            }
        }
    }
    let categories = CATEGORIES
        .iter()
        .map(|c| Category {
            name: c.name.to_string(),
            objects: c.objects.iter().map(|o| o.to_string()).collect(),
            description: c.description.map(str::to_string),
            distributed: c.distributed,
        })
        .collect();
    PlacementDataset::new(entries, synthetic_room_types(), categories).expect("synthetic dataset aggregates")
}
