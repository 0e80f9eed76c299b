#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use toffa_core::contribution::{UtilityRow, UtilityTable};
use toffa_core::model::*;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn model(name: &str) -> Model {
    toffa_core::parse_model(&fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fixture_names(ext: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with(ext))
        .collect();
    v.sort();
    v
}

fn feature(id: String, parent: Option<String>, relation: Relation) -> Feature {
    Feature {
        name: format!("Feature {id}"),
        id,
        parent,
        relation,
    }
}

/// A random feature tree with `n` features, groups and cross-tree constraints.
pub fn random_model(rng: &mut ChaCha8Rng, n: usize) -> Model {
    let mut m = Model {
        name: "random".into(),
        ..Model::default()
    };
    m.features.push(feature("f0".into(), None, Relation::Root));
    let mut groups = 0;
    while m.features.len() < n {
        let parent = m.features[rng.gen_range(0..m.features.len())].id.clone();
        let left = n - m.features.len();
        let roll: f64 = rng.gen();
        if left >= 2 && roll < 0.4 {
            let size = rng.gen_range(2..=left.min(4));
            let gid = format!("g{groups}");
            groups += 1;
            let xor = rng.gen_bool(0.5);
            for _ in 0..size {
                let id = format!("f{}", m.features.len());
                let rel = if xor {
                    Relation::XorMember(gid.clone())
                } else {
                    Relation::OrMember(gid.clone())
                };
                m.features.push(feature(id, Some(parent.clone()), rel));
            }
        } else {
            let id = format!("f{}", m.features.len());
            let rel = if roll < 0.6 {
                Relation::Mandatory
            } else {
                Relation::Optional
            };
            m.features.push(feature(id, Some(parent), rel));
        }
    }
    let k = if n >= 3 { rng.gen_range(0..=3) } else { 0 };
    for _ in 0..k {
        let (a, b) = (rng.gen_range(1..n), rng.gen_range(1..n));
        if a == b {
            continue;
        }
        let (a, b) = (format!("f{a}"), format!("f{b}"));
        if m.constraints
            .iter()
            .any(|c| (c.a == a && c.b == b) || (c.a == b && c.b == a))
        {
            continue;
        }
        m.constraints.push(FeatureConstraint {
            a,
            b,
            kind: if rng.gen_bool(0.5) {
                RuleKind::Require
            } else {
                RuleKind::Exclude
            },
        });
    }
    m
}

/// Utilities on a coarse grid so that ties are common.
pub fn random_utilities(rng: &mut ChaCha8Rng, m: &Model) -> UtilityTable {
    UtilityTable {
        ccf: None,
        rows: m
            .features
            .iter()
            .map(|f| {
                let u = if f.is_variable() {
                    if rng.gen_bool(0.5) {
                        rng.gen_range(-4..=4) as f64 * 0.25
                    } else {
                        rng.gen_range(-2.0..2.0)
                    }
                } else {
                    0.0
                };
                UtilityRow {
                    feature: f.id.clone(),
                    variable: f.is_variable(),
                    cont_c: 0.0,
                    cont_g: u,
                    cont_sg: 0.0,
                    utility: u,
                }
            })
            .collect(),
    }
}

/// Random context groups holding `total` contexts between them.
pub fn random_context_model(rng: &mut ChaCha8Rng, total: usize) -> Model {
    let mut m = Model {
        name: "contexts".into(),
        ..Model::default()
    };
    m.features.push(feature("f0".into(), None, Relation::Root));
    let mut made = 0;
    let mut gi = 0;
    while made < total {
        let left = total - made;
        let mut kinds = vec![ContextGroupKind::Or, ContextGroupKind::Optional];
        if left >= 2 {
            kinds.push(ContextGroupKind::Xor);
        }
        let kind = *kinds.choose(rng).unwrap();
        let min = if kind == ContextGroupKind::Xor { 2 } else { 1 };
        let size = rng.gen_range(min..=left.min(4).max(min));
        let gid = format!("k{gi}");
        gi += 1;
        m.context_groups.push(ContextGroup {
            id: gid.clone(),
            name: gid.clone(),
            kind,
        });
        for _ in 0..size {
            m.contexts.push(ContextFeature {
                id: format!("c{made}"),
                name: format!("c{made}"),
                group: gid.clone(),
            });
            made += 1;
        }
    }
    m
}

/// Index pairs `(i, j)` with `i < j < n`.
pub fn upper_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}
