#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use schema_focus::{Schema, SchemaBuilder};

/// Incidence matrix, one row per entity type.
pub type Matrix = Vec<Vec<bool>>;

pub fn entity_id(i: usize) -> String {
    format!("E{i:03}")
}

pub fn property_id(j: usize) -> String {
    format!("p{j:04}")
}

pub fn schema_from_matrix(name: &str, m: &Matrix) -> Schema {
    let mut b = SchemaBuilder::new(name);
    for (i, row) in m.iter().enumerate() {
        let props: Vec<String> = row
            .iter()
            .enumerate()
            .filter(|(_, on)| **on)
            .map(|(j, _)| property_id(j))
            .collect();
        b.push_entity(entity_id(i), None, props);
    }
    b.build().expect("valid schema").schema
}

pub fn random_matrix(rng: &mut ChaCha8Rng, max_e: usize, max_p: usize, density: f64) -> Matrix {
    let ne = rng.gen_range(1..=max_e);
    let np = rng.gen_range(1..=max_p);
    (0..ne)
        .map(|_| (0..np).map(|_| rng.gen_bool(density)).collect())
        .collect()
}

/// Straight enumeration over the matrix, sharing no code with the library.
pub struct Oracle {
    pub cue_er: Vec<f64>,
    pub ncue: Vec<f64>,
    pub cue_cr: Option<f64>,
    pub focus_k: f64,
}

pub fn oracle(m: &Matrix) -> Oracle {
    let mut cue_er = Vec::new();
    let mut ncue = Vec::new();
    let mut total_cue = 0.0;
    let mut total_props = 0usize;
    for row in m {
        let mut sum = 0.0;
        let mut owned = 0usize;
        for (j, &on) in row.iter().enumerate() {
            if !on {
                continue;
            }
            owned += 1;
            let mut df = 0usize;
            for other in m {
                if other[j] {
                    df += 1;
                }
            }
            sum += 1.0 / df as f64;
        }
        cue_er.push(sum);
        ncue.push(if owned == 0 { 0.0 } else { sum / owned as f64 });
        total_cue += sum;
        total_props += owned;
    }
    let focus_k = ncue.iter().sum::<f64>() / m.len() as f64;
    Oracle {
        cue_er,
        ncue,
        cue_cr: (total_props > 0).then(|| total_cue / total_props as f64),
        focus_k,
    }
}

/// `A{p1,p2}`, `B{p2,p3}`, `C{p3}`.
pub fn abc() -> Schema {
    SchemaBuilder::new("abc")
        .entity("A", None, ["p1", "p2"])
        .entity("B", None, ["p2", "p3"])
        .entity("C", None, ["p3"])
        .build()
        .unwrap()
        .schema
}

pub const ABC_JSON: &str = r#"{
  "name": "abc",
  "entity_types": [
    {"id": "A", "properties": ["p1", "p2"]},
    {"id": "B", "properties": ["p2", "p3"]},
    {"id": "C", "properties": ["p3"]}
  ]
}
"#;

/// Ten schemas of `types` entity types, each owning `per` properties drawn
/// from a pool that shrinks linearly from `types * per` to `per`, so
/// property overlap grows along the family. Member `i` uses the stream
/// seeded with `seed * 100 + i`.
pub fn pool_family(types: usize, per: usize, seed: u64) -> Vec<Schema> {
    use rand::seq::index::sample;
    use rand::SeedableRng;
    let widest = types * per;
    (0..10)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 100 + i as u64);
            let pool = widest - i * (widest - per) / 9;
            let mut b = SchemaBuilder::new(format!("family{i}"));
            for e in 0..types {
                let props: Vec<String> = sample(&mut rng, pool, per).into_iter().map(property_id).collect();
                b.push_entity(entity_id(e), None, props);
            }
            b.build().unwrap().schema
        })
        .collect()
}
