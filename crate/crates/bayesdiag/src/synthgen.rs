use crate::dataset::{RawColumn, RawTable};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashMap, HashSet};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dependency {
    pub pathology: String,
    pub prob_given_present: f64,
    pub prob_given_absent: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathologySpec {
    pub name: String,
    pub patients_per_pathology: usize,
    pub symptom_probs: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depends_on: Option<Dependency>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub symptoms: Vec<String>,
    pub pathologies: Vec<PathologySpec>,
    /// Pathologies of interest: each becomes a binary label column.
    pub labels: Vec<String>,
    pub baseline_noise: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct GeneratedDataset {
    pub table: RawTable,
    pub spec_hash: String,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.symptoms.is_empty() {
            return Err(Error::invalid("generator spec declares no symptoms"));
        }
        if self.pathologies.is_empty() {
            return Err(Error::invalid("generator spec declares no pathologies"));
        }
        if !(0.0..=1.0).contains(&self.baseline_noise) {
            return Err(Error::invalid("baseline_noise must be in [0, 1]"));
        }
        let mut seen = HashSet::new();
        for s in &self.symptoms {
            if !seen.insert(s.as_str()) {
                return Err(Error::invalid(format!("duplicate symptom name {s:?}")));
            }
        }
        let symptom_set: HashSet<&str> = self.symptoms.iter().map(|s| s.as_str()).collect();
        let mut path_index = HashMap::new();
        for (i, p) in self.pathologies.iter().enumerate() {
            if symptom_set.contains(p.name.as_str()) || path_index.insert(p.name.clone(), i).is_some()
            {
                return Err(Error::invalid(format!("duplicate name {:?}", p.name)));
            }
            for (s, &prob) in &p.symptom_probs {
                if !symptom_set.contains(s.as_str()) {
                    return Err(Error::invalid(format!(
                        "pathology {:?} references unknown symptom {s:?}",
                        p.name
                    )));
                }
                if !(0.0..=1.0).contains(&prob) {
                    return Err(Error::invalid(format!(
                        "probability for symptom {s:?} of {:?} out of [0, 1]",
                        p.name
                    )));
                }
            }
            if let Some(dep) = &p.depends_on {
                if !(0.0..=1.0).contains(&dep.prob_given_present)
                    || !(0.0..=1.0).contains(&dep.prob_given_absent)
                {
                    return Err(Error::invalid(format!(
                        "dependency probabilities of {:?} out of [0, 1]",
                        p.name
                    )));
                }
            }
        }
        for (i, p) in self.pathologies.iter().enumerate() {
            if let Some(dep) = &p.depends_on {
                match path_index.get(&dep.pathology) {
                    None => {
                        return Err(Error::invalid(format!(
                            "pathology {:?} depends on undeclared {:?}",
                            p.name, dep.pathology
                        )))
                    }
                    Some(&j) if j == i => {
                        return Err(Error::invalid(format!(
                            "pathology {:?} depends on itself",
                            p.name
                        )))
                    }
                    Some(_) => {}
                }
            }
        }
        self.topo_order()?;
        for l in &self.labels {
            if !path_index.contains_key(l) {
                return Err(Error::invalid(format!("label {l:?} is not a declared pathology")));
            }
        }
        if self.total_rows() == 0 {
            return Err(Error::invalid("spec generates zero rows"));
        }
        Ok(())
    }

    pub fn total_rows(&self) -> usize {
        self.pathologies.iter().map(|p| p.patients_per_pathology).sum()
    }

    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Declared-order-stable topological order over the depends_on edges.
    fn topo_order(&self) -> Result<Vec<usize>> {
        let index: HashMap<&str, usize> = self
            .pathologies
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.as_str(), i))
            .collect();
        let n = self.pathologies.len();
        let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for (i, p) in self.pathologies.iter().enumerate() {
            if let Some(dep) = &p.depends_on {
                let j = index[dep.pathology.as_str()];
                dependents[j].push(i);
                indeg[i] += 1;
            }
        }
        let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.first().copied() {
            ready.remove(0);
            order.push(i);
            for &d in &dependents[i] {
                indeg[d] -= 1;
                if indeg[d] == 0 {
                    ready.push(d);
                    ready.sort_unstable();
                }
            }
        }
        if order.len() != n {
            return Err(Error::invalid("depends_on relations form a cycle"));
        }
        Ok(order)
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<GeneratedDataset> {
    spec.validate()?;
    let order = spec.topo_order()?;
    let symptom_index: HashMap<&str, usize> = spec
        .symptoms
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    // per symptom: (pathology index, appearance probability)
    let mut listers: Vec<Vec<(usize, f64)>> = vec![Vec::new(); spec.symptoms.len()];
    for (pi, p) in spec.pathologies.iter().enumerate() {
        for (s, &prob) in &p.symptom_probs {
            listers[symptom_index[s.as_str()]].push((pi, prob));
        }
    }

    let n_rows = spec.total_rows();
    let mut symptom_cols: Vec<Vec<Option<bool>>> =
        vec![Vec::with_capacity(n_rows); spec.symptoms.len()];
    let label_idx: Vec<usize> = spec
        .labels
        .iter()
        .map(|l| spec.pathologies.iter().position(|p| &p.name == l).unwrap())
        .collect();
    let mut label_cols: Vec<Vec<Option<bool>>> = vec![Vec::with_capacity(n_rows); label_idx.len()];

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut active = vec![false; spec.pathologies.len()];
    for (gen_idx, p) in spec.pathologies.iter().enumerate() {
        for _ in 0..p.patients_per_pathology {
            for &i in &order {
                // a depends_on draw is consumed even for the generating
                // pathology so the RNG stream does not depend on outcomes
                let sampled = match &spec.pathologies[i].depends_on {
                    Some(dep) => {
                        let j = spec
                            .pathologies
                            .iter()
                            .position(|q| q.name == dep.pathology)
                            .unwrap();
                        let pr = if active[j] {
                            dep.prob_given_present
                        } else {
                            dep.prob_given_absent
                        };
                        rng.gen_bool(pr)
                    }
                    None => false,
                };
                active[i] = i == gen_idx || sampled;
            }
            for (si, col) in symptom_cols.iter_mut().enumerate() {
                let mut miss = 1.0;
                let mut associated = false;
                for &(pi, prob) in &listers[si] {
                    if active[pi] {
                        associated = true;
                        miss *= 1.0 - prob;
                    }
                }
                let pr = if associated {
                    1.0 - miss
                } else {
                    spec.baseline_noise
                };
                col.push(Some(rng.gen_bool(pr)));
            }
            for (li, col) in label_cols.iter_mut().enumerate() {
                col.push(Some(active[label_idx[li]]));
            }
        }
    }

    let mut column_names: Vec<String> = spec.symptoms.clone();
    let mut columns: Vec<RawColumn> = symptom_cols.into_iter().map(RawColumn::Boolean).collect();
    let mut label_flags = vec![false; spec.symptoms.len()];
    for (li, col) in label_cols.into_iter().enumerate() {
        column_names.push(spec.labels[li].clone());
        columns.push(RawColumn::Boolean(col));
        label_flags.push(true);
    }
    Ok(GeneratedDataset {
        table: RawTable {
            column_names,
            columns,
            n_rows,
            label_flags,
        },
        spec_hash: spec.hash(),
    })
}

pub fn load_spec(path: impl AsRef<std::path::Path>) -> Result<GeneratorSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let spec: GeneratorSpec = serde_json::from_str(&text)?;
    spec.validate()?;
    Ok(spec)
}

const JAUNDICE_SYMPTOMS: [(&str, f64); 6] = [
    ("yellowish_skin", 0.70),
    ("dark_urine", 0.85),
    ("itching", 0.75),
    ("abdominal_pain", 0.70),
    ("loss_of_appetite", 0.65),
    ("weight_loss", 0.60),
];

const GILBERT_SYMPTOMS: [(&str, f64); 3] = [
    ("cough", 0.70),
    ("high_fever", 0.60),
    ("yellowish_skin", 0.55),
];

pub fn builtin_medical_spec() -> GeneratorSpec {
    let mut symptoms: Vec<String> = vec![
        "yellowish_skin".into(),
        "dark_urine".into(),
        "itching".into(),
        "abdominal_pain".into(),
        "loss_of_appetite".into(),
        "weight_loss".into(),
        "cough".into(),
        "high_fever".into(),
    ];
    // the six symptoms above stay exclusive to jaundice; cough and
    // high_fever are common complaints shared with the generic pool, which
    // keeps gilbert_syndrome ambiguous without its jaundice link
    let mut pool: Vec<String> = vec!["cough".into(), "high_fever".into()];
    pool.extend((9..=132).map(|i| format!("symptom_{i:03}")));
    symptoms.extend(pool.iter().skip(2).cloned());

    let mut pathologies = Vec::with_capacity(41);
    pathologies.push(PathologySpec {
        name: "jaundice".into(),
        patients_per_pathology: 500,
        symptom_probs: JAUNDICE_SYMPTOMS
            .iter()
            .map(|&(s, p)| (s.to_string(), p))
            .collect(),
        depends_on: None,
    });
    pathologies.push(PathologySpec {
        name: "gilbert_syndrome".into(),
        patients_per_pathology: 500,
        symptom_probs: GILBERT_SYMPTOMS
            .iter()
            .map(|&(s, p)| (s.to_string(), p))
            .collect(),
        depends_on: Some(Dependency {
            pathology: "jaundice".into(),
            prob_given_present: 0.8,
            prob_given_absent: 0.005,
        }),
    });

    let mut rng = ChaCha8Rng::seed_from_u64(0xB10C_5EED);
    for k in 3..=41 {
        let n_symptoms = rng.gen_range(5..=8);
        let mut picks = HashSet::new();
        while picks.len() < n_symptoms {
            // skip cough/high_fever here; they are spread deterministically below
            picks.insert(rng.gen_range(2..pool.len()));
        }
        let mut picks: Vec<usize> = picks.into_iter().collect();
        picks.sort_unstable();
        let mut symptom_probs: BTreeMap<String, f64> = picks
            .into_iter()
            .map(|i| {
                let p = (rng.gen_range(0.45..0.90f64) * 100.0).round() / 100.0;
                (pool[i].clone(), p)
            })
            .collect();
        // cough and high_fever are frequent complaints across many diseases,
        // which keeps them weak evidence on their own
        if (3..=10).contains(&k) {
            symptom_probs.insert("cough".into(), 0.70);
        }
        if (3..=14).contains(&k) {
            symptom_probs.insert("high_fever".into(), 0.60);
        }
        pathologies.push(PathologySpec {
            name: format!("pathology_{k:02}"),
            patients_per_pathology: 500,
            symptom_probs,
            depends_on: None,
        });
    }

    GeneratorSpec {
        symptoms,
        pathologies,
        labels: vec!["jaundice".into(), "gilbert_syndrome".into()],
        baseline_noise: 0.01,
        seed: 0x0D1A_6905,
    }
}
