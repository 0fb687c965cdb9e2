#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// User-chosen names drawn from `names_seed`; never a reserved matrix key.
struct Namer {
    rng: ChaCha8Rng,
    used: std::collections::BTreeSet<String>,
}

impl Namer {
    fn fresh(&mut self, prefix: &str) -> String {
        loop {
            let n: u32 = self.rng.gen_range(0..100_000);
            let name = format!("{prefix}{n}");
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }
}

/// A random but well-formed workflow. The structure depends only on
/// `shape_seed`; every user-defined key and sequence length of scalars
/// depends on `names_seed`.
pub fn random_workflow(shape_seed: u64, names_seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(shape_seed);
    let mut names = Namer {
        rng: ChaCha8Rng::seed_from_u64(names_seed),
        used: Default::default(),
    };
    let mut y = String::new();
    if rng.gen_bool(0.7) {
        y.push_str("name: wf\n");
    }
    let triggers = ["push", "pull_request", "workflow_dispatch"];
    y.push_str("on:\n");
    let k = rng.gen_range(1..=3);
    for t in triggers.choose_multiple(&mut rng, k) {
        y.push_str(&format!("  {t}:\n"));
        if *t == "push" && rng.gen_bool(0.5) {
            y.push_str("    branches: [main]\n");
        }
    }
    if rng.gen_bool(0.3) {
        y.push_str("permissions:\n  contents: read\n");
    }
    if rng.gen_bool(0.4) {
        y.push_str("env:\n");
        for _ in 0..rng.gen_range(1..=3) {
            y.push_str(&format!("  {}: x\n", names.fresh("V")));
        }
    }
    y.push_str("jobs:\n");
    let n_jobs = rng.gen_range(1..=4);
    let mut job_ids = Vec::new();
    for j in 0..n_jobs {
        let id = names.fresh("job");
        y.push_str(&format!("  {id}:\n    runs-on: ubuntu-latest\n"));
        if j > 0 && rng.gen_bool(0.5) {
            y.push_str(&format!("    needs: {}\n", job_ids[j - 1]));
        }
        if rng.gen_bool(0.3) {
            y.push_str("    strategy:\n      matrix:\n");
            for _ in 0..rng.gen_range(1..=2) {
                y.push_str(&format!("        {}: [a, b]\n", names.fresh("m")));
            }
        }
        if rng.gen_bool(0.2) {
            y.push_str(&format!(
                "    services:\n      {}:\n        image: postgres\n",
                names.fresh("svc")
            ));
        }
        y.push_str("    steps:\n");
        for _ in 0..rng.gen_range(1..=6) {
            match rng.gen_range(0..4) {
                0 => y.push_str("      - run: make\n"),
                1 => y.push_str("      - uses: actions/checkout@v4\n"),
                2 => y.push_str(&format!(
                    "      - uses: actions/setup-node@v4\n        with:\n          {}: 20\n",
                    names.fresh("p")
                )),
                _ => y.push_str(&format!(
                    "      - name: s\n        if: always()\n        env:\n          {}: y\n        run: echo\n",
                    names.fresh("E")
                )),
            }
        }
        job_ids.push(id);
    }
    y
}

/// Parent constructs whose children are user-chosen names, with the child
/// names that stay literal.
const USER_KEYED: &[(&str, &str, &[&str])] = &[
    ("jobs", "<id>", &[]),
    ("env", "<var>", &[]),
    ("jobs.<id>.env", "<var>", &[]),
    ("jobs.<id>.steps[*].env", "<var>", &[]),
    ("jobs.<id>.container.env", "<var>", &[]),
    ("jobs.<id>.services", "<s_id>", &[]),
    ("jobs.<id>.services.<s_id>.env", "<var>", &[]),
    (
        "jobs.<id>.strategy.matrix",
        "<var>",
        &["include", "exclude"],
    ),
    ("jobs.<id>.strategy.matrix.include[*]", "<var>", &[]),
    ("jobs.<id>.strategy.matrix.exclude[*]", "<var>", &[]),
    ("jobs.<id>.steps[*].with", "<param>", &[]),
    ("jobs.<id>.with", "<param>", &[]),
    ("jobs.<id>.secrets", "<id>", &[]),
    ("jobs.<id>.outputs", "<id>", &[]),
    ("on.workflow_dispatch.inputs", "<id>", &[]),
    ("on.workflow_call.inputs", "<id>", &[]),
    ("on.workflow_call.outputs", "<id>", &[]),
    ("on.workflow_call.secrets", "<id>", &[]),
];

/// Tokenizes a rendered concrete path and rebuilds it left to right.
pub fn oracle(concrete: &str) -> String {
    let mut out = String::new();
    for part in concrete.split('.') {
        let (key, indices) = part.split_at(part.find('[').unwrap_or(part.len()));
        let replacement = USER_KEYED
            .iter()
            .find(|(parent, _, keep)| *parent == out && !keep.contains(&key))
            .map(|(_, placeholder, _)| *placeholder);
        if !out.is_empty() {
            out.push('.');
        }
        out.push_str(replacement.unwrap_or(key));
        for _ in indices.matches('[') {
            out.push_str("[*]");
        }
    }
    out
}

pub fn golden_cases() -> Vec<(String, String)> {
    include_str!("../fixtures/abstraction_golden.tsv")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let (a, b) = l.split_once('\t').expect("tab-separated case");
            (a.to_string(), b.to_string())
        })
        .collect()
}
