//! Anti-drift check of docs/formula-map.md: every operation appears in the
//! table exactly once, and the table contains no phantom rows.

use std::collections::BTreeMap;
use std::path::Path;

/// The canonical operation list. Adding an operation without a formula-map
/// row (or the reverse) fails this test.
const OPERATIONS: &[&str] = &[
    "decompose",
    "standard_j",
    "is_unimodular",
    "bracket",
    "levi_civita",
    "koszul_oracle",
    "nijenhuis",
    "nijenhuis_closed",
    "d_omega",
    "delta_omega",
    "lee_form",
    "nabla_omega",
    "tensor_t",
    "tensor_u",
    "rough_laplacian",
    "harmonic_commutator",
    "is_harmonic_general",
    "is_harmonic_unimodular",
    "is_harmonic_integrable",
    "is_harmonic_dim4",
    "is_harmonic_oracle",
    "atomic_predicates",
    "classify",
    "classify_oracle",
    "is_skt",
    "skt_harmonic",
    "skt_block_basis",
    "exp_block",
    "block_integer_witness",
    "assemble_witness",
    "lattice_abelianization",
    "isomorphism_scale_check",
    "dirichlet_energy",
    "energy_gradient",
    "run_flow",
    "run_entry",
];

fn table_rows() -> BTreeMap<String, usize> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/formula-map.md");
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if !trimmed.starts_with("| `") {
            continue;
        }
        // first cell: | `name` | ...
        let Some(rest) = trimmed.strip_prefix("| `") else { continue };
        let Some((name, _)) = rest.split_once('`') else { continue };
        *counts.entry(name.to_string()).or_insert(0) += 1;
    }
    counts
}

#[test]
fn formula_map_is_total_and_duplicate_free() {
    let rows = table_rows();
    let mut missing = Vec::new();
    let mut duplicated = Vec::new();
    for op in OPERATIONS {
        match rows.get(*op) {
            None | Some(0) => missing.push(*op),
            Some(1) => {}
            Some(_) => duplicated.push(*op),
        }
    }
    let phantom: Vec<&String> =
        rows.keys().filter(|k| !OPERATIONS.contains(&k.as_str())).collect();
    assert!(
        missing.is_empty() && duplicated.is_empty() && phantom.is_empty(),
        "formula map drift: missing {missing:?}, duplicated {duplicated:?}, phantom {phantom:?}"
    );
    assert_eq!(rows.len(), OPERATIONS.len());
}

#[test]
fn formula_map_rows_carry_formula_and_code_cells() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/formula-map.md");
    let text = std::fs::read_to_string(path).unwrap();
    for line in text.lines().filter(|l| l.trim().starts_with("| `")) {
        // markdown escapes literal pipes inside cells as \|
        let unescaped = line.replace("\\|", "<bar>");
        let cells: Vec<&str> = unescaped.trim().trim_matches('|').split('|').collect();
        assert_eq!(cells.len(), 3, "row must have operation, formula, code: {line}");
        assert!(!cells[1].trim().is_empty(), "empty formula cell in {line}");
        assert!(cells[2].contains("::"), "code cell must point into the crate: {line}");
    }
}
