use pqset_wasm::{eta_residual, scaling_table, star_product};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn table_in_four_dimensions() {
    let t = parse(&scaling_table(4, 1, 4).unwrap());
    let rho: Vec<&str> = t["rows"].as_array().unwrap().iter().map(|r| r["rho"].as_str().unwrap()).collect();
    assert_eq!(rho, ["-2", "0", "2", "4"]);
    assert_eq!(t["rows"][0]["extension"], "unique");
}

#[test]
fn table_rejects_bad_ranges() {
    assert!(scaling_table(4, 0, 3).is_err());
    assert!(scaling_table(4, 3, 2).is_err());
    assert!(scaling_table(4, 1, 99).is_err());
    assert!(scaling_table(1, 1, 2).is_err());
}

#[test]
fn residual_vanishes_only_at_the_solution() {
    for (n, good, bad) in [(4, "1/4", "7/20"), (3, "1/3", "7/30")] {
        for idelta in [false, true] {
            let at = parse(&eta_residual(n, good, idelta).unwrap());
            assert_eq!(at["solution"], good);
            assert_eq!(at["vanishes"], true);
            let off = parse(&eta_residual(n, bad, idelta).unwrap());
            assert_eq!(off["vanishes"], false);
        }
    }
    assert!(eta_residual(4, "one quarter", false).is_err());
    assert!(eta_residual(5, "1/5", false).is_err());
}

#[test]
fn star_product_of_squares_has_three_terms() {
    let p = parse(&star_product(2, 2, "H").unwrap());
    assert_eq!(p["monomials"], 3);
    assert!(star_product(2, 2, "Q").is_err());
    assert!(star_product(9, 1, "H").is_err());
}
