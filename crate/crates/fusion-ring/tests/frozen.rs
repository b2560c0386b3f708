//! Frozen fusion tables, checked against every engine.

use fusion_ring::cli::compute_table;
use fusion_ring::weyl::DEFAULT_RANK_LIMIT;
use fusion_ring::{build_affine_data, AlgebraContext, Method};

type Tensor = Vec<Vec<Vec<i64>>>;

fn check(t: &str, level: i64, weights: Vec<Vec<i64>>, n: Tensor) {
    let ctx = AlgebraContext::new(build_affine_data(t.parse().unwrap()), level, DEFAULT_RANK_LIMIT).unwrap();
    for m in Method::ALL {
        let table = compute_table(&ctx, m).unwrap();
        assert_eq!(table.weights, weights, "{t} {level} {m}");
        assert_eq!(table.n, n, "{t} {level} {m}");
        assert!(table.report().algebra_ok(), "{t} {level} {m}");
    }
}

#[test]
fn a1_levels_one_and_two() {
    check("A1~1", 1, vec![vec![0], vec![1]], vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 0]]]);
    check(
        "A1~1",
        2,
        vec![vec![0], vec![1], vec![2]],
        vec![
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
            vec![vec![0, 1, 0], vec![1, 0, 1], vec![0, 1, 0]],
            vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]],
        ],
    );
}

#[test]
fn a2_twisted_level_two_has_a_negative_coefficient() {
    check("A2~2", 2, vec![vec![0], vec![1]], vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, -1]]]);
}

#[test]
fn a2_twisted_level_three() {
    check("A2~2", 3, vec![vec![0], vec![1]], vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 0]]]);
}

#[test]
fn a3_twisted_levels_one_and_two() {
    check("A3~2", 1, vec![vec![0, 0], vec![1, 0]], vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 0]]]);
    check(
        "A3~2",
        2,
        vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![2, 0]],
        vec![
            vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![0, 0, 0, 1]],
            vec![vec![0, 1, 0, 0], vec![1, -1, 0, 1], vec![0, 0, 1, 0], vec![0, 1, 0, 0]],
            vec![vec![0, 0, 1, 0], vec![0, 0, 1, 0], vec![1, 1, 0, 1], vec![0, 0, 1, 0]],
            vec![vec![0, 0, 0, 1], vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![1, 0, 0, 0]],
        ],
    );
}

#[test]
fn d3_twisted_level_two() {
    check(
        "D3~2",
        2,
        vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0]],
        vec![
            vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![0, 0, 0, 1]],
            vec![vec![0, 1, 0, 0], vec![1, 0, 1, 1], vec![0, 1, 0, 0], vec![0, 1, 0, 0]],
            vec![vec![0, 0, 1, 0], vec![0, 1, 0, 0], vec![1, 0, 0, 0], vec![0, 0, 0, 1]],
            vec![vec![0, 0, 0, 1], vec![0, 1, 0, 0], vec![0, 0, 0, 1], vec![1, 0, 1, -1]],
        ],
    );
}

#[test]
fn d4_triality_level_three() {
    check(
        "D4~3",
        3,
        vec![vec![0, 0], vec![0, 1], vec![1, 0]],
        vec![
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
            vec![vec![0, 1, 0], vec![1, 2, -1], vec![0, -1, 1]],
            vec![vec![0, 0, 1], vec![0, -1, 1], vec![1, 1, 1]],
        ],
    );
}
