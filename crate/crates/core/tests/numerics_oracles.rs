use mmv_core::numerics::{
    gaussian, kron_block_apply, kron_block_apply_transpose, lstsq, projection_residual, stack_rows,
    top_k_indices, unstack_rows, CMat, Mat, RngState,
};
use proptest::prelude::*;

/// Solves the normal equations `AᵀA x = Aᵀb` by Gaussian elimination with
/// partial pivoting: an independent oracle for well-conditioned problems.
fn normal_equations(a: &Mat, b: &[f64]) -> Vec<f64> {
    let n = a.cols();
    let ata = a.t_matmul(a).unwrap();
    let atb = a.t_matmul(&Mat::column_vector(b.to_vec())).unwrap();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = ata.row(i).to_vec();
            row.push(atb[(i, 0)]);
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        m.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..=n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| m[c][k] * x[k]).sum();
        x[c] = (m[c][n] - s) / m[c][c];
    }
    x
}

fn kron_identity(a: &Mat, k: usize) -> Mat {
    Mat::from_fn(a.rows() * k, a.cols() * k, |i, j| {
        if i % k == j % k {
            a[(i / k, j / k)]
        } else {
            0.0
        }
    })
}

fn integer_mat(rng: &mut RngState, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.below(7) as f64 - 3.0)
}

#[test]
fn lstsq_matches_normal_equations_on_100_instances() {
    for seed in 0..100 {
        let mut rng = RngState::new(seed);
        let m = 20 + rng.below(30);
        let n = 1 + rng.below(15);
        let a = gaussian(&mut rng, m, n);
        let b = gaussian(&mut rng, m, 1);
        let x = lstsq(&a, &b).unwrap().column(0);
        let oracle = normal_equations(&a, &b.column(0));
        let err = x
            .iter()
            .zip(&oracle)
            .map(|(u, v)| (u - v).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale = oracle.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(
            err <= 1e-8 * scale,
            "seed {seed}: relative error {}",
            err / scale
        );
    }
}

#[test]
fn lstsq_recovers_exact_solution_of_consistent_system() {
    let a = Mat::from_rows(&[[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]]);
    let x = Mat::column_vector(vec![3.0, -1.0]);
    let y = a.matmul(&x).unwrap();
    assert!(lstsq(&a, &y).unwrap().max_abs_diff(&x) < 1e-14);
    assert!(projection_residual(&a, &y).unwrap().frobenius_norm() < 1e-14);
}

#[test]
fn rank_deficient_lstsq_is_an_error() {
    let a = Mat::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]);
    assert!(lstsq(&a, &Mat::column_vector(vec![1.0, 2.0, 3.0])).is_err());
}

#[test]
fn kron_block_apply_equals_materialized_kronecker_exhaustively() {
    let mut rng = RngState::new(11);
    for n in 1..=64 {
        for k in 1..=64 / n {
            for m in 1..=4 {
                // Small integers make every summation order exact.
                let a = integer_mat(&mut rng, m, n);
                let x = integer_mat(&mut rng, n * k, 1);
                let big = kron_identity(&a, k);
                assert_eq!(
                    kron_block_apply(&a, k, &x).unwrap(),
                    big.matmul(&x).unwrap(),
                    "m {m} n {n} K {k}"
                );
                let r = integer_mat(&mut rng, m * k, 1);
                assert_eq!(
                    kron_block_apply_transpose(&a, k, &r).unwrap(),
                    big.t_matmul(&r).unwrap(),
                    "transpose, m {m} n {n} K {k}"
                );
            }
        }
    }
}

#[test]
fn kron_block_apply_gaussian_agrees_to_rounding() {
    let mut rng = RngState::new(12);
    for (m, n, k) in [(72, 144, 4), (10, 16, 4), (3, 64, 1), (5, 8, 8)] {
        let a = gaussian(&mut rng, m, n);
        let x = gaussian(&mut rng, n * k, 1);
        let fast = kron_block_apply(&a, k, &x).unwrap();
        let slow = kron_identity(&a, k).matmul(&x).unwrap();
        assert!(fast.max_abs_diff(&slow) <= 1e-12 * slow.frobenius_norm());
    }
}

#[test]
fn vectorization_identity_is_exact() {
    let mut rng = RngState::new(13);
    for (m, n, k) in [(3, 5, 2), (6, 4, 4), (1, 7, 3), (8, 8, 1)] {
        let a = integer_mat(&mut rng, m, n);
        let x = integer_mat(&mut rng, n, k);
        let y = a.matmul(&x).unwrap();
        let lhs = stack_rows(&y);
        let rhs = kron_identity(&a, k).matmul(&stack_rows(&x)).unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn vectorization_hand_case() {
    // A = [[1, 2]], X = [[1, 0], [0, 1]] -> Y = [[1, 2]], vec(Yᵀ) = [1, 2].
    let a = Mat::from_rows(&[[1.0, 2.0]]);
    let x = stack_rows(&Mat::identity(2));
    assert_eq!(kron_block_apply(&a, 2, &x).unwrap().as_slice(), &[1.0, 2.0]);
}

fn small_mat(max: usize) -> impl Strategy<Value = Mat> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        proptest::collection::vec(-10.0f64..10.0, r * c)
            .prop_map(move |v| Mat::from_vec(r, c, v).unwrap())
    })
}

proptest! {
    #[test]
    fn stack_unstack_round_trip(x in small_mat(6)) {
        let v = stack_rows(&x);
        prop_assert_eq!(unstack_rows(v.as_slice(), x.rows(), x.cols()).unwrap(), x);
    }

    #[test]
    fn lstsq_residual_is_orthogonal_to_columns(seed in 0u64..10_000, m in 6usize..20, n in 1usize..6) {
        let mut rng = RngState::new(seed);
        let a = gaussian(&mut rng, m, n);
        let y = gaussian(&mut rng, m, 2);
        let r = projection_residual(&a, &y).unwrap();
        let g = a.t_matmul(&r).unwrap();
        prop_assert!(g.frobenius_norm() <= 1e-10 * a.frobenius_norm() * y.frobenius_norm());
    }

    #[test]
    fn top_k_returns_k_largest(scores in proptest::collection::vec(-5.0f64..5.0, 1..30), k in 0usize..10) {
        let idx = top_k_indices(&scores, k);
        prop_assert_eq!(idx.len(), k.min(scores.len()));
        prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        let min_in = idx.iter().map(|&i| scores[i]).fold(f64::INFINITY, f64::min);
        for (i, &s) in scores.iter().enumerate() {
            if !idx.contains(&i) {
                prop_assert!(s <= min_in);
            }
        }
    }

    #[test]
    fn real_stacking_is_a_homomorphism(seed in 0u64..10_000, m in 1usize..5, n in 1usize..5, p in 1usize..5) {
        let mut rng = RngState::new(seed);
        let a = CMat::new(gaussian(&mut rng, m, n), gaussian(&mut rng, m, n)).unwrap();
        let b = CMat::new(gaussian(&mut rng, n, p), gaussian(&mut rng, n, p)).unwrap();
        let lhs = a.matmul(&b).unwrap().to_real_stacked();
        let rhs = a.to_real_stacked().matmul(&b.to_real_stacked()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        // Column stacking sends products to the stacked sensing matrix.
        let lhs = a.matmul(&b).unwrap().stack_columns();
        let rhs = a.to_real_stacked().matmul(&b.stack_columns()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }
}
