/// Euclidean projection onto the probability simplex (sort-and-threshold).
pub fn project_onto_simplex(v: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if s - candidate > 0.0 {
            threshold = candidate;
        }
    }
    v.iter().map(|&x| (x - threshold).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn points_on_the_simplex_are_fixed() {
        let p = [0.2, 0.5, 0.3];
        let q = project_onto_simplex(&p);
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn known_projections() {
        assert_eq!(project_onto_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        assert_eq!(project_onto_simplex(&[0.5, 0.5, -3.0]), vec![0.5, 0.5, 0.0]);
        assert_eq!(project_onto_simplex(&[1.0, 1.0]), vec![0.5, 0.5]);
    }

    proptest! {
        // KKT check: the projection is feasible and v - proj is a constant on
        // the support and no larger than that constant off it.
        #[test]
        fn projection_satisfies_optimality(v in prop::collection::vec(-5.0f64..5.0, 1..12)) {
            let p = project_onto_simplex(&v);
            let sum: f64 = p.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            let tau = v.iter().zip(&p).find(|(_, &x)| x > 0.0).map(|(a, b)| a - b).unwrap();
            for (a, b) in v.iter().zip(&p) {
                if *b > 0.0 {
                    prop_assert!((a - b - tau).abs() < 1e-9);
                } else {
                    prop_assert!(*a <= tau + 1e-9);
                }
            }
        }
    }
}
