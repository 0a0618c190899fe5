/// Recording times `floor(T^(k/m))` for `k = 1..=m`, deduplicated and
/// always ending at `T`.
pub fn geometric_grid(horizon: u64, points: usize) -> Vec<u64> {
    assert!(horizon >= 1 && points >= 1);
    let tf = horizon as f64;
    let mut grid: Vec<u64> = (1..=points)
        .map(|k| {
            let v = tf.powf(k as f64 / points as f64);
            // Exact powers (10^6 at k/m = 1/3, say) may land a hair below the integer.
            let r = v.round();
            let t = if (v - r).abs() <= 1e-9 * r { r } else { v.floor() };
            (t as u64).clamp(1, horizon)
        })
        .collect();
    grid.dedup();
    if grid.last() != Some(&horizon) {
        grid.push(horizon);
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decades() {
        assert_eq!(
            geometric_grid(1_000_000, 6),
            vec![10, 100, 1000, 10_000, 100_000, 1_000_000]
        );
        assert_eq!(geometric_grid(10, 4), vec![1, 3, 5, 10]);
        assert_eq!(geometric_grid(1, 5), vec![1]);
    }

    proptest! {
        #[test]
        fn grid_is_strictly_increasing_and_ends_at_horizon(t in 1u64..10_000_000, m in 1usize..200) {
            let g = geometric_grid(t, m);
            prop_assert_eq!(*g.last().unwrap(), t);
            prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
            for &s in &g {
                // Each point is floor(T^(k/m)) for some k, up to the rounding guard.
                let ok = (1..=m).any(|k| {
                    let v = (t as f64).powf(k as f64 / m as f64);
                    s == v.floor() as u64 || s == v.round() as u64
                });
                prop_assert!(ok, "{} not on grid", s);
            }
        }
    }
}
