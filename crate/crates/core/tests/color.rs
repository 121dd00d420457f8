use leafid::color::{channel_moments, color_moments, ChannelMoments};
use leafid::imaging::{LeafMask, RgbImage};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn same_shape(a: &ChannelMoments, b: &ChannelMoments, tol: f64) -> bool {
    close(a.skewness, b.skewness, tol) && close(a.kurtosis, b.kurtosis, tol)
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..200.0f64, 2..60)
}

proptest! {
    #[test]
    fn moments_ignore_order(values in sample(), seed in any::<u64>()) {
        let mut shuffled = values.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let (a, b) = (channel_moments(&values), channel_moments(&shuffled));
        prop_assert!(close(a.mean, b.mean, 1e-12));
        prop_assert!(close(a.std, b.std, 1e-12));
        prop_assert!(same_shape(&a, &b, 1e-12));
    }

    #[test]
    fn shifting_moves_only_the_mean(values in sample(), k in -50.0..50.0f64) {
        let shifted: Vec<f64> = values.iter().map(|v| v + k).collect();
        let (a, b) = (channel_moments(&values), channel_moments(&shifted));
        prop_assert!((b.mean - a.mean - k).abs() <= 1e-9 * a.mean.abs().max(1.0));
        prop_assert!(close(a.std, b.std, 1e-9));
        prop_assert!(a.std < 1e-6 || same_shape(&a, &b, 1e-9));
    }

    #[test]
    fn scaling_scales_mean_and_spread(values in sample(), s in 0.1..5.0f64) {
        let scaled: Vec<f64> = values.iter().map(|v| v * s).collect();
        let (a, b) = (channel_moments(&values), channel_moments(&scaled));
        prop_assert!(close(b.mean, s * a.mean, 1e-9));
        prop_assert!(close(b.std, s * a.std, 1e-9));
        prop_assert!(a.std < 1e-6 || same_shape(&a, &b, 1e-9));
    }

    #[test]
    fn two_point_distribution_has_kurtosis_minus_two(a in -100.0..100.0f64, d in 0.5..50.0f64, n in 1usize..20) {
        let mut values = vec![a - d; n];
        values.extend(std::iter::repeat_n(a + d, n));
        let m = channel_moments(&values);
        prop_assert!((m.kurtosis + 2.0).abs() <= 1e-9);
        prop_assert!(m.skewness.abs() <= 1e-9);
        prop_assert!((m.std - d).abs() <= 1e-9 * d.max(1.0));
    }

    #[test]
    fn pixel_shuffle_inside_mask_keeps_image_moments(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = LeafMask::from_fn(16, 16, |x, y| (3..13).contains(&x) && (2..14).contains(&y)).unwrap();
        let img = RgbImage::from_fn(16, 16, |x, y| [(x * 13 + y * 7) as u8, (x * y) as u8, (200 - x * 5) as u8]);
        let inside: Vec<(usize, usize)> = mask.pixels().collect();
        let mut order = inside.clone();
        order.shuffle(&mut rng);
        let mut moved = vec![[0u8; 3]; 256];
        for (y, row) in moved.chunks_mut(16).enumerate() {
            for (x, px) in row.iter_mut().enumerate() {
                *px = img.get(x, y);
            }
        }
        for (dst, src) in inside.iter().zip(&order) {
            moved[dst.1 * 16 + dst.0] = img.get(src.0, src.1);
        }
        let moved = RgbImage::new(16, 16, moved).unwrap();
        let (a, b) = (color_moments(&img, &mask, false).unwrap(), color_moments(&moved, &mask, false).unwrap());
        for (p, q) in a.channels().iter().zip(b.channels().iter()) {
            prop_assert!(close(p.mean, q.mean, 1e-12) && close(p.std, q.std, 1e-12) && same_shape(p, q, 1e-12));
        }
    }
}

#[test]
fn mask_selects_leaf_pixels() {
    let mask = LeafMask::from_fn(10, 10, |x, _| x < 5).unwrap();
    let img = RgbImage::from_fn(10, 10, |x, _| if x < 5 { [10, 20, 30] } else { [250, 250, 250] });
    let leaf = color_moments(&img, &mask, false).unwrap();
    assert_eq!(leaf.means(), [10.0, 20.0, 30.0]);
    assert_eq!(leaf.stds(), [0.0; 3]);
    assert_eq!(leaf.kurtoses(), [0.0; 3]);
    let whole = color_moments(&img, &mask, true).unwrap();
    assert_eq!(whole.means(), [130.0, 135.0, 140.0]);
    assert!(whole.kurtoses().iter().all(|k| (k + 2.0).abs() < 1e-12));
}
