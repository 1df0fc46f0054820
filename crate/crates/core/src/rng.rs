//! Deterministic counter-style RNG built on splitmix64.
//!
//! Every random decision in the toolkit draws from a [`RngStream`] derived
//! from `(seed, purpose tag, index)`. Streams never share state, so adding
//! draws to one purpose (say, prop placement) cannot perturb another (object
//! placement) under the same seed. Output is identical across platforms and
//! thread schedules.

use crate::math::Vec3;

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// FNV-1a over the tag bytes; cheap and stable across builds.
#[inline]
fn hash_tag(tag: &str) -> u64 {
    let mut h: u64 = 0xCBF29CE484222325;
    for b in tag.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001B3);
    }
    h
}

/// A sequential stream seeded from `(seed, tag, index)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    pub fn new(seed: u64, tag: &str, index: u64) -> RngStream {
        let mixed = splitmix64(splitmix64(seed ^ hash_tag(tag)) ^ index);
        RngStream { state: mixed }
    }

    /// Derive a child stream without disturbing this one.
    pub fn substream(&self, tag: &str, index: u64) -> RngStream {
        RngStream::new(self.state, tag, index)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = splitmix64(self.state);
        self.state
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.next_f64() * (hi - lo)
    }

    /// Uniform integer in [lo, hi] inclusive.
    pub fn range_u32(&mut self, lo: u32, hi: u32) -> u32 {
        debug_assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + (self.next_u64() % span) as u32
    }

    pub fn index(&mut self, len: usize) -> usize {
        debug_assert!(len > 0);
        (self.next_u64() % len as u64) as usize
    }

    /// Weighted index over non-negative weights summing to > 0.
    pub fn weighted_index(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = self.next_f64() * total;
        for (i, w) in weights.iter().enumerate() {
            u -= w;
            if u < 0.0 {
                return i;
            }
        }
        weights.len() - 1
    }

    /// Uniform point on the unit disc.
    pub fn unit_disc(&mut self) -> (f64, f64) {
        let r = self.next_f64().sqrt();
        let theta = self.next_f64() * std::f64::consts::TAU;
        (r * theta.cos(), r * theta.sin())
    }

    /// Cosine-weighted direction about unit `normal`.
    pub fn cosine_hemisphere(&mut self, normal: Vec3) -> Vec3 {
        let (dx, dy) = self.unit_disc();
        let dz = (1.0 - dx * dx - dy * dy).max(0.0).sqrt();
        let (t, b) = normal.orthonormal_basis();
        (t * dx + b * dy + normal * dz).normalized()
    }

    /// Cosine-weighted direction within a cone of half angle `half_angle`
    /// about unit `axis`. pdf(theta) proportional to cos(theta), normalized
    /// over the cone.
    pub fn cosine_cone(&mut self, axis: Vec3, half_angle: f64) -> Vec3 {
        // Sample sin^2(theta) uniformly in [0, sin^2(half_angle)].
        let s2_max = half_angle.sin().powi(2);
        let s2 = self.next_f64() * s2_max;
        let cos_theta = (1.0 - s2).max(0.0).sqrt();
        let sin_theta = s2.sqrt();
        let phi = self.next_f64() * std::f64::consts::TAU;
        let (t, b) = axis.orthonormal_basis();
        (t * (sin_theta * phi.cos()) + b * (sin_theta * phi.sin()) + axis * cos_theta).normalized()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_keys_give_identical_sequences() {
        let mut a = RngStream::new(7, "objects", 3);
        let mut b = RngStream::new(7, "objects", 3);
        for _ in 0..64 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_tags_give_distinct_sequences() {
        let mut a = RngStream::new(7, "objects", 0);
        let mut b = RngStream::new(7, "props", 0);
        let same = (0..16).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn f64_in_unit_interval() {
        let mut s = RngStream::new(123, "t", 0);
        for _ in 0..10_000 {
            let v = s.next_f64();
            assert!((0.0..1.0).contains(&v));
        }
    }

    #[test]
    fn range_u32_uniform_enough() {
        let mut s = RngStream::new(42, "counts", 0);
        let mut hist = [0u32; 5];
        for _ in 0..10_000 {
            hist[(s.range_u32(3, 7) - 3) as usize] += 1;
        }
        for h in hist {
            // 2000 expected; 5 sigma is about 200.
            assert!((1700..=2300).contains(&h), "hist {hist:?}");
        }
    }

    #[test]
    fn cosine_cone_stays_in_cone() {
        let mut s = RngStream::new(1, "cone", 0);
        let axis = vec3(0.0, 0.0, -1.0);
        let half = 0.3;
        for _ in 0..2_000 {
            let d = s.cosine_cone(axis, half);
            assert!(d.dot(axis) >= half.cos() - 1e-9);
            assert!((d.length() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unit_disc_within_radius() {
        let mut s = RngStream::new(9, "disc", 0);
        for _ in 0..2_000 {
            let (x, y) = s.unit_disc();
            assert!(x * x + y * y <= 1.0 + 1e-12);
        }
    }
}
