use rand::Rng;
use rand_distr::StandardNormal;

/// Discrete Ornstein-Uhlenbeck process used for temporally correlated
/// exploration: `x <- x + theta * (mu - x) + sigma * z`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuNoise {
    pub theta: f64,
    pub mu: f64,
    pub sigma: f64,
    /// Multiplies `sigma` once per episode.
    pub sigma_decay: f64,
    pub x: f64,
}

impl Default for OuNoise {
    fn default() -> Self {
        Self::new(0.15, 0.0, 0.2, 0.995)
    }
}

impl OuNoise {
    pub fn new(theta: f64, mu: f64, sigma: f64, sigma_decay: f64) -> Self {
        Self {
            theta,
            mu,
            sigma,
            sigma_decay,
            x: mu,
        }
    }

    /// Advances the process with a standard normal draw from `rng`.
    pub fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.step_with(z)
    }

    /// Advances the process with an externally supplied draw.
    pub fn step_with(&mut self, z: f64) -> f64 {
        self.x += self.theta * (self.mu - self.x) + self.sigma * z;
        self.x
    }

    pub fn reset(&mut self) {
        self.x = self.mu;
    }

    pub fn decay(&mut self) {
        self.sigma *= self.sigma_decay;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deterministic_decay_toward_mean() {
        let mut n = OuNoise::new(0.15, 0.0, 0.0, 1.0);
        n.x = 1.0;
        assert!((n.step_with(0.7) - 0.85).abs() < 1e-15);
    }

    #[test]
    fn injected_draw() {
        let mut n = OuNoise::new(0.15, 0.0, 0.2, 1.0);
        assert!((n.step_with(1.5) - 0.30).abs() < 1e-15);
    }

    #[test]
    fn frozen_process_is_a_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut n = OuNoise::new(0.0, 0.0, 0.0, 1.0);
        n.x = 0.42;
        for _ in 0..1000 {
            assert_eq!(n.next(&mut rng), 0.42);
        }
    }

    #[test]
    fn reset_and_decay() {
        let mut n = OuNoise::default();
        n.step_with(2.0);
        n.reset();
        assert_eq!(n.x, 0.0);
        n.decay();
        assert!((n.sigma - 0.2 * 0.995).abs() < 1e-15);
    }
}
