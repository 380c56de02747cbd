use super::C64;

/// Neumaier-compensated complex accumulator (componentwise).
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    re: (f64, f64),
    im: (f64, f64),
}

fn step(acc: &mut (f64, f64), x: f64) {
    let (s, c) = *acc;
    let t = s + x;
    let c = if s.abs() >= x.abs() {
        c + ((s - t) + x)
    } else {
        c + ((x - t) + s)
    };
    *acc = (t, c);
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: C64) {
        step(&mut self.re, z.re);
        step(&mut self.im, z.im);
    }

    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(C64::new(other.re.0, other.im.0));
        self.add(C64::new(other.re.1, other.im.1));
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_lost_by_naive_sum() {
        let mut s = NeumaierSum::new();
        s.add(C64::new(1.0, -1.0));
        for _ in 0..1000 {
            s.add(C64::new(1e-16, 1e-16));
        }
        s.add(C64::new(-1.0, 1.0));
        assert!((s.value() - C64::new(1e-13, 1e-13)).norm() < 1e-26);
    }
}
