/// Cycle model of the equalizer pipeline.
///
/// One receive vector takes `cycles_per_vector` cycles, and each coherence
/// block adds `idle_cycles` of preprocessing during which the equalizer
/// waits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingModel {
    pub cycles_per_vector: f64,
    pub idle_cycles: f64,
}

impl TimingModel {
    /// `cycles_per_vector = U`, `idle_cycles = B + U`.
    pub fn for_dims(b: usize, u: usize) -> Self {
        Self {
            cycles_per_vector: u as f64,
            idle_cycles: (b + u) as f64,
        }
    }

    /// Bits per second at `T` transmissions per coherence block.
    pub fn throughput(&self, t: f64, order: usize, u: usize, f_clk: f64) -> f64 {
        let bits = (order as f64).log2() * u as f64;
        t / (self.cycles_per_vector * t + self.idle_cycles) * bits * f_clk
    }

    pub fn asymptotic_throughput(&self, order: usize, u: usize, f_clk: f64) -> f64 {
        (order as f64).log2() * u as f64 * f_clk / self.cycles_per_vector
    }

    /// Fraction of cycles the equalizer is busy.
    pub fn utilization(&self, t: f64) -> f64 {
        t / (t + self.idle_cycles / self.cycles_per_vector)
    }
}

impl Default for TimingModel {
    fn default() -> Self {
        Self::for_dims(128, 16)
    }
}

/// Throughput of the 128x16 design.
pub fn throughput(t: f64, order: usize, u: usize, f_clk: f64) -> f64 {
    TimingModel::default().throughput(t, order, u, f_clk)
}

/// Utilization of the 128x16 design.
pub fn utilization(t: f64) -> f64 {
    TimingModel::default().utilization(t)
}
