use std::time::Instant;

/// Per-stage wall-clock timings, printed as a table on stderr.
pub struct Timings {
    enabled: bool,
    stages: Vec<(String, u128, Option<usize>)>,
}

impl Timings {
    pub fn new(enabled: bool) -> Self {
        Self {
            enabled,
            stages: Vec::new(),
        }
    }

    /// Runs `f` as stage `name`; `items` enables the per-item column.
    pub fn stage<T>(&mut self, name: &str, items: Option<usize>, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages
            .push((name.to_string(), start.elapsed().as_micros(), items));
        out
    }

    pub fn report(&self) {
        if !self.enabled {
            return;
        }
        eprintln!("{:<16} {:>12} {:>12}", "stage", "total[us]", "per item[us]");
        for (name, us, items) in &self.stages {
            match items {
                Some(n) if *n > 0 => {
                    eprintln!("{name:<16} {us:>12} {:>12.2}", *us as f64 / *n as f64)
                }
                _ => eprintln!("{name:<16} {us:>12} {:>12}", "-"),
            }
        }
    }
}
