use std::ops::Range;

use serde::Serialize;

use crate::linalg::FlopCounter;

/// One labelled matrix shipped at a phase boundary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Emission {
    pub label: String,
    pub elements: u64,
    /// Broadcasts are booked once; `fanout` records how many workers receive it.
    pub fanout: u64,
}

/// A synchronous phase: per-worker and driver flops plus the data it emits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Phase {
    pub name: String,
    pub worker_flops: Vec<FlopCounter>,
    pub driver_flops: FlopCounter,
    pub emitted: Vec<Emission>,
}

impl Phase {
    pub fn flops(&self) -> u64 {
        self.driver_flops.total()
            + self
                .worker_flops
                .iter()
                .map(FlopCounter::total)
                .sum::<u64>()
    }

    pub fn worker_flops_total(&self) -> u64 {
        self.worker_flops.iter().map(FlopCounter::total).sum()
    }

    pub fn emitted_elements(&self) -> u64 {
        self.emitted.iter().map(|e| e.elements).sum()
    }

    /// Elements counting each broadcast once per receiving worker.
    pub fn fanout_elements(&self) -> u64 {
        self.emitted.iter().map(|e| e.elements * e.fanout).sum()
    }

    /// Elements emitted under `label`.
    pub fn emitted_as(&self, label: &str) -> u64 {
        self.emitted
            .iter()
            .filter(|e| e.label == label)
            .map(|e| e.elements)
            .sum()
    }
}

/// Execution context the PCA methods run against.
///
/// Workers own consecutive row blocks of the input. Methods open phases, charge
/// flops to a worker or the driver, and declare what they ship. Reductions are
/// chained through the workers in id order, so the arithmetic is the same for
/// every partition and a single-block context reproduces the in-memory result.
#[derive(Debug)]
pub struct Exec {
    parts: Vec<Range<usize>>,
    phases: Vec<Phase>,
}

impl Exec {
    pub fn new(parts: Vec<Range<usize>>) -> Self {
        Exec {
            parts,
            phases: Vec::new(),
        }
    }

    /// One worker holding all `n` rows.
    pub fn single(n: usize) -> Self {
        Exec::new(std::iter::once(0..n).collect())
    }

    pub fn workers(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Range<usize>] {
        &self.parts
    }

    pub fn part(&self, w: usize) -> Range<usize> {
        self.parts[w].clone()
    }

    pub fn begin(&mut self, name: impl Into<String>) {
        self.phases.push(Phase {
            name: name.into(),
            worker_flops: vec![FlopCounter::new(); self.parts.len()],
            driver_flops: FlopCounter::new(),
            emitted: Vec::new(),
        });
    }

    fn current(&mut self) -> &mut Phase {
        self.phases.last_mut().expect("no phase open")
    }

    pub fn worker(&mut self, w: usize) -> &mut FlopCounter {
        &mut self.current().worker_flops[w]
    }

    pub fn driver(&mut self) -> &mut FlopCounter {
        &mut self.current().driver_flops
    }

    /// Partitions together with the current phase's worker counters.
    pub fn split(&mut self) -> (&[Range<usize>], &mut [FlopCounter]) {
        let phase = self.phases.last_mut().expect("no phase open");
        (&self.parts, &mut phase.worker_flops)
    }

    /// Point-to-point or gathered data.
    pub fn emit(&mut self, label: &str, elements: u64) {
        self.push(label, elements, 1);
    }

    /// Data sent from the driver to every worker.
    pub fn broadcast(&mut self, label: &str, elements: u64) {
        let p = self.parts.len() as u64;
        self.push(label, elements, p);
    }

    fn push(&mut self, label: &str, elements: u64, fanout: u64) {
        let phase = self.current();
        if let Some(e) = phase
            .emitted
            .iter_mut()
            .find(|e| e.label == label && e.fanout == fanout)
        {
            e.elements += elements;
        } else {
            phase.emitted.push(Emission {
                label: label.to_string(),
                elements,
                fanout,
            });
        }
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn into_phases(self) -> Vec<Phase> {
        self.phases
    }
}
