use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::archetype::SystemArchetype;
use super::SimError;

/// How the frame's work is split across tiles.
#[derive(Clone, Debug, PartialEq)]
pub enum Strategy {
    Uniform,
    Weighted(Vec<f64>),
}

/// One frame's worth of work, cut into tiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderJob {
    /// Seconds one reference CPU needs for the whole frame.
    pub total_work_s_ref: f64,
    pub tile_count: usize,
    pub bytes_per_tile_result: f64,
    /// Fraction of the frame in each tile; sums to 1.
    pub work_split: Vec<f64>,
    /// Scene data each worker must receive before it can start, in bytes.
    #[serde(default)]
    pub geometry_bytes_per_worker: f64,
}

const SPLIT_TOLERANCE: f64 = 1e-9;

/// Splits `job_work_s` reference-CPU seconds into `tile_count` tiles.
pub fn decompose(job_work_s: f64, tile_count: usize, strategy: Strategy) -> Result<RenderJob, SimError> {
    if tile_count == 0 {
        return Err(SimError::InvalidArgument("tile_count must be >= 1".into()));
    }
    if !(job_work_s.is_finite() && job_work_s > 0.0) {
        return Err(SimError::InvalidArgument(format!("job work must be finite and > 0, got {job_work_s}")));
    }
    let work_split = match strategy {
        Strategy::Uniform => vec![1.0 / tile_count as f64; tile_count],
        Strategy::Weighted(fractions) => {
            if fractions.len() != tile_count {
                return Err(SimError::InvalidArgument(format!(
                    "{} fractions given for {tile_count} tiles",
                    fractions.len()
                )));
            }
            validate_split(&fractions)?;
            fractions
        }
    };
    Ok(RenderJob {
        total_work_s_ref: job_work_s,
        tile_count,
        bytes_per_tile_result: 0.0,
        work_split,
        geometry_bytes_per_worker: 0.0,
    })
}

fn validate_split(fractions: &[f64]) -> Result<(), SimError> {
    if fractions.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
        return Err(SimError::InvalidArgument("tile fractions must be finite and >= 0".into()));
    }
    let sum: f64 = fractions.iter().sum();
    if (sum - 1.0).abs() > SPLIT_TOLERANCE {
        return Err(SimError::InvalidArgument(format!("tile fractions sum to {sum}, not 1")));
    }
    Ok(())
}

impl RenderJob {
    pub fn with_result_bytes(mut self, bytes: f64) -> Self {
        self.bytes_per_tile_result = bytes;
        self
    }

    pub fn with_geometry_bytes(mut self, bytes: f64) -> Self {
        self.geometry_bytes_per_worker = bytes;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.tile_count == 0 || self.work_split.len() != self.tile_count {
            return Err(SimError::InvalidArgument("work_split must have one entry per tile".into()));
        }
        if !(self.total_work_s_ref.is_finite() && self.total_work_s_ref > 0.0) {
            return Err(SimError::InvalidArgument("total_work_s_ref must be finite and > 0".into()));
        }
        for (name, v) in [
            ("bytes_per_tile_result", self.bytes_per_tile_result),
            ("geometry_bytes_per_worker", self.geometry_bytes_per_worker),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SimError::InvalidArgument(format!("{name} must be finite and >= 0")));
            }
        }
        validate_split(&self.work_split)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// Scene data arrived; the worker may start computing.
    GeometryReceived,
    ComputeStart {
        tile: usize,
    },
    /// Tile finished; its result is put on the wire.
    ComputeEnd {
        tile: usize,
    },
    /// Result reached the master and waits to be ingested.
    Arrived {
        tile: usize,
    },
    ReceiveStart {
        tile: usize,
    },
    ReceiveEnd {
        tile: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub time: f64,
    pub worker: usize,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub frame_time_s: f64,
    pub achieved_fps: f64,
    /// Reference-equivalent peak of the whole machine (GPU speedup included).
    pub peak_tflops: f64,
    pub sustained_tflops: f64,
    pub efficiency: f64,
    pub workers: usize,
    /// Compute seconds spent by each active worker.
    pub worker_busy_s: Vec<f64>,
    pub event_log: Vec<SimEvent>,
}

/// Pending event in the queue: ordered by time, then worker, then insertion.
#[derive(Debug)]
struct Pending {
    time: f64,
    worker: usize,
    seq: u64,
    action: Action,
}

#[derive(Clone, Copy, Debug)]
enum Action {
    WorkerReady,
    TileDone { tile: usize },
    TileArrived { tile: usize },
    ReceiveBegin { tile: usize },
    TileIngested { tile: usize },
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    // Reversed: BinaryHeap is a max-heap and we pop the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.worker.cmp(&self.worker))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Queue {
    heap: BinaryHeap<Pending>,
    seq: u64,
}

impl Queue {
    fn push(&mut self, time: f64, worker: usize, action: Action) {
        self.seq += 1;
        self.heap.push(Pending { time, worker, seq: self.seq, action });
    }
}

/// Simulates one frame of `job` on `arch`.
///
/// Tiles go round-robin to `min(node_count, tile_count)` workers, which
/// compute their tiles back to back. A tile of fraction `f` takes
/// `f * total_work_s_ref * ref_gflops / (gflops_per_node * gpu_render_speedup)`
/// seconds. Each finished tile is sent to a master immediately (sends do not
/// block the worker) and arrives `link_latency_s` later; the master ingests
/// arrivals one at a time in arrival order, each taking
/// `bytes_per_tile_result / bandwidth_bytes_per_s`. The frame is done when the
/// last tile has been ingested.
///
/// When `geometry_bytes_per_worker > 0` the master first sends the scene to
/// each worker in turn; a worker starts once its copy has arrived.
pub fn simulate_frame(arch: &SystemArchetype, job: &RenderJob, ref_gflops: f64) -> Result<SimResult, SimError> {
    arch.validate()?;
    job.validate()?;
    if !(ref_gflops.is_finite() && ref_gflops > 0.0) {
        return Err(SimError::InvalidArgument("ref_gflops must be finite and > 0".into()));
    }

    let workers = (arch.node_count.min(job.tile_count as u64)) as usize;
    let mut assignments: Vec<Vec<usize>> = vec![Vec::new(); workers];
    for tile in 0..job.tile_count {
        assignments[tile % workers].push(tile);
    }
    let mut next_slot = vec![0usize; workers];
    let speed_ratio = ref_gflops / (arch.gflops_per_node * arch.gpu_render_speedup);
    let transfer_s = job.bytes_per_tile_result / arch.bandwidth_bytes_per_s;

    let mut queue = Queue { heap: BinaryHeap::new(), seq: 0 };
    let mut log = Vec::with_capacity(job.tile_count * 5 + workers);
    let mut busy = vec![0.0; workers];

    if job.geometry_bytes_per_worker > 0.0 {
        let send_s = job.geometry_bytes_per_worker / arch.bandwidth_bytes_per_s;
        let mut master_free = 0.0;
        for w in 0..workers {
            master_free += send_s;
            queue.push(master_free + arch.link_latency_s, w, Action::WorkerReady);
        }
    } else {
        for w in 0..workers {
            queue.push(0.0, w, Action::WorkerReady);
        }
    }

    let mut master_free = 0.0_f64;
    let mut frame_time = 0.0_f64;

    let mut start_next = |w: usize, now: f64, queue: &mut Queue, log: &mut Vec<SimEvent>, busy: &mut [f64]| {
        if let Some(&tile) = assignments[w].get(next_slot[w]) {
            next_slot[w] += 1;
            let compute = job.work_split[tile] * job.total_work_s_ref * speed_ratio;
            busy[w] += compute;
            log.push(SimEvent { time: now, worker: w, kind: EventKind::ComputeStart { tile } });
            queue.push(now + compute, w, Action::TileDone { tile });
        }
    };

    while let Some(ev) = queue.heap.pop() {
        let (now, w) = (ev.time, ev.worker);
        match ev.action {
            Action::WorkerReady => {
                if job.geometry_bytes_per_worker > 0.0 {
                    log.push(SimEvent { time: now, worker: w, kind: EventKind::GeometryReceived });
                }
                start_next(w, now, &mut queue, &mut log, &mut busy);
            }
            Action::TileDone { tile } => {
                log.push(SimEvent { time: now, worker: w, kind: EventKind::ComputeEnd { tile } });
                queue.push(now + arch.link_latency_s, w, Action::TileArrived { tile });
                start_next(w, now, &mut queue, &mut log, &mut busy);
            }
            Action::TileArrived { tile } => {
                log.push(SimEvent { time: now, worker: w, kind: EventKind::Arrived { tile } });
                let start = now.max(master_free);
                master_free = start + transfer_s;
                queue.push(start, w, Action::ReceiveBegin { tile });
            }
            Action::ReceiveBegin { tile } => {
                log.push(SimEvent { time: now, worker: w, kind: EventKind::ReceiveStart { tile } });
                queue.push(now + transfer_s, w, Action::TileIngested { tile });
            }
            Action::TileIngested { tile } => {
                log.push(SimEvent { time: now, worker: w, kind: EventKind::ReceiveEnd { tile } });
                frame_time = frame_time.max(now);
            }
        }
    }

    if frame_time.is_nan() || frame_time <= 0.0 {
        return Err(SimError::InvalidArgument("frame completed in zero time".into()));
    }
    let peak_tflops = arch.effective_peak_tflops();
    let sustained_tflops = job.total_work_s_ref * ref_gflops / 1000.0 / frame_time;
    Ok(SimResult {
        frame_time_s: frame_time,
        achieved_fps: 1.0 / frame_time,
        peak_tflops,
        sustained_tflops,
        efficiency: (sustained_tflops / peak_tflops).min(1.0),
        workers,
        worker_busy_s: busy,
        event_log: log,
    })
}
