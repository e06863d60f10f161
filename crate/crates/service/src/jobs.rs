//! Optimization jobs: one GA run at a time on the blocking pool, progress
//! recorded in a history that SSE subscribers replay and then follow.

use std::collections::HashMap;
use std::ops::ControlFlow;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use dribbleforge_core::document::RunReport;
use dribbleforge_core::evolution::{evolve_with, FitnessConfig, GaConfig, GenerationStats};
use dribbleforge_core::TrajectoryPlan;
use serde::{Deserialize, Serialize};
use tokio::sync::watch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Pending,
    Running,
    Done,
    Cancelled,
    Failed,
}

impl JobStatus {
    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            JobStatus::Done | JobStatus::Cancelled | JobStatus::Failed
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JobConfig {
    pub ga: GaConfig,
    pub fitness: FitnessConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Progress {
    pub generation: Option<usize>,
    pub history: Vec<GenerationStats>,
}

/// Snapshot of a job as served by `GET /api/optimize/{id}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JobDocument {
    pub id: String,
    pub status: JobStatus,
    pub config: JobConfig,
    pub progress: Progress,
    pub result: Option<RunReport>,
    pub error: Option<String>,
}

#[derive(Debug)]
struct JobState {
    status: JobStatus,
    history: Vec<GenerationStats>,
    result: Option<RunReport>,
    error: Option<String>,
}

#[derive(Debug)]
pub struct Job {
    id: String,
    config: JobConfig,
    state: Mutex<JobState>,
    cancel: AtomicBool,
    /// Bumped on every state change; subscribers wait on it.
    changed: watch::Sender<u64>,
}

/// What a subscriber sees next.
#[derive(Debug, Clone, PartialEq)]
pub enum JobEvent {
    Generation(GenerationStats),
    Finished(JobStatus),
}

impl Job {
    fn new(id: String, config: JobConfig) -> Self {
        Self {
            id,
            config,
            state: Mutex::new(JobState {
                status: JobStatus::Pending,
                history: Vec::new(),
                result: None,
                error: None,
            }),
            cancel: AtomicBool::new(false),
            changed: watch::channel(0).0,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn status(&self) -> JobStatus {
        self.lock().status
    }

    pub fn cancel(&self) {
        self.cancel.store(true, Ordering::SeqCst);
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, JobState> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn update(&self, f: impl FnOnce(&mut JobState)) {
        f(&mut self.lock());
        self.changed.send_modify(|v| *v += 1);
    }

    pub fn document(&self) -> JobDocument {
        let st = self.lock();
        JobDocument {
            id: self.id.clone(),
            status: st.status,
            config: self.config,
            progress: Progress {
                generation: st.history.last().map(|h| h.generation),
                history: st.history.clone(),
            },
            result: st.result.clone(),
            error: st.error.clone(),
        }
    }

    /// The event following `cursor` generation events, or `None` if the job
    /// has not produced it yet.
    fn event_at(&self, cursor: usize) -> Option<JobEvent> {
        let st = self.lock();
        if let Some(stats) = st.history.get(cursor) {
            Some(JobEvent::Generation(*stats))
        } else if st.status.is_terminal() {
            Some(JobEvent::Finished(st.status))
        } else {
            None
        }
    }

    /// Waits for the event following `cursor` generation events. Every
    /// generation is delivered exactly once, then a single `Finished`.
    pub async fn next_event(&self, cursor: usize) -> JobEvent {
        let mut rx = self.changed.subscribe();
        loop {
            rx.mark_unchanged();
            if let Some(event) = self.event_at(cursor) {
                return event;
            }
            // the sender lives as long as `self`
            let _ = rx.changed().await;
        }
    }

    fn run(&self, plan: &TrajectoryPlan) {
        self.update(|st| st.status = JobStatus::Running);
        let outcome = evolve_with(plan, &self.config.ga, &self.config.fitness, |stats| {
            self.update(|st| st.history.push(*stats));
            if self.cancel.load(Ordering::SeqCst) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        self.update(|st| match outcome {
            Ok(result) => {
                st.status = if result.cancelled {
                    JobStatus::Cancelled
                } else {
                    JobStatus::Done
                };
                st.result = Some(RunReport::new(
                    &self.config.ga,
                    &self.config.fitness,
                    &result,
                ));
            }
            Err(e) => {
                st.status = JobStatus::Failed;
                st.error = Some(e.to_string());
            }
        });
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubmitError {
    Busy(String),
}

/// All jobs of a server instance. Only one may be unfinished at a time.
#[derive(Debug, Default)]
pub struct JobRegistry {
    jobs: Mutex<HashMap<String, Arc<Job>>>,
    active: Mutex<Option<Arc<Job>>>,
    next_id: AtomicU64,
}

impl JobRegistry {
    pub fn get(&self, id: &str) -> Option<Arc<Job>> {
        self.jobs
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
    }

    /// Registers a job and starts it on the blocking pool. Configs must be
    /// validated by the caller.
    pub fn submit(&self, plan: TrajectoryPlan, config: JobConfig) -> Result<Arc<Job>, SubmitError> {
        let mut active = self.active.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(job) = active.as_ref() {
            if !job.status().is_terminal() {
                return Err(SubmitError::Busy(job.id.clone()));
            }
        }
        let n = self.next_id.fetch_add(1, Ordering::Relaxed) + 1;
        let job = Arc::new(Job::new(format!("job-{n}"), config));
        self.jobs
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(job.id.clone(), job.clone());
        *active = Some(job.clone());
        let worker = job.clone();
        tokio::task::spawn_blocking(move || worker.run(&plan));
        Ok(job)
    }
}
