//! Run reports: per-task status plus the measured verification numbers and
//! an echo of every tolerance that was actually used.

use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub enum TaskOutcome {
    Ran { detail: String },
    Checked { value: f64, limit: f64, detail: String },
    Failed { error: String },
}

#[derive(Debug, Clone)]
pub struct TaskReport {
    pub task: String,
    pub outcome: TaskOutcome,
}

impl TaskReport {
    pub fn passed(&self) -> bool {
        match &self.outcome {
            TaskOutcome::Ran { .. } => true,
            TaskOutcome::Checked { value, limit, .. } => value <= limit,
            TaskOutcome::Failed { .. } => false,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub scenario: String,
    pub tasks: Vec<TaskReport>,
    pub config_echo: Vec<(String, String)>,
    pub outputs: Vec<String>,
    pub wall_seconds: f64,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.tasks.iter().all(|t| t.passed())
    }

    pub fn push_ran(&mut self, task: &str, detail: String) {
        self.tasks.push(TaskReport {
            task: task.into(),
            outcome: TaskOutcome::Ran { detail },
        });
    }

    pub fn push_checked(&mut self, task: &str, value: f64, limit: f64, detail: String) {
        self.tasks.push(TaskReport {
            task: task.into(),
            outcome: TaskOutcome::Checked {
                value,
                limit,
                detail,
            },
        });
    }

    pub fn push_failed(&mut self, task: &str, error: String) {
        self.tasks.push(TaskReport {
            task: task.into(),
            outcome: TaskOutcome::Failed { error },
        });
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}", self.scenario);
        let _ = writeln!(out, "configuration:");
        for (k, v) in &self.config_echo {
            let _ = writeln!(out, "  {k} = {v}");
        }
        let _ = writeln!(out, "tasks:");
        for t in &self.tasks {
            match &t.outcome {
                TaskOutcome::Ran { detail } => {
                    let _ = writeln!(out, "  [ok]   {}: {detail}", t.task);
                }
                TaskOutcome::Checked {
                    value,
                    limit,
                    detail,
                } => {
                    let status = if value <= limit { "ok" } else { "FAIL" };
                    let _ = writeln!(
                        out,
                        "  [{status}] {}: {detail} = {value:.6e} (threshold {limit:.1e})",
                        t.task
                    );
                }
                TaskOutcome::Failed { error } => {
                    let _ = writeln!(out, "  [FAIL] {}: {error}", t.task);
                }
            }
        }
        if !self.outputs.is_empty() {
            let _ = writeln!(out, "outputs:");
            for o in &self.outputs {
                let _ = writeln!(out, "  {o}");
            }
        }
        let _ = writeln!(out, "wall time: {:.3}s", self.wall_seconds);
        let _ = writeln!(
            out,
            "status: {}",
            if self.all_passed() { "PASS" } else { "FAIL" }
        );
        out
    }
}
