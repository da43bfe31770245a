//! Flat `key = value` scenario configs: one scenario per file, grouped into
//! `[section]` blocks. Parse errors carry the line number.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use liesys::models::SystemKey;
use liesys::weinorman::{Channel, ControlSignal, CubicSpline};

/// What a scenario file describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Control(SystemKey),
    LinearPotentialClassical,
    LinearPotentialQuantum,
}

impl ModelKind {
    pub fn parse(s: &str) -> Option<ModelKind> {
        if let Some(key) = SystemKey::parse(s) {
            return Some(ModelKind::Control(key));
        }
        match s {
            "linear-potential-classical" => Some(ModelKind::LinearPotentialClassical),
            "linear-potential-quantum" => Some(ModelKind::LinearPotentialQuantum),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            ModelKind::Control(k) => k.name(),
            ModelKind::LinearPotentialClassical => "linear-potential-classical".into(),
            ModelKind::LinearPotentialQuantum => "linear-potential-quantum".into(),
        }
    }

    pub fn known_keys() -> Vec<String> {
        let mut keys: Vec<String> = SystemKey::all().iter().map(|k| k.name()).collect();
        keys.push("linear-potential-classical".into());
        keys.push("linear-potential-quantum".into());
        keys
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Direct,
    WeiNorman,
    Compare,
    Reduce,
    Controllability,
    QuantumEvolve,
}

impl Task {
    fn parse(s: &str) -> Option<Task> {
        Some(match s {
            "direct" => Task::Direct,
            "weinorman" => Task::WeiNorman,
            "compare" => Task::Compare,
            "reduce" => Task::Reduce,
            "controllability" => Task::Controllability,
            "quantum-evolve" => Task::QuantumEvolve,
            _ => return None,
        })
    }

}

/// Verification thresholds; violations flip the exit status.
#[derive(Debug, Clone, Copy)]
pub struct Thresholds {
    pub compare: f64,
    pub residual: f64,
    pub drift: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            compare: 1e-6,
            residual: 1e-6,
            drift: 1e-8,
        }
    }
}

/// Wavefunction-grid parameters for the quantum model.
#[derive(Debug, Clone, Copy)]
pub struct QuantumSetup {
    pub grid_points: usize,
    pub p_max: f64,
    pub mean: f64,
    pub sigma: f64,
}

impl Default for QuantumSetup {
    fn default() -> Self {
        QuantumSetup {
            grid_points: 2048,
            p_max: 20.0,
            mean: 0.0,
            sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub model: ModelKind,
    pub t_end: f64,
    pub samples: usize,
    pub tol: f64,
    pub initial: Vec<f64>,
    pub mass: f64,
    pub leg_mass: f64,
    pub controls: ControlSignal,
    pub tasks: Vec<Task>,
    pub thresholds: Thresholds,
    pub quantum: QuantumSetup,
    pub out_dir: String,
    pub prefix: String,
    pub wrap_angles: bool,
    /// 0-based generator indices for the controllability task.
    pub generators: Vec<usize>,
}

struct RawItem {
    line: usize,
    value: String,
    continuation: Vec<(usize, String)>,
}

type Sections = BTreeMap<String, BTreeMap<String, RawItem>>;

fn split_sections(text: &str) -> Result<Sections> {
    let mut sections: Sections = BTreeMap::new();
    let mut current = String::new();
    let mut last_key: Option<(String, String)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let stripped = raw.split('#').next().unwrap_or("");
        if stripped.trim().is_empty() {
            continue;
        }
        let indented = stripped.starts_with(' ') || stripped.starts_with('\t');
        let content = stripped.trim();
        if content.starts_with('[') {
            if !content.ends_with(']') {
                bail!("line {line_no}: unterminated section header `{content}`");
            }
            current = content[1..content.len() - 1].trim().to_string();
            sections.entry(current.clone()).or_default();
            last_key = None;
        } else if indented {
            let Some((sec, key)) = &last_key else {
                bail!("line {line_no}: continuation line without a preceding key");
            };
            sections
                .get_mut(sec)
                .and_then(|m| m.get_mut(key))
                .expect("tracked key exists")
                .continuation
                .push((line_no, content.to_string()));
        } else {
            let Some((key, value)) = content.split_once('=') else {
                bail!("line {line_no}: expected `key = value`, got `{content}`");
            };
            if current.is_empty() {
                bail!("line {line_no}: key `{}` outside any [section]", key.trim());
            }
            let key = key.trim().to_string();
            sections.entry(current.clone()).or_default().insert(
                key.clone(),
                RawItem {
                    line: line_no,
                    value: value.trim().to_string(),
                    continuation: Vec::new(),
                },
            );
            last_key = Some((current.clone(), key));
        }
    }
    Ok(sections)
}

fn parse_channel(item: &RawItem, field: &str) -> Result<Channel> {
    let fields: Vec<&str> = item.value.split_whitespace().collect();
    let line = item.line;
    let numeric = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| anyhow!("line {line}: field `{field}`: bad number `{s}`"))
    };
    match fields.first().copied() {
        Some("zero") => Ok(Channel::Zero),
        Some("constant") => {
            let c = fields
                .get(1)
                .ok_or_else(|| anyhow!("line {line}: `constant` needs a value"))?;
            Ok(Channel::Constant(numeric(c)?))
        }
        Some("sin") => {
            if fields.len() < 3 || fields.len() > 4 {
                bail!("line {line}: `sin` needs amplitude omega [phase]");
            }
            Ok(Channel::Sin {
                amp: numeric(fields[1])?,
                omega: numeric(fields[2])?,
                phase: fields.get(3).map(|s| numeric(s)).transpose()?.unwrap_or(0.0),
            })
        }
        Some("cos") => {
            if fields.len() != 3 {
                bail!("line {line}: `cos` needs amplitude omega");
            }
            Ok(Channel::Cos {
                amp: numeric(fields[1])?,
                omega: numeric(fields[2])?,
            })
        }
        Some("poly") => {
            let coeffs: Vec<f64> = fields[1..]
                .iter()
                .map(|s| numeric(s))
                .collect::<Result<_>>()?;
            if coeffs.is_empty() {
                bail!("line {line}: `poly` needs at least one coefficient");
            }
            Ok(Channel::Poly(coeffs))
        }
        Some("table") => {
            let mut ts = Vec::new();
            let mut ys = Vec::new();
            for (cline, row) in &item.continuation {
                let cols: Vec<&str> = row.split_whitespace().collect();
                if cols.len() != 2 {
                    bail!("line {cline}: table rows are `t value`");
                }
                ts.push(
                    cols[0]
                        .parse()
                        .map_err(|_| anyhow!("line {cline}: bad time `{}`", cols[0]))?,
                );
                ys.push(
                    cols[1]
                        .parse()
                        .map_err(|_| anyhow!("line {cline}: bad value `{}`", cols[1]))?,
                );
            }
            let spline = CubicSpline::new(ts, ys)
                .map_err(|e| anyhow!("line {line}: field `{field}`: {e}"))?;
            Ok(Channel::Sampled(spline))
        }
        Some(other) => bail!(
            "line {line}: field `{field}`: unknown channel kind `{other}` \
             (expected zero|constant|sin|cos|poly|table)"
        ),
        None => bail!("line {line}: field `{field}` is empty"),
    }
}

pub fn parse(text: &str) -> Result<ScenarioConfig> {
    let sections = split_sections(text)?;
    let scenario = sections
        .get("scenario")
        .ok_or_else(|| anyhow!("missing [scenario] section"))?;

    let get = |sec: &str, key: &str| -> Option<&RawItem> { sections.get(sec).and_then(|m| m.get(key)) };
    let req = |key: &str| -> Result<&RawItem> {
        scenario
            .get(key)
            .ok_or_else(|| anyhow!("[scenario] is missing field `{key}`"))
    };
    let num = |item: &RawItem, field: &str| -> Result<f64> {
        item.value
            .parse()
            .map_err(|_| anyhow!("line {}: field `{field}`: bad number `{}`", item.line, item.value))
    };

    let model_item = req("model")?;
    let model = ModelKind::parse(&model_item.value).ok_or_else(|| {
        anyhow!(
            "line {}: unknown model `{}`; valid keys: {}",
            model_item.line,
            model_item.value,
            ModelKind::known_keys().join(", ")
        )
    })?;

    let t_end = num(req("t-end")?, "t-end")?;
    if !t_end.is_finite() || t_end <= 0.0 {
        bail!("line {}: t-end must be positive", req("t-end")?.line);
    }
    let samples = get("scenario", "samples")
        .map(|i| -> Result<usize> {
            i.value
                .parse()
                .map_err(|_| anyhow!("line {}: bad samples `{}`", i.line, i.value))
        })
        .transpose()?
        .unwrap_or(501);
    if samples < 3 {
        bail!("samples must be at least 3");
    }
    let tol = get("scenario", "tol").map(|i| num(i, "tol")).transpose()?.unwrap_or(1e-10);
    let mass = get("scenario", "mass").map(|i| num(i, "mass")).transpose()?.unwrap_or(1.0);
    let leg_mass = get("scenario", "leg-mass")
        .map(|i| num(i, "leg-mass"))
        .transpose()?
        .unwrap_or(1.0);

    let initial: Vec<f64> = match get("scenario", "initial") {
        Some(item) => item
            .value
            .split_whitespace()
            .map(|s| {
                s.parse()
                    .map_err(|_| anyhow!("line {}: bad initial value `{s}`", item.line))
            })
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };

    // controls: channel keys sorted by name (b1, b2, ... or f)
    let mut channels = Vec::new();
    if let Some(controls) = sections.get("controls") {
        let mut keys: Vec<&String> = controls.keys().collect();
        keys.sort();
        for key in keys {
            channels.push(parse_channel(&controls[key], key)?);
        }
    }
    let expected_controls = match model {
        ModelKind::Control(key) => liesys::models::ControlSystemDef::new(key).control_dim(),
        _ => 1,
    };
    if channels.len() != expected_controls {
        bail!(
            "model `{}` needs {expected_controls} control channel(s), [controls] defines {}",
            model.name(),
            channels.len()
        );
    }
    let controls = ControlSignal::new(channels);

    let tasks_item = sections
        .get("tasks")
        .and_then(|m| m.get("run"))
        .ok_or_else(|| anyhow!("missing [tasks] section with a `run = ...` line"))?;
    let mut tasks = Vec::new();
    for word in tasks_item.value.split_whitespace() {
        let task = Task::parse(word).ok_or_else(|| {
            anyhow!(
                "line {}: unknown task `{word}` (expected direct|weinorman|compare|reduce|controllability|quantum-evolve)",
                tasks_item.line
            )
        })?;
        tasks.push(task);
    }
    if tasks.is_empty() {
        bail!("line {}: task list is empty", tasks_item.line);
    }

    let mut thresholds = Thresholds::default();
    if let Some(item) = get("thresholds", "compare") {
        thresholds.compare = num(item, "compare")?;
    }
    if let Some(item) = get("thresholds", "residual") {
        thresholds.residual = num(item, "residual")?;
    }
    if let Some(item) = get("thresholds", "drift") {
        thresholds.drift = num(item, "drift")?;
    }

    let mut quantum = QuantumSetup::default();
    if let Some(item) = get("quantum", "grid-points") {
        quantum.grid_points = item
            .value
            .parse()
            .map_err(|_| anyhow!("line {}: bad grid-points", item.line))?;
    }
    if let Some(item) = get("quantum", "p-max") {
        quantum.p_max = num(item, "p-max")?;
    }
    if let Some(item) = get("quantum", "mean") {
        quantum.mean = num(item, "mean")?;
    }
    if let Some(item) = get("quantum", "sigma") {
        quantum.sigma = num(item, "sigma")?;
    }

    let out_dir = get("output", "dir")
        .map(|i| i.value.clone())
        .unwrap_or_else(|| "out".into());
    let prefix = get("output", "prefix")
        .map(|i| i.value.clone())
        .unwrap_or_else(|| model.name().replace(['(', ')'], "-"));
    let wrap_angles = match get("output", "wrap-angles") {
        Some(i) => i
            .value
            .parse()
            .map_err(|_| anyhow!("line {}: wrap-angles must be true or false", i.line))?,
        None => false,
    };

    let generators = match get("scenario", "generators") {
        Some(item) => item
            .value
            .split_whitespace()
            .map(|s| -> Result<usize> {
                let one_based: usize = s
                    .parse()
                    .map_err(|_| anyhow!("line {}: bad generator index `{s}`", item.line))?;
                if one_based == 0 {
                    bail!("line {}: generator indices are 1-based", item.line);
                }
                Ok(one_based - 1)
            })
            .collect::<Result<_>>()?,
        None => vec![0, 1],
    };

    Ok(ScenarioConfig {
        model,
        t_end,
        samples,
        tol,
        initial,
        mass,
        leg_mass,
        controls,
        tasks,
        thresholds,
        quantum,
        out_dir,
        prefix,
        wrap_angles,
        generators,
    })
}

pub fn load(path: &std::path::Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config `{}`", path.display()))?;
    parse(&text).with_context(|| format!("in config `{}`", path.display()))
}
