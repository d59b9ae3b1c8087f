//! Line-oriented scenario files.
//!
//! ```text
//! [grid]
//! r_min = 8 a0
//! n_points = 256
//!
//! [channel g]
//! potential = morse
//! D = 2000 cm-1
//! ```
//!
//! Section headers are `[grid]`, `[channel LABEL]`, `[pulse NAME]`,
//! `[initial]`, `[run]` and `[output]`. Dimensioned values carry a unit tag;
//! `#` starts a comment.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::Drive;
use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::potentials::{PotentialCurve, TabulatedCurve};
use crate::pulses::ChirpedPulse;
use crate::units::{Dimension, Quantity};

#[derive(Debug, Clone)]
pub struct ChannelConfig {
    pub label: String,
    pub potential: PotentialCurve,
    pub dressing: f64,
    pub basis_size: usize,
}

#[derive(Debug, Clone)]
pub struct PulseConfig {
    pub name: String,
    pub upper: usize,
    pub lower: usize,
    pub drive: Drive,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Eigenstate { channel: usize, v: usize },
    /// |ψ|² has standard deviation `width`; `momentum` is the mean wave number.
    Gaussian {
        channel: usize,
        center: f64,
        width: f64,
        momentum: f64,
    },
    /// (channel, level, amplitude) triples, normalized on use.
    Superposition(Vec<(usize, usize, Complex64)>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub stride: usize,
    /// Start of the oscillation analysis window; defaults to the end of the pulses.
    pub analysis_start: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub prefix: String,
    pub wavefunctions: bool,
    pub profiles: bool,
    pub plot_data: bool,
}

/// Raw text plus the key/value strings exactly as written.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub text: String,
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub echo: ConfigEcho,
    pub grid: SpatialGrid,
    pub channels: Vec<ChannelConfig>,
    pub pulses: Vec<PulseConfig>,
    pub initial: InitialState,
    pub run: RunConfig,
    pub output: OutputConfig,
}

struct Section {
    kind: String,
    arg: Option<String>,
    line: usize,
    entries: Vec<(String, String, usize)>,
}

impl Section {
    fn title(&self) -> String {
        match &self.arg {
            Some(a) => format!("{} {a}", self.kind),
            None => self.kind.clone(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let inner = rest.strip_suffix(']').ok_or_else(|| Error::ConfigParse {
                line,
                message: format!("unterminated section header `{content}`"),
            })?;
            let mut words = inner.split_whitespace();
            let kind = words.next().ok_or_else(|| Error::ConfigParse {
                line,
                message: "empty section header".into(),
            })?;
            let arg = words.next().map(str::to_string);
            if words.next().is_some() {
                return Err(Error::ConfigParse {
                    line,
                    message: format!("section header `{content}` has too many words"),
                });
            }
            let needs_arg = matches!(kind, "channel" | "pulse");
            if !matches!(kind, "grid" | "channel" | "pulse" | "initial" | "run" | "output") {
                return Err(Error::ConfigParse {
                    line,
                    message: format!("unknown section `{kind}`"),
                });
            }
            if needs_arg != arg.is_some() {
                return Err(Error::ConfigParse {
                    line,
                    message: if needs_arg {
                        format!("section `{kind}` needs a name")
                    } else {
                        format!("section `{kind}` takes no name")
                    },
                });
            }
            sections.push(Section {
                kind: kind.to_string(),
                arg,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::ConfigParse {
            line,
            message: format!("expected `key = value`, found `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::ConfigParse {
                line,
                message: format!("incomplete assignment `{content}`"),
            });
        }
        let section = sections.last_mut().ok_or_else(|| Error::ConfigParse {
            line,
            message: format!("`{key}` appears before any section header"),
        })?;
        if section.entries.iter().any(|(k, _, _)| k == key) {
            return Err(Error::key(
                format!("{}.{key}", section.title()),
                format!("duplicate key (line {line})"),
            ));
        }
        section.entries.push((key.to_string(), value.to_string(), line));
    }
    if sections.is_empty() {
        return Err(Error::ConfigParse {
            line: 0,
            message: "no sections found".into(),
        });
    }
    Ok(sections)
}

/// Typed access to one section's entries; tracks which keys were consumed.
struct Reader<'a> {
    section: &'a Section,
    used: Vec<bool>,
}

impl<'a> Reader<'a> {
    fn new(section: &'a Section) -> Self {
        Reader {
            section,
            used: vec![false; section.entries.len()],
        }
    }

    fn path(&self, key: &str) -> String {
        format!("{}.{key}", self.section.title())
    }

    fn raw(&mut self, key: &str) -> Option<&'a str> {
        let i = self.section.entries.iter().position(|(k, _, _)| k == key)?;
        self.used[i] = true;
        Some(self.section.entries[i].1.as_str())
    }

    fn has(&self, key: &str) -> bool {
        self.section.entries.iter().any(|(k, _, _)| k == key)
    }

    fn required(&mut self, key: &str) -> Result<&'a str> {
        let path = self.path(key);
        self.raw(key).ok_or_else(|| Error::key(path, "missing required key"))
    }

    fn quantity(&mut self, key: &str, dim: Dimension) -> Result<Option<f64>> {
        let path = self.path(key);
        match self.raw(key) {
            None => Ok(None),
            Some(v) => {
                let q: Quantity = v.parse().map_err(|e: Error| Error::key(&path, e.to_string()))?;
                q.au_as(dim).map(Some).map_err(|e| Error::key(path, e.to_string()))
            }
        }
    }

    fn required_quantity(&mut self, key: &str, dim: Dimension) -> Result<f64> {
        let path = self.path(key);
        self.quantity(key, dim)?
            .ok_or_else(|| Error::key(path, "missing required key"))
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Result<Option<T>> {
        let path = self.path(key);
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::key(path, format!("expected {what}, found `{v}`"))),
        }
    }

    fn flag(&mut self, key: &str) -> Result<bool> {
        let path = self.path(key);
        match self.raw(key) {
            None => Ok(false),
            Some("true" | "yes" | "on" | "1") => Ok(true),
            Some("false" | "no" | "off" | "0") => Ok(false),
            Some(v) => Err(Error::key(path, format!("expected true or false, found `{v}`"))),
        }
    }

    fn finish(self) -> Result<()> {
        for ((key, _, line), used) in self.section.entries.iter().zip(&self.used) {
            if !used {
                return Err(Error::key(
                    format!("{}.{key}", self.section.title()),
                    format!("unknown key (line {line})"),
                ));
            }
        }
        Ok(())
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into());
        Self::parse_with(&text, base, &stem)
    }

    /// Parses text; relative table paths resolve against the working directory.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, Path::new("."), "scenario")
    }

    fn parse_with(text: &str, base: &Path, default_prefix: &str) -> Result<Self> {
        let sections = lex(text)?;
        let mut echo = ConfigEcho {
            text: text.to_string(),
            sections: BTreeMap::new(),
        };
        for s in &sections {
            let title = s.title();
            if echo.sections.contains_key(&title) {
                return Err(Error::ConfigParse {
                    line: s.line,
                    message: format!("section [{title}] appears twice"),
                });
            }
            echo.sections.insert(
                title,
                s.entries.iter().map(|(k, v, _)| (k.clone(), v.clone())).collect(),
            );
        }
        let single = |kind: &str| -> Result<&Section> {
            let mut it = sections.iter().filter(|s| s.kind == kind);
            let first = it.next().ok_or_else(|| Error::ConfigParse {
                line: 0,
                message: format!("missing [{kind}] section"),
            })?;
            if let Some(dup) = it.next() {
                return Err(Error::ConfigParse {
                    line: dup.line,
                    message: format!("exactly one [{kind}] section is allowed"),
                });
            }
            Ok(first)
        };

        let grid = parse_grid(single("grid")?)?;
        let channel_sections: Vec<&Section> = sections.iter().filter(|s| s.kind == "channel").collect();
        if channel_sections.is_empty() {
            return Err(Error::ConfigParse {
                line: 0,
                message: "at least one [channel NAME] section is required".into(),
            });
        }
        let channels = channel_sections
            .iter()
            .map(|s| parse_channel(s, &grid, base))
            .collect::<Result<Vec<_>>>()?;
        let labels: Vec<&str> = channels.iter().map(|c| c.label.as_str()).collect();
        let pulses = sections
            .iter()
            .filter(|s| s.kind == "pulse")
            .map(|s| parse_pulse(s, &labels))
            .collect::<Result<Vec<_>>>()?;
        for (i, p) in pulses.iter().enumerate() {
            for q in &pulses[..i] {
                let same = (p.upper, p.lower) == (q.upper, q.lower) || (p.upper, p.lower) == (q.lower, q.upper);
                if same && matches!(p.drive, Drive::Constant { .. }) && matches!(q.drive, Drive::Constant { .. }) {
                    return Err(Error::key(
                        format!("pulse {}.upper", p.name),
                        format!("constant drives `{}` and `{}` couple the same pair", q.name, p.name),
                    ));
                }
            }
        }
        let initial = parse_initial(single("initial")?, &labels, &channels)?;
        let run = parse_run(single("run")?)?;
        let output = match sections.iter().find(|s| s.kind == "output") {
            Some(_) => parse_output(single("output")?, default_prefix)?,
            None => OutputConfig {
                dir: PathBuf::from("."),
                prefix: default_prefix.to_string(),
                wavefunctions: false,
                profiles: false,
                plot_data: false,
            },
        };
        Ok(ScenarioConfig {
            echo,
            grid,
            channels,
            pulses,
            initial,
            run,
            output,
        })
    }

    pub fn channel_index(&self, label: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.label == label)
    }
}

fn parse_grid(s: &Section) -> Result<SpatialGrid> {
    let mut r = Reader::new(s);
    let r_min = r.required_quantity("r_min", Dimension::Length)?;
    let r_max = r.required_quantity("r_max", Dimension::Length)?;
    let n = r
        .parsed::<usize>("n_points", "a positive integer")?
        .ok_or_else(|| Error::key("grid.n_points", "missing required key"))?;
    let mass = r.required_quantity("reduced_mass", Dimension::Mass)?;
    r.finish()?;
    SpatialGrid::new(r_min, r_max, n, mass).map_err(|e| Error::key("grid", e.to_string()))
}

fn parse_channel(s: &Section, grid: &SpatialGrid, base: &Path) -> Result<ChannelConfig> {
    let label = s.arg.clone().expect("channel sections are named");
    let mut r = Reader::new(s);
    let kind = r.required("potential")?;
    let offset = r.quantity("offset", Dimension::Energy)?.unwrap_or(0.0);
    let bad = |key: &str, e: Error| Error::key(format!("channel {label}.{key}"), e.to_string());
    let curve = match kind {
        "morse" => {
            let depth = r.required_quantity("D", Dimension::Energy)?;
            let r_e = r.required_quantity("r_e", Dimension::Length)?;
            match (r.has("a"), r.has("we")) {
                (true, false) => {
                    let a = r.required_quantity("a", Dimension::InverseLength)?;
                    PotentialCurve::morse(depth, a, r_e).map_err(|e| bad("a", e))?
                }
                (false, true) => {
                    let we = r.required_quantity("we", Dimension::Energy)?;
                    PotentialCurve::morse_from_frequency(depth, we, r_e, grid.reduced_mass())
                        .map_err(|e| bad("we", e))?
                }
                _ => {
                    return Err(Error::key(
                        format!("channel {label}.a"),
                        "morse needs exactly one of `a` or `we`",
                    ))
                }
            }
        }
        "harmonic" => {
            let omega = r.required_quantity("omega", Dimension::Energy)?;
            let r_e = r.required_quantity("r_e", Dimension::Length)?;
            PotentialCurve::harmonic(omega, grid.reduced_mass(), r_e).map_err(|e| bad("omega", e))?
        }
        "flat" => PotentialCurve::flat(r.required_quantity("value", Dimension::Energy)?),
        "tabulated" => {
            let file = r.required("file")?;
            let path = base.join(file);
            PotentialCurve::Tabulated(TabulatedCurve::from_file(&path).map_err(|e| bad("file", e))?)
        }
        other => {
            return Err(Error::key(
                format!("channel {label}.potential"),
                format!("unknown potential kind `{other}` (morse, harmonic, flat, tabulated)"),
            ))
        }
    };
    let potential = if offset != 0.0 { curve.dress(offset) } else { curve };
    let dressing = r.quantity("dress", Dimension::Energy)?.unwrap_or(0.0);
    let basis_size = r.parsed::<usize>("basis_size", "a positive integer")?.unwrap_or(20);
    if basis_size == 0 {
        return Err(Error::key(format!("channel {label}.basis_size"), "must be at least 1"));
    }
    r.finish()?;
    potential.sample(grid).map_err(|e| bad("potential", e))?;
    Ok(ChannelConfig {
        label,
        potential,
        dressing,
        basis_size,
    })
}

fn channel_ref(r: &mut Reader, key: &str, labels: &[&str]) -> Result<usize> {
    let path = r.path(key);
    let v = r.required(key)?;
    labels
        .iter()
        .position(|l| *l == v)
        .ok_or_else(|| Error::key(path, format!("undefined channel `{v}`")))
}

fn parse_pulse(s: &Section, labels: &[&str]) -> Result<PulseConfig> {
    let name = s.arg.clone().expect("pulse sections are named");
    let mut r = Reader::new(s);
    let upper = channel_ref(&mut r, "upper", labels)?;
    let lower = channel_ref(&mut r, "lower", labels)?;
    if upper == lower {
        return Err(Error::key(
            format!("pulse {name}.lower"),
            "a pulse must couple two different channels",
        ));
    }
    let strength = r.required_quantity("W", Dimension::Energy)?;
    let shape = r.raw("shape").unwrap_or("chirped");
    let drive = match shape {
        "constant" => Drive::Constant {
            strength,
            carrier: r.quantity("omega_L", Dimension::Energy)?,
        },
        "chirped" => {
            let omega_l = r.required_quantity("omega_L", Dimension::Energy)?;
            let t_peak = r.required_quantity("t_P", Dimension::Time)?;
            let tau_l = r.required_quantity("tau_L", Dimension::Time)?;
            let tau_c = r.required_quantity("tau_C", Dimension::Time)?;
            let chi = r.quantity("chi", Dimension::Chirp)?;
            let sign = r.raw("chirp_sign");
            let key = |k: &str| format!("pulse {name}.{k}");
            let pulse = match (chi, sign) {
                (Some(chi), None) => ChirpedPulse::new(strength, omega_l, t_peak, tau_l, tau_c, chi),
                (None, Some(sign)) => {
                    let positive = match sign {
                        "+" | "+1" | "1" | "positive" => true,
                        "-" | "-1" | "negative" => false,
                        other => {
                            return Err(Error::key(
                                key("chirp_sign"),
                                format!("expected positive or negative, found `{other}`"),
                            ))
                        }
                    };
                    ChirpedPulse::from_widths(strength, omega_l, t_peak, tau_l, tau_c, positive)
                }
                _ => {
                    return Err(Error::key(
                        key("chi"),
                        "give exactly one of `chi` or `chirp_sign`",
                    ))
                }
            }
            .map_err(|e| Error::key(key("tau_C"), e.to_string()))?;
            Drive::Chirped(pulse)
        }
        other => {
            return Err(Error::key(
                format!("pulse {name}.shape"),
                format!("unknown shape `{other}` (chirped, constant)"),
            ))
        }
    };
    r.finish()?;
    Ok(PulseConfig {
        name,
        upper,
        lower,
        drive,
    })
}

fn parse_initial(s: &Section, labels: &[&str], channels: &[ChannelConfig]) -> Result<InitialState> {
    let mut r = Reader::new(s);
    let kind = r.raw("kind").unwrap_or("eigenstate");
    let check_level = |channel: usize, v: usize, key: &str| -> Result<()> {
        if v >= channels[channel].basis_size {
            return Err(Error::key(
                format!("initial.{key}"),
                format!(
                    "level {v} is outside the {}-state basis of channel `{}`",
                    channels[channel].basis_size, channels[channel].label
                ),
            ));
        }
        Ok(())
    };
    let state = match kind {
        "eigenstate" => {
            let channel = channel_ref(&mut r, "channel", labels)?;
            let v = r.parsed::<usize>("v", "a level index")?.unwrap_or(0);
            check_level(channel, v, "v")?;
            InitialState::Eigenstate { channel, v }
        }
        "gaussian" => {
            let channel = channel_ref(&mut r, "channel", labels)?;
            let center = r.required_quantity("center", Dimension::Length)?;
            let width = r.required_quantity("width", Dimension::Length)?;
            if !(width > 0.0) {
                return Err(Error::key("initial.width", "must be positive"));
            }
            let momentum = r.quantity("momentum", Dimension::InverseLength)?.unwrap_or(0.0);
            InitialState::Gaussian {
                channel,
                center,
                width,
                momentum,
            }
        }
        "superposition" => {
            let list = r.required("components")?;
            let mut comps = Vec::new();
            for item in list.split(',') {
                let fields: Vec<&str> = item.trim().split(':').collect();
                let bad = || {
                    Error::key(
                        "initial.components",
                        format!("expected `label:v:re:im`, found `{}`", item.trim()),
                    )
                };
                if fields.len() != 4 {
                    return Err(bad());
                }
                let channel = labels.iter().position(|l| *l == fields[0]).ok_or_else(|| {
                    Error::key("initial.components", format!("undefined channel `{}`", fields[0]))
                })?;
                let v: usize = fields[1].parse().map_err(|_| bad())?;
                let re: f64 = fields[2].parse().map_err(|_| bad())?;
                let im: f64 = fields[3].parse().map_err(|_| bad())?;
                check_level(channel, v, "components")?;
                comps.push((channel, v, Complex64::new(re, im)));
            }
            if comps.iter().all(|c| c.2 == Complex64::new(0.0, 0.0)) {
                return Err(Error::key("initial.components", "all amplitudes are zero"));
            }
            InitialState::Superposition(comps)
        }
        other => {
            return Err(Error::key(
                "initial.kind",
                format!("unknown initial state `{other}` (eigenstate, gaussian, superposition)"),
            ))
        }
    };
    r.finish()?;
    Ok(state)
}

fn parse_run(s: &Section) -> Result<RunConfig> {
    let mut r = Reader::new(s);
    let t0 = r.quantity("t0", Dimension::Time)?.unwrap_or(0.0);
    let t1 = r.required_quantity("t1", Dimension::Time)?;
    let dt = r.required_quantity("dt", Dimension::Time)?;
    let stride = r.parsed::<usize>("stride", "a positive integer")?.unwrap_or(1);
    let analysis_start = r.quantity("analysis_start", Dimension::Time)?;
    r.finish()?;
    if !(dt > 0.0) {
        return Err(Error::key("run.dt", "must be positive"));
    }
    if !(t1 > t0) {
        return Err(Error::key("run.t1", "must be later than t0"));
    }
    if stride == 0 {
        return Err(Error::key("run.stride", "must be at least 1"));
    }
    Ok(RunConfig {
        t0,
        t1,
        dt,
        stride,
        analysis_start,
    })
}

fn parse_output(s: &Section, default_prefix: &str) -> Result<OutputConfig> {
    let mut r = Reader::new(s);
    let out = OutputConfig {
        dir: PathBuf::from(r.raw("dir").unwrap_or(".")),
        prefix: r.raw("prefix").unwrap_or(default_prefix).to_string(),
        wavefunctions: r.flag("wavefunctions")?,
        profiles: r.flag("profiles")?,
        plot_data: r.flag("plot_data")?,
    };
    r.finish()?;
    Ok(out)
}
