//! CSV series, JSON summary and optional per-snapshot files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::run::{Scenario, ScenarioResult};
use crate::analysis::{extremes, OscillationReport};
use crate::error::{Error, Result};
use crate::measures::{Field, MeasureRecord, MeasureSeries};
use crate::units::{to_ps, to_wavenumber, HARTREE_IN_WAVENUMBER};

/// Column names of the series CSV for `n` channels.
pub fn csv_header(n: usize) -> Vec<String> {
    let mut h = vec!["t_ps".to_string()];
    h.extend((1..=n).map(|a| format!("P_{a}")));
    h.extend(
        [
            "S_vN_eigen",
            "S_vN_pop",
            "purity",
            "L",
            "C_l1_el",
            "C_l1_vibronic",
            "variance_Hmol",
        ]
        .map(String::from),
    );
    h
}

fn csv_row(r: &MeasureRecord) -> String {
    let mut cols = vec![to_ps(r.time)];
    cols.extend(&r.populations);
    cols.extend([
        r.s_vn_eigen,
        r.s_vn_pop,
        r.purity,
        r.linear_entropy,
        r.c_l1_el,
        r.c_l1_vibronic,
        r.variance_hmol * HARTREE_IN_WAVENUMBER * HARTREE_IN_WAVENUMBER,
    ]);
    cols.iter().map(|v| format!("{v:.12e}")).collect::<Vec<_>>().join(",")
}

/// Times in ps, populations and entropies dimensionless, variance in cm⁻².
pub fn write_series_csv<W: Write>(series: &MeasureSeries, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", csv_header(series.n_channels()).join(","))?;
    for r in &series.records {
        writeln!(out, "{}", csv_row(r))?;
    }
    Ok(())
}

/// A CSV table read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSeries {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl CsvSeries {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn read_series_csv(path: &Path) -> Result<CsvSeries> {
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    parse_series_csv(BufReader::new(file))
}

pub fn parse_series_csv<R: BufRead>(input: R) -> Result<CsvSeries> {
    let mut lines = input.lines().enumerate();
    let header: Vec<String> = match lines.next() {
        Some((_, Ok(h))) if !h.trim().is_empty() => h.split(',').map(|s| s.trim().to_string()).collect(),
        Some((_, Err(e))) => return Err(Error::io("reading series", e)),
        _ => {
            return Err(Error::ConfigParse {
                line: 1,
                message: "series file has no header row".into(),
            })
        }
    };
    if header.first().map(String::as_str) != Some("t_ps") {
        return Err(Error::ConfigParse {
            line: 1,
            message: "first column must be t_ps".into(),
        });
    }
    let mut columns = vec![Vec::new(); header.len()];
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io("reading series", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(Error::ConfigParse {
                line: i + 1,
                message: format!("expected {} columns, found {}", header.len(), fields.len()),
            });
        }
        for (col, f) in columns.iter_mut().zip(fields) {
            col.push(f.trim().parse().map_err(|_| Error::ConfigParse {
                line: i + 1,
                message: format!("bad number `{f}`"),
            })?);
        }
    }
    Ok(CsvSeries { header, columns })
}

/// Oscillation report with times in ps and energies in cm⁻¹.
pub fn report_json(report: &OscillationReport) -> Value {
    let predicted: Vec<Value> = report
        .predicted
        .iter()
        .map(|p| {
            json!({
                "delta_e_cm-1": to_wavenumber(p.delta_e),
                "period_ps": to_ps(p.period),
                "weight": p.weight,
                "quadruples": p.quadruples,
            })
        })
        .collect();
    let spectrum = report.spectrum.as_ref().map(|s| {
        json!({
            "window": s.window,
            "resolution_per_ps": s.resolution / to_ps(1.0),
            "peaks": s.peaks.iter().map(|p| json!({
                "period_ps": to_ps(p.period),
                "frequency_per_ps": p.frequency / to_ps(1.0),
                "amplitude": p.amplitude,
            })).collect::<Vec<_>>(),
        })
    });
    json!({
        "window_ps": [to_ps(report.window_start), to_ps(report.window_end)],
        "predicted": predicted,
        "background": report.background,
        "spectrum": spectrum,
        "L": extremes_json(&report.linear_entropy),
    })
}

fn extremes_json(e: &crate::analysis::Extremes) -> Value {
    json!({ "min": e.min, "max": e.max, "t_min_ps": to_ps(e.t_min), "t_max_ps": to_ps(e.t_max) })
}

/// Extremes of every CSV field over the whole run.
pub fn series_extremes(series: &MeasureSeries) -> Result<Value> {
    let times = series.times();
    let mut fields: Vec<(String, Field)> = (0..series.n_channels())
        .map(|a| (format!("P_{}", a + 1), Field::Population(a)))
        .collect();
    fields.extend([
        ("S_vN_eigen".to_string(), Field::SvnEigen),
        ("S_vN_pop".to_string(), Field::SvnPop),
        ("purity".to_string(), Field::Purity),
        ("L".to_string(), Field::LinearEntropy),
        ("C_l1_el".to_string(), Field::CoherenceElectronic),
        ("C_l1_vibronic".to_string(), Field::CoherenceVibronic),
    ]);
    let mut map = serde_json::Map::new();
    for (name, f) in fields {
        map.insert(name, extremes_json(&extremes(&times, &series.values(f))?));
    }
    Ok(Value::Object(map))
}

pub fn summary_json(scenario: &Scenario, result: &ScenarioResult) -> Result<Value> {
    let last = result.series.records.last();
    Ok(json!({
        "config": scenario.config.echo,
        "snapshots": result.series.len(),
        "channels": scenario.config.channels.iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
        "basis_levels": scenario.bases.bases().iter().map(|b| b.len()).collect::<Vec<_>>(),
        "final_populations": last.map(|r| r.populations.clone()),
        "extremes": series_extremes(&result.series)?,
        "oscillations": report_json(&result.report),
        "identities": result.identities,
    }))
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputFiles {
    pub series: PathBuf,
    pub summary: PathBuf,
    pub extra: Vec<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

fn written(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(format!("writing {}", path.display()), e)
}

/// Writes everything the output block asks for under `dir`.
pub fn write_outputs(scenario: &Scenario, result: &ScenarioResult, dir: &Path) -> Result<OutputFiles> {
    let out = &scenario.config.output;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let name = |suffix: &str| dir.join(format!("{}{suffix}", out.prefix));
    let mut files = OutputFiles {
        series: name("_series.csv"),
        summary: name("_summary.json"),
        extra: Vec::new(),
    };

    let mut w = create(&files.series)?;
    write_series_csv(&result.series, &mut w)
        .and_then(|_| w.flush())
        .map_err(written(&files.series))?;

    let summary = summary_json(scenario, result)?;
    let mut w = create(&files.summary)?;
    serde_json::to_writer_pretty(&mut w, &summary)
        .map_err(std::io::Error::from)
        .and_then(|_| writeln!(w))
        .and_then(|_| w.flush())
        .map_err(written(&files.summary))?;

    if out.wavefunctions {
        for (k, s) in result.trajectory.states.iter().enumerate() {
            let path = name(&format!("_psi_{k:05}.dat"));
            let mut w = create(&path)?;
            s.write_dump(&mut w).and_then(|_| w.flush()).map_err(written(&path))?;
            files.extra.push(path);
        }
    }
    if out.profiles {
        let cm2 = HARTREE_IN_WAVENUMBER * HARTREE_IN_WAVENUMBER;
        for (k, rec) in result.series.records.iter().enumerate() {
            let Some(p) = &rec.profiles else { continue };
            let path = name(&format!("_skew_{k:05}.dat"));
            let mut w = create(&path)?;
            let mut body = format!("# t_ps = {:.12e}\n# R_a0 skew_local_cm-2 skew_reduced_cm-2\n", to_ps(rec.time));
            for ((r, a), b) in p.local.r.iter().zip(&p.local.values).zip(&p.reduced.values) {
                body.push_str(&format!("{r:.12e} {:.12e} {:.12e}\n", a * cm2, b * cm2));
            }
            w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(written(&path))?;
            files.extra.push(path);
        }
    }
    if out.plot_data {
        let header = csv_header(result.series.n_channels());
        let rows: Vec<Vec<String>> = result
            .series
            .records
            .iter()
            .map(|r| csv_row(r).split(',').map(String::from).collect())
            .collect();
        for (i, field) in header.iter().enumerate().skip(1) {
            let path = name(&format!("_{field}.dat"));
            let mut w = create(&path)?;
            let mut body = format!("# t_ps {field}\n");
            for row in &rows {
                body.push_str(&format!("{} {}\n", row[0], row[i]));
            }
            w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(written(&path))?;
            files.extra.push(path);
        }
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        assert_eq!(
            csv_header(3).join(","),
            "t_ps,P_1,P_2,P_3,S_vN_eigen,S_vN_pop,purity,L,C_l1_el,C_l1_vibronic,variance_Hmol"
        );
    }

    #[test]
    fn csv_round_trip() {
        let rec = MeasureRecord {
            time: crate::units::ps(1.5),
            populations: vec![0.25, 0.75],
            s_vn_eigen: 0.8,
            s_vn_pop: 0.81,
            purity: 0.7,
            linear_entropy: 0.3,
            c_l1_el: 0.1,
            c_l1_vibronic: 1.2,
            variance_hmol: crate::units::wavenumber(1.0).powi(2) * 9.0,
            velocity_sq: 0.0,
            skew_hmol: 0.0,
            truncation: 0.0,
            profiles: None,
        };
        let series = MeasureSeries { records: vec![rec.clone(), rec] };
        let mut buf = Vec::new();
        write_series_csv(&series, &mut buf).unwrap();
        let back = parse_series_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert!((back.column("t_ps").unwrap()[0] - 1.5).abs() < 1e-11);
        assert!((back.column("variance_Hmol").unwrap()[1] - 9.0).abs() < 1e-9);
        assert_eq!(back.column("P_2").unwrap()[0], 0.75);
    }

    #[test]
    fn rejects_malformed_csv() {
        assert!(parse_series_csv("".as_bytes()).is_err());
        assert!(parse_series_csv("time,a\n1,2\n".as_bytes()).is_err());
        assert!(parse_series_csv("t_ps,a\n1,2,3\n".as_bytes()).is_err());
        assert!(parse_series_csv("t_ps,a\n1,x\n".as_bytes()).is_err());
    }
}
