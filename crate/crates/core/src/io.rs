//! File formats: JSON tensors in, CSV tables out.
//!
//! CSV numbers carry 17 significant digits so every value round-trips to
//! the same `f64`. Lines starting with `#` are comments in every format.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::distribution::{JointDistribution, MarginalProfile};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::experiments::{SweepConfig, SweepRecord, SweepSummary};
use crate::landscape::FitnessLandscape;
use crate::learners::StrategyTrajectory;
use crate::shape::Shape;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses JSON after dropping `#` comment lines.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let body: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    serde_json::from_str(&body).map_err(|e| Error::Format(e.to_string()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_json(&text).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn read_landscape(path: &Path) -> Result<FitnessLandscape> {
    read_json(path)
}

pub fn read_distribution(path: &Path) -> Result<JointDistribution> {
    read_json(path)
}

pub fn read_marginals(path: &Path) -> Result<MarginalProfile> {
    read_json(path)
}

/// Appends the trailing metadata comment line.
pub fn with_metadata(mut body: String, meta: &str) -> String {
    if !body.is_empty() && !body.ends_with('\n') {
        body.push('\n');
    }
    let _ = writeln!(body, "# {meta}");
    body
}

fn genotype_columns(shape: &Shape) -> Vec<String> {
    (0..shape.len())
        .map(|flat| {
            let g = shape.unravel(flat);
            let idx: Vec<String> = g.alleles().iter().map(|a| (a + 1).to_string()).collect();
            format!("p_{}", idx.join("_"))
        })
        .collect()
}

fn marginal_columns(alleles: &[usize]) -> Vec<String> {
    alleles
        .iter()
        .enumerate()
        .flat_map(|(j, &n)| (1..=n).map(move |i| format!("x{}_{}", j + 1, i)))
        .collect()
}

fn push_row(out: &mut String, cells: impl IntoIterator<Item = String>) {
    let row: Vec<String> = cells.into_iter().collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

/// `t, wbar, p_..., x1_..., ..., xk_...`, one row per generation.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let shape = traj.states[0].shape();
    let mut out = String::new();
    let mut header = vec!["t".to_string(), "wbar".to_string()];
    header.extend(genotype_columns(shape));
    header.extend(marginal_columns(shape.alleles()));
    push_row(&mut out, header);
    for (t, ((p, wbar), m)) in traj
        .states
        .iter()
        .zip(&traj.mean_fitness)
        .zip(&traj.marginals)
        .enumerate()
    {
        let mut cells = vec![t.to_string(), fmt_f64(*wbar)];
        cells.extend(p.probs().iter().map(|&v| fmt_f64(v)));
        cells.extend(m.vectors().iter().flatten().map(|&v| fmt_f64(v)));
        push_row(&mut out, cells);
    }
    out
}

/// `t, x1_..., ..., xk_...`, matching the marginal columns of
/// [`trajectory_csv`].
pub fn strategy_csv(strategies: &StrategyTrajectory) -> String {
    let alleles: Vec<usize> = strategies.players.iter().map(|s| s[0].len()).collect();
    let mut out = String::new();
    let mut header = vec!["t".to_string()];
    header.extend(marginal_columns(&alleles));
    push_row(&mut out, header);
    for t in 0..=strategies.steps() {
        let mut cells = vec![t.to_string()];
        for seq in &strategies.players {
            cells.extend(seq[t].probs().iter().map(|&v| fmt_f64(v)));
        }
        push_row(&mut out, cells);
    }
    out
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

pub fn sweep_records_csv(cfg: &SweepConfig, records: &[SweepRecord]) -> String {
    let mut out = String::new();
    push_row(
        &mut out,
        [
            "instance",
            "seed",
            "s",
            "r",
            "dynamics",
            "converged",
            "t_conv",
            "quality",
            "limit_genotype",
            "is_nash",
        ]
        .map(String::from),
    );
    for rec in records {
        let genotype = rec.limit_genotype.as_ref().map(|g| {
            g.alleles()
                .iter()
                .map(|a| (a + 1).to_string())
                .collect::<Vec<_>>()
                .join(":")
        });
        push_row(
            &mut out,
            [
                rec.instance.to_string(),
                rec.seed.to_string(),
                fmt_f64(cfg.s),
                fmt_f64(cfg.kind.rate()),
                cfg.kind.name().to_string(),
                rec.converged.to_string(),
                opt(&rec.t_conv),
                rec.quality.map(fmt_f64).unwrap_or_default(),
                genotype.unwrap_or_default(),
                opt(&rec.is_nash),
            ],
        );
    }
    out
}

/// Two blocks, `T,F_T` then `Q,F_Q`, each with its own header row.
pub fn sweep_summary_csv(summary: &SweepSummary) -> String {
    let mut out = String::from("T,F_T\n");
    for (t, f) in &summary.f_t {
        push_row(&mut out, [t.to_string(), fmt_f64(*f)]);
    }
    out.push_str("Q,F_Q\n");
    for (q, f) in &summary.f_q {
        push_row(&mut out, [fmt_f64(*q), fmt_f64(*f)]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, DynamicsKind};
    use crate::fixtures::{reference_initial, reference_landscape};

    #[test]
    fn floats_round_trip() {
        for x in [2f64.sqrt(), 0.1 / 1.005, 1e-300, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn trajectory_layout() {
        let t = simulate(
            &reference_landscape(),
            &reference_initial(),
            DynamicsKind::Sr(0.5),
            1,
            0.99,
        )
        .unwrap();
        let csv = trajectory_csv(&t);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "t,wbar,p_1_1,p_1_2,p_2_1,p_2_2,p_3_1,p_3_2,x1_1,x1_2,x1_3,x2_1,x2_2"
        );
        assert_eq!(lines.len(), 3);
        let last: Vec<f64> = lines[2].split(',').skip(1).map(|c| c.parse().unwrap()).collect();
        assert_eq!(last[0], t.mean_fitness[1]);
        assert_eq!(last.len(), 12);
    }

    #[test]
    fn comments_are_ignored_on_input() {
        let w: FitnessLandscape = parse_json("{\"alleles\":[2,2],\"values\":[1,2,3,4]}\n# trailing note\n").unwrap();
        assert_eq!(w.values(), &[1.0, 2.0, 3.0, 4.0]);
        assert!(parse_json::<FitnessLandscape>("{").is_err());
    }

    #[test]
    fn metadata_line_is_last() {
        let s = with_metadata("a,b\n1,2\n".into(), "seed=0");
        assert!(s.ends_with("# seed=0\n"));
    }
}
