use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::run::RegretTrace;
use crate::bandit::Algorithm;
use crate::error::{Error, Result};

/// Linear-interpolation quantile of sorted data, `q ∈ [0, 1]`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Median and interquartile band of cumulative regret at one round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algo: Algorithm,
    pub t: u64,
    pub median_cum_regret: f64,
    pub q25: f64,
    pub q75: f64,
}

/// End-of-horizon statistics of one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalStats {
    pub algo: Algorithm,
    pub seeds: usize,
    pub median_final: f64,
    pub q25_final: f64,
    pub q75_final: f64,
    /// Median of `R_m / m`.
    pub rate_full: f64,
    /// Median of `R_{m/2} / (m/2)`.
    pub rate_half: f64,
}

impl FinalStats {
    /// The average regret per round fell over the second half.
    pub fn is_sublinear(&self) -> bool {
        self.rate_full < self.rate_half
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub finals: Vec<FinalStats>,
    /// Same as `rows` for AC regret; empty unless every trace has it.
    pub rows_ac: Vec<SummaryRow>,
    pub finals_ac: Vec<FinalStats>,
}

impl Summary {
    pub fn final_for(&self, algo: Algorithm) -> Option<&FinalStats> {
        self.finals.iter().find(|f| f.algo == algo)
    }

    pub fn final_ac_for(&self, algo: Algorithm) -> Option<&FinalStats> {
        self.finals_ac.iter().find(|f| f.algo == algo)
    }
}

/// LinDistFlow and AC cumulative-regret curves, one per seed.
type Curves = (Vec<Vec<f64>>, Vec<Vec<f64>>);

fn aggregate(algo: Algorithm, curves: &[Vec<f64>]) -> (Vec<SummaryRow>, FinalStats) {
    let m = curves[0].len();
    let column = |k: usize| {
        let mut col: Vec<f64> = curves.iter().map(|c| c[k]).collect();
        col.sort_by(f64::total_cmp);
        col
    };
    let rows: Vec<SummaryRow> = (0..m)
        .map(|k| {
            let col = column(k);
            SummaryRow {
                algo,
                t: k as u64 + 1,
                median_cum_regret: quantile(&col, 0.5),
                q25: quantile(&col, 0.25),
                q75: quantile(&col, 0.75),
            }
        })
        .collect();
    let half = (m / 2).max(1);
    let rate = |t: usize| {
        let mut r: Vec<f64> = curves.iter().map(|c| c[t - 1] / t as f64).collect();
        r.sort_by(f64::total_cmp);
        quantile(&r, 0.5)
    };
    let last = &rows[m - 1];
    let stats = FinalStats {
        algo,
        seeds: curves.len(),
        median_final: last.median_cum_regret,
        q25_final: last.q25,
        q75_final: last.q75,
        rate_full: rate(m),
        rate_half: rate(half),
    };
    (rows, stats)
}

/// Per-round median and quartiles of cumulative regret for each algorithm,
/// plus end-of-horizon statistics. All traces must share a config digest
/// and a horizon.
pub fn summarize(traces: &[RegretTrace]) -> Result<Summary> {
    let first = traces.first().ok_or_else(|| Error::Aggregation("no traces to summarize".into()))?;
    let m = first.records.len();
    if m == 0 {
        return Err(Error::Aggregation("traces are empty".into()));
    }
    for tr in traces {
        if tr.config_digest != first.config_digest {
            return Err(Error::Aggregation(format!(
                "traces come from different configs ({} vs {})",
                first.config_digest, tr.config_digest
            )));
        }
        if tr.records.len() != m {
            return Err(Error::Aggregation(format!("horizons differ ({m} vs {})", tr.records.len())));
        }
    }

    let mut by_algo: BTreeMap<Algorithm, Curves> = BTreeMap::new();
    let mut all_ac = true;
    for tr in traces {
        let entry = by_algo.entry(tr.algorithm).or_default();
        entry.0.push(tr.records.iter().map(|r| r.cum_regret).collect());
        match tr.records.iter().map(|r| r.cum_regret_ac).collect::<Option<Vec<f64>>>() {
            Some(ac) => entry.1.push(ac),
            None => all_ac = false,
        }
    }

    let mut summary = Summary { rows: Vec::new(), finals: Vec::new(), rows_ac: Vec::new(), finals_ac: Vec::new() };
    for (algo, (lin, ac)) in &by_algo {
        let (rows, stats) = aggregate(*algo, lin);
        summary.rows.extend(rows);
        summary.finals.push(stats);
        if all_ac {
            let (rows, stats) = aggregate(*algo, ac);
            summary.rows_ac.extend(rows);
            summary.finals_ac.push(stats);
        }
    }
    Ok(summary)
}

/// Writes `seed,t,algo,chosen_nodes,reward,clairvoyant_reward,instant_regret,
/// cum_regret,cum_regret_fixed_best,cum_regret_ac`. `node_ids` maps node
/// indices to bus ids; chosen ids are `;`-joined. `cum_regret_ac` is empty
/// outside AC runs.
pub fn write_traces<W: Write>(out: W, traces: &[RegretTrace], node_ids: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "seed",
        "t",
        "algo",
        "chosen_nodes",
        "reward",
        "clairvoyant_reward",
        "instant_regret",
        "cum_regret",
        "cum_regret_fixed_best",
        "cum_regret_ac",
    ])?;
    for tr in traces {
        for r in &tr.records {
            let chosen: Vec<String> = r.chosen.iter().map(|&i| node_ids[i].to_string()).collect();
            w.write_record([
                tr.seed.to_string(),
                r.t.to_string(),
                tr.algorithm.to_string(),
                chosen.join(";"),
                r.reward.to_string(),
                r.clairvoyant_reward.to_string(),
                r.instant_regret.to_string(),
                r.cum_regret.to_string(),
                r.cum_regret_fixed_best.to_string(),
                r.cum_regret_ac.map(|x| x.to_string()).unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `algo,t,median_cum_regret,q25,q75`.
pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `traces.csv`, `summary.csv` and, for AC runs, `summary_ac.csv`
/// into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, traces: &[RegretTrace], summary: &Summary, node_ids: &[usize]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_traces(std::fs::File::create(dir.join("traces.csv"))?, traces, node_ids)?;
    write_summary(std::fs::File::create(dir.join("summary.csv"))?, &summary.rows)?;
    if !summary.rows_ac.is_empty() {
        write_summary(std::fs::File::create(dir.join("summary_ac.csv"))?, &summary.rows_ac)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::RoundRecord;

    fn trace(seed: u64, algo: Algorithm, regrets: &[f64], digest: &str) -> RegretTrace {
        let mut cum = 0.0;
        let records = regrets
            .iter()
            .enumerate()
            .map(|(k, &r)| {
                cum += r;
                RoundRecord {
                    t: k as u64 + 1,
                    chosen: vec![0],
                    reward: 1.0 - r,
                    clairvoyant_reward: 1.0,
                    instant_regret: r,
                    cum_regret: cum,
                    cum_regret_fixed_best: 0.0,
                    cum_regret_ac: None,
                }
            })
            .collect();
        RegretTrace { algorithm: algo, seed, config_digest: digest.into(), records, ac_max_residual: None }
    }

    #[test]
    fn quantiles_interpolate() {
        let d = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&d, 0.5), 2.5);
        assert_eq!(quantile(&d, 0.25), 1.75);
        assert_eq!(quantile(&[7.0], 0.75), 7.0);
    }

    #[test]
    fn single_trace_is_its_own_summary() {
        let tr = trace(0, Algorithm::LinUcb, &[0.3, 0.1, 0.0], "x");
        let s = summarize(std::slice::from_ref(&tr)).unwrap();
        for (row, rec) in s.rows.iter().zip(&tr.records) {
            assert_eq!(row.median_cum_regret, rec.cum_regret);
            assert_eq!(row.q25, rec.cum_regret);
            assert_eq!(row.q75, rec.cum_regret);
        }
        assert!(s.rows_ac.is_empty());
        let f = s.final_for(Algorithm::LinUcb).unwrap();
        assert!(f.is_sublinear());
    }

    #[test]
    fn identical_traces_have_zero_band() {
        let a = trace(0, Algorithm::Random, &[0.2, 0.2], "x");
        let b = trace(1, Algorithm::Random, &[0.2, 0.2], "x");
        let s = summarize(&[a, b]).unwrap();
        assert!(s.rows.iter().all(|r| r.q25 == r.q75));
    }

    #[test]
    fn mixed_configs_rejected() {
        let a = trace(0, Algorithm::Random, &[0.2], "x");
        let b = trace(1, Algorithm::Random, &[0.2], "y");
        assert!(matches!(summarize(&[a, b]), Err(Error::Aggregation(_))));
        assert!(matches!(summarize(&[]), Err(Error::Aggregation(_))));
    }

    #[test]
    fn summary_csv_layout() {
        let tr = trace(0, Algorithm::SpectralUcb, &[0.5, 0.25], "x");
        let s = summarize(&[tr]).unwrap();
        let mut buf = Vec::new();
        write_summary(&mut buf, &s.rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "algo,t,median_cum_regret,q25,q75\nspectral-ucb,1,0.5,0.5,0.5\nspectral-ucb,2,0.75,0.75,0.75\n");
    }
}
