//! CSV exports. All real numbers use 17 significant digits; LF line endings.

use std::io::{self, Write};

use crate::format::sig17;
use crate::harness::{AggregateStats, CellScore, ConvergenceRecord, ScalingStudy};

fn opt(v: Option<f64>) -> String {
    v.map(sig17).unwrap_or_default()
}

/// `evaluations,mean_best_reward,std_best_reward,success_rate`
pub fn write_aggregate_csv<W: Write>(mut out: W, stats: &AggregateStats) -> io::Result<()> {
    writeln!(out, "evaluations,mean_best_reward,std_best_reward,success_rate")?;
    for i in 0..stats.evaluations.len() {
        writeln!(
            out,
            "{},{},{},{}",
            stats.evaluations[i],
            sig17(stats.mean_best_reward[i]),
            sig17(stats.std_best_reward[i]),
            sig17(stats.success_rate[i])
        )?;
    }
    Ok(())
}

/// `run_id,evaluations,best_reward,update_reward,mean_sigma`, one row per checkpoint.
pub fn write_records_csv<W: Write>(mut out: W, records: &[ConvergenceRecord]) -> io::Result<()> {
    writeln!(out, "run_id,evaluations,best_reward,update_reward,mean_sigma")?;
    for r in records {
        for c in &r.checkpoints {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.run_id,
                c.evaluations,
                sig17(c.best_reward),
                sig17(c.update_reward),
                sig17(c.mean_sigma)
            )?;
        }
    }
    Ok(())
}

/// Long-format comparison curves, one block per label, with both the
/// evaluation count and the mean number of updates as x axes.
pub fn write_comparison_csv<W: Write>(mut out: W, curves: &[(String, AggregateStats)]) -> io::Result<()> {
    writeln!(out, "label,evaluations,mean_updates,mean_best_reward,std_best_reward,success_rate")?;
    for (label, s) in curves {
        for i in 0..s.evaluations.len() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                label,
                s.evaluations[i],
                sig17(s.mean_updates[i]),
                sig17(s.mean_best_reward[i]),
                sig17(s.std_best_reward[i]),
                sig17(s.success_rate[i])
            )?;
        }
    }
    Ok(())
}

/// `label,variant,median_evaluations_to_target,final_success_rate,mean_final_best_reward`;
/// an empty median means fewer than half of the runs reached the target.
pub fn write_comparison_summary_csv<W: Write>(mut out: W, rows: &[(String, String, AggregateStats)]) -> io::Result<()> {
    writeln!(
        out,
        "label,variant,median_evaluations_to_target,final_success_rate,mean_final_best_reward"
    )?;
    for (label, variant, s) in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            label,
            variant,
            opt(s.median_evaluations_to_target),
            sig17(s.final_success_rate),
            sig17(s.mean_final_best_reward)
        )?;
    }
    Ok(())
}

/// `alpha_mu,alpha_sigma,median_evaluations_to_target,mean_final_reward,success_rate`
pub fn write_grid_csv<W: Write>(mut out: W, cells: &[CellScore]) -> io::Result<()> {
    writeln!(
        out,
        "alpha_mu,alpha_sigma,median_evaluations_to_target,mean_final_reward,success_rate"
    )?;
    for c in cells {
        writeln!(
            out,
            "{},{},{},{},{}",
            sig17(c.alpha_mu),
            sig17(c.alpha_sigma),
            opt(c.median_evaluations_to_target),
            sig17(c.mean_final_reward),
            sig17(c.success_rate)
        )?;
    }
    Ok(())
}

/// `dim,alpha_mu,alpha_sigma`
pub fn write_scaling_csv<W: Write>(mut out: W, study: &ScalingStudy) -> io::Result<()> {
    writeln!(out, "dim,alpha_mu,alpha_sigma")?;
    for r in &study.rows {
        writeln!(out, "{},{},{}", r.dim, sig17(r.alpha_mu), sig17(r.alpha_sigma))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{aggregate, Checkpoint};

    #[test]
    fn aggregate_layout() {
        let rec = ConvergenceRecord {
            run_id: 0,
            checkpoints: vec![Checkpoint { evaluations: 4, best_reward: -1.5, update_reward: -2.0, mean_sigma: 0.5 }],
            evaluations_to_target: None,
        };
        let stats = aggregate(&[rec.clone()], &[4]);
        let mut buf = Vec::new();
        write_aggregate_csv(&mut buf, &stats).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "evaluations,mean_best_reward,std_best_reward,success_rate\n\
             4,-1.5000000000000000e0,0.0000000000000000e0,0.0000000000000000e0\n"
        );
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &[rec]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("run_id,evaluations,best_reward,update_reward,mean_sigma\n0,4,"));
    }
}
