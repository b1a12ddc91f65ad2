use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// How one decoding trial ended, judged against the ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialClass {
    UniqueCorrect,
    UniqueWrong,
    Ambiguous,
    NoSolution,
}

impl TrialClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::UniqueCorrect => "unique_correct",
            Self::UniqueWrong => "unique_wrong",
            Self::Ambiguous => "ambiguous",
            Self::NoSolution => "no_solution",
        }
    }
}

/// One row of the per-trial CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub status: TrialClass,
    pub residual: f64,
    #[serde(skip)]
    pub margin: f64,
}

/// Aggregate outcome counts of a decoding experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub trials: usize,
    pub unique_correct: usize,
    pub unique_wrong: usize,
    pub ambiguous: usize,
    pub no_solution: usize,
    /// `(unique_wrong + ambiguous + no_solution) / trials`.
    pub empirical_error: f64,
    /// Smallest residual of a non-fitting candidate over all trials.
    pub min_margin: f64,
}

impl TrialStats {
    pub fn from_records(records: &[TrialRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(invalid("no trials to aggregate"));
        }
        let count = |c: TrialClass| records.iter().filter(|r| r.status == c).count();
        let trials = records.len();
        let unique_correct = count(TrialClass::UniqueCorrect);
        Ok(Self {
            trials,
            unique_correct,
            unique_wrong: count(TrialClass::UniqueWrong),
            ambiguous: count(TrialClass::Ambiguous),
            no_solution: count(TrialClass::NoSolution),
            empirical_error: (trials - unique_correct) as f64 / trials as f64,
            min_margin: records.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min),
        })
    }

    /// True when the four counts add up to `trials`.
    pub fn is_partition(&self) -> bool {
        self.unique_correct + self.unique_wrong + self.ambiguous + self.no_solution == self.trials
    }

    /// Header row plus one data row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.serialize(self)?;
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let row = rdr
            .deserialize()
            .next()
            .ok_or_else(|| invalid("trial stats CSV has no data row"))??;
        Ok(row)
    }
}

/// CSV with columns `trial,status,residual`.
pub fn write_trial_records<W: Write>(records: &[TrialRecord], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// One line of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: String,
    pub value: String,
    pub stat: f64,
}

/// CSV with columns `param,value,stat`.
pub fn write_sweep<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(trial: usize, status: TrialClass, margin: f64) -> TrialRecord {
        TrialRecord {
            trial,
            status,
            residual: 0.0,
            margin,
        }
    }

    #[test]
    fn counts_partition_trials() {
        let recs = [
            rec(0, TrialClass::UniqueCorrect, 0.3),
            rec(1, TrialClass::Ambiguous, f64::INFINITY),
            rec(2, TrialClass::UniqueCorrect, 0.1),
            rec(3, TrialClass::NoSolution, 0.2),
        ];
        let st = TrialStats::from_records(&recs).unwrap();
        assert!(st.is_partition());
        assert_eq!(st.empirical_error, 0.5);
        assert_eq!(st.min_margin, 0.1);
    }

    #[test]
    fn records_csv_schema() {
        let mut buf = Vec::new();
        write_trial_records(&[rec(0, TrialClass::UniqueWrong, 1.0)], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "trial,status,residual\n0,unique_wrong,0.0\n");
    }
}
