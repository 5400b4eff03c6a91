use std::collections::BTreeSet;

use crate::error::{Error, Result};

use super::SpotTable;

/// How to carve a spot table into train/test folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitMode {
    /// One fold per patient; that patient's spots form the test set.
    LeaveOnePatientOut,
    /// A single fold with explicit spot ids.
    Fixed { train: Vec<String>, test: Vec<String> },
}

/// A train/test partition of one [`SpotTable`]. Indices refer to rows of
/// that table and are kept in table order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSplit {
    pub name: String,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl SampleSplit {
    pub fn train_spot_ids<'a>(&self, spots: &'a SpotTable) -> Vec<&'a str> {
        self.train.iter().map(|&i| spots.spot_ids()[i].as_str()).collect()
    }

    pub fn test_spot_ids<'a>(&self, spots: &'a SpotTable) -> Vec<&'a str> {
        self.test.iter().map(|&i| spots.spot_ids()[i].as_str()).collect()
    }
}

/// Splits are returned ordered by patient id.
pub fn make_splits(spots: &SpotTable, mode: &SplitMode) -> Result<Vec<SampleSplit>> {
    match mode {
        SplitMode::LeaveOnePatientOut => {
            let patients = spots.patients();
            if patients.len() < 2 {
                return Err(Error::invalid(format!(
                    "leave-one-patient-out needs at least 2 patients, found {}",
                    patients.len()
                )));
            }
            Ok(patients
                .iter()
                .map(|(patient, test)| {
                    let train = (0..spots.len())
                        .filter(|&i| spots.patient_ids()[i] != *patient)
                        .collect();
                    SampleSplit {
                        name: patient.to_string(),
                        train,
                        test: test.clone(),
                    }
                })
                .collect())
        }
        SplitMode::Fixed { train, test } => {
            let resolve = |ids: &[String], what: &str| -> Result<BTreeSet<usize>> {
                ids.iter()
                    .map(|id| {
                        spots
                            .index_of(id)
                            .ok_or_else(|| Error::invalid(format!("{what} spot {id:?} is not in the spot table")))
                    })
                    .collect()
            };
            let train = resolve(train, "train")?;
            let test = resolve(test, "test")?;
            if train.is_empty() || test.is_empty() {
                return Err(Error::invalid("fixed split needs nonempty train and test sets"));
            }
            if let Some(&i) = train.intersection(&test).next() {
                return Err(Error::invalid(format!(
                    "spot {:?} is in both train and test",
                    spots.spot_ids()[i]
                )));
            }
            Ok(vec![SampleSplit {
                name: "fixed".to_string(),
                train: train.into_iter().collect(),
                test: test.into_iter().collect(),
            }])
        }
    }
}
