//! Agrawal loan-applicant generator.
//!
//! Feature columns, all drawn uniformly:
//!
//! | col | attribute  | range                                    |
//! |-----|------------|------------------------------------------|
//! | 0   | salary     | [20 000, 150 000]                        |
//! | 1   | commission | 0 if salary >= 75 000, else [10 000, 75 000] |
//! | 2   | age        | [20, 80]                                 |
//! | 3   | elevel     | {0, ..., 4}                              |
//! | 4   | car        | {1, ..., 20}                             |
//! | 5   | zipcode    | {0, ..., 8}                              |
//! | 6   | hvalue     | [50 000, 1 000 000]                      |
//! | 7   | hyears     | [1, 30]                                  |
//! | 8   | loan       | [0, 500 000]                             |
//!
//! Labeling functions (class 0 when the condition holds, else class 1):
//!
//! 1. `age < 40 || age >= 60`
//! 2. `(age < 40 && 50k <= salary <= 100k) || (40 <= age < 60 && 75k <= salary <= 125k)
//!    || (age >= 60 && 25k <= salary <= 75k)`
//! 3. `(age < 40 && elevel in 0..=1) || (40 <= age < 60 && elevel in 1..=3)
//!    || (age >= 60 && elevel in 2..=4)`
//! 4. disposable income `2/3 (salary + commission) - loan / 5 - 20k > 0`
//! 5. disposable income `2/3 (salary + commission) - 5k * elevel - loan / 5 - 10k > 0`
//!
//! Perturbation shifts each continuous attribute by `p * range * U(-1, 1)`
//! (clamped to its range) after the label has been computed.

use crate::error::{Error, Result};
use crate::rng::RngHandle;
use crate::sample::Sample;

use super::Concept;

pub const AGRAWAL_FEATURES: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct AgrawalConfig {
    /// Labeling function, 1 to 5.
    pub function_id: u8,
    pub perturbation: f64,
}

impl Default for AgrawalConfig {
    fn default() -> Self {
        Self {
            function_id: 1,
            perturbation: 0.0,
        }
    }
}

const SALARY: (f64, f64) = (20_000.0, 150_000.0);
const COMMISSION: (f64, f64) = (10_000.0, 75_000.0);
const AGE: (f64, f64) = (20.0, 80.0);
const HVALUE: (f64, f64) = (50_000.0, 1_000_000.0);
const HYEARS: (f64, f64) = (1.0, 30.0);
const LOAN: (f64, f64) = (0.0, 500_000.0);

impl AgrawalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=5).contains(&self.function_id) {
            return Err(Error::config(format!(
                "Agrawal function must be 1..=5, got {}",
                self.function_id
            )));
        }
        if !(0.0..1.0).contains(&self.perturbation) {
            return Err(Error::config("Agrawal perturbation must lie in [0, 1)"));
        }
        Ok(())
    }

    pub fn next(&self, rng: &mut RngHandle, _t: u64) -> Sample {
        let salary = rng.uniform(SALARY.0, SALARY.1);
        let commission = if salary >= 75_000.0 {
            0.0
        } else {
            rng.uniform(COMMISSION.0, COMMISSION.1)
        };
        let age = rng.uniform(AGE.0, AGE.1);
        let elevel = rng.below(5) as f64;
        let car = 1.0 + rng.below(20) as f64;
        let zipcode = rng.below(9) as f64;
        let hvalue = rng.uniform(HVALUE.0, HVALUE.1);
        let hyears = rng.uniform(HYEARS.0, HYEARS.1);
        let loan = rng.uniform(LOAN.0, LOAN.1);
        let mut features = vec![
            salary, commission, age, elevel, car, zipcode, hvalue, hyears, loan,
        ];
        let label = agrawal_label(self.function_id, &features);
        if self.perturbation > 0.0 {
            let p = self.perturbation;
            let mut shift = |v: &mut f64, (lo, hi): (f64, f64)| {
                *v = (*v + p * (hi - lo) * rng.uniform(-1.0, 1.0)).clamp(lo, hi);
            };
            shift(&mut features[0], SALARY);
            if features[1] > 0.0 {
                shift(&mut features[1], COMMISSION);
            }
            shift(&mut features[2], AGE);
            shift(&mut features[6], HVALUE);
            shift(&mut features[7], HYEARS);
            shift(&mut features[8], LOAN);
        }
        Sample::new(features, label)
    }
}

/// Class of an unperturbed attribute row under labeling function `function_id`.
pub fn agrawal_label(function_id: u8, f: &[f64]) -> usize {
    let (salary, commission, age, elevel, loan) = (f[0], f[1], f[2], f[3], f[8]);
    let within = |v: f64, lo: f64, hi: f64| v >= lo && v <= hi;
    let group_a = match function_id {
        1 => age < 40.0 || age >= 60.0,
        2 => {
            if age < 40.0 {
                within(salary, 50_000.0, 100_000.0)
            } else if age < 60.0 {
                within(salary, 75_000.0, 125_000.0)
            } else {
                within(salary, 25_000.0, 75_000.0)
            }
        }
        3 => {
            if age < 40.0 {
                within(elevel, 0.0, 1.0)
            } else if age < 60.0 {
                within(elevel, 1.0, 3.0)
            } else {
                within(elevel, 2.0, 4.0)
            }
        }
        4 => 2.0 * (salary + commission) / 3.0 - loan / 5.0 - 20_000.0 > 0.0,
        5 => 2.0 * (salary + commission) / 3.0 - 5_000.0 * elevel - loan / 5.0 - 10_000.0 > 0.0,
        _ => unreachable!("validated function id"),
    };
    usize::from(!group_a)
}

impl Concept for AgrawalConfig {
    fn n_features(&self) -> usize {
        AGRAWAL_FEATURES
    }

    fn n_classes(&self) -> usize {
        2
    }

    fn draw(&self, rng: &mut RngHandle, t: u64) -> Sample {
        self.next(rng, t)
    }
}
