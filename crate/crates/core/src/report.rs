//! Law reports and seeded case generation shared by every checker.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

/// A contiguous family of case seeds derived from a base seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Seeds {
    pub base: u64,
    pub count: usize,
}

impl Seeds {
    pub fn new(base: u64, count: usize) -> Self {
        Seeds { base, count }
    }

    /// Case seeds, scrambled so neighbouring bases do not share cases.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.count as u64).map(move |k| splitmix64(self.base ^ splitmix64(k)))
    }

    /// Same count, base mixed with `salt`; gives each suite its own stream.
    pub fn salted(&self, salt: &str) -> Seeds {
        let h = salt.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
        Seeds { base: splitmix64(self.base ^ h), count: self.count }
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Outcome of running one law against one instance.
///
/// `wall_time` is kept out of the JSON form so reports stay byte-identical
/// across runs.
#[derive(Clone, Debug, Serialize)]
pub struct LawReport {
    pub law: String,
    pub instance: String,
    pub seeds: Seeds,
    pub cases: usize,
    pub passed: usize,
    pub failures: usize,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl LawReport {
    pub fn suite_name(&self) -> String {
        format!("{}/{}", self.law, self.instance)
    }
}

/// Accumulates case outcomes; keeps only the first witness.
pub struct LawCheck {
    law: String,
    instance: String,
    seeds: Seeds,
    cases: usize,
    passed: usize,
    counterexample: Option<Value>,
    note: Option<String>,
    started: Instant,
}

impl LawCheck {
    pub fn new(law: impl Into<String>, instance: impl Into<String>, seeds: Seeds) -> Self {
        LawCheck {
            law: law.into(),
            instance: instance.into(),
            seeds,
            cases: 0,
            passed: 0,
            counterexample: None,
            note: None,
            started: Instant::now(),
        }
    }

    pub fn record(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.cases += 1;
        if ok {
            self.passed += 1;
        } else if self.counterexample.is_none() {
            self.counterexample = Some(witness());
        }
    }

    pub fn pass_case(&mut self) {
        self.record(true, || Value::Null);
    }

    pub fn fail_case(&mut self, witness: Value) {
        self.record(false, || witness);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.note = Some(note.into());
    }

    pub fn finish(self) -> LawReport {
        let failures = self.cases - self.passed;
        LawReport {
            law: self.law,
            instance: self.instance,
            seeds: self.seeds,
            cases: self.cases,
            passed: self.passed,
            failures,
            pass: failures == 0,
            counterexample: self.counterexample,
            note: self.note,
            wall_time: self.started.elapsed(),
        }
    }
}
