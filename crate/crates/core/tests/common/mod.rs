#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wa_distill::data::{random_stochastic_wa, save_wa};
use wa_distill::fixtures::two_state_pfa;
use wa_distill::{Alphabet, BlackBox, WeightedAutomaton, Word};

pub fn random_target(states: usize, alphabet: usize, seed: u64) -> WeightedAutomaton {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_stochastic_wa(states, &Alphabet::new(alphabet).unwrap(), &mut rng).unwrap()
}

pub fn sample_strings(oracle: &dyn BlackBox, n: usize, max_len: usize, seed: u64) -> Vec<Word> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| oracle.sample(&mut rng, max_len).unwrap()).collect()
}

pub fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wa-distill"))
        .current_dir(dir)
        .args(args)
        .env_remove("WA_DISTILL_SEED")
        .output()
        .expect("binary runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn write_wa(dir: &Path, name: &str, wa: &WeightedAutomaton) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, save_wa(wa)).unwrap();
    path
}

pub fn write_two_state(dir: &Path) -> PathBuf {
    write_wa(dir, "two_state.wa", &two_state_pfa())
}
