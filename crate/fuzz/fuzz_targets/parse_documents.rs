#![no_main]

use libfuzzer_sys::fuzz_target;
use pfreg::evaluation::{BenchReport, EvalReport, OrderedCorpusConfig, SyntheticConfig};
use pfreg::io::from_json;
use pfreg::RegistrationResult;
use pfreg_cli::ConfigFile;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = from_json::<RegistrationResult>(text);
    let _ = from_json::<EvalReport>(text);
    let _ = from_json::<BenchReport>(text);
    let _ = from_json::<OrderedCorpusConfig>(text);
    if let Ok(cfg) = from_json::<SyntheticConfig>(text) {
        let _ = cfg.validate();
    }
    if let Ok(cfg) = from_json::<ConfigFile>(text) {
        let _ = cfg.matcher.validate();
    }
});
