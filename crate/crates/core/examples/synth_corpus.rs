//! Write a synthetic corpus as WAV files plus a manifest, then load it back.
//!
//! cargo run --example synth_corpus [dir]

use std::fs;
use std::path::{Path, PathBuf};

use ahpc::eval::CorpusManifest;
use ahpc::signal::{load_pcm, save_pcm, PcmFormat};
use ahpc::synth::corpus;

pub fn main() {
    let dir = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("ahpc-synth-corpus"), PathBuf::from);
    run(&dir);
}

pub fn run(dir: &Path) {
    fs::create_dir_all(dir).unwrap();

    let mut manifest = String::from("# path,format,bit_depth,label\n");
    for s in corpus(8, 1.0, true, 0) {
        let name = format!("{}.wav", s.label);
        save_pcm(&s.signal, &dir.join(&name), PcmFormat::Wav).unwrap();
        manifest += &format!("{name},wav,{},{}\n", s.signal.source_bit_depth(), s.label);
    }
    fs::write(dir.join("manifest.csv"), &manifest).unwrap();

    let loaded = CorpusManifest::load(&dir.join("manifest.csv")).unwrap();
    for e in &loaded.entries {
        let s = load_pcm(&e.path, e.format, e.source_bit_depth).unwrap();
        let peak = s.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!("{:14} {:6} samples  peak {:.3}", e.label, s.len(), peak);
    }
    println!("wrote {}", dir.display());
}
