use std::path::Path;
use std::process::{Command, Output};

use ahpc::codec::{encode, CodecConfig};
use ahpc::signal::{load_pcm, save_pcm, PcmFormat};
use ahpc::synth::SynthKind;

fn ahpc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ahpc"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .to_string()
}

fn write_input(dir: &Path) {
    save_pcm(&SynthKind::Voiced.signal(8000, 3), &dir.join("in.wav"), PcmFormat::Wav).unwrap();
}

#[test]
fn encode_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_input(d);

    let enc = ahpc(&["encode", "in.wav", "--out", "s.ahpc", "--nq", "4"], d);
    assert!(enc.status.success(), "{}", stderr(&enc));
    let out = stdout(&enc);
    assert_eq!(field(&out, "bits_per_sample"), "4.01");
    assert!(field(&out, "segsnr_db").parse::<f64>().unwrap() > 5.0);

    let dec = ahpc(&["decode", "s.ahpc", "--out", "out.wav"], d);
    assert!(dec.status.success(), "{}", stderr(&dec));
    assert_eq!(field(&stdout(&dec), "predictor"), "hybrid");
    assert!(field(&stdout(&dec), "digest").ends_with("(ok)"));

    // The decoded file holds the encoder's reconstruction, rounded to 12 bits.
    let input = load_pcm(&d.join("in.wav"), PcmFormat::Wav, 12).unwrap();
    let expected = encode(&input, &CodecConfig::default()).unwrap().reconstruction;
    let decoded = load_pcm(&d.join("out.wav"), PcmFormat::Wav, 12).unwrap();
    assert_eq!(decoded.len(), 8000);
    for (a, b) in decoded.samples().iter().zip(&expected) {
        assert!((a - b).abs() <= 0.5 / 2048.0 + 1e-12);
    }
}

#[test]
fn rates_per_predictor() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_input(d);
    for (nq, predictor, rate) in [("2", "hybrid", "2.01"), ("5", "hybrid", "5.01"), ("3", "lpc", "3")] {
        let o = ahpc(&["encode", "in.wav", "--out", "s", "--nq", nq, "--predictor", predictor], d);
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(field(&stdout(&o), "bits_per_sample"), rate);
    }
}

#[test]
fn raw_input_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    save_pcm(&SynthKind::Ar.signal(2000, 1), &d.join("in.raw"), PcmFormat::Raw16le).unwrap();
    let o = ahpc(
        &[
            "encode", "in.raw", "--out", "s", "--mode", "forward", "--predictor", "mlp",
            "--frame-len", "50", "--lpc-order", "25", "--seed", "7", "--epochs", "2", "--starts", "2",
        ],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    // The stream records non-default tunables, so decode needs the same ones.
    let o = ahpc(&["decode", "s", "--out", "o.raw"], d);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error[E_DIGEST]"));
}

#[test]
fn usage_errors_are_single_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_input(d);
    for args in [
        vec!["encode", "in.wav", "--out", "s", "--nq", "7"],
        vec!["encode", "in.wav", "--out", "s", "--lpc-order", "12"],
        vec!["encode", "in.wav", "--out", "s", "--predictor", "rnn"],
        vec!["frobnicate"],
    ] {
        let o = ahpc(&args, d);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = stderr(&o);
        assert!(err.starts_with("error[E_USAGE]: "), "{err}");
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    }
    assert!(stderr(&ahpc(&["encode", "in.wav", "--out", "s", "--nq", "7"], d)).contains("--nq"));
}

#[test]
fn runtime_errors_carry_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_input(d);
    assert!(ahpc(&["encode", "in.wav", "--out", "s.ahpc"], d).status.success());
    let bytes = std::fs::read(d.join("s.ahpc")).unwrap();

    std::fs::write(d.join("short.ahpc"), &bytes[..bytes.len() / 2]).unwrap();
    let o = ahpc(&["decode", "short.ahpc", "--out", "short.wav"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[E_TRUNCATED]"));
    assert!(!d.join("short.wav").exists());

    let mut bad = bytes.clone();
    bad[..4].copy_from_slice(b"RIFF");
    std::fs::write(d.join("bad.ahpc"), &bad).unwrap();
    let o = ahpc(&["decode", "bad.ahpc", "--out", "bad.wav"], d);
    assert_eq!(stderr(&o).trim_end(), "error[E_MAGIC]: not an AHPC stream");
    assert!(!d.join("bad.wav").exists());

    let o = ahpc(&["encode", "missing.wav", "--out", "s"], d);
    assert!(stderr(&o).starts_with("error[E_IO]"));

    let o = ahpc(&["encode", "in.wav", "--out", "s", "--predictor", "hybrid", "--lpc-order", "25"], d);
    assert!(stderr(&o).starts_with("error[E_CONFIG]"));

    save_pcm(&SynthKind::Ar.signal(250, 0), &d.join("tiny.wav"), PcmFormat::Wav).unwrap();
    let o = ahpc(&["sweep", "tiny.wav", "--out", "sweep.csv"], d);
    assert!(stderr(&o).starts_with("error[E_SHORT]"));
}

#[test]
fn synth_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = ahpc(&["synth", "--out", "corpus", "--count", "3", "--seconds", "0.5"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = ahpc(
        &["eval", "--manifest", "corpus/manifest.csv", "--out", "eval.csv", "--predictor", "lpc,hybrid", "--nq", "2,4"],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(d.join("eval.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("kind,label,mode,predictor,nq,frame_len,segsnr_db,std_db,mlp_usage_fraction"));
    // 3 files x 4 configs, then two aggregate rows per config.
    assert_eq!(lines.len(), 1 + 12 + 8);
    assert_eq!(lines.iter().filter(|l| l.starts_with("files,")).count(), 4);

    std::fs::write(d.join("empty.csv"), "# nothing\n").unwrap();
    let o = ahpc(&["eval", "--manifest", "empty.csv", "--out", "e.csv"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(d.join("e.csv")).unwrap().lines().count(), 1);

    std::fs::write(d.join("broken.csv"), "nope.wav,wav,12,x\n").unwrap();
    let o = ahpc(&["eval", "--manifest", "broken.csv", "--out", "e.csv"], d);
    assert!(stderr(&o).starts_with("error[E_MANIFEST]"));
}

#[test]
fn sweep_writes_thirty_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    save_pcm(&SynthKind::Ar.signal(1200, 0), &d.join("in.wav"), PcmFormat::Wav).unwrap();
    let o = ahpc(&["sweep", "in.wav", "--out", "sweep.csv", "--predictor", "lpc", "--starts", "1", "--epochs", "1"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(d.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "frame_len,lpc_db,mlp_db,hybrid_db");
    assert_eq!(lines.len(), 31);
    assert!(lines[1].starts_with("10,"));
    assert!(lines[30].starts_with("300,"));
}
