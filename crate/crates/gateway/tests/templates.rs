use gesturetext_gateway::templates::{render_prompt, GenerationRequest, TemplateId, ALL};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/templates")
}

fn sha(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

#[test]
fn stored_templates_match_golden_files() {
    let sums = std::fs::read_to_string(golden_dir().join("SHA256SUMS")).unwrap();
    assert_eq!(sums.lines().count(), 6);
    for line in sums.lines() {
        let (hash, file) = line.split_once("  ").unwrap();
        let name = file.trim_end_matches(".txt");
        let (_, text) = ALL.iter().find(|(n, _)| *n == name).unwrap_or_else(|| panic!("no template {name}"));
        let golden = std::fs::read(golden_dir().join(file)).unwrap();
        assert_eq!(text.as_bytes(), golden.as_slice(), "{name}");
        assert_eq!(sha(text), hash, "{name}");
    }
}

// digests computed from the golden files with an independent script
#[test]
fn rendered_prompts_hash_match() {
    let req = GenerationRequest::new(1, TemplateId::RewriteSentence, &[("sentence", "x"), ("type", "professional")]);
    let (system, _) = render_prompt(&req).unwrap();
    assert_eq!(sha(&system), "0e064781231d65964b6d27f5f0d132f2fcfa1b5e9d646a62b093f3271c6c037b");

    let req = GenerationRequest::new(
        2,
        TemplateId::CustomSentence,
        &[("sentence", "I will call you tomorrow."), ("prompt", "Make it sound more polite.")],
    );
    let (system, user) = render_prompt(&req).unwrap();
    assert_eq!(sha(&system), "bdc45b3775b45f55dc6645f952777efc1282e04531eb4bfe12c9372967c310c0");
    assert_eq!(sha(&user), "91c94eebbb79a3f9fe1a00f1e85586320bcdbc532943c41b1aa3f41cbb3e563d");

    let (system, _) = render_prompt(&GenerationRequest::extend(3, "P")).unwrap();
    assert_eq!(sha(&system), "ee8ee223a1eb112bf785736c423653515e5d4355f16d36508ebd3767b15ca98b");
    let (system, _) = render_prompt(&GenerationRequest::new(4, TemplateId::Synonym, &[("word", "w")])).unwrap();
    assert_eq!(sha(&system), "8d53d138183e2bd88773351543a7cbc19ea238c2738d001a90acf97200f384a9");
}
