use std::path::Path;

use driveaware::eval::{EvalConfig, Extractor};
use driveaware::session::synth::{synth_dataset, synth_session, SynthConfig};
use driveaware::session::{load_session, Task, CHANNEL_NAMES};

fn small(task: Task, seed: u64) -> SynthConfig {
    SynthConfig {
        n_subjects: 3,
        trials_per_subject: 4,
        task,
        duration_s: if task == Task::Attention { Some(3.0) } else { None },
        seed,
        ..SynthConfig::default()
    }
}

#[test]
fn written_session_loads_back_identically() {
    let dir = tempfile::tempdir().unwrap();
    for task in [Task::Attention, Task::Hazard] {
        let cfg = small(task, 21);
        let out = dir.path().join(format!("{task:?}"));
        synth_dataset(&cfg, &out).unwrap();
        let memory = synth_session(&cfg).unwrap().dataset();
        let (manifest, loaded) = load_session(&out.join("manifest.json")).unwrap();
        assert_eq!(manifest.dataset_seed, Some(21));
        assert_eq!(loaded.trials.len(), memory.trials.len());

        let ex = Extractor::new(&EvalConfig::default()).unwrap();
        for (a, b) in memory.trials.iter().zip(&loaded.trials) {
            assert_eq!(a.entry.trial_id, b.entry.trial_id);
            assert_eq!(a.entry.label, b.entry.label);
            assert_eq!(a.eeg.channels, b.eeg.channels, "{}", a.entry.trial_id);
            assert_eq!(a.landmarks, b.landmarks, "{}", a.entry.trial_id);
            assert_eq!(ex.eeg_block(a).unwrap(), ex.eeg_block(b).unwrap());
            assert_eq!(ex.face_block(a).unwrap(), ex.face_block(b).unwrap());
        }
    }
}

#[test]
fn per_subject_counts_cover_every_trial() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(&small(Task::Hazard, 3), dir.path()).unwrap();
    let counts = manifest.per_subject_counts();
    assert_eq!(counts.len(), 3);
    assert!(counts.values().all(|&c| c == 4));
    assert_eq!(counts.values().sum::<usize>(), manifest.trials.len());
}

fn rewrite_columns(path: &Path, order: &[usize]) {
    let text = std::fs::read_to_string(path).unwrap();
    let out: Vec<String> = text
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            order.iter().map(|&i| f[i]).collect::<Vec<_>>().join(",")
        })
        .collect();
    std::fs::write(path, out.join("\n") + "\n").unwrap();
}

#[test]
fn eeg_columns_may_come_in_any_order() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(&small(Task::Attention, 4), dir.path()).unwrap();
    let (_, before) = load_session(&dir.path().join("manifest.json")).unwrap();
    let order: Vec<usize> = (0..CHANNEL_NAMES.len()).rev().collect();
    for t in &manifest.trials {
        rewrite_columns(&manifest.resolve(&t.eeg_path), &order);
    }
    let (_, after) = load_session(&dir.path().join("manifest.json")).unwrap();
    for (a, b) in before.trials.iter().zip(&after.trials) {
        assert_eq!(a.eeg.channels, b.eeg.channels);
    }
}

#[test]
fn load_errors_name_the_trial() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(&small(Task::Hazard, 5), dir.path()).unwrap();
    let victim = &manifest.trials[5];

    let eeg = manifest.resolve(&victim.eeg_path);
    let keep: Vec<usize> = (1..CHANNEL_NAMES.len()).collect();
    rewrite_columns(&eeg, &keep);
    let err = load_session(&dir.path().join("manifest.json")).unwrap_err().to_string();
    assert!(err.contains(&victim.trial_id), "{err}");
    assert!(err.contains("eeg_path") && err.contains(CHANNEL_NAMES[0]), "{err}");

    std::fs::remove_file(&eeg).unwrap();
    let err = load_session(&dir.path().join("manifest.json")).unwrap_err().to_string();
    assert!(err.contains(&victim.trial_id) && err.contains("file not found"), "{err}");
}
