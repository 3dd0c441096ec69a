use maskforge::formats::{
    binary_mask_dump, load_model, parse_training_set, save_model, spectrogram_dump, training_set_dump, SavedModel,
};
use maskforge::manifest::Manifest;
use maskforge::synth::{synth_corpus, write_corpus, SynthConfig};
use maskforge::Error;
use maskforge_core::grid::Grid;
use maskforge_core::masking::BinaryMask;
use maskforge_core::mlp::{init_model, predict_masks, TrainingPair};
use maskforge_core::nmf::{Matrix, NmfModel};
use maskforge_core::patching::{extract_patches, PatchKind};
use maskforge_core::Source;

#[test]
fn models_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let dnn = SavedModel::Dnn(init_model(&[6, 4, 6], 3).unwrap());
    let nmf = SavedModel::Nmf(
        NmfModel::new(
            3,
            2,
            Matrix::from_col_major(6, 1, vec![0.1, 0.2, 0.3, 0.1, 0.2, 0.1]).unwrap(),
            Matrix::from_col_major(6, 2, (0..12).map(|i| i as f64 / 12.0).collect()).unwrap(),
        )
        .unwrap(),
    );
    for (name, model) in [("m.bin", &dnn), ("d.bin", &nmf)] {
        let path = dir.path().join(name);
        save_model(&path, model).unwrap();
        assert_eq!(&load_model(&path).unwrap(), model);
    }
    let path = dir.path().join("bad.bin");
    let mut bytes = dnn.to_bytes();
    bytes[0] = b'X';
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(load_model(&path).unwrap_err(), Error::File { .. }));
    std::fs::write(&path, &dnn.to_bytes()[..20]).unwrap();
    assert!(load_model(&path).is_err());
    assert!(matches!(load_model(dir.path().join("none.bin")).unwrap_err(), Error::NotFound { .. }));
}

#[test]
fn wrong_shaped_model_fails_at_prediction() {
    let SavedModel::Dnn(model) = SavedModel::from_bytes(&SavedModel::Dnn(init_model(&[6, 2, 6], 0).unwrap()).to_bytes()).unwrap() else {
        panic!("expected a network");
    };
    let set = extract_patches(&Grid::filled(4, 5, 0.5), 2, 1, PatchKind::MixtureInput).unwrap();
    assert!(predict_masks(&model, &set).is_err());
}

#[test]
fn dumps_have_headers_and_frame_major_bodies() {
    let grid = Grid::from_fn(2, 3, |b, t| (10 * t + b) as f64);
    let bytes = spectrogram_dump(&grid);
    assert_eq!(&bytes[..8], &[2, 0, 0, 0, 3, 0, 0, 0]);
    let body: Vec<f32> = bytes[8..].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    assert_eq!(body, vec![0.0, 1.0, 10.0, 11.0, 20.0, 21.0]);

    let mask = BinaryMask {
        values: Grid::from_vec(1, 3, vec![true, false, true]).unwrap(),
        source: Source::Vocal,
    };
    assert_eq!(binary_mask_dump(&mask), vec![1, 0, 0, 0, 3, 0, 0, 0, 1, 0, 1]);

    let pairs = vec![
        TrainingPair { input: vec![0.5, 0.25], target: vec![1.0, 0.0] },
        TrainingPair { input: vec![0.125, 1.0], target: vec![0.0, 1.0] },
    ];
    let dump = training_set_dump(1, 2, &pairs);
    assert_eq!(dump.len(), 12 + 2 * 4 * 4);
    assert_eq!(parse_training_set(&dump).unwrap(), (1, 2, pairs));
    assert!(parse_training_set(&dump[..dump.len() - 1]).is_err());
}

#[test]
fn manifest_round_trip_and_split() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynthConfig { sample_rate: 8000, duration_s: 0.25 };
    let songs = synth_corpus(5, 3, &cfg);
    write_corpus(dir.path(), &songs).unwrap();
    let manifest = Manifest::load(dir.path().join("manifest.json")).unwrap();
    assert_eq!(manifest.songs.len(), 3);
    assert!(manifest.songs[0].stems.iter().all(|s| s.path.is_relative()));
    let loaded = manifest.load_all().unwrap();
    for (a, b) in loaded.iter().zip(&songs) {
        assert_eq!(a.song_id, b.song_id);
        assert_eq!(a.stems.len(), b.stems.len());
        for (x, y) in a.stems.iter().zip(&b.stems) {
            assert_eq!(x.label, y.label);
            for (p, q) in x.audio.samples().iter().zip(y.audio.samples()) {
                assert_eq!(*p, *q as f32 as f64);
            }
        }
    }
    let (train, test) = manifest.split(2);
    assert_eq!(train.songs.len(), 2);
    assert_eq!(test.songs[0].id, manifest.songs[2].id);
    assert_eq!(manifest.split(10).1.songs.len(), 0);
}

#[test]
fn manifest_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, r#"{"songs":[{"id":"a","stems":[{"path":"x.wav","label":"drums"}]}]}"#).unwrap();
    assert!(matches!(Manifest::load(&path).unwrap_err(), Error::Manifest { .. }));
    std::fs::write(&path, r#"{"songs":[{"id":"a","stems":[{"path":"x.wav","label":"vocal"}]}]}"#).unwrap();
    let m = Manifest::load(&path).unwrap();
    let err = m.load_all().unwrap_err();
    assert!(err.to_string().contains("x.wav"), "{err}");
    std::fs::write(&path, r#"{"songs":[]}"#).unwrap();
    assert!(Manifest::load(&path).unwrap().load_all().is_err());
}
