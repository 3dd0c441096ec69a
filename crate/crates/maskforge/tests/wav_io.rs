use hound::{SampleFormat, WavSpec, WavWriter};
use maskforge::wav::{read_wav, write_wav, WavEncoding};
use maskforge::Error;
use maskforge_core::audio::AudioBuffer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec(channels: u16, bits: u16, format: SampleFormat) -> WavSpec {
    WavSpec {
        channels,
        sample_rate: 44_100,
        bits_per_sample: bits,
        sample_format: format,
    }
}

#[test]
fn one_second_of_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.wav");
    let mut w = WavWriter::create(&path, spec(1, 16, SampleFormat::Int)).unwrap();
    for _ in 0..44_100 {
        w.write_sample(0i16).unwrap();
    }
    w.finalize().unwrap();
    let b = read_wav(&path).unwrap();
    assert_eq!(b.len(), 44_100);
    assert_eq!(b.sample_rate(), 44_100);
    assert!(b.samples().iter().all(|&s| s == 0.0));
}

#[test]
fn opposite_stereo_channels_cancel() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.wav");
    let mut w = WavWriter::create(&path, spec(2, 16, SampleFormat::Int)).unwrap();
    for i in 0..1000i32 {
        let x = ((i * 37) % 20_000 - 10_000) as i16;
        w.write_sample(x).unwrap();
        w.write_sample(-x).unwrap();
    }
    w.finalize().unwrap();
    let b = read_wav(&path).unwrap();
    assert_eq!(b.len(), 1000);
    assert!(b.samples().iter().all(|&s| s == 0.0));
}

#[test]
fn integer_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let p16 = dir.path().join("sq16.wav");
    let mut w = WavWriter::create(&p16, spec(1, 16, SampleFormat::Int)).unwrap();
    for _ in 0..64 {
        w.write_sample(i16::MAX).unwrap();
    }
    w.finalize().unwrap();
    assert!(read_wav(&p16).unwrap().samples().iter().all(|&s| s == 32767.0 / 32768.0));

    let p24 = dir.path().join("sq24.wav");
    let mut w = WavWriter::create(&p24, spec(1, 24, SampleFormat::Int)).unwrap();
    for v in [8_388_607i32, -8_388_608, 0] {
        w.write_sample(v).unwrap();
    }
    w.finalize().unwrap();
    assert_eq!(read_wav(&p24).unwrap().samples(), &[8_388_607.0 / 8_388_608.0, -1.0, 0.0]);
}

#[test]
fn round_trips_on_random_buffers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.wav");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let len = rng.gen_range(0..200);
        // Float output is lossless for f32-representable samples.
        let samples: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0f32..1.0) as f64).collect();
        let b = AudioBuffer::new(samples, 22_050).unwrap();
        write_wav(&path, &b, WavEncoding::Float32).unwrap();
        assert_eq!(read_wav(&path).unwrap(), b);

        let samples: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let b = AudioBuffer::new(samples, 22_050).unwrap();
        write_wav(&path, &b, WavEncoding::Pcm16).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.len(), b.len());
        for (x, y) in back.samples().iter().zip(b.samples()) {
            assert!((x - y).abs() <= 1.0 / 32768.0);
        }
    }
}

#[test]
fn zero_buffer_decodes_to_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.wav");
    let b = AudioBuffer::silence(300, 8000).unwrap();
    write_wav(&path, &b, WavEncoding::Pcm16).unwrap();
    assert_eq!(read_wav(&path).unwrap(), b);
}

#[test]
fn errors_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.wav");
    let err = read_wav(&missing).unwrap_err();
    assert!(matches!(err, Error::NotFound { .. }));
    assert!(err.to_string().contains("missing.wav"));

    let garbage = dir.path().join("garbage.wav");
    std::fs::write(&garbage, b"RIFF\x10\x00\x00\x00WAVEjunkjunkjunk").unwrap();
    assert!(matches!(read_wav(&garbage).unwrap_err(), Error::MalformedWav { .. }));

    let eight = dir.path().join("eight.wav");
    let mut w = WavWriter::create(&eight, spec(1, 8, SampleFormat::Int)).unwrap();
    w.write_sample(3i8).unwrap();
    w.finalize().unwrap();
    assert!(matches!(read_wav(&eight).unwrap_err(), Error::UnsupportedWav { .. }));

    let b = AudioBuffer::silence(4, 8000).unwrap();
    let unwritable = dir.path().join("no_such_dir").join("x.wav");
    assert!(write_wav(&unwritable, &b, WavEncoding::Float32).is_err());
}
