mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use common::Rng;
use perfseg::io::{
    decode_pgm, encode_image, encode_mask, load_image, load_mask, load_study, read_manifest, save_image,
    save_mask, save_study, MANIFEST_FILE,
};
use perfseg::phantom::{generate_phantom, write_phantom, PhantomSpec, Preset};
use perfseg::{Error, PerfusionStudy, SliceSeries};

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn image_and_mask_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = Rng::new(3);
    for i in 0..50 {
        let (w, h) = (rng.range(2, 30), rng.range(2, 30));
        let img = rng.image(w, h, u16::MAX);
        let p = dir.path().join(format!("i{i}.pgm"));
        save_image(&img, &p).unwrap();
        assert_eq!(load_image(&p).unwrap(), img);
        assert_eq!(fs::read(&p).unwrap(), encode_image(&img));

        let m = rng.mask(w, h, 0.5);
        let p = dir.path().join(format!("m{i}.pgm"));
        save_mask(&m, &p).unwrap();
        assert_eq!(load_mask(&p).unwrap(), m);
        assert_eq!(fs::read(&p).unwrap(), encode_mask(&m));
    }
}

#[test]
fn study_round_trip_is_byte_identical() {
    let mut rng = Rng::new(4);
    let slices = (0..3)
        .map(|s| {
            SliceSeries::new(s * 2, (0..5).map(|_| rng.image(9, 7, 4095)).collect()).unwrap()
        })
        .collect();
    let mut meta = BTreeMap::new();
    meta.insert("scanner".to_string(), "synthetic".to_string());
    let study = PerfusionStudy::new(slices, meta).unwrap();

    let a = tempfile::tempdir().unwrap();
    let manifest = save_study(&study, a.path(), 12).unwrap();
    let loaded = load_study(&manifest).unwrap();
    assert_eq!(loaded, study);

    let b = tempfile::tempdir().unwrap();
    save_study(&loaded, b.path(), 12).unwrap();
    assert_eq!(tree(a.path()), tree(b.path()));

    let text = fs::read_to_string(&manifest).unwrap();
    assert_eq!(read_manifest(&manifest).unwrap().to_json(), text);
}

#[test]
fn phantom_layout_round_trips() {
    for (preset, seed) in [(Preset::Default, 42), (Preset::Lesion, 7), (Preset::Noiseless, 0)] {
        let spec = PhantomSpec::preset(preset, 64, 64, 10, seed);
        let (study, truths) = generate_phantom(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_phantom(&study, &truths, dir.path()).unwrap();

        let files = tree(dir.path());
        assert!(files.contains_key(MANIFEST_FILE));
        for s in 0..spec.slices {
            assert!(files.contains_key(&format!("images/slice{s}_t0.pgm")));
            for kind in ["roi", "brain", "csf"] {
                assert!(files.contains_key(&format!("truth/{kind}_slice{s}.pgm")));
            }
        }

        let loaded = load_study(dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(loaded, study);
        for t in &truths {
            let roi = load_mask(dir.path().join(format!("truth/roi_slice{}.pgm", t.slice_index))).unwrap();
            assert_eq!(roi, t.roi_mask);
        }

        let again = tempfile::tempdir().unwrap();
        write_phantom(&loaded, &truths, again.path()).unwrap();
        assert_eq!(files, tree(again.path()));
    }
}

#[test]
fn load_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join(MANIFEST_FILE);
    assert!(matches!(load_study(&missing), Err(Error::Io { .. }) | Err(Error::ManifestParse { .. })));

    fs::write(&missing, "{\"version\": 2}").unwrap();
    assert!(matches!(load_study(&missing), Err(Error::ManifestParse { .. })));

    let bad = dir.path().join("bad.pgm");
    fs::write(&bad, b"P2\n2 2\n255\n0 0 0 0\n").unwrap();
    assert!(matches!(load_image(&bad), Err(Error::ImageDecode { .. })));
    assert!(decode_pgm(b"P5\n2 2\n255\n\x00\x00\x00").is_err());
}
