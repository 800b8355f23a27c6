use apnforge::field::power_function;
use apnforge::io::{self, Format, Item};
use apnforge::orthoderiv::{od_signature, ODSignature};
use apnforge::store::{read_records, DedupStore, FunctionRecord, Provenance};
use apnforge::vecfun::{comp_space, random_ea, QuadSpace};
use apnforge::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn value_tables_round_trip() {
    let fs: Vec<_> = (3..=6).map(|n| power_function(n, 3).unwrap()).collect();
    let text = io::write_value_tables(&fs);
    let back: Vec<_> = io::parse(&text)
        .unwrap()
        .into_iter()
        .map(|i| i.into_function().unwrap())
        .collect();
    assert_eq!(back, fs);
}

#[test]
fn quad_bases_round_trip() {
    let ss: Vec<QuadSpace> = (4..=8)
        .map(|n| comp_space(&power_function(n, 3).unwrap()).unwrap())
        .collect();
    let text = io::write_quad_bases(&ss);
    let back: Vec<_> = io::parse(&text)
        .unwrap()
        .into_iter()
        .map(|i| i.into_space().unwrap())
        .collect();
    assert_eq!(back, ss);
}

#[test]
fn parse_errors_name_the_line() {
    let err = io::parse("#vt n=2 m=2\n0 1 2\n").unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    let err = io::parse("#qb n=4 dim=1\nzz\n").unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
}

#[test]
fn import_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cube.txt");
    let f = power_function(5, 3).unwrap();
    io::write_file(&path, &io::write_value_tables(&[f.clone()])).unwrap();
    assert_eq!(
        io::import_functions(&path, Format::ValueTable).unwrap(),
        vec![f.clone()]
    );
    assert!(matches!(
        io::read_file(&path).unwrap().as_slice(),
        [Item::Table(g)] if *g == f
    ));
    let missing = io::read_file(&dir.path().join("nope")).unwrap_err();
    assert!(matches!(missing, Error::Io { .. }));
}

#[test]
fn records_round_trip_through_json() {
    let f = power_function(4, 3).unwrap();
    let rec = FunctionRecord::from_function(&f, Provenance::imported());
    assert_eq!(rec.id, rec.expected_id());
    let back = FunctionRecord::from_json(&rec.to_json()).unwrap();
    assert_eq!(back, rec);
    assert_eq!(back.function().unwrap(), f);

    let s = comp_space(&f).unwrap();
    let rec = FunctionRecord::from_space(&s, Provenance::imported());
    assert_eq!(comp_space(&rec.function().unwrap()).unwrap(), s);
}

#[test]
fn od_signature_text_round_trip() {
    let sig = od_signature(&power_function(6, 3).unwrap()).unwrap();
    assert_eq!(ODSignature::parse(&sig.canonical_string()).unwrap(), sig);
}

#[test]
fn store_keeps_one_record_per_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cube = power_function(6, 3).unwrap();
    let store = DedupStore::new();
    assert!(store.insert(&cube, Provenance::imported()).unwrap());
    for _ in 0..10 {
        assert!(!store
            .insert(&random_ea(&cube, &mut rng), Provenance::imported())
            .unwrap());
    }
    // x^5 is not APN on F_2^6, so it has no ortho-derivative
    assert!(store
        .insert(&power_function(6, 5).unwrap(), Provenance::imported())
        .is_err());
    assert_eq!(store.len(), 1);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("db.jsonl");
    store.save(&path).unwrap();
    assert_eq!(read_records(&path).unwrap(), store.records());
    let loaded = DedupStore::load(&path).unwrap();
    assert_eq!(loaded.signatures(), store.signatures());
    assert!(DedupStore::load(&dir.path().join("absent.jsonl"))
        .unwrap()
        .is_empty());
}
