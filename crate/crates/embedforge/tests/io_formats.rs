use std::collections::BTreeMap;
use std::path::Path;

use embedforge::io::*;
use embedforge::Error;
use embedforge_core::vocab::EmbeddingMatrix;
use embedforge_core::{Category, EmbeddingStore, Source, StsTargets, Triplet};
use proptest::prelude::*;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn triplet_lines_and_rejections() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "t.jsonl",
        concat!(
            r#"{"user-query":"q","positive-document":"p","hard-negative-document":"n"}"#, "\n",
            r#"{"user-query":"q2","hard-negative-document":"n"}"#, "\n",
            "\n",
            r#"{"user-query":"q3","positive-document":"p3","hard-negative-document":"n3","id":"x"}"#, "\n",
            "not json\n",
            r#"{"user-query":"q4","positive-document":"p4","hard-negative-document":"n4","extra":1}"#, "\n",
        ),
    );
    let set = load_triplets(&p, Some(Category::ShortLong)).unwrap();
    assert_eq!(set.triplets.len(), 3);
    assert_eq!(set.rejections.len(), 2);
    assert_eq!(set.rejections[0].line, 2);
    assert!(set.rejections[0].reason.starts_with("missing key"), "{}", set.rejections[0].reason);
    assert!(set.rejections[1].reason.starts_with("invalid JSON"));
    assert_eq!(set.triplets[0].id, "short-long-1");
    assert_eq!(set.triplets[1].id, "x");
    assert_eq!(set.triplets[0].negative.as_deref(), Some("n"));
}

#[test]
fn category_key_sets() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "t.jsonl",
        concat!(
            r#"{"category":"long-short","input-text":"great film","label":"positive","misleading-label":"negative"}"#, "\n",
            r#"{"category":"short-short","input":"a","positive-document":"b","hard-negative-document":"c"}"#, "\n",
            r#"{"category":"sts","S1":"a","S2":"b","S3":"c","high-score":4.5,"low-score":3}"#, "\n",
            r#"{"category":"sts","S1":"a","S2":"b","S3":"c"}"#, "\n",
            r#"{"category":"sts","S1":"a","S2":"b","S3":"c","high-score":3,"low-score":4}"#, "\n",
            r#"{"category":"nope","S1":"a"}"#, "\n",
        ),
    );
    let set = load_triplets(&p, None).unwrap();
    assert_eq!(set.triplets.len(), 3);
    assert_eq!(set.rejections.iter().map(|r| r.line).collect::<Vec<_>>(), vec![4, 5, 6]);
    assert_eq!(set.triplets[2].sts, Some(StsTargets { high: 4.5, low: 3.0 }));
    assert_eq!(set.triplets[0].positive, "positive");
}

#[test]
fn missing_file_is_reported() {
    let err = load_triplets(Path::new("/nonexistent/t.jsonl"), None).unwrap_err();
    assert_eq!(err.kind(), "FileMissing");
}

#[test]
fn nfc_normalization_on_load() {
    let dir = tempfile::tempdir().unwrap();
    // "e" followed by a combining acute accent.
    let p = write(dir.path(), "t.jsonl", "{\"input\":\"cafe\u{301}\",\"positive-document\":\"p\",\"hard-negative-document\":\"n\"}\n");
    let set = load_triplets(&p, Some(Category::LongLong)).unwrap();
    assert_eq!(set.triplets[0].query, "caf\u{e9}");
}

fn arb_text() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 ,.é\"\\\\]{1,20}".prop_filter("non-blank", |s| !s.trim().is_empty())
}

fn arb_triplet() -> impl Strategy<Value = Triplet> {
    (0usize..5, arb_text(), arb_text(), arb_text(), 0usize..3, 0usize..3, "[a-z]{1,8}").prop_map(
        |(c, q, p, n, hi, lo, id)| {
            let category = Category::ALL[c];
            let sts = (category == Category::Sts).then(|| StsTargets { high: [4.0, 4.5, 5.0][hi], low: [2.5, 3.0, 3.5][lo] });
            let mut meta = BTreeMap::new();
            meta.insert("model".to_string(), "m".to_string());
            Triplet { id, category, query: q, positive: p, negative: Some(n), sts, source: Source::Synthetic, meta }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triplet_round_trip(ts in proptest::collection::vec(arb_triplet(), 0..12)) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.jsonl");
        write_triplets(&p, &ts).unwrap();
        let back = load_triplets(&p, None).unwrap();
        prop_assert!(back.rejections.is_empty());
        prop_assert_eq!(back.triplets, ts);
    }

    #[test]
    fn loader_never_emits_invalid(lines in proptest::collection::vec(
        prop_oneof![
            Just(r#"{"user-query":"","positive-document":"p","hard-negative-document":"n"}"#.to_string()),
            Just(r#"{"user-query":"q","positive-document":" ","hard-negative-document":"n"}"#.to_string()),
            Just(r#"{"user-query":"q","positive-document":"p"}"#.to_string()),
            Just(r#"{"user-query":1,"positive-document":"p","hard-negative-document":"n"}"#.to_string()),
            Just(r#"["user-query"]"#.to_string()),
            Just(r#"{"user-query":"q","positive-document":"p","hard-negative-document":"n"}"#.to_string()),
            "[ -~]{0,30}",
        ], 0..20)) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.jsonl");
        std::fs::write(&p, lines.join("\n")).unwrap();
        let set = load_triplets(&p, Some(Category::ShortLong)).unwrap();
        for t in &set.triplets {
            prop_assert!(t.validate().is_ok());
        }
        let non_blank = lines.iter().filter(|l| !l.trim().is_empty()).count();
        prop_assert_eq!(set.triplets.len() + set.rejections.len(), non_blank);
    }

    #[test]
    fn packed_round_trip_is_bit_exact(
        dim in 1usize..6,
        entries in proptest::collection::btree_map("[a-z0-9é]{0,6}", proptest::collection::vec(-1e6f32..1e6, 6), 0..10),
    ) {
        let mut store = EmbeddingStore::new(dim).unwrap();
        for (id, v) in &entries {
            store.insert(id.clone(), v[..dim].to_vec()).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.emb");
        write_packed(&p, &store).unwrap();
        prop_assert_eq!(std::fs::metadata(&p).unwrap().len(), packed_len(&store));
        let back = read_embeddings(&p).unwrap();
        prop_assert_eq!(back.dim(), dim);
        for ((a, va), (b, vb)) in store.iter().zip(back.iter()) {
            prop_assert_eq!(a, b);
            prop_assert_eq!(va.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), vb.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        }
        let j = dir.path().join("e.jsonl");
        if !store.is_empty() {
            write_jsonl_embeddings(&j, &store).unwrap();
            prop_assert_eq!(read_embeddings(&j).unwrap(), store);
        }
    }
}

#[test]
fn packed_examples() {
    let mut store = EmbeddingStore::new(2).unwrap();
    store.insert("a", vec![1.0, 0.0]).unwrap();
    store.insert("b", vec![0.0, 1.0]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("e.emb");
    write_packed(&p, &store).unwrap();
    // 16 header bytes + 2 × (4 + 1 + 8).
    assert_eq!(std::fs::metadata(&p).unwrap().len(), 42);
    assert_eq!(read_packed(&p).unwrap(), store);

    let bad = write(dir.path(), "bad.jsonl", "{\"id\":\"a\",\"vector\":[1,0,0]}\n{\"id\":\"b\",\"vector\":[1,0]}\n");
    assert!(matches!(read_embeddings(&bad), Err(Error::Core(embedforge_core::Error::DimensionMismatch { expected: 3, found: 2 }))));

    let bytes = std::fs::read(&p).unwrap();
    let trunc = dir.path().join("trunc.emb");
    std::fs::write(&trunc, &bytes[..bytes.len() - 3]).unwrap();
    assert_eq!(read_embeddings(&trunc).unwrap_err().kind(), "CorruptHeader");
    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    let bm = dir.path().join("bm.emb");
    std::fs::write(&bm, &bad_magic).unwrap();
    assert_eq!(read_packed(&bm).unwrap_err().kind(), "CorruptHeader");
}

#[test]
fn retrieval_collection_loading() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "corpus.jsonl", "{\"_id\":\"d1\",\"title\":\"T\",\"text\":\"one\"}\n{\"_id\":\"d2\",\"text\":\"two\"}\n");
    write(dir.path(), "queries.jsonl", "{\"_id\":\"q1\",\"text\":\"query\"}\n");
    write(dir.path(), "qrels.tsv", "q1\td1\t1\n");
    let c = load_retrieval_collection(dir.path()).unwrap();
    assert_eq!(c.judged_pairs(), 1);
    assert_eq!(c.corpus["d1"], "T one");

    write(dir.path(), "qrels.tsv", "q1\td1\t2\n");
    assert_eq!(load_retrieval_collection(dir.path()).unwrap().qrels["q1"]["d1"], 2);

    write(dir.path(), "qrels.tsv", "q1\td9\t1\n");
    let err = load_retrieval_collection(dir.path()).unwrap_err();
    assert!(matches!(&err, Error::Core(embedforge_core::Error::DanglingReference(id)) if id == "d9"), "{err}");

    write(dir.path(), "qrels.tsv", "q1\td1\t-1\n");
    assert_eq!(load_retrieval_collection(dir.path()).unwrap_err().kind(), "Parse");

    std::fs::remove_file(dir.path().join("queries.jsonl")).unwrap();
    assert_eq!(load_retrieval_collection(dir.path()).unwrap_err().kind(), "FileMissing");
}

#[test]
fn collection_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = embedforge_core::RetrievalCollection::default();
    c.corpus.insert("d1".into(), "alpha".into());
    c.corpus.insert("d2".into(), "beta".into());
    c.queries.insert("q".into(), "a query".into());
    c.qrels.entry("q".into()).or_default().insert("d2".into(), 3);
    write_retrieval_collection(dir.path(), &c).unwrap();
    assert_eq!(load_retrieval_collection(dir.path()).unwrap(), c);
}

#[test]
fn matrix_round_trip_and_corruption() {
    let m = EmbeddingMatrix::new(vec!["<s>".into(), "de".into(), "het".into()], 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.vmat");
    write_matrix(&p, &m).unwrap();
    assert_eq!(read_matrix(&p).unwrap(), m);
    let bytes = std::fs::read(&p).unwrap();
    std::fs::write(&p, &bytes[..bytes.len() - 1]).unwrap();
    assert_eq!(read_matrix(&p).unwrap_err().kind(), "CorruptHeader");
}

#[test]
fn teacher_run_formats() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "run.trec", "q1\td1\t0.9\nq1 Q0 d2 2 0.5 teacher\n");
    let run = load_teacher_run(&p).unwrap();
    assert_eq!(run["q1"]["d1"], 0.9);
    assert_eq!(run["q1"]["d2"], 0.5);
    let bad = write(dir.path(), "bad.trec", "q1\td1\n");
    assert_eq!(load_teacher_run(&bad).unwrap_err().kind(), "Parse");
}

#[test]
fn loss_curve_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("loss.csv");
    let losses = vec![1.5, 0.25, 1e-7];
    write_loss_curve(&p, &losses).unwrap();
    assert!(std::fs::read_to_string(&p).unwrap().starts_with("batch_index,loss\n0,1.5\n"));
    assert_eq!(read_loss_curve(&p).unwrap(), losses);
}

#[test]
fn labeled_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "q.jsonl", "{\"query\":\"x\",\"labels\":[[\"B\",0.2],[\"A\",0.7]]}\n");
    let qs = load_labeled_queries(&p).unwrap();
    assert_eq!(qs[0].labels[0].0, "A");
    let e = write(dir.path(), "e.jsonl", "{\"id\":\"1\",\"text\":\"t\",\"label\":\"pos\"}\n{\"id\":\"2\",\"text\":\"t\",\"labels\":[\"a\",\"b\"]}\n");
    let ex = load_labeled_examples(&e).unwrap();
    assert_eq!(ex[0].labels, vec!["pos"]);
    assert_eq!(ex[1].labels.len(), 2);
    let dup = write(dir.path(), "d.jsonl", "{\"id\":\"1\",\"text\":\"t\",\"labels\":[\"a\",\"a\"]}\n");
    assert_eq!(load_labeled_examples(&dup).unwrap_err().kind(), "Parse");
}
