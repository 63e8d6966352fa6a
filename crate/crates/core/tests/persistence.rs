use reaction_sentiment::annotate::{ReactionCounts, SentimentLabel};
use reaction_sentiment::baseline::{
    fit_core, fit_star, predict_core, predict_star, StarModel, TokenReactionTable,
};
use reaction_sentiment::corpus::{load_corpus, save_corpus, Corpus, LoadOptions, RawPost};
use reaction_sentiment::embeddings::{load_pretrained, EmbeddingMatrix, Vocabulary, OOV};
use reaction_sentiment::neural::{Classifier, EmbeddingSetup, ModelSpec};
use reaction_sentiment::normalize::Stopwords;
use reaction_sentiment::persist::ModelFile;
use reaction_sentiment::records::{ArtifactMeta, LabeledPost};

fn tokens(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

fn meta() -> ArtifactMeta {
    ArtifactMeta {
        kind: "model".into(),
        seed: 4,
        config_digest: "ab".repeat(32),
    }
}

#[test]
fn neural_model_survives_disk() {
    let dir = tempfile::tempdir().unwrap();
    let vocab = Vocabulary::from_tokens(tokens("අබ කහ ගම"));
    let setup = EmbeddingSetup {
        matrix: EmbeddingMatrix::random(vocab.len(), 5, 1),
        vocab,
        max_len: 8,
    };
    let spec: ModelSpec = "bigru-2".parse().unwrap();
    let model = Classifier::new(spec.with_hidden(3), setup, 2).unwrap();
    let path = dir.path().join("m.model.jsonl");
    model.to_file(Some(meta())).unwrap().save(&path).unwrap();
    let file = ModelFile::load(&path).unwrap();
    assert_eq!(file.header.meta, Some(meta()));
    let back = Classifier::from_file(&file).unwrap();
    let docs = vec![tokens("අබ කහ"), tokens("ගම නැත"), vec![]];
    assert_eq!(back.predict_proba(&docs), model.predict_proba(&docs));
}

#[test]
fn baselines_survive_disk() {
    let dir = tempfile::tempdir().unwrap();
    let post = |t: &str, sen: f64, d: [f64; 4]| LabeledPost {
        post_id: t.into(),
        tokens: tokens(t),
        sen,
        label: SentimentLabel::from_sen(sen),
        distribution: Some(d),
    };
    let train = vec![
        post("අබ කහ", 1.0, [1.0, 0.0, 0.0, 0.0]),
        post("ගම කහ", -0.5, [0.25, 0.0, 0.75, 0.0]),
    ];
    let core = fit_core(&train).unwrap();
    let star = fit_star(&train).unwrap();
    let core_path = dir.path().join("core.jsonl");
    let star_path = dir.path().join("star.jsonl");
    core.to_file(None).unwrap().save(&core_path).unwrap();
    star.to_file(None).unwrap().save(&star_path).unwrap();
    let core_back = TokenReactionTable::from_file(&ModelFile::load(&core_path).unwrap()).unwrap();
    let star_back = StarModel::from_file(&ModelFile::load(&star_path).unwrap()).unwrap();
    for doc in [tokens("අබ"), tokens("ගම"), tokens("නොදත්")] {
        assert_eq!(predict_core(&doc, &core_back), predict_core(&doc, &core));
        assert_eq!(predict_star(&doc, &star_back), predict_star(&doc, &star));
    }
    assert!(StarModel::from_file(&ModelFile::load(&core_path).unwrap()).is_err());
}

#[test]
fn corpus_stopwords_and_vectors_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = Corpus::new(
        vec![RawPost {
            post_id: "1".into(),
            page_id: "p".into(),
            created_time: "2019-01-01".into(),
            message: "අබ\tකහ".into(),
            reactions: ReactionCounts::considered(3, 0, 1, 0),
        }],
        "mem",
    )
    .unwrap();
    let corpus_path = dir.path().join("c.tsv");
    save_corpus(&corpus_path, &corpus, b'\t').unwrap();
    let opts = LoadOptions {
        delimiter: b'\t',
        ..LoadOptions::default()
    };
    assert_eq!(
        load_corpus(&corpus_path, opts).unwrap().corpus.posts,
        corpus.posts
    );

    let stop_path = dir.path().join("stop.txt");
    std::fs::write(&stop_path, "සහ\n\nද\n").unwrap();
    let stop = Stopwords::from_path(&stop_path).unwrap();
    assert_eq!(stop.len(), 2);
    assert!(stop.contains("ද"));

    let vec_path = dir.path().join("v.txt");
    std::fs::write(&vec_path, "2 3\nඅබ 1 2 3\nදුර 3 2 1\n").unwrap();
    let vocab = Vocabulary::from_tokens(tokens("අබ කහ"));
    let (m, report) = load_pretrained(&vec_path, &vocab, None, 0).unwrap();
    assert_eq!((report.file_rows, report.found, report.missing), (2, 1, 1));
    assert_eq!(m.row(vocab.id("අබ")), &[1.0, 2.0, 3.0]);
    assert_eq!(m.row(OOV), &[2.0, 2.0, 2.0]);
}
