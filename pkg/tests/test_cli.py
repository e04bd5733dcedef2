import json

import numpy as np
import pytest

from lexcat.cli import main
from lexcat.dictionary import load_dictionary
from lexcat.embedding import EmbeddingStore, write_embedding_store
from lexcat.featfile import read_feature_matrix, read_features

LEXICON_TSV = "happy\thappy\tjoy*\tglad\nsad\tsad\tcry*\tgloomy\nsocial\tfriend*\tparty\ttalk\n"
SENTENCES = [
    "I am happy today",
    "my friend throws a party",
    "nothing to see here",
    "sad and gloomy weather",
]


@pytest.fixture
def workdir(tmp_path):
    (tmp_path / "lex.tsv").write_text(LEXICON_TSV, encoding="utf-8")
    (tmp_path / "sentences.txt").write_text("\n".join(SENTENCES) + "\n", encoding="utf-8")
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    payload = json.loads(captured.out) if captured.out.strip() else None
    return code, payload, captured.err


def build_dict(capsys, workdir, name="dict.scdi", **overrides):
    args = {
        "--lexicon": workdir / "lex.tsv",
        "--provider": "pseudo:7",
        "--dim": 12,
        "--out": workdir / name,
        "--seed": 7,
    }
    args.update(overrides)
    argv = ["build-dict"]
    for k, v in args.items():
        argv += [k, v]
    return run(capsys, *argv)


class TestBuildDict:
    def test_word_mode_summary(self, capsys, workdir):
        code, payload, _ = build_dict(capsys, workdir)
        assert code == 0
        assert payload["categories"] == 3
        assert payload["dim"] == 12
        assert payload["fallback_categories"] == []
        assert payload["items_per_category"] == {"happy": 3, "sad": 3, "social": 3}
        assert payload["seed"] == 7 and payload["provider"] == "pseudo:7"
        assert len(payload["config_hash"]) == 16
        d = load_dictionary(workdir / "dict.scdi")
        assert d.categories == ("happy", "sad", "social")
        assert all(c.shape == (1, 12) for c in d.centroids)

    def test_reference_mode_empty_corpus_falls_back(self, capsys, workdir):
        (workdir / "corpus.txt").write_text("\n")
        code, payload, err = build_dict(capsys, workdir, **{
            "--mode": "reference", "--corpus": workdir / "corpus.txt"})
        assert code == 0
        assert payload["fallback_categories"] == ["happy", "sad", "social"]
        assert "fell back" in err

    def test_multi_centroid(self, capsys, workdir):
        code, _, _ = build_dict(capsys, workdir, **{"--centroids": 2})
        assert code == 0
        d = load_dictionary(workdir / "dict.scdi")
        assert all(c.shape == (2, 12) for c in d.centroids)

    def test_malformed_lexicon_exit_2(self, capsys, workdir):
        (workdir / "bad.dic").write_text("happy\t1\n")
        code, _, err = run(capsys, "build-dict", "--lexicon", workdir / "bad.dic",
                           "--provider", "pseudo:0", "--dim", 4,
                           "--out", workdir / "x.scdi")
        assert code == 2
        assert "line 1" in err

    def test_missing_store_key_exit_3(self, capsys, workdir):
        store = EmbeddingStore(3, {"happy": [1.0, 0.0, 0.0]})
        write_embedding_store(store, workdir / "vecs.embs")
        code, _, err = build_dict(capsys, workdir, **{
            "--provider": f"store:{workdir / 'vecs.embs'}", "--dim": 3})
        assert code == 3
        assert "glad" in err or "joy" in err

    def test_pseudo_without_dim_exit_2(self, capsys, workdir):
        code, _, err = run(capsys, "build-dict", "--lexicon", workdir / "lex.tsv",
                           "--provider", "pseudo:1", "--out", workdir / "x.scdi")
        assert code == 2
        assert "--dim" in err or "dim" in err

    def test_unknown_provider_exit_2(self, capsys, workdir):
        code, _, err = run(capsys, "build-dict", "--lexicon", workdir / "lex.tsv",
                           "--provider", "magic:1", "--out", workdir / "x.scdi")
        assert code == 2
        assert "provider" in err

    def test_keep_list(self, capsys, workdir):
        (workdir / "keep.txt").write_text("happy\nsad\n")
        code, payload, _ = build_dict(capsys, workdir, **{"--keep": workdir / "keep.txt"})
        assert code == 0
        assert payload["categories"] == 2


class TestEncode:
    def encode(self, capsys, workdir, out="feats.csv", **overrides):
        args = {
            "--dictionary": workdir / "dict.scdi",
            "--provider": "pseudo:7",
            "--input": workdir / "sentences.txt",
            "--out": workdir / out,
            "--seed": 7,
        }
        args.update(overrides)
        argv = ["encode"]
        for k, v in args.items():
            argv += [k, v]
        return run(capsys, *argv)

    def test_feature_file_written(self, capsys, workdir):
        build_dict(capsys, workdir)
        code, payload, _ = self.encode(capsys, workdir)
        assert code == 0
        assert payload["rows"] == 4
        meta, cats, ids, matrix = read_features(workdir / "feats.csv")
        assert cats == ("happy", "sad", "social")
        assert ids == ["0", "1", "2", "3"]
        assert matrix.shape == (4, 3)
        assert np.all(matrix >= -1.0) and np.all(matrix <= 1.0)
        assert meta["method"] == "centroid"
        assert meta["provider"] == "pseudo:7"
        assert meta["seed"] == "7"
        assert "config_hash" in meta

    def test_binary_output_losslessly_matches(self, capsys, workdir):
        build_dict(capsys, workdir)
        self.encode(capsys, workdir, **{"--binary-out": workdir / "feats.embs"})
        _, cats_t, ids_t, text_matrix = read_features(workdir / "feats.csv")
        _, cats_b, ids_b, bin_matrix = read_feature_matrix(workdir / "feats.embs")
        assert cats_t == cats_b and ids_t == ids_b
        np.testing.assert_allclose(text_matrix, bin_matrix, atol=1e-6)

    def test_rerun_byte_identical(self, capsys, workdir):
        build_dict(capsys, workdir)
        self.encode(capsys, workdir, out="a.csv")
        self.encode(capsys, workdir, out="b.csv")
        a = (workdir / "a.csv").read_bytes()
        b = (workdir / "b.csv").read_bytes()
        # output path participates in the config hash; compare data lines
        strip = lambda raw: [ln for ln in raw.splitlines() if not ln.startswith(b"# config")]
        assert strip(a) == strip(b)

    def test_worker_count_invariant(self, capsys, workdir):
        build_dict(capsys, workdir)
        self.encode(capsys, workdir, out="w1.csv", **{"--workers": 1})
        self.encode(capsys, workdir, out="w8.csv", **{"--workers": 8})
        strip = lambda raw: [ln for ln in raw.splitlines() if not ln.startswith(b"# config")]
        assert strip((workdir / "w1.csv").read_bytes()) == strip((workdir / "w8.csv").read_bytes())

    def test_dim_mismatch_exit_2(self, capsys, workdir):
        build_dict(capsys, workdir)
        code, _, err = self.encode(capsys, workdir, **{"--dim": 5})
        assert code == 2
        assert "dim" in err


class TestBaseline:
    def test_bow_zero_row_for_unmatched(self, capsys, workdir):
        code, payload, _ = run(
            capsys, "baseline", "--lexicon", workdir / "lex.tsv", "--method", "bow",
            "--input", workdir / "sentences.txt", "--out", workdir / "bow.csv")
        assert code == 0
        assert payload["method"] == "bow"
        _, cats, ids, matrix = read_features(workdir / "bow.csv")
        np.testing.assert_allclose(matrix[2], [0.0, 0.0, 0.0])  # "nothing to see here"
        np.testing.assert_allclose(matrix[0], [1.0, 0.0, 0.0])

    def test_bow_normalized(self, capsys, workdir):
        run(capsys, "baseline", "--lexicon", workdir / "lex.tsv", "--method", "bow",
            "--normalize", "--input", workdir / "sentences.txt",
            "--out", workdir / "bown.csv")
        _, _, _, matrix = read_features(workdir / "bown.csv")
        np.testing.assert_allclose(matrix[0], [0.25, 0.0, 0.0])  # 1 hit / 4 tokens

    def test_softmatch_requires_store(self, capsys, workdir):
        code, _, err = run(
            capsys, "baseline", "--lexicon", workdir / "lex.tsv", "--method",
            "softmatch", "--provider", "pseudo:1",
            "--input", workdir / "sentences.txt", "--out", workdir / "s.csv")
        assert code == 2
        assert "store" in err

    def test_softmatch_with_store(self, capsys, workdir):
        store = EmbeddingStore(3, {
            "happy": [1.0, 0.0, 0.0],
            "sad": [0.0, 1.0, 0.0],
            "joyous": [0.9, 0.1, np.sqrt(1 - 0.82)],
        })
        write_embedding_store(store, workdir / "w.embs")
        (workdir / "one.txt").write_text("joyous\n")
        code, payload, err = run(
            capsys, "baseline", "--lexicon", workdir / "lex.tsv", "--method",
            "softmatch", "--provider", f"store:{workdir / 'w.embs'}",
            "--input", workdir / "one.txt", "--out", workdir / "s.csv")
        assert code == 0
        assert payload["threshold"] == 0.5
        assert "no stored vector" in err  # most lexicon words are missing
        _, _, _, matrix = read_features(workdir / "s.csv")
        np.testing.assert_allclose(matrix[0], [1.0, 0.0, 0.0])


def write_cluster_csv(path, seed, n_per=60):
    rng = np.random.default_rng(seed)
    lines = ["x,y,label"]
    for cx, label in ((-2.0, "neg"), (2.0, "pos")):
        pts = rng.normal((cx, 0.0), 0.1, size=(n_per, 2))
        lines += [f"{p[0]:.6f},{p[1]:.6f},{label}" for p in pts]
    path.write_text("\n".join(lines) + "\n")


class TestProbeCommands:
    def test_train_and_eval(self, capsys, tmp_path):
        write_cluster_csv(tmp_path / "train.csv", seed=0)
        write_cluster_csv(tmp_path / "test.csv", seed=1)
        code, payload, _ = run(
            capsys, "probe-train", "--train", tmp_path / "train.csv",
            "--task", "classification", "--label-column", "label",
            "--model-out", tmp_path / "model.prbm")
        assert code == 0
        assert payload["train_accuracy"] >= 0.98
        assert payload["epochs"] >= 1

        code, payload, _ = run(
            capsys, "probe-eval", "--model", tmp_path / "model.prbm",
            "--test", tmp_path / "test.csv", "--label-column", "label",
            "--baseline-train", tmp_path / "train.csv")
        assert code == 0
        assert payload["accuracy"] >= 0.98
        assert payload["baseline_accuracy"] == pytest.approx(0.5)

    def test_regression_round_trip(self, capsys, tmp_path):
        rng = np.random.default_rng(3)
        lines = ["x1,x2,y"]
        for _ in range(80):
            x1, x2 = rng.standard_normal(2)
            lines.append(f"{x1:.6f},{x2:.6f},{3 * x1 - x2:.6f}")
        (tmp_path / "reg.csv").write_text("\n".join(lines) + "\n")
        code, payload, _ = run(
            capsys, "probe-train", "--train", tmp_path / "reg.csv",
            "--task", "regression", "--label-column", "y",
            "--model-out", tmp_path / "m.prbm")
        assert code == 0
        assert payload["train_r2"] >= 0.99

    def test_binary_matrix_input(self, capsys, tmp_path):
        from lexcat.featfile import write_feature_matrix
        rng = np.random.default_rng(5)
        feats = np.vstack([rng.normal(-2, 0.1, (30, 2)), rng.normal(2, 0.1, (30, 2))])
        ids = [f"r{i}" for i in range(60)]
        write_feature_matrix(tmp_path / "feats.embs", ("a", "b"), feats, ids=ids)
        labels = ["id,label"] + [f"r{i},{0 if i < 30 else 1}" for i in range(60)]
        (tmp_path / "labels.csv").write_text("\n".join(labels) + "\n")
        code, payload, _ = run(
            capsys, "probe-train", "--train", tmp_path / "feats.embs",
            "--labels", tmp_path / "labels.csv", "--task", "classification",
            "--model-out", tmp_path / "m.prbm")
        assert code == 0
        assert payload["train_accuracy"] >= 0.98


class TestAnalyzeCommands:
    def test_agreement_perfect(self, capsys, workdir):
        build_dict(capsys, workdir)
        run(capsys, "encode", "--dictionary", workdir / "dict.scdi",
            "--provider", "pseudo:7", "--input", workdir / "sentences.txt",
            "--out", workdir / "feats.csv")
        _, cats, ids, matrix = read_features(workdir / "feats.csv")
        # annotations equal to an affine rescaling of the features into [0,2]
        scaled = (matrix - matrix.min()) / (matrix.max() - matrix.min()) * 2.0
        lines = ["id," + ",".join(cats)]
        for rid, row in zip(ids, scaled):
            lines.append(rid + "," + ",".join(f"{v:.9f}" for v in row))
        (workdir / "ann.csv").write_text("\n".join(lines) + "\n")
        code, payload, _ = run(
            capsys, "analyze-agreement", "--features", workdir / "feats.csv",
            "--annotations", workdir / "ann.csv")
        assert code == 0
        assert payload["mean_r"] == pytest.approx(1.0, abs=1e-6)
        assert payload["excluded"] == []

    def test_wordsense_symmetric_ratio_one(self, capsys, workdir):
        build_dict(capsys, workdir, name="d.scdi", **{"--dim": 12})
        sent_lines = ["word,sense,text"]
        for i in range(5):
            sent_lines.append(f"bat,animal,animal text {i}")
            sent_lines.append(f"bat,sport,sport text {i}")
        (workdir / "senses.csv").write_text("\n".join(sent_lines) + "\n")
        # identical keyword sets for both senses -> perfectly symmetric
        (workdir / "keys.csv").write_text(
            "word,sense,k1,k2,k3\nbat,animal,cave,wing,echo\nbat,sport,cave,wing,echo\n")
        code, payload, _ = run(
            capsys, "analyze-wordsense", "--dictionary", workdir / "d.scdi",
            "--provider", "pseudo:7", "--sentences", workdir / "senses.csv",
            "--keywords", workdir / "keys.csv")
        assert code == 0
        word = payload["words"]["bat"]
        assert word["ratio"] == pytest.approx(1.0)
        assert word["p"] == 1.0
        assert word["n"] == 10

    def test_wordsense_retention_violation_exit_2(self, capsys, workdir):
        build_dict(capsys, workdir, name="d.scdi")
        (workdir / "senses.csv").write_text(
            "word,sense,text\nbat,a,one\nbat,a,two\nbat,a,three\nbat,a,four\n"
            "bat,a,five\nbat,b,six\n")
        (workdir / "keys.csv").write_text(
            "word,sense,k1,k2,k3\nbat,a,x,y,z\nbat,b,p,q,r\n")
        code, _, err = run(
            capsys, "analyze-wordsense", "--dictionary", workdir / "d.scdi",
            "--provider", "pseudo:7", "--sentences", workdir / "senses.csv",
            "--keywords", workdir / "keys.csv")
        assert code == 2
        assert ">= 5" in err


class TestConfigFile:
    def test_flags_win_over_file(self, capsys, workdir):
        config = {
            "lexicon": str(workdir / "lex.tsv"),
            "provider": "pseudo:1",
            "dim": 6,
            "out": str(workdir / "from_file.scdi"),
            "seed": 1,
        }
        (workdir / "cfg.json").write_text(json.dumps(config))
        code, payload, _ = run(capsys, "build-dict", "--config", workdir / "cfg.json",
                               "--seed", 99)
        assert code == 0
        assert payload["seed"] == 99  # flag beats file
        assert payload["dim"] == 6  # file fills the gap
        assert (workdir / "from_file.scdi").exists()

    def test_unknown_key_rejected(self, capsys, workdir):
        (workdir / "cfg.json").write_text('{"bogus_option": 1}')
        code, _, err = run(capsys, "build-dict", "--config", workdir / "cfg.json",
                           "--lexicon", workdir / "lex.tsv", "--provider", "pseudo:0",
                           "--dim", 4, "--out", workdir / "x.scdi")
        assert code == 2
        assert "bogus_option" in err

    def test_out_json_copy(self, capsys, workdir):
        build_dict(capsys, workdir)
        write_cluster_csv(workdir / "train.csv", seed=2)
        code, payload, _ = run(
            capsys, "probe-train", "--train", workdir / "train.csv",
            "--task", "classification", "--label-column", "label",
            "--model-out", workdir / "m.prbm", "--out", workdir / "metrics.json")
        assert code == 0
        on_disk = json.loads((workdir / "metrics.json").read_text())
        assert on_disk == payload


class TestMissingArgs:
    def test_missing_required_named_in_error(self, capsys, workdir):
        code, _, err = run(capsys, "encode", "--provider", "pseudo:1")
        assert code == 2
        assert "--dictionary" in err
