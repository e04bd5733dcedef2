import logging

import numpy as np
import pytest

from embs_exporter import ExportJob, InputError, ModelLoadError, export_embeddings
from embs_exporter.cli import main

# round trips are validated with the consumer's loader: the file format is
# the contract between the two packages
from lexcat.embedding import cosine_similarity, load_embedding_store

WORDS = ("happy", "sad", "glad", "joyful", "gloomy",
         "party", "friend", "talk", "cat", "dog")


def export(tiny_checkpoint, tmp_path, name="out.embs", texts=WORDS, **kw):
    job = ExportJob(model=tiny_checkpoint, texts=tuple(texts),
                    out=str(tmp_path / name), **kw)
    summary = export_embeddings(job)
    return summary, load_embedding_store(tmp_path / name)


class TestRoundTrip:
    def test_ten_words_load_with_consumer_loader(self, tiny_checkpoint, tmp_path):
        summary, store = export(tiny_checkpoint, tmp_path)
        assert summary["count"] == 10
        assert summary["dim"] == 32
        assert len(store) == 10
        assert store.dim == 32
        for word in WORDS:
            vec = store.get(word)
            assert vec.shape == (32,)
            assert np.isfinite(vec).all()

    def test_provenance_records(self, tiny_checkpoint, tmp_path):
        _, store = export(tiny_checkpoint, tmp_path)
        assert store.meta["pooling"] == "mean-content"
        assert store.meta["model"] == tiny_checkpoint
        assert store.meta["truncated"] == "0"
        # provenance lives under reserved keys, never as entries
        assert all(not k.startswith("__meta/") for k in store.keys())

    def test_duplicates_collapse_to_one_record(self, tiny_checkpoint, tmp_path):
        summary, store = export(tiny_checkpoint, tmp_path,
                                texts=("happy", "happy", "happy"))
        assert summary["count"] == 1
        assert len(store) == 1

    def test_sentences_not_just_words(self, tiny_checkpoint, tmp_path):
        _, store = export(tiny_checkpoint, tmp_path,
                          texts=("the cat sat on the mat", "a dog ran far"))
        assert len(store) == 2


class TestDeterminismAndPooling:
    def test_reexport_identical(self, tiny_checkpoint, tmp_path):
        _, first = export(tiny_checkpoint, tmp_path, name="a.embs")
        _, second = export(tiny_checkpoint, tmp_path, name="b.embs")
        for word in WORDS:
            sim = cosine_similarity(first.get(word), second.get(word))
            assert sim == pytest.approx(1.0, abs=1e-12)

    def test_batch_size_invariance(self, tiny_checkpoint, tmp_path):
        _, one = export(tiny_checkpoint, tmp_path, name="b1.embs", batch_size=1)
        _, many = export(tiny_checkpoint, tmp_path, name="b32.embs", batch_size=32)
        for word in WORDS:
            assert cosine_similarity(one.get(word), many.get(word)) > 0.9999

    def test_special_token_flag_changes_vectors(self, tiny_checkpoint, tmp_path):
        _, without = export(tiny_checkpoint, tmp_path, name="w.embs")
        _, with_special = export(tiny_checkpoint, tmp_path, name="s.embs",
                                 include_special_tokens=True)
        assert with_special.meta["pooling"] == "mean-with-special"
        sims = [cosine_similarity(without.get(w), with_special.get(w)) for w in WORDS]
        assert min(sims) < 1.0 - 1e-6

    def test_truncation_logged(self, tiny_checkpoint, tmp_path, caplog):
        long_text = " ".join(["cat"] * 50)
        with caplog.at_level(logging.WARNING, logger="embs_exporter.export"):
            summary, store = export(tiny_checkpoint, tmp_path,
                                    texts=(long_text, "dog"), max_length=8)
        assert summary["truncated"] == 1
        assert "truncated" in caplog.text
        assert store.get(long_text).shape == (32,)
        assert store.meta["truncated"] == "1"


class TestErrors:
    def test_empty_texts(self, tiny_checkpoint, tmp_path):
        with pytest.raises(InputError):
            ExportJob(model=tiny_checkpoint, texts=(), out=str(tmp_path / "x.embs"))

    def test_blank_text(self, tiny_checkpoint, tmp_path):
        with pytest.raises(InputError):
            ExportJob(model=tiny_checkpoint, texts=("  ",), out=str(tmp_path / "x.embs"))

    def test_missing_checkpoint(self, tmp_path):
        job = ExportJob(model=str(tmp_path / "nonexistent"), texts=("happy",),
                        out=str(tmp_path / "x.embs"))
        with pytest.raises(ModelLoadError):
            export_embeddings(job)


class TestCli:
    def test_end_to_end(self, tiny_checkpoint, tmp_path, capsys):
        (tmp_path / "texts.txt").write_text("happy\nsad\n")
        code = main(["--model", tiny_checkpoint, "--input", str(tmp_path / "texts.txt"),
                     "--text", "glad", "--out", str(tmp_path / "cli.embs"),
                     "--batch-size", "2"])
        assert code == 0
        assert '"count": 3' in capsys.readouterr().out
        store = load_embedding_store(tmp_path / "cli.embs")
        assert sorted(store.keys()) == ["glad", "happy", "sad"]

    def test_missing_model_exit_3(self, tmp_path, capsys):
        code = main(["--model", str(tmp_path / "nope"), "--text", "hi",
                     "--out", str(tmp_path / "x.embs")])
        assert code == 3

    def test_no_texts_exit_2(self, tiny_checkpoint, tmp_path, capsys):
        code = main(["--model", tiny_checkpoint, "--out", str(tmp_path / "x.embs")])
        assert code == 2
