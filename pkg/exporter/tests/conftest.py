import pytest

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "happy", "sad", "glad", "joyful", "gloomy", "party", "friend", "talk",
    "the", "a", "cat", "sat", "on", "mat", "dog", "ran", "far",
    "##s", "##ly", "##ing",
]


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    """Seeded random BERT small enough to run in milliseconds on CPU."""
    import torch
    from transformers import BertConfig, BertModel, BertTokenizer

    path = tmp_path_factory.mktemp("ckpt")
    (path / "vocab.txt").write_text("\n".join(VOCAB) + "\n", encoding="utf-8")
    tokenizer = BertTokenizer(str(path / "vocab.txt"), model_max_length=32)
    tokenizer.save_pretrained(str(path))

    torch.manual_seed(0)
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=64,
        max_position_embeddings=32,
    )
    BertModel(config).save_pretrained(str(path))
    return str(path)
