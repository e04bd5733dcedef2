"""Interpretable sentence features from a category lexicon and an embedding source."""

from .analysis import (AgreementReport, AnnotationSet, SenseData, WordSenseReport,
                       human_agreement, load_annotations, load_sense_data,
                       paired_t_test, pearson, regularized_incomplete_beta,
                       similarity_ratio, t_two_sided_p, word_sense_eval)
from .dictionary import (CategoryDictionary, CategoryItems, build_dictionary,
                         collect_reference_items, collect_word_items,
                         load_dictionary, save_dictionary)
from .embedding import (EmbeddingProvider, EmbeddingStore, PseudoEmbeddingProvider,
                        ServiceEmbeddingProvider, StoreEmbeddingProvider,
                        cosine_similarity, load_embedding_store, mean_pool,
                        write_embedding_store)
from .errors import (BatchItemError, DicParseError, FormatError, InputError,
                     KeyNotFoundError, LexcatError, ProviderError)
from .kmeans import kmeans, within_sse
from .lexicon import (Lexicon, category_counts, encode_bag_of_categories,
                      filter_categories, format_category_tsv, format_liwc_dic,
                      load_keep_list, match_token, match_word, parse_category_tsv,
                      parse_liwc_dic, tokenize)
from .probe import (LabeledDataset, ProbeConfig, ProbeModel, baseline_majority_mean,
                    evaluate, load_labeled_csv, load_probe_model, predict,
                    save_probe_model, train_linear_probe)
from .represent import Representation, encode, encode_batch
from .softmatch import SoftMatchConfig, encode_soft_match, missing_anchor_words

__version__ = "0.1.0"

__all__ = [
    "AgreementReport", "AnnotationSet", "BatchItemError", "CategoryDictionary",
    "CategoryItems", "DicParseError", "EmbeddingProvider", "EmbeddingStore",
    "FormatError", "InputError", "KeyNotFoundError", "LabeledDataset", "Lexicon",
    "LexcatError", "ProbeConfig", "ProbeModel", "ProviderError",
    "PseudoEmbeddingProvider", "Representation", "SenseData",
    "ServiceEmbeddingProvider", "SoftMatchConfig", "StoreEmbeddingProvider",
    "WordSenseReport", "baseline_majority_mean", "build_dictionary",
    "category_counts", "collect_reference_items", "collect_word_items",
    "cosine_similarity", "encode", "encode_bag_of_categories", "encode_batch",
    "encode_soft_match", "evaluate", "filter_categories", "format_category_tsv",
    "format_liwc_dic", "human_agreement", "kmeans", "load_annotations",
    "load_dictionary", "load_embedding_store", "load_keep_list", "load_labeled_csv",
    "load_probe_model", "load_sense_data", "match_token", "match_word", "mean_pool",
    "missing_anchor_words", "paired_t_test", "parse_category_tsv", "parse_liwc_dic",
    "pearson", "predict", "regularized_incomplete_beta", "save_dictionary",
    "save_probe_model", "similarity_ratio", "t_two_sided_p", "tokenize",
    "train_linear_probe", "within_sse", "word_sense_eval", "write_embedding_store",
]
