"""Disentangle text-generation evaluation metrics into linguistic factors."""

from .adversarial import AdversarialTriple, build_triples, evaluate_preferences, permute_nouns
from .conllu import DependencyTree, parse_conllu
from .data import (
    EmbeddingTable,
    FactorTable,
    ScoreTable,
    SentencePair,
    join_factors,
    load_embeddings,
    load_pair_dataset,
    load_score_table,
)
from .ensemble import average_metrics, evaluate_ensembles, pearson
from .factors import clb_scores, lex_score, mor_score, sem_score, syn_score
from .morph import MorphLexicon, build_morph_lexicon, retrofit_embeddings
from .regression import RegressionFit, fit_ols, predict, r_squared, z_normalize
from .ted import tree_edit_distance

__version__ = "0.1.0"

__all__ = [
    "AdversarialTriple",
    "DependencyTree",
    "EmbeddingTable",
    "FactorTable",
    "MorphLexicon",
    "RegressionFit",
    "ScoreTable",
    "SentencePair",
    "average_metrics",
    "build_morph_lexicon",
    "build_triples",
    "clb_scores",
    "evaluate_ensembles",
    "evaluate_preferences",
    "fit_ols",
    "join_factors",
    "lex_score",
    "load_embeddings",
    "load_pair_dataset",
    "load_score_table",
    "mor_score",
    "parse_conllu",
    "pearson",
    "permute_nouns",
    "predict",
    "r_squared",
    "retrofit_embeddings",
    "sem_score",
    "syn_score",
    "tree_edit_distance",
    "z_normalize",
]
