"""Spectral dimensionality reduction as Gaussian random fields over data points."""

from .datasets import Dataset, generate, load_csv
from .eval import GplvmScoreConfig, compare_methods, gplvm_score, procrustes_residual
from .graphs import NeighborGraph, acyclic_graph, knn_graph
from .pipeline import METHODS, run_method
from .spectral import Embedding, cmds_embed, pca

__version__ = "0.1.0"
