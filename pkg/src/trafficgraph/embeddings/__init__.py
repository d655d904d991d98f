"""Node-embedding algorithms: GLEE, Node2Vec, NetMF and GraphWave."""

from .base import METHODS, EmbeddingMatrix, export_embedding_csv, fingerprint, read_embedding_csv
from .glee import gaussian_affinity, glee, glee_from_eig, glee_from_points
from .graphwave import GraphWaveParams, graphwave
from .netmf import NetMFParams, netmf, netmf_factors, netmf_matrix
from .node2vec import Node2VecParams, WalkCorpus, node2vec, node2vec_embed, node2vec_walks, transition_probabilities

__all__ = [
    "METHODS",
    "EmbeddingMatrix",
    "GraphWaveParams",
    "NetMFParams",
    "Node2VecParams",
    "WalkCorpus",
    "export_embedding_csv",
    "fingerprint",
    "gaussian_affinity",
    "glee",
    "glee_from_eig",
    "glee_from_points",
    "graphwave",
    "netmf",
    "netmf_factors",
    "netmf_matrix",
    "node2vec",
    "node2vec_embed",
    "node2vec_walks",
    "read_embedding_csv",
    "transition_probabilities",
]
