"""Slab-architecture dense vector index."""
from .embed import Embedder, HashEmbedder, HTTPEmbedder, embed
from .index import DenseIndex, DensePolicy
from .slabs import ExactSlab, HNSWSlab, IVFPQSlab, RandomProjectionSlab, Slab

__all__ = [
    "DenseIndex",
    "DensePolicy",
    "Embedder",
    "ExactSlab",
    "HNSWSlab",
    "HTTPEmbedder",
    "HashEmbedder",
    "IVFPQSlab",
    "RandomProjectionSlab",
    "Slab",
    "embed",
]
