"""Indecomposable grid modules realizing prescribed barcodes as restrictions."""

from .construction import (build_candy, build_dual, build_n_holes, build_primal, chain_across_dimensions,
                           concatenate, enumerate_barcodes, minimal_hole_module, suspension,
                           universal_prefix)
from .field_linalg import GF2, QQ, FieldSpec, Matrix
from .grid_module import GridModule, StackDiagram, barcode_of_1d, realize, restrict, stack, unstack
from .homology import betti_numbers, clique_cubical
from .rect_algebra import Barcode, Rectangle, RectMatrix
from .verify import end_dim, indecomposability

__all__ = [
    "Barcode", "FieldSpec", "GF2", "GridModule", "Matrix", "QQ", "RectMatrix", "Rectangle",
    "StackDiagram", "barcode_of_1d", "betti_numbers", "build_candy", "build_dual", "build_n_holes",
    "build_primal", "chain_across_dimensions", "clique_cubical", "concatenate", "end_dim",
    "enumerate_barcodes", "indecomposability", "minimal_hole_module", "realize", "restrict", "stack",
    "suspension", "universal_prefix", "unstack",
]

__version__ = "0.1.0"
