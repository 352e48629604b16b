"""Toolkit for the variance renormalisation analysis of 2d gPAM.

Subpackages cover the symbolic regularity-structure layer (``symbols``),
Feynman multigraphs and Wick pairings (``feynman``), the labelled-graph
power-counting calculus (``powercount``, ``classify``), singular-kernel
numerics for the limiting noise amplitude (``kernels``) and the Monte-Carlo
verification harness (``montecarlo``).
"""

__version__ = "0.1.0"
