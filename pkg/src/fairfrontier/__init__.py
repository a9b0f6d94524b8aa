"""Family-of-models builder and explorer for recidivism classifiers.

Builds cost-reweighted logistic models spanning the trade-off between
overall prediction errors and between-group disparity, precomputes their
confusion counts over a threshold grid, and serves the result to an
interactive explorer.
"""

__version__ = "0.1.0"
