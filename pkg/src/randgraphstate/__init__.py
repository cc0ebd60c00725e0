"""Random graph-state ensembles: second moments, GF(2) rank deficiency and induced subgraphs."""

__version__ = "1.0.0"
