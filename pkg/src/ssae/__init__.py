"""Semi-supervised autoencoder with l1,1-projected double descent, graph
baselines and the synthetic / CSV experiment harness."""

__version__ = "0.1.0"
