"""Joint eigenvalue densities, samplers and cross-route checks for random matrix ensembles."""
__version__ = "0.1.0"
