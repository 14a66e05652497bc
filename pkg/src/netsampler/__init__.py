"""Simulator and policy engine for decentralized sampling over collision
networks monitoring Gauss-Markov sources, with a graphon transferability lab."""

__version__ = "0.1.0"
