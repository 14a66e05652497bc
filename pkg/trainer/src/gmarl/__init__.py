"""Graphical multi-agent PPO trainer for the netsampler environment."""

__version__ = "0.1.0"
