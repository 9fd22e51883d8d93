"""Decentralized swarm controllers built from measured scalars and vectors."""

__version__ = "0.1.0"
