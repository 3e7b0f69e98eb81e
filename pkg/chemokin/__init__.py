"""Multiscale bacterial chemotaxis toolkit.

Connects an agent-based model of E. coli run-and-tumble motion with an
internal methylation pathway to kinetic and macroscopic descriptions, and
compares the tiers against each other.
"""

__version__ = "0.1.0"
