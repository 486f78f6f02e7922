"""Exact toolkit for dyadic-grid surgery on polyhedral sets: grid
projections, cubical homology with witnesses, and audited competitor
gluing."""

__version__ = "0.1.0"
