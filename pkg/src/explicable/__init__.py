"""Learning human-interpretability measures of plans and planning with them."""

__version__ = "0.1.0"
