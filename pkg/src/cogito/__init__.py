"""cogito: a deterministic thinking loop pairing need/context matching with
sketch-style mental imagery and what-if plan revision."""

__version__ = "0.1.0"
