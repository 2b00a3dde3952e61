"""Reference model server for the cogito /v1 wire protocol."""

__version__ = "0.1.0"
