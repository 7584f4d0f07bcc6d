"""Air-signature capture and Siamese signature verification."""

__version__ = "0.1.0"
