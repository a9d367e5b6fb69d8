"""Rainbow Steiner triple systems: constructions, searches and certified gadgets."""

__version__ = "0.1.0"
