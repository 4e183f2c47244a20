"""embedstab: train embedding spaces, measure neighbor stability, explain it."""

__version__ = "0.1.0"
