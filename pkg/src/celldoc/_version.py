"""Single source of the tool version stamped into artifact headers."""

__version__ = "0.1.0"
