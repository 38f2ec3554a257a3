"""Polarization symmetry breaking and noncritical squeezing in nondegenerate cavities."""

from ._core import *  # noqa: F401,F403
from ._core import ConfigError, __doc__  # noqa: F401


def csv_rows(text):
    """Split CSV text from the command functions into a header and rows of strings."""
    lines = [line.split(",") for line in text.strip().splitlines()]
    return lines[0], lines[1:]
