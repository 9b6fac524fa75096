"""Figures from isoboltz output files; file formats only, no in-process coupling."""

__version__ = "0.1.0"

from .figures import KINDS, FigureSpec, extract, render
from .readers import FormatError, phi_crossing, radial_profile, read_csv, read_snapshot

__all__ = [
    "KINDS",
    "FigureSpec",
    "FormatError",
    "extract",
    "phi_crossing",
    "radial_profile",
    "read_csv",
    "read_snapshot",
    "render",
]
