"""Process matrices for a two-station probe and certification of the memory class."""

from . import detect, ising, process, sdp, tensorlinalg

__all__ = ["tensorlinalg", "sdp", "process", "ising", "detect"]
__version__ = "0.1.0"
