"""Exact arithmetic lab for rank-one maps with randomized spacers.

The transformation acts on [0, 1 + alpha) where alpha is encoded by a
digit word in {1, 2}; see words.ParameterWord.  Submodules:

    words        parameter words, heights, digit moments
    intervals    exact half-open interval sets
    chacon       the map, orbits, forward images
    symbolic     odometer model, cocycles, return times
    returns      return-time distributions and localization
    correlation  self-correlations by two routes, shear experiment
    exceptional  exceptional parameter sets and their measures
    spectral     twisted transfer operators, norms, limit theorems
    cli          command line front end
"""

__version__ = "0.1.0"

from .words import ParameterWord
from .rationals import rat, Enclosure
from .intervals import IntervalSet

__all__ = ["ParameterWord", "rat", "Enclosure", "IntervalSet", "__version__"]
