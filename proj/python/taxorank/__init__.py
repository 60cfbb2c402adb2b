"""Attach new words to a hypernymy taxonomy."""

from ._taxorank import *  # noqa: F401,F403
from ._taxorank import __doc__  # noqa: F401
