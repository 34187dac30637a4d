"""Typed multigraphs, finite-cover surgery, collapse quotients, forests and
towers for realizing prescribed end-space pairs at finite depth."""

from . import cantor, cgraph, classify, collapse, covering, forest, tower
from .cgraph import CGraph, CInclusion, ElementaryStep
from .covering import CoveringMap
from .errors import (ForgeError, NotDecomposableError, PreconditionError,
                     ResourceCapError)

__all__ = [
    "CGraph", "CInclusion", "CoveringMap", "ElementaryStep",
    "ForgeError", "NotDecomposableError", "PreconditionError",
    "ResourceCapError",
    "cantor", "cgraph", "classify", "collapse", "covering", "forest", "tower",
]
