"""Null-space synchronisation of pairwise transforms and generalised
Procrustes alignment.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its public surface.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc

__version__ = "0.1.0"
__doc__ = _core_doc
