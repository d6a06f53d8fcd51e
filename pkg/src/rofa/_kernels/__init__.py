"""Kernel selection: compiled Cython ACS loop if built, numpy fallback otherwise."""

from . import viterbi_py

try:
    from . import _viterbi as _impl

    HAVE_COMPILED = True
except ImportError:  # extension not built
    _impl = viterbi_py
    HAVE_COMPILED = False

acs_traceback = _impl.acs_traceback

__all__ = ["acs_traceback", "viterbi_py", "HAVE_COMPILED"]
