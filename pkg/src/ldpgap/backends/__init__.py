"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback
is always present. ``LDPGAP_BACKEND=python`` or ``=native`` forces a
choice (``native`` raises if the extension is missing).
"""

from __future__ import annotations

import os

from ldpgap.backends import pykernels

try:
    from ldpgap.backends import _speedups as _native
except ImportError:  # extension not built on this install
    _native = None


def _select():
    choice = os.environ.get("LDPGAP_BACKEND", "").strip().lower()
    if choice == "python":
        return pykernels
    if choice == "native":
        if _native is None:
            raise ImportError(
                "LDPGAP_BACKEND=native requested but the compiled "
                "extension ldpgap.backends._speedups is not available"
            )
        return _native
    if choice:
        raise ValueError(f"unknown LDPGAP_BACKEND value {choice!r}")
    return _native if _native is not None else pykernels


_active = _select()


def active():
    """The kernel module selected at import time."""
    return _active


def active_name():
    return "native" if _active is _native else "python"


def get(name):
    """Fetch a backend by name ('native' or 'python'); for benchmarks
    and cross-backend tests."""
    if name == "python":
        return pykernels
    if name == "native":
        if _native is None:
            raise ImportError("compiled extension not available")
        return _native
    raise ValueError(f"unknown backend {name!r}")


def available():
    names = ["python"]
    if _native is not None:
        names.insert(0, "native")
    return names


def resolve_threads(threads=None):
    """Worker count for chunked kernel calls: the explicit argument,
    else LDPGAP_THREADS, else 1. Results never depend on this."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("LDPGAP_THREADS", "").strip()
    return max(1, int(env)) if env else 1
