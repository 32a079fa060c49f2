"""Enumeration caps.

Caps are read through :func:`get_caps` and can be overridden for a block of
code with :func:`use_caps`.  The override is stored in a context variable so
concurrent callers do not see each other's settings.
"""

from __future__ import annotations

import contextlib
import contextvars
import dataclasses
from dataclasses import dataclass

from .errors import CapExceeded


@dataclass(frozen=True)
class Caps:
    elements: int = 256
    subgroups: int = 128
    automorphisms: int = 81
    # Dense bar-complex linear algebra grows like |G|^4; 12 keeps the
    # coboundary matrices under ~150 MB.
    cohomology: int = 12
    isomorphism: int = 256


# Flags may raise caps, but never above these.
HARD_CEILING = Caps(elements=4096, subgroups=1024, automorphisms=1024,
                    cohomology=16, isomorphism=4096)

_caps: contextvars.ContextVar[Caps] = contextvars.ContextVar("qdouble_caps", default=Caps())


def get_caps() -> Caps:
    return _caps.get()


@contextlib.contextmanager
def use_caps(**overrides: int):
    current = _caps.get()
    for name, value in overrides.items():
        ceiling = getattr(HARD_CEILING, name)
        if value > ceiling:
            raise CapExceeded(f"cap {name}={value} exceeds the hard ceiling {ceiling}")
    token = _caps.set(dataclasses.replace(current, **overrides))
    try:
        yield _caps.get()
    finally:
        _caps.reset(token)


def check_cap(name: str, value: int, what: str = "") -> None:
    limit = getattr(get_caps(), name)
    if value > limit:
        label = what or name
        raise CapExceeded(f"{label}: size {value} exceeds the {name} cap {limit}")
