"""Named systems used throughout the tests and the CLI, and the system file reader.

System file grammar, one ``key = value`` per line, ``#`` starts a comment::

    coefficients = 12 6 12      # a_{k-1} .. a_0, space or comma separated
    offset = 0                  # N, default 0
    initial = 1 13 163          # U_0 .. U_{N+k-1}
    alphabet_bound = 13         # optional override of C_U
    G = 0                       # optional (H3) index
    horizon = 60                # optional, default 60
    name = toy                  # optional label

Integers are decimal and may be arbitrarily long.
"""

from __future__ import annotations

from pathlib import Path

from .core import NumerationSystem

_NAMED = {
    "toy": dict(coefficients=(12, 6, 12), initial=(1, 13, 163)),
    "variant": dict(coefficients=(12, 6, 12), initial=(1, 2, 3)),
    "ppp": dict(coefficients=(2, 2, 0, 2), initial=(1, 3, 9, 23)),
    "ex35": dict(coefficients=(6, 3, -1, 6, 3), initial=(1, 7, 45, 291, 1881)),
    "merge": dict(coefficients=(0, 6), initial=(1, 2)),
    "noth2": dict(coefficients=(0, 5, 0, -4), initial=(1, 2, 4, 5)),
    "noth2ok": dict(coefficients=(0, 0, 4), initial=(1, 2, 3)),
    "double": dict(coefficients=(4, -4), initial=(1, 3)),
    "fib": dict(coefficients=(1, 1), initial=(1, 2)),
    # U_0=1, U_1=4, U_2=8 and U_{i+2} = U_{i+1} + U_i from i = 1 on
    "lam": dict(coefficients=(1, 1), initial=(1, 4, 8), offset=1),
}


def named(name, **overrides):
    try:
        kw = dict(_NAMED[name])
    except KeyError:
        raise KeyError(f"unknown system {name!r}; known: {', '.join(sorted(_NAMED))}") from None
    kw.update(overrides)
    return NumerationSystem(name=name, **kw)


def known_names():
    return sorted(_NAMED)


def _ints(text):
    return [int(t) for t in text.replace(",", " ").split()]


def parse_system(text, name=None):
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        fields[key] = value
    unknown = set(fields) - {"coefficients", "offset", "initial", "alphabet_bound", "G", "horizon", "name"}
    if unknown:
        raise ValueError(f"unknown keys: {', '.join(sorted(unknown))}")
    for key in ("coefficients", "initial"):
        if key not in fields:
            raise ValueError(f"missing key {key!r}")
    kw = dict(coefficients=_ints(fields["coefficients"]), initial=_ints(fields["initial"]),
              offset=int(fields.get("offset", 0)))
    if "alphabet_bound" in fields:
        kw["alphabet_bound"] = int(fields["alphabet_bound"])
    if "G" in fields:
        kw["G"] = int(fields["G"])
    if "horizon" in fields:
        kw["horizon"] = int(fields["horizon"])
    return NumerationSystem(name=fields.get("name", name), **kw)


def format_system(sys):
    lines = [f"coefficients = {' '.join(map(str, sys.coefficients))}",
             f"offset = {sys.offset}",
             f"initial = {' '.join(map(str, sys.initial))}"]
    if sys._alphabet_override is not None:
        lines.append(f"alphabet_bound = {sys._alphabet_override}")
    if sys.G is not None:
        lines.append(f"G = {sys.G}")
    lines.append(f"horizon = {sys.horizon}")
    if sys.name:
        lines.append(f"name = {sys.name}")
    return "\n".join(lines) + "\n"


def load_system(ref):
    """A named system, or a path to a system file."""
    if ref in _NAMED:
        return named(ref)
    path = Path(ref)
    return parse_system(path.read_text(), name=path.stem)
