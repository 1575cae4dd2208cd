"""
Plain-text generating-vector files.

Layout::

    d n
    z_1 z_2 ... z_d
    # key=value
    ...

Metadata lines are optional and values are kept as strings.
"""

from __future__ import annotations

from pathlib import Path

from .lattice import GeneratingVector

__all__ = ["format_vector", "write_vector", "read_vector"]


def format_vector(z: GeneratingVector, meta: dict | None = None) -> str:
    lines = [f"{z.d} {z.n}", " ".join(str(v) for v in z.z)]
    for key, value in (meta or {}).items():
        if isinstance(value, float):
            value = format(value, ".17g")
        lines.append(f"# {key}={value}")
    return "\n".join(lines) + "\n"


def write_vector(path, z: GeneratingVector, meta: dict | None = None) -> None:
    Path(path).write_text(format_vector(z, meta))


def read_vector(path) -> tuple[GeneratingVector, dict]:
    """Parse a vector file; raises ``ValueError`` on malformed content."""
    lines = Path(path).read_text().splitlines()
    body = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    meta = {}
    for ln in lines:
        ln = ln.strip()
        if ln.startswith("#") and "=" in ln:
            key, value = ln[1:].strip().split("=", 1)
            meta[key.strip()] = value.strip()
    if len(body) < 1:
        raise ValueError(f"{path}: empty vector file")
    try:
        d, n = (int(v) for v in body[0].split())
        z = tuple(int(v) for v in body[1].split()) if len(body) > 1 else ()
    except ValueError as exc:
        raise ValueError(f"{path}: malformed vector file ({exc})") from None
    if len(z) != d:
        raise ValueError(f"{path}: header says d={d} but found {len(z)} components")
    return GeneratingVector(n, z), meta
