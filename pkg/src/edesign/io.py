"""Line-oriented text formats for design spaces and designs.

Design-space file::

    edesign-space 1
    m <int>
    n <int>
    point <id> rank_one <f_1> ... <f_m> [coords <k> <c_1> ... <c_k>]
    point <id> general <H_11> <H_12> ... <H_mm> [coords <k> ...]

Design file::

    edesign-design 1
    space <reference to the space file>
    weight <id> <w>

Blank lines and lines starting with '#' are ignored. Reals are written
with 17 significant digits so a write/read cycle is exact.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .model import GENERAL, RANK_ONE, Design, DesignError, DesignPoint, DesignSpace

SPACE_TAG = "edesign-space"
DESIGN_TAG = "edesign-design"
VERSION = "1"


class FormatError(ValueError):
    def __init__(self, path, line: int | None, message: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _lines(path):
    with open(path, encoding="utf-8") as fh:
        for no, raw in enumerate(fh, 1):
            line = raw.strip()
            if line and not line.startswith("#"):
                yield no, line.split()


def _header(it, path, tag):
    try:
        no, tok = next(it)
    except StopIteration:
        raise FormatError(path, None, "empty file") from None
    if tok[0] != tag:
        raise FormatError(path, no, f"expected schema tag {tag!r}, got {tok[0]!r}")
    if len(tok) != 2 or tok[1] != VERSION:
        raise FormatError(path, no, f"unsupported {tag} version {' '.join(tok[1:])!r}")


def _floats(tok, path, no, what):
    try:
        return [float(t) for t in tok]
    except ValueError as exc:
        raise FormatError(path, no, f"{what}: {exc}") from None


def write_space(space: DesignSpace, path) -> None:
    out = [f"{SPACE_TAG} {VERSION}", f"m {space.m}", f"n {len(space)}"]
    for p in space:
        vals = p.payload.ravel()
        row = ["point", p.id, p.kind, *map(_fmt, vals)]
        if p.coords is not None:
            row += ["coords", str(len(p.coords)), *map(_fmt, p.coords)]
        out.append(" ".join(row))
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def read_space(path, check_nonsingular: bool = True) -> DesignSpace:
    it = _lines(path)
    _header(it, path, SPACE_TAG)
    meta = {}
    for key in ("m", "n"):
        try:
            no, tok = next(it)
        except StopIteration:
            raise FormatError(path, None, f"missing header field {key!r}") from None
        if tok[0] != key or len(tok) != 2 or not tok[1].isdigit():
            raise FormatError(path, no, f"expected '{key} <int>'")
        meta[key] = int(tok[1])
    m = meta["m"]
    points = []
    for no, tok in it:
        if tok[0] != "point" or len(tok) < 3:
            raise FormatError(path, no, "expected 'point <id> <kind> ...'")
        pid, kind, rest = tok[1], tok[2], tok[3:]
        if "coords" in rest:
            k = rest.index("coords")
            vals, ctok = rest[:k], rest[k + 1:]
            if not ctok or not ctok[0].isdigit() or len(ctok) != int(ctok[0]) + 1:
                raise FormatError(path, no, f"point {pid}: malformed coords")
            coords = tuple(_floats(ctok[1:], path, no, f"point {pid} coords"))
        else:
            vals, coords = rest, None
        expect = {RANK_ONE: m, GENERAL: m * m}.get(kind)
        if expect is None:
            raise FormatError(path, no, f"point {pid}: unknown kind {kind!r}")
        if len(vals) != expect:
            raise FormatError(path, no, f"point {pid}: {len(vals)} payload values, expected {expect} for m={m}")
        arr = np.array(_floats(vals, path, no, f"point {pid} payload"))
        if kind == GENERAL:
            arr = arr.reshape(m, m)
        try:
            points.append(DesignPoint(pid, kind, arr, coords))
        except DesignError as exc:
            raise FormatError(path, no, str(exc)) from None
    if len(points) != meta["n"]:
        raise FormatError(path, None, f"header says n={meta['n']} but {len(points)} points found")
    try:
        return DesignSpace(points, check_nonsingular=check_nonsingular)
    except DesignError as exc:
        raise FormatError(path, None, str(exc)) from None


def write_design(design: Design, path, space_ref: str = "") -> None:
    out = [f"{DESIGN_TAG} {VERSION}", f"space {space_ref or '-'}"]
    out += [f"weight {k} {_fmt(v)}" for k, v in design.weights.items()]
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def read_design(path, space: DesignSpace | None = None) -> tuple[Design, str]:
    """Read a design file; returns the design and its space reference.

    When `space` is given every id is checked against it.
    """
    it = _lines(path)
    _header(it, path, DESIGN_TAG)
    ref = None
    weights = {}
    for no, tok in it:
        if tok[0] == "space" and len(tok) == 2 and ref is None:
            ref = tok[1]
        elif tok[0] == "weight" and len(tok) == 3:
            if tok[1] in weights:
                raise FormatError(path, no, f"duplicate weight for {tok[1]!r}")
            if space is not None and tok[1] not in space.index:
                raise FormatError(path, no, f"unknown point id {tok[1]!r}")
            weights[tok[1]] = _floats(tok[2:], path, no, f"weight of {tok[1]}")[0]
        else:
            raise FormatError(path, no, f"unexpected line: {' '.join(tok)!r}")
    try:
        return Design(weights), ref or "-"
    except DesignError as exc:
        raise FormatError(path, None, str(exc)) from None


def resolve_ref(design_path, ref: str) -> str | None:
    if not ref or ref == "-":
        return None
    if os.path.isabs(ref):
        return ref
    return os.path.join(os.path.dirname(os.path.abspath(design_path)), ref)


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n", encoding="utf-8")
