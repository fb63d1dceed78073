"""
Circuit/clock spec files.

A spec file is a JSON object::

    {
      "qubits": 1,
      "steps": 6,
      "ancillas": [0],
      "output": 0,                       # or null for no rejection projector
      "gates": [
        {"t": 2, "targets": [0], "matrix": [[0, 0], [1, 0], [1, 0], [0, 0]]}
      ],
      "clock": {"type": "linear", "t_init": 1}
    }

``matrix`` lists the ``2^w x 2^w`` entries row-major; each entry is
``[re, im]`` or a plain real number.  ``clock`` is one of

* ``{"type": "linear", "t_init": n}``: a plain line of ``steps`` states;
* ``{"type": "dynamic-init", "t_init": n, "branches": b,
  "branch_length": l, "reach": r}``: a line plus illegal branches
  (``t_init`` defaults to ``ceil(sqrt(steps))``);
* ``{"labels": [...], "rules": [[a, b], ...], "illegal": [...],
  "t_init": n, "start": label}``: an explicit clock.

Every clock may carry ``"input_penalties": {"t": matrix, ...}``, giving the
register projector for each ``t < t_init`` in the same entry format
(full ``2^q x 2^q``, row-major).  Without it every such ``t`` penalises
any ancilla in ``|1>``.  Errors name the offending field, e.g.
``gates[0].matrix``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Union

import numpy as np

from .circuitham import CircuitSpec, ClockSpec, Gate, dynamic_init_clock, linear_clock
from .errors import ClockhamError, SpecFileError

__all__ = ["load_spec", "parse_spec", "dump_spec", "BUILTIN_SPECS", "builtin_spec"]


def _int(v, path, lo=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise SpecFileError(path, f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise SpecFileError(path, f"must be >= {lo}, got {v}")
    return v


def _list(v, path):
    if not isinstance(v, list):
        raise SpecFileError(path, f"expected a list, got {type(v).__name__}")
    return v


def _entry(v, path) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v, 0.0)
    if (isinstance(v, list) and len(v) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
        return complex(v[0], v[1])
    raise SpecFileError(path, f"matrix entry must be [re, im] or a number, got {v!r}")


def _matrix(v, n, path) -> np.ndarray:
    v = _list(v, path)
    if len(v) != n * n:
        raise SpecFileError(path, f"expected {n * n} entries for a {n}x{n} matrix, got {len(v)}")
    m = np.array([_entry(x, f"{path}[{i}]") for i, x in enumerate(v)]).reshape(n, n)
    if not np.all(np.isfinite(m)):
        raise SpecFileError(path, "non-finite entry")
    return m


def _encode(m: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(m, dtype=complex).reshape(-1)]


def parse_spec(doc: Any, source: str = "<spec>"):
    """``(CircuitSpec, ClockSpec)`` from a decoded spec document."""
    if not isinstance(doc, dict):
        raise SpecFileError(source, "top level must be an object")
    known = {"qubits", "steps", "gates", "ancillas", "output", "clock", "description"}
    extra = sorted(set(doc) - known)
    if extra:
        raise SpecFileError(extra[0], "unknown field")
    for key in ("qubits", "steps"):
        if key not in doc:
            raise SpecFileError(key, "missing required field")
    q = _int(doc["qubits"], "qubits", 1)
    steps = _int(doc["steps"], "steps", 2)
    ancillas = [_int(a, f"ancillas[{i}]", 0) for i, a in enumerate(_list(doc.get("ancillas", []), "ancillas"))]
    output = doc.get("output", 0)
    if output is not None:
        output = _int(output, "output", 0)

    gates = []
    for i, g in enumerate(_list(doc.get("gates", []), "gates")):
        path = f"gates[{i}]"
        if not isinstance(g, dict):
            raise SpecFileError(path, "expected an object")
        for key in ("t", "targets", "matrix"):
            if key not in g:
                raise SpecFileError(f"{path}.{key}", "missing required field")
        t = _int(g["t"], f"{path}.t", 1)
        targets = [_int(x, f"{path}.targets[{j}]", 0) for j, x in enumerate(_list(g["targets"], f"{path}.targets"))]
        if len(targets) not in (1, 2):
            raise SpecFileError(f"{path}.targets", "a gate acts on one or two qubits")
        m = _matrix(g["matrix"], 2 ** len(targets), f"{path}.matrix")
        try:
            gates.append(Gate(t, tuple(targets), m))
        except ClockhamError as e:
            raise SpecFileError(f"{path}.matrix", str(e)) from e

    try:
        circuit = CircuitSpec(q, steps, tuple(gates), tuple(ancillas), output)
    except ClockhamError as e:
        raise SpecFileError("gates" if "gate" in str(e) else source, str(e)) from e

    clock = _parse_clock(doc.get("clock", {"type": "linear"}), circuit)
    try:
        clock.check_against(circuit)
    except ClockhamError as e:
        raise SpecFileError("clock", str(e)) from e
    return circuit, clock


def _parse_clock(c, circuit: CircuitSpec) -> ClockSpec:
    if not isinstance(c, dict):
        raise SpecFileError("clock", "expected an object")
    pens = None
    if "input_penalties" in c and c["input_penalties"] is not None:
        raw = c["input_penalties"]
        if not isinstance(raw, dict):
            raise SpecFileError("clock.input_penalties", "expected an object keyed by t")
        pens = {}
        for key, m in raw.items():
            path = f"clock.input_penalties.{key}"
            try:
                t = int(key)
            except ValueError:
                raise SpecFileError(path, "keys must be integer times") from None
            pens[t] = _matrix(m, circuit.dim, path)
    kind = c.get("type", "explicit" if "labels" in c else "linear")
    try:
        if kind == "linear":
            t_init = _int(c.get("t_init", 0), "clock.t_init", 0)
            return linear_clock(circuit.steps, t_init, pens)
        if kind == "dynamic-init":
            t_init = c.get("t_init")
            t_init = math.ceil(math.sqrt(circuit.steps)) if t_init is None else _int(t_init, "clock.t_init", 0)
            return dynamic_init_clock(
                circuit.steps, t_init,
                branches=_int(c.get("branches", 0), "clock.branches", 0),
                branch_length=_int(c.get("branch_length", 6), "clock.branch_length", 1),
                reach=_int(c.get("reach", 3), "clock.reach", 1),
                input_penalties=pens)
        if kind == "explicit":
            for key in ("labels", "rules"):
                if key not in c:
                    raise SpecFileError(f"clock.{key}", "missing required field")
            labels = [str(x) for x in _list(c["labels"], "clock.labels")]
            rules = []
            for i, r in enumerate(_list(c["rules"], "clock.rules")):
                if not isinstance(r, list) or len(r) != 2:
                    raise SpecFileError(f"clock.rules[{i}]", "expected [from, to]")
                rules.append((str(r[0]), str(r[1])))
            illegal = [str(x) for x in _list(c.get("illegal", []), "clock.illegal")]
            t_init = _int(c.get("t_init", 0), "clock.t_init", 0)
            return ClockSpec(tuple(labels), tuple(rules), frozenset(illegal), t_init, pens,
                             c.get("start"), bool(c.get("final_state_detectable", True)))
    except SpecFileError:
        raise
    except ClockhamError as e:
        raise SpecFileError("clock", str(e)) from e
    raise SpecFileError("clock.type", f"unknown clock type {kind!r}")


def load_spec(source: Union[str, Path, dict]):
    """Load a spec from a path, a JSON string or an already-decoded dict."""
    if isinstance(source, dict):
        return parse_spec(source)
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as e:
        raise SpecFileError(str(path), f"cannot read: {e.strerror}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecFileError(str(path), f"invalid JSON at line {e.lineno}: {e.msg}") from e
    return parse_spec(doc, str(path))


def dump_spec(circuit: CircuitSpec, clock: ClockSpec) -> dict:
    """Explicit-clock spec document for a circuit and clock."""
    c = {
        "labels": list(clock.labels),
        "rules": [list(r) for r in clock.rules],
        "illegal": sorted(clock.illegal),
        "t_init": clock.t_init,
    }
    if clock.start is not None:
        c["start"] = clock.start
    if clock.input_penalties is not None:
        c["input_penalties"] = {str(t): _encode(p) for t, p in sorted(clock.input_penalties.items())}
    return {
        "qubits": circuit.qubits,
        "steps": circuit.steps,
        "ancillas": list(circuit.ancillas),
        "output": circuit.output,
        "gates": [{"t": g.t, "targets": list(g.targets), "matrix": _encode(g.matrix)}
                  for g in circuit.gates],
        "clock": c,
    }


_X = [[0, 0], [1, 0], [1, 0], [0, 0]]

BUILTIN_SPECS = {
    # no penalties at all: every register state has a history state
    "identity": {"qubits": 1, "steps": 3, "output": None, "gates": [],
                 "clock": {"type": "linear", "t_init": 0}},
    # ancilla must start in |0> and is never flipped: accepted with certainty
    "yes": {"qubits": 1, "steps": 6, "ancillas": [0], "output": 0, "gates": [],
            "clock": {"type": "linear", "t_init": 1}},
    # ancilla must start in |0> and is flipped to reject: rejected with certainty
    "no": {"qubits": 1, "steps": 6, "ancillas": [0], "output": 0,
           "gates": [{"t": 2, "targets": [0], "matrix": _X}],
           "clock": {"type": "linear", "t_init": 1}},
    # the rejecting circuit on a clock with illegal side branches
    "branches": {"qubits": 1, "steps": 9, "ancillas": [0], "output": 0,
                 "gates": [{"t": 4, "targets": [0], "matrix": _X}],
                 "clock": {"type": "dynamic-init", "branches": 2, "branch_length": 7, "reach": 3}},
}


def builtin_spec(name: str):
    if name not in BUILTIN_SPECS:
        raise SpecFileError("builtin", f"unknown built-in {name!r}; choose from {sorted(BUILTIN_SPECS)}")
    return parse_spec(BUILTIN_SPECS[name], f"builtin:{name}")
