"""
Command-line interface.

    clockham spectrum --endpoint T --mu MU
    clockham spectrum --walk T --penalty K:MU [--penalty K:MU ...]
    clockham verify SUITE [grid options]
    clockham assemble (--spec FILE | --builtin NAME)

Output goes to ``--output`` (default stdout) as CSV or JSON.  Exit codes:
0 success, 1 numeric failure, 2 usage or schema error, 3 a verification
verdict was violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

import numpy as np

from . import bounds, walks
from .bounds import BoundReport, format_number
from .circuitham import (assemble, biased_coin_circuit, linear_clock,
                         mixed_subspace_bound)
from .errors import (ClockhamError, DomainError, InstanceContractViolation, NearPole,
                     SpecFileError)
from .linalg import eig_dense, eig_tridiagonal
from .specfile import BUILTIN_SPECS, builtin_spec, load_spec

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3

SUITES = ("uncoupling", "starting-penalty", "kkr", "eqma", "qma-window",
          "constant-rejection", "scaling")

SPECTRUM_COLUMNS = ("index", "eigenvalue")
ASSEMBLE_COLUMNS = ("subspace", "kind", "states", "dim", "lambda0", "kernel_dim", "lower_bound")


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------

def _penalty(text: str):
    try:
        k, mu = text.split(":")
        return int(k), float(mu)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected K:MU, got {text!r}") from None


def _positive(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return x


def _fraction(text: str) -> float:
    """Accept ``0.25`` as well as ``1/4``."""
    if "/" in text:
        a, b = text.split("/", 1)
        return float(a) / float(b)
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="clockham", description=__doc__.split("\n\n")[0].strip())
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--output", "-o", default="-", help="output path (default stdout)")

    sp = sub.add_parser("spectrum", help="eigenvalues of a penalised walk")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--walk", type=int, metavar="T")
    g.add_argument("--endpoint", type=int, metavar="T")
    sp.add_argument("--penalty", type=_penalty, action="append", default=[], metavar="K:MU")
    sp.add_argument("--mu", type=float)
    common(sp)

    sv = sub.add_parser("verify", help="run a verification suite")
    sv.add_argument("suite", choices=SUITES)
    sv.add_argument("--tmin", type=int)
    sv.add_argument("--tmax", type=int)
    sv.add_argument("--T", type=int, nargs="+", dest="T_values")
    sv.add_argument("--k", type=_fraction, nargs="+", dest="k_values")
    sv.add_argument("--mu", type=_fraction, nargs="+", dest="mu_values")
    sv.add_argument("--eta", type=_fraction, nargs="+", dest="eta_values")
    sv.add_argument("--spec", nargs="+", default=[])
    sv.add_argument("--instance", choices=("YES", "NO"))
    sv.add_argument("--samples", type=int, default=500)
    sv.add_argument("--seed", type=int, default=0)
    sv.add_argument("--factor", type=_positive, default=10.0, help="scaling band-ratio gate")
    sv.add_argument("--tol", type=_positive, help="override the comparison tolerance")
    sv.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    common(sv)

    sa = sub.add_parser("assemble", help="assemble a spec and report per-subspace energies")
    g = sa.add_mutually_exclusive_group(required=True)
    g.add_argument("--spec")
    g.add_argument("--builtin", choices=sorted(BUILTIN_SPECS))
    common(sa)
    return p


def _write(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _table(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_number(x) if not isinstance(x, str) else x for x in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------

def cmd_spectrum(args) -> int:
    T = args.endpoint if args.endpoint is not None else args.walk
    if T < 1:
        raise _Usage(f"walk length must be positive, got {T}")
    if args.mu is not None and not 0.0 <= args.mu <= 1.0:
        raise _Usage(f"--mu must lie in [0, 1], got {args.mu}")
    for k, mu in args.penalty:
        if not 1 <= k <= T or not mu >= 0:
            raise _Usage(f"--penalty {k}:{mu} needs 1 <= K <= {T} and MU >= 0")
    if args.endpoint is not None:
        if args.mu is None or args.penalty:
            raise _Usage("--endpoint needs --mu and no --penalty")
        lam = walks.endpoint_spectrum(args.endpoint, args.mu)
        meta = {"mode": "endpoint", "T": args.endpoint, "mu": args.mu}
    else:
        if args.mu is not None:
            raise _Usage("--mu goes with --endpoint; use --penalty K:MU with --walk")
        w = walks.PenalizedWalk(args.walk, tuple(args.penalty))
        lam = eig_tridiagonal(w.to_matrix()).eigenvalues
        meta = {"mode": "walk", "T": args.walk, "penalties": [list(p) for p in w.penalties]}
    if not np.all(np.isfinite(lam)):
        raise ClockhamError("non-finite eigenvalue")
    if args.format == "json":
        text = json.dumps(dict(meta, eigenvalues=[float(x) for x in lam]), indent=2) + "\n"
    else:
        text = _table(SPECTRUM_COLUMNS, enumerate(lam))
    _write(text, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify: one function per grid point, so points can run in worker processes
# ---------------------------------------------------------------------------

def _uncoupling_point(T: int) -> list:
    out = []
    for k in range(2, T):
        w = walks.PenalizedWalk(T, ((k, 1.0),))
        u = walks.uncouple(w)
        lam_j = float(eig_dense(u.coupling_matrix()).eigenvalues[0])
        lam_h = float(eig_tridiagonal(w.to_matrix()).eigenvalues[0])
        lam_b = u.block_ground_energy()
        out.append(BoundReport("uncoupling-J", 0.0, math.inf, lam_j, 1e-12, T, {"k": k},
                               "J >= 0", "eig_dense on coupling"))
        out.append(BoundReport("uncoupling", lam_b, math.inf, lam_h, 1e-12, T, {"k": k},
                               "lambda_0 of the block sum", "Sturm bisection on the walk"))
    return out


def _starting_penalty_point(T: int) -> list:
    scan = walks.starting_penalty_scan(T)
    pred = walks.one_minus_cos(math.pi / (2 * T))
    arg_ok = 1.0 if set(scan.argmin) == {1, T} else 0.0
    return [
        BoundReport("starting-penalty", pred, pred, scan.minimum, 1e-10, T, {},
                    "1-cos(pi/2T)", "batched Sturm scan over k"),
        BoundReport("starting-penalty-argmin", 1.0, 1.0, arg_ok, 0.0, T,
                    {"argmin": "/".join(map(str, scan.argmin))}, "argmin = {1, T}", "Sturm scan"),
    ]


def _kkr_point(args) -> list:
    seed, count = args
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, 33))
        a = rng.normal(size=(n, n))
        b = a + rng.normal(scale=10.0 ** rng.uniform(-6, 0), size=(n, n))
        r = bounds.kkr_check(a + a.T, b + b.T)
        out.append(BoundReport(r.name, r.predicted_lo, r.predicted_hi, r.computed, r.tol,
                               None, dict(r.params, seed=seed), r.predicted_by, r.computed_by))
    return out


def _eqma_point(args) -> list:
    source, instance = args
    if isinstance(source, int):
        T = source
        c = biased_coin_circuit(T, 1, 1.0 if instance == "NO" else 0.0)
        clock = linear_clock(T, 1)
    else:
        c, clock = load_spec(source)
    h = assemble(c, clock)
    return [bounds.verify_eqma(h, instance)] + bounds.verify_subspaces(h)


def _qma_point(args) -> list:
    source, eta, instance = args
    if isinstance(source, int):
        T = source
        c = biased_coin_circuit(T, 1, eta if instance == "YES" else 1.0 - eta)
        clock = linear_clock(T, 1)
    else:
        c, clock = load_spec(source)
        eta = bounds.compute_eta(c, clock, instance)
    h = assemble(c, clock)
    return [bounds.verify_qma_window(h, eta, instance)]


def _constant_rejection_point(args) -> list:
    T, mu = args
    t_init = math.ceil(math.sqrt(T))
    h = assemble(biased_coin_circuit(T, t_init, mu), linear_clock(T, t_init))
    return bounds.verify_constant_rejection(T, t_init, mu, h)


def _run(fn, points, jobs: int) -> list:
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(points))) as ex:
            chunks = list(ex.map(fn, points))
    else:
        chunks = [fn(p) for p in points]
    return [r for chunk in chunks for r in chunk]


def _grid(args, tmin: int, tmax: int, step: str = "all") -> list:
    if args.T_values:
        return sorted(args.T_values)
    lo = args.tmin if args.tmin is not None else tmin
    hi = args.tmax if args.tmax is not None else tmax
    if lo > hi:
        raise _Usage(f"--tmin {lo} exceeds --tmax {hi}")
    if step == "pow2":
        out, t = [], 1
        while t <= hi:
            if t >= lo:
                out.append(t)
            t *= 2
        return out
    return list(range(lo, hi + 1))


def verification_reports(args) -> list:
    s = args.suite
    jobs = max(1, args.jobs)
    if s == "uncoupling":
        reports = _run(_uncoupling_point, _grid(args, 3, 32), jobs)
    elif s == "starting-penalty":
        reports = _run(_starting_penalty_point, _grid(args, 4, 64), jobs)
    elif s == "kkr":
        n = args.samples
        per = 50
        pts = [(args.seed * 100003 + i, min(per, n - i * per)) for i in range(math.ceil(n / per))]
        reports = _run(_kkr_point, pts, jobs)
    elif s == "eqma":
        if args.spec:
            pts = [(p, args.instance) for p in args.spec]
        else:
            pts = [(T, inst) for T in _grid(args, 4, 16, "pow2") for inst in ("YES", "NO")]
        reports = _run(_eqma_point, pts, jobs)
    elif s == "qma-window":
        if args.spec:
            if args.instance is None:
                raise _Usage("--spec with qma-window needs --instance")
            pts = [(p, None, args.instance) for p in args.spec]
        else:
            etas = args.eta_values or [0.25, 1 / 3]
            pts = [(T, e, inst) for T in _grid(args, 4, 16, "pow2") for e in etas for inst in ("YES", "NO")]
        reports = _run(_qma_point, pts, jobs)
    elif s == "constant-rejection":
        Ts = args.T_values or [36, 100]
        mus = args.mu_values or [0.1, 1 / 3]
        reports = _run(_constant_rejection_point, [(T, m) for T in Ts for m in mus], jobs)
    elif s == "scaling":
        ks = args.k_values or [0.25, 0.5, 1.0, 2.0]
        table = bounds.scaling_study(ks, _grid(args, 64, 4096, "pow2"), args.factor, jobs)
        reports = table.reports()
    else:  # pragma: no cover - argparse restricts choices
        raise _Usage(f"unknown suite {s}")
    if args.tol is not None:
        reports = [BoundReport(r.name, r.predicted_lo, r.predicted_hi, r.computed, args.tol,
                               r.T, r.params, r.predicted_by, r.computed_by) for r in reports]
    return reports


def cmd_verify(args) -> int:
    reports = verification_reports(args)
    if not reports:
        raise _Usage("empty grid")
    text = bounds.reports_to_json(reports) if args.format == "json" else bounds.reports_to_csv(reports)
    _write(text, args.output)
    bad = [r for r in reports if not r.holds]
    for r in bad[:5]:
        print(f"violated: {r.name} T={r.T} {r.params_string()} computed={r.computed!r} "
              f"predicted=[{r.predicted_lo!r}, {r.predicted_hi!r}]", file=sys.stderr)
    return EXIT_VERIFY if bad else EXIT_OK


# ---------------------------------------------------------------------------
# assemble
# ---------------------------------------------------------------------------

def cmd_assemble(args) -> int:
    if args.spec:
        circuit, clock = load_spec(args.spec)
        source = args.spec
    else:
        circuit, clock = builtin_spec(args.builtin)
        source = f"builtin:{args.builtin}"
    h = assemble(circuit, clock)
    rows = []
    for i, s in enumerate(clock.partition):
        lam = h.block_spectrum(s)
        if s.kind == "illegal-only":
            lb = 1.0
        elif s.kind == "mixed":
            lb = mixed_subspace_bound(s)
        else:
            lb = 0.0
        rows.append({
            "subspace": i, "kind": s.kind, "states": len(s),
            "dim": len(s) * circuit.dim, "lambda0": float(lam[0]),
            "kernel_dim": int(np.count_nonzero(np.abs(lam) < 1e-9)),
            "lower_bound": lb,
        })
    if args.format == "json":
        doc = {
            "source": source, "qubits": circuit.qubits, "steps": circuit.steps,
            "t_init": clock.t_init, "realified": h.factor == 2, "dimension": h.dim,
            "valid_path": list(clock.valid_path.labels),
            "predicted_no": walks.one_minus_cos(math.pi / (2 * circuit.steps)),
            "subspaces": rows,
        }
        text = json.dumps(doc, indent=2) + "\n"
    else:
        text = _table(ASSEMBLE_COLUMNS, ([r[c] for c in ASSEMBLE_COLUMNS] for r in rows))
    _write(text, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------

class _Usage(Exception):
    pass


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"spectrum": cmd_spectrum, "verify": cmd_verify, "assemble": cmd_assemble}[args.command]
    try:
        return handler(args)
    except _Usage as e:
        parser.print_usage(sys.stderr)
        print(f"clockham: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SpecFileError as e:
        print(f"clockham: schema error at {e.path}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except InstanceContractViolation as e:
        print(f"clockham: verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFY
    except DomainError as e:
        if isinstance(e, NearPole):
            print(f"clockham: numeric failure: {e}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"clockham: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ClockhamError, FloatingPointError, np.linalg.LinAlgError, ValueError) as e:
        print(f"clockham: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
