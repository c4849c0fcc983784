"""Command-line interface.

Exit codes: 0 success, 1 failed selftest, 2 regime or domain violation,
3 parse error, 4 resource limit, 5 non-stabilized numeric result.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import hashlib
import io
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    AliasingError,
    DomainError,
    NonStabilizedError,
    ParseError,
    RegimeError,
    ResolutionError,
    ResourceError,
    SolverError,
)

CACHE_ENV = "SGTRIPLE_CACHE_DIR"
EXIT_REGIME, EXIT_PARSE, EXIT_RESOURCE, EXIT_UNSTABLE = 2, 3, 4, 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ParseError(f"cannot parse number list {text!r}") from exc


def parse_boundary(text: str):
    """A "v0,v1,v2" triple (rationals allowed) or the path of a vertex CSV file."""
    from .energy import VertexFunction

    path = Path(text)
    if path.suffix == ".csv" or path.is_file():
        try:
            return VertexFunction.from_csv(path.read_text())
        except OSError as exc:
            raise ParseError(f"cannot read {text}: {exc}") from exc
        except (ValueError, IndexError) as exc:
            raise ParseError(f"malformed vertex CSV {text}: {exc}") from exc
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3 or not all(parts):
        raise ParseError(f"boundary must be three comma-separated values, got {text!r}")
    try:
        if all("." not in p and "e" not in p.lower() for p in parts):
            vals = [Fraction(p) for p in parts]
        else:
            vals = [float(p) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"boundary values must be numbers, got {text!r}") from exc
    return VertexFunction.from_boundary(*vals)


def _parse_word(text: str) -> tuple[int, ...]:
    text = text.strip()
    if text in ("", "()"):
        return ()
    if not set(text) <= set("012"):
        raise ParseError(f"words use the letters 0, 1, 2; got {text!r}")
    return tuple(int(c) for c in text)


# ---------------------------------------------------------------------------
# Output


def _csv_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def _json_value(v):
    if isinstance(v, dict):
        return {str(k): _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, Fraction):
        return str(v)
    return v


def render(rows: list[dict], fmt: str, meta: dict | None = None) -> str:
    if fmt == "json":
        doc = {"rows": rows} if meta is None else {**meta, "rows": rows}
        return json.dumps(_json_value(doc), sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        cols = list(rows[0])
        w.writerow(cols)
        for r in rows:
            w.writerow([_csv_cell(r[c]) for c in cols])
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args) -> dict:
    from .spectral import TripleParams

    p = TripleParams(args.alpha, args.beta)
    return {
        "alpha": args.alpha,
        "beta": args.beta,
        "regimes": {"volume": p.volume_ok, "energy": p.energy_ok, "metric": p.metric_ok},
    }


def _params(args):
    from .spectral import TripleParams

    return TripleParams(args.alpha, args.beta)


def _guard(args, flag: bool, what: str):
    if not flag and not args.force:
        raise RegimeError(f"{what} regime fails at alpha={args.alpha}, beta={args.beta} (use --force)")
    if not flag:
        from .spectral import outside_regime_allowed

        return outside_regime_allowed()
    return contextlib.nullcontext()


def _cache_path(key: dict) -> Path | None:
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    digest = hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:24]
    return Path(root) / f"{digest}.json"


def _cached(key: dict, compute):
    path = _cache_path(key)
    if path is not None and path.is_file():
        return json.loads(path.read_text())
    value = compute()
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(value, sort_keys=True))
    return value


# ---------------------------------------------------------------------------
# Commands


def cmd_dims(args) -> int:
    from .spectral import dimension_report

    rep = dimension_report(_params(args)).as_dict()
    if args.format == "json":
        _emit(args, render([rep], "json", {"config": _config(args)}))
    else:
        rows = [{"pole_real": re, "pole_imag": im} for re, im in rep["poles"]]
        _emit(args, render(rows, "csv"))
    return 0


def cmd_zeta(args) -> int:
    from .spectral import zeta_D, zeta_D_direct

    p = _params(args)
    rows = []
    for s in _float_list(args.s):
        z = zeta_D(s, p, normalization=args.normalization)
        row = {"s": s, "value": z.real, "imag": z.imag, "tail_bound": 0.0}
        if args.direct:
            d = zeta_D_direct(s, p, m=args.m, K=args.K)
            row.update(direct=d.value, tail_bound=d.tail_bound)
        rows.append(row)
    _emit(args, render(rows, args.format, {"config": _config(args)}))
    return 0


def cmd_clausen(args) -> int:
    from .specialfn import clausen_cos_array

    if args.grid < 2:
        raise ParseError("--grid must be at least 2")
    order = -2 * args.alpha
    theta = 2 * np.pi * np.arange(1, args.grid) / args.grid
    vals, errs = clausen_cos_array(order, theta)
    rows = []
    for t, v, e in zip(theta, vals, errs):
        row = {"theta": t, "ci": v, "abs_error_bound": e}
        if order == -1:
            row["closed_form"] = -1 / (4 * math.sin(t / 2) ** 2)
        rows.append(row)
    _emit(args, render(rows, args.format, {"config": _config(args)}))
    return 0


def cmd_energy(args) -> int:
    from .energy import energy_report, extend, graph_energy_sequence

    f = parse_boundary(args.boundary)
    target = max(args.m, f.level)
    g = extend(f, target, args.extension)
    seq = graph_energy_sequence(g)
    final = seq[-1]
    rows = []
    for level, e in enumerate(seq):
        rows.append({
            "level": level,
            "energy": float(e),
            "exact": str(e) if isinstance(e, Fraction) else "",
            "deviation": abs(float(e) - float(final)),
            "invariant": e == final,
        })
    rep = energy_report(g)
    meta = {"config": _config(args), "monotone": rep.monotone, "extension": args.extension}
    _emit(args, render(rows, args.format, meta))
    return 0


def cmd_volume(args) -> int:
    import warnings

    from .gasket import word_str
    from .spectral import cell_volume, volume_residue_check

    p = _params(args)
    rows = []
    with _guard(args, p.volume_ok, "volume"), warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        offsets = tuple(_float_list(args.offsets)) if args.offsets else None
        for item in args.tau.split(","):
            tau = _parse_word(item)
            kw = {"offsets": offsets} if offsets else {}
            r = volume_residue_check(tau, p, m=args.m, K=args.K, **kw)
            vol = cell_volume(tau, p)
            rows.append({"tau": word_str(tau), "residue": r.value, "tail_bound": r.tail_bound,
                         "cell_volume": vol, "rel_err": abs(r.value / vol - 1)})
    _emit(args, render(rows, args.format, {"config": _config(args)}))
    return 0


def cmd_residue(args) -> int:
    from .energy import graph_energy
    from .specialfn import riemann_zeta
    from .spectral import LOG2, energy_residue, harmonic_constants

    p = _params(args)
    f = parse_boundary(args.boundary).to_float()
    with _guard(args, p.energy_ok, "energy"):
        key = {"kind": "harmonic_constants", "alpha": p.alpha, "beta": p.beta, "L": args.L}

        def constants():
            c = harmonic_constants(p, L=args.L)
            return {"K2": c.K2, "C_delta": c.C_of(p.delta)}

        consts = _cached(key, constants)
        E = float(graph_energy(f))
        offsets = tuple(_float_list(args.offsets)) if args.offsets else None
        kw = {"offsets": offsets} if offsets else {}
        res = energy_residue(f, p, m=args.m, L=args.L, workers=args.workers, **kw)

        z = riemann_zeta(p.alpha * p.delta).value
        closed = (2 * consts["K2"] * z + consts["C_delta"]) * E / (p.beta * LOG2)
    row = {"energy": E, "residue": res.value, "tail_bound": res.tail_bound, "closed_form": closed,
           "rel_err": abs(res.value / closed - 1) if closed else math.nan,
           "residue_over_energy": res.value / E if E else math.nan,
           "K2": consts["K2"], "C_delta": consts["C_delta"]}
    _emit(args, render([row], args.format, {"config": _config(args)}))
    return 0


def cmd_distance(args) -> int:
    from .gasket import build_graph
    from .metric import DistanceProblem

    p = _params(args)
    g = build_graph(args.m)
    n = len(g.X)
    pairs = []
    for item in args.pairs:
        try:
            i, j = (int(v) for v in item.split(":"))
        except ValueError as exc:
            raise ParseError(f"vertex pair must look like 0:1, got {item!r}") from exc
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(f"vertex ids must lie in 0..{n - 1}")
        pairs.append((i, j))
    rows = []
    with _guard(args, p.metric_ok, "metric"):
        prob = DistanceProblem(p, args.m, args.L)
        for i, j in pairs:
            b = prob.solve(g.point(i), g.point(j))
            rows.append({"x": i, "y": j, "rho_geo": b.diagnostics.get("rho_geo", 0.0), "lower": b.lower,
                         "envelope_low": b.envelope_low, "envelope_high": b.envelope_high,
                         "within_envelopes": b.within_envelopes, "status": b.diagnostics["status"]})
    _emit(args, render(rows, args.format, {"config": _config(args)}))
    return 0


def cmd_pairing(args) -> int:
    from . import khomology as kh

    meta = {"config": _config(args)}
    if args.relations:
        rep = kh.module_relations_check(args.alpha, args.K)
        meta["relations"] = rep.as_dict()
    rows = []
    for k in (int(v) for v in args.k.split(",")) if args.k else ():
        u = kh.SymbolLoop.monomial(k, max(256, 8 * abs(k)))
        sec = kh.sector_indices(u, args.N)
        rows.append({"symbol": f"e_{k}", "winding": kh.winding_number(u), "pairing": kh.pairing_index(u, args.N),
                     "sector_minus": sec[-1], "sector_zero": sec[0], "sector_plus": sec[1]})
    if args.generators is not None:
        symbol = kh.GasketSymbol.constant(1.0)
        for item in args.generators.split(","):
            if item.strip():
                symbol = symbol * kh.GasketSymbol.generator(_parse_word(item))
        vec = kh.pairing_vector(symbol, args.level, args.N)
        meta["lacuna_pairings"] = vec
        rows.extend({"symbol": "gasket", "lacuna": t, "pairing": v} for t, v in vec.items())
        if args.format == "csv":
            rows = [{"lacuna": t, "pairing": v} for t, v in vec.items()]
    _emit(args, render(rows, args.format, meta))
    return 0


def cmd_selftest(args) -> int:
    from .acceptance import run_all

    lines = run_all(args.workers)
    _emit(args, "".join(line + "\n" for line in lines))
    return 0 if all(line.startswith("PASS") for line in lines) else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sgtriple", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name: str, help: str, fmt: str = "json"):
        # each subcommand gets its own copies, so defaults do not leak
        p = sub.add_parser(name, help=help)
        p.add_argument("--alpha", type=float, default=0.85)
        p.add_argument("--beta", type=float, default=1.0)
        p.add_argument("--format", choices=("csv", "json"), default=fmt)
        p.add_argument("--output", "-o", help="write to a file instead of stdout")
        p.add_argument("--force", action="store_true", help="run outside the validated regime")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)
        return p

    p = command("dims", "dimensions and poles")
    p.set_defaults(func=cmd_dims)

    p = command("zeta", "spectral zeta function")
    p.add_argument("--s", default="3", help="comma-separated exponents")
    p.add_argument("--direct", action="store_true", help="add the truncated eigenvalue sum")
    p.add_argument("--m", type=int, default=12)
    p.add_argument("--K", type=int, default=10**5)
    p.add_argument("--normalization", choices=("proof", "theorem"), default="proof")
    p.set_defaults(func=cmd_zeta)

    p = command("clausen", "Clausen cosine Ci_{-2 alpha} on a grid", "csv")
    p.add_argument("--grid", type=int, default=100)
    p.set_defaults(func=cmd_clausen)

    p = command("energy", "graph energies of an extended function", "csv")
    p.add_argument("--boundary", required=True, help="v0,v1,v2 or a vertex CSV file")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--extension", choices=("harmonic", "affine"), default="harmonic")
    p.set_defaults(func=cmd_energy)

    p = command("volume", "volume residue of cells")
    p.add_argument("--tau", default="()", help="comma-separated words; () is the empty word")
    p.add_argument("--m", type=int, default=14)
    p.add_argument("--K", type=int, default=10**4)
    p.add_argument("--offsets", default="")
    p.set_defaults(func=cmd_volume)

    p = command("residue", "energy residue at the energy dimension")
    p.add_argument("--boundary", required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--L", type=int, default=8)
    p.add_argument("--offsets", default="")
    p.set_defaults(func=cmd_residue)

    p = command("distance", "certified spectral distance lower bounds", "csv")
    p.add_argument("pairs", nargs="+", help="vertex id pairs such as 0:1")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--L", type=int, default=4)
    p.set_defaults(func=cmd_distance)

    p = command("pairing", "index pairings")
    p.add_argument("--k", default="", help="comma-separated circle monomials")
    p.add_argument("--generators", default=None, help="comma-separated lacuna words for a gasket symbol")
    p.add_argument("--level", type=int, default=2)
    p.add_argument("--N", type=int, default=64)
    p.add_argument("--K", type=int, default=8)
    p.add_argument("--relations", action="store_true")
    p.set_defaults(func=cmd_pairing)

    p = command("selftest", "run the acceptance suite")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command != "selftest":
            _config(args)
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (RegimeError, DomainError) as exc:
        print(f"regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (ResourceError, ResolutionError, MemoryError) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (NonStabilizedError, AliasingError, SolverError) as exc:
        print(f"numeric result did not stabilize: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE


if __name__ == "__main__":
    sys.exit(main())
