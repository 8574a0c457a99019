"""Command-line front end.

Exit status: 0 pass, 1 verification failure, 2 usage or domain error,
3 numerical failure (quadrature did not converge or hit a non-finite value).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import verify as vf
from ._io import atomic_write, dumps, fmt, payload_digest
from .errors import ConvergenceError, DomainError, QuadratureEvaluationError
from .expansion import CoefficientVector, TestFunction, forward_transform
from .inequalities import Theorem, conjugate_exponent, draw_coefficients, trial_seeds
from .quadrature import gen_gegenbauer_rule
from .special_poly import (
    BasisParams,
    gen_gegenbauer_eval,
    orthonormal_gg_eval,
    orthonormal_gg_table,
)

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

CHECKS = (
    "orthonormality",
    "supnorm",
    "parseval",
    "roundtrip",
    "endpoint-collapse",
    "hardy-littlewood",
    "hausdorff-young",
    "unified",
    "connection",
    "converse",
)
_FORWARD = {"hardy-littlewood": Theorem.HL, "hausdorff-young": Theorem.HY, "unified": Theorem.UNIFIED}

EPILOG = """\
CSV headers:
  quad                 node,weight
  transform            n,coefficient
  verify (plot data)   x,ratio

transform --input accepts
  family:NAME          seeded built-in family (flat, harmonic, quadratic, single, lacunary)
  FILE.csv             header n,monomial | n,orthonormal | n,coefficient | node,value
  FILE.json            {"basis": "monomial" | "orthonormal", "coeffs": [...]}
A node,value file holds samples at the nodes printed by `quad`.

Numbers are written with 17 significant digits. GGEXP_THREADS caps worker
threads for trial scans (0 = one per CPU). The supnorm check reports a
grid-plus-golden-section estimate of the maximum, not a proven bound.
"""


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    params: BasisParams
    options: dict = field(default_factory=dict)
    output: str | None = None
    format: str | None = None

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "params": {"lambda": self.params.lam, "mu": self.params.mu},
            "options": self.options,
            "output": self.output,
            "format": self.format,
        }


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="ggexp",
        description="Generalized Gegenbauer expansions and coefficient inequality checks.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--lambda", dest="lam", type=float, required=True)
        p.add_argument("--mu", type=float, required=True)

    p = sub.add_parser("eval", help="print C_n(t) or the orthonormal C~_n(t)")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--orthonormal", action="store_true")

    p = sub.add_parser("quad", help="emit a quadrature rule as node,weight CSV")
    common(p)
    p.add_argument("--points", type=int, required=True, help="Jacobi nodes; the rule has 2x signed nodes")
    p.add_argument("--out")

    p = sub.add_parser("transform", help="expansion coefficients of a polynomial or of samples")
    common(p)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))

    p = sub.add_parser("verify", help="run a verification check and write a JSON report")
    p.add_argument("check", choices=CHECKS)
    common(p)
    p.add_argument("--nmax", type=int)
    p.add_argument("--nmin", type=int, default=16, help="first degree for supnorm")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p", type=float, default=1.5, help="Lebesgue exponent for forward and endpoint checks")
    p.add_argument("--s", type=float, help="unified exponent; defaults to the midpoint of [p, p']")
    p.add_argument("--q", type=float, default=3.0, help="Lebesgue exponent for converse")
    p.add_argument("--r", type=float, help="converse unified exponent in [q', q]")
    p.add_argument("--theorem", choices=[t.value for t in Theorem], default=Theorem.HY.value)
    p.add_argument("--family", default="mixed")
    p.add_argument("--length", type=int, default=32, help="length of phi for converse")
    p.add_argument("--out", help="JSON report; plot CSV goes to the same stem with .csv")
    return top


_DEFAULTS = {
    "orthonormality": {"nmax": 50},
    "supnorm": {"nmax": 256},
    "parseval": {"nmax": 40, "trials": 50},
    "roundtrip": {"nmax": 64, "trials": 200},
    "endpoint-collapse": {"nmax": 64, "trials": 100},
    "hardy-littlewood": {"nmax": 128, "trials": 200},
    "hausdorff-young": {"nmax": 128, "trials": 200},
    "unified": {"nmax": 128, "trials": 200},
    "connection": {"nmax": 20},
    "converse": {"trials": 4},
}


def _check_writable(path: str | None) -> None:
    if path is None:
        return
    parent = Path(path).resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise UsageError(f"cannot write to {path}: directory missing or not writable")
    if Path(path).is_dir():
        raise UsageError(f"cannot write to {path}: it is a directory")


def build_config(args: argparse.Namespace) -> RunConfig:
    bp = BasisParams(args.lam, args.mu)
    cmd = args.command
    if cmd == "eval":
        return RunConfig(cmd, bp, {"n": args.n, "t": args.t, "orthonormal": args.orthonormal})
    if cmd == "quad":
        if args.points < 1:
            raise DomainError(f"--points must be positive, got {args.points}")
        return RunConfig(cmd, bp, {"points": args.points}, args.out, "csv")
    if cmd == "transform":
        fmt_ = args.format or ("json" if args.out and args.out.endswith(".json") else "csv")
        return RunConfig(cmd, bp, {"degree": args.degree, "input": args.input, "seed": args.seed}, args.out, fmt_)

    opts = {"check": args.check, "seed": args.seed, **_DEFAULTS[args.check]}
    if args.nmax is not None:
        opts["nmax"] = args.nmax
    if args.trials is not None:
        opts["trials"] = args.trials
    if "nmax" in opts and opts["nmax"] < 0:
        raise DomainError(f"--nmax must be non-negative, got {opts['nmax']}")
    if "trials" in opts and opts["trials"] < 1:
        raise DomainError(f"--trials must be positive, got {opts['trials']}")
    if args.check == "supnorm":
        if not 1 <= args.nmin < opts["nmax"]:
            raise DomainError(f"--nmin must satisfy 1 <= nmin < nmax, got {args.nmin}")
        opts["nmin"] = args.nmin
    if args.check == "endpoint-collapse":
        opts["p"] = args.p
    if args.check in _FORWARD:
        opts["p"] = args.p
        opts["family"] = args.family
        if args.check == "unified":
            if not 1 < args.p <= 2:
                raise DomainError(f"p must lie in (1, 2], got {args.p}")
            opts["s"] = args.s if args.s is not None else vf.midpoint_s(args.p)
    if args.check == "converse":
        opts.update(theorem=args.theorem, q=args.q, length=args.length)
        if args.theorem == Theorem.UNIFIED.value:
            opts["r"] = args.r if args.r is not None else 0.5 * (args.q + conjugate_exponent(args.q))
        if args.length < 1:
            raise DomainError(f"--length must be positive, got {args.length}")
    if args.check == "connection":
        bp.require_positive_mu("verify connection")
    return RunConfig("verify", bp, opts, args.out, "json")


# -- transform inputs --------------------------------------------------------


def _monomial(coeffs: np.ndarray) -> TestFunction:
    c = np.asarray(coeffs, dtype=float)
    return TestFunction.from_callable(
        lambda t: np.polynomial.polynomial.polyval(t, c), degree=max(c.size - 1, 0), label="monomial"
    )


def _from_samples(bp: BasisParams, nodes: np.ndarray, values: np.ndarray, degree: int) -> np.ndarray:
    if nodes.size == 0 or nodes.size % 2:
        raise DomainError("sample files must hold the 2N nodes of a quadrature rule")
    rule = gen_gegenbauer_rule(bp, nodes.size // 2)
    if not np.allclose(nodes, rule.nodes, rtol=0, atol=1e-12):
        raise DomainError("sample nodes do not match the rule from `quad` with these parameters")
    if not np.all(np.isfinite(values)):
        raise DomainError("sample values must be finite")
    return orthonormal_gg_table(bp, degree, rule.nodes) @ (rule.weights * values)


def _read_columns(path: Path) -> tuple[list[str], np.ndarray]:
    rows = list(csv.reader(io.StringIO(path.read_text())))
    if not rows:
        raise DomainError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float).reshape(-1, len(header))
    except ValueError as exc:
        raise DomainError(f"{path}: {exc}") from None
    return header, data


def load_transform_input(bp: BasisParams, spec: str, degree: int, seed: int) -> CoefficientVector:
    if spec.startswith("family:"):
        name = spec.split(":", 1)[1]
        rng = np.random.default_rng(trial_seeds(seed, 1)[0])
        cv = CoefficientVector(bp, draw_coefficients(name, 0, rng, degree))
        return forward_transform(bp, TestFunction.from_coefficients(cv), degree)

    path = Path(spec)
    if not path.is_file():
        raise DomainError(f"input {spec!r} is neither family:NAME nor a readable file")
    if path.suffix == ".json":
        try:
            data = json.loads(path.read_text())
            basis, coeffs = data["basis"], np.asarray(data["coeffs"], dtype=float)
        except (ValueError, KeyError, TypeError) as exc:
            raise DomainError(f"{path}: expected {{basis, coeffs}}: {exc}") from None
    else:
        header, table = _read_columns(path)
        if header == ["node", "value"]:
            return CoefficientVector(bp, _from_samples(bp, table[:, 0], table[:, 1], degree))
        kinds = {"monomial": "monomial", "orthonormal": "orthonormal", "coefficient": "orthonormal"}
        if len(header) != 2 or header[0] != "n" or header[1] not in kinds:
            raise DomainError(f"{path}: unknown header {','.join(header)}")
        basis = kinds[header[1]]
        order = np.argsort(table[:, 0])
        coeffs = table[order, 1]
    if coeffs.size == 0:
        raise DomainError(f"{path}: no coefficients")
    if basis == "monomial":
        f = _monomial(coeffs)
    elif basis == "orthonormal":
        f = TestFunction.from_coefficients(CoefficientVector(bp, coeffs))
    else:
        raise DomainError(f"{path}: basis must be monomial or orthonormal, got {basis!r}")
    return forward_transform(bp, f, degree)


# -- verify ------------------------------------------------------------------


def run_check(config: RunConfig) -> vf.VerificationReport:
    o, bp = config.options, config.params
    check = o["check"]
    if check == "orthonormality":
        return vf.check_orthonormality(bp, o["nmax"])
    if check == "supnorm":
        return vf.check_supnorm(bp, o["nmax"], o["nmin"])
    if check == "parseval":
        return vf.check_parseval(bp, o["nmax"], o["trials"], o["seed"])
    if check == "roundtrip":
        return vf.check_roundtrip(bp, o["nmax"], o["trials"], o["seed"])
    if check == "endpoint-collapse":
        return vf.check_endpoint_collapse(bp, o["p"], o["nmax"], o["trials"], o["seed"])
    if check in _FORWARD:
        return vf.check_forward(
            _FORWARD[check], bp, o["p"], o.get("s"), o["nmax"], o["trials"], o["seed"], o["family"]
        )
    if check == "connection":
        return vf.check_connection(bp, o["nmax"])
    return vf.check_converse(Theorem(o["theorem"]), bp, o["q"], o.get("r"), o["length"], o["trials"], o["seed"])


def series_csv(series) -> str:
    return "x,ratio\n" + "".join(f"{fmt(x)},{fmt(y)}\n" for x, y in series)


def report_document(config: RunConfig, report: vf.VerificationReport, timestamp: str) -> dict:
    payload = {"config": config.to_dict(), **report.to_dict()}
    return {
        "schema": SCHEMA,
        "payload": payload,
        "payload_sha256": payload_digest(payload),
        "generated_at": timestamp,
    }


def _emit(path: str | None, text: str, stdout) -> None:
    if path is None:
        stdout.write(text)
    else:
        atomic_write(path, text)


def run(config: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    bp, o = config.params, config.options
    _check_writable(config.output)
    if config.command == "eval":
        if not -1.0 <= o["t"] <= 1.0:
            raise DomainError(f"--t must lie in [-1, 1], got {o['t']}")
        fn = orthonormal_gg_eval if o["orthonormal"] else gen_gegenbauer_eval
        stdout.write(fmt(fn(bp, o["n"], o["t"])) + "\n")
        return EXIT_OK
    if config.command == "quad":
        _emit(config.output, gen_gegenbauer_rule(bp, o["points"]).to_csv(), stdout)
        return EXIT_OK
    if config.command == "transform":
        cv = load_transform_input(bp, o["input"], o["degree"], o["seed"])
        _emit(config.output, cv.to_json() if config.format == "json" else cv.to_csv(), stdout)
        return EXIT_OK

    report = run_check(config)
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    text = dumps(report_document(config, report, stamp))
    if config.output is None:
        stdout.write(text)
    else:
        atomic_write(config.output, text)
        atomic_write(Path(config.output).with_suffix(".csv"), series_csv(report.series))
        stdout.write(f"{report.check}: {'pass' if report.passed else 'FAIL'}\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run(build_config(args))
    except (DomainError, UsageError) as exc:
        print(f"ggexp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ggexp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, QuadratureEvaluationError) as exc:
        print(f"ggexp: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
