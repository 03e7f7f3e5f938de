"""Command-line front end: JSON/CSV output with the effective config, seed and version embedded."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, fields

import numpy as np

from . import __version__
from . import heat_kernel as hk
from . import modular_oracle as mo
from . import reduction, root_system, spherical, supnorm
from .errors import NumericalError, SiegelHeatError, ValidationError
from .integration import QuadratureSpec
from .symplectic_core import SiegelPoint, SymplecticMatrix, act, distance, radial_coordinates

CONFIG_ENV = "SIEGEL_HEAT_CONFIG"
EXAMPLE_PAIR = ("1j", "2j")


@dataclass(frozen=True)
class RunConfig:
    samples: int = 100_000
    seed: int = 0
    workers: int = 1
    scale: float = 1.0
    points: int = 256
    cutoff: int = 40
    c2: float = supnorm.C2_DEFAULT
    rtol: float = 1e-3
    output: str | None = None

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self):
        for name in ("samples", "seed", "workers", "points", "cutoff"):
            if not isinstance(getattr(self, name), int) or isinstance(getattr(self, name), bool):
                raise ValidationError(f"config key {name} must be an integer")
        for name in ("scale", "c2", "rtol"):
            if not isinstance(getattr(self, name), (int, float)) or not getattr(self, name) > 0:
                raise ValidationError(f"config key {name} must be a positive number")
        if self.output is not None and not isinstance(self.output, str):
            raise ValidationError("config key output must be a path string")
        self.quadrature()

    def quadrature(self, method: str = "monte_carlo") -> QuadratureSpec:
        return QuadratureSpec(method=method, samples=self.samples, seed=self.seed,
                              workers=self.workers, scale=float(self.scale), points=self.points)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.as_dict(), sort_keys=True).encode()).hexdigest()[:16]


def load_config(path: str | None, overrides: dict) -> RunConfig:
    data = {}
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ValidationError("config file must hold a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.from_mapping(data)


# ---------------------------------------------------------------- parsing helpers

def _parse_complex_matrix(text: str) -> np.ndarray:
    """A scalar ("1j", "0.3+1.2j") or a JSON nested list of numbers / complex strings."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        obj = text
    try:
        arr = np.array(_to_complex(obj), dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"cannot parse matrix {text!r}") from exc
    return arr.reshape(1, 1) if arr.ndim == 0 else arr


def _to_complex(obj):
    if isinstance(obj, list):
        return [_to_complex(x) for x in obj]
    if isinstance(obj, str):
        return complex(obj.replace(" ", ""))
    return complex(obj)


def _parse_vector(text: str) -> np.ndarray:
    try:
        vals = [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ValidationError(f"cannot parse vector {text!r}") from exc
    if not vals:
        raise ValidationError("empty vector")
    return np.array(vals)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def _meta(cfg: RunConfig, command: str) -> dict:
    return {"command": command, "config": cfg.as_dict(), "config_hash": cfg.digest(),
            "seed": cfg.seed, "version": __version__}


def _emit_json(payload: dict, cfg: RunConfig, command: str, out):
    doc = {"meta": _meta(cfg, command), "result": _jsonable(payload)}
    text = json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    _write(text, out or cfg.output)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return "" if v is None else str(v)


def _emit_csv(header, rows, out, cfg: RunConfig):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    meta = [cfg.digest(), cfg.seed, __version__]
    w.writerow(list(header) + ["config_hash", "seed", "version"])
    for row in rows:
        w.writerow([_fmt(v) for v in row] + meta)
    _write(buf.getvalue(), out)


def _write(text: str, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def cmd_act(args, cfg):
    Z = SiegelPoint(_parse_complex_matrix(args.Z))
    g = SymplecticMatrix(np.real(_parse_complex_matrix(args.g)))
    W = act(g, Z)
    _emit_json({"Z": Z.Z, "gZ": W.Z}, cfg, "act", args.out)


def cmd_distance(args, cfg):
    Z = SiegelPoint(_parse_complex_matrix(args.Z))
    W = SiegelPoint(_parse_complex_matrix(args.W))
    r = radial_coordinates(Z, W).r
    _emit_json({"distance": distance(Z, W, args.convention), "convention": args.convention,
                "radial": r}, cfg, "distance", args.out)


def cmd_reduce(args, cfg):
    if args.Y is not None:
        Y = np.real(_parse_complex_matrix(args.Y))
        Yr, U = reduction.minkowski_reduce(Y)
        payload = {"Y_reduced": Yr, "U": U, "hermite_ratio": reduction.hermite_constant_ratio(Yr)}
    else:
        res = reduction.siegel_reduce(_parse_complex_matrix(args.Z), max_iter=args.max_iter)
        payload = {"Z_reduced": res.Z_reduced.Z, "gamma": np.rint(res.gamma.M).astype(int),
                   "steps": res.steps, "generator_list": res.generator_list}
    _emit_json(payload, cfg, "reduce", args.out)


def _check_degree(args, m):
    if args.n is not None and args.n != m:
        raise ValidationError(f"--n {args.n} does not match a {m}-component vector")


def cmd_spherical(args, cfg):
    lam = _parse_vector(args.lam)
    r = _parse_vector(args.r)
    _check_degree(args, len(r))
    payload = {"method": args.method, "lam": lam, "r": r, "kappa": args.kappa, "calibration_id": None}
    if args.method == "complex":
        payload.update(value=spherical.complex_spherical(lam, r), std_error=0.0)
    elif args.method == "hc":
        v, e = spherical.harish_chandra_phi(lam, r, cfg.quadrature())
        payload.update(value=v, std_error=e)
    else:
        if args.kappa:
            v, e = spherical.weighted_spherical(lam, r, args.kappa, cfg.quadrature())
        else:
            v, e = spherical.real_spherical_fj(lam, r, cfg.quadrature())
        payload.update(value=v, std_error=e, calibration_id=spherical.calibration_id(len(lam)))
    _emit_json(payload, cfg, "spherical", args.out)


def cmd_cfunction(args, cfg):
    lam = _parse_vector(args.lam)
    _emit_json({"lam": lam, "c_inverse_sq": float(root_system.c_inverse_sq(lam)),
                "c_inverse_sq_reduced": float(root_system.c_inverse_sq_reduced(lam)),
                "pi0": float(root_system.pi0(lam))}, cfg, "cfunction", args.out)


def cmd_heat(args, cfg):
    r = _parse_vector(args.r)
    n = len(r)
    _check_degree(args, n)
    calibration = None if n == 1 else spherical.calibration_id(n)
    if args.method == "oracle":
        if n != 1:
            raise ValidationError("the classical kernel is the n = 1 oracle")
        # K(r, t) = 4 sqrt(pi) K_H2(2 r, t) at n = 1 (calibration recorded in the decision log)
        v, e = 4 * math.sqrt(math.pi) * hk.classical_h2_heat_kernel(2 * float(r[0]), args.t), 0.0
        calibration = {"a": 2.0, "b": 1.0, "amplitude": 4 * math.sqrt(math.pi)}
    else:
        spec = cfg.quadrature("gauss_legendre" if n == 1 else "monte_carlo")
        if args.method == "spectral":
            vv, ee = hk.heat_kernel_spectral_grid(n, args.t, r[None, :], spec)
        elif args.method == "bound":
            vv, ee = hk.heat_kernel_weighted_bound_grid(n, args.t, r[None, :], args.kappa, spec)
        else:
            vv, ee = hk.heat_kernel_fj_grid(n, args.t, r[None, :], spec)
        v, e = float(vv[0]), float(ee[0])
    _emit_json({"method": args.method, "n": n, "t": args.t, "r": r, "kappa": args.kappa,
                "value": v, "std_error": e, "calibration": calibration}, cfg, "heat", args.out)


def _slope(k, v) -> float:
    return float(np.polyfit(np.log(k), np.log(v), 1)[0])


def cmd_bound(args, cfg):
    kappas = np.arange(args.kappa_min, args.kappa_max + 1e-9, args.kappa_step, dtype=float)
    if len(kappas) < 2:
        raise ValidationError("need at least two kappa values")
    reports = []
    for k in kappas:
        if args.setting == "cocompact":
            reports.append(supnorm.cocompact_bound(args.n, k))
        else:
            reports.append(supnorm.cofinite_bound(args.n, k, args.level, cfg.c2))
    header = ["kind", "kappa", "bound", "exponent", "constant_estimate", "cocompact", "cusp_term",
              "cusp_local_factor", "slope_fit", "total_slope_fit"]
    rows = []
    for rep in reports:
        f = rep.factors
        rows.append(["row", rep.kappa, rep.value, str(rep.exponent), rep.constant_estimate,
                     f.get("cocompact", rep.value), f.get("cusp_term", 0.0), f.get("cusp_local_factor"),
                     None, None])
    values = np.array([rep.value for rep in reports])
    leading = np.array([rep.factors.get("cusp_term", rep.value) for rep in reports])
    slope, total = _slope(kappas, leading), _slope(kappas, values)
    rows.append(["summary", None, None, str(reports[-1].exponent), reports[-1].constant_estimate,
                 None, None, None, slope, total])
    _emit_csv(header, rows, args.out or cfg.output, cfg)
    report = reports[-1]
    doc = report.as_dict()
    doc["evaluations"] = [[rep.kappa, rep.value] for rep in reports]
    doc["slope_fit"] = slope
    doc["total_slope_fit"] = total
    doc["provenance"] = dict(report.provenance, config_hash=cfg.digest(), seed=cfg.seed)
    report_path = args.report or ((args.out or cfg.output) + ".json" if (args.out or cfg.output) else None)
    if report_path:
        _emit_json(doc, cfg, "bound", report_path)


def cmd_cusp_sum(args, cfg):
    n, j = args.n, args.j
    if args.Y is not None:
        Y = np.real(_parse_complex_matrix(args.Y))
    else:
        Y = args.kappa * args.level / (2 * cfg.c2) * np.eye(n)
    X = np.zeros_like(Y) if args.X is None else np.real(_parse_complex_matrix(args.X))
    res = supnorm.cusp_sum_direct(n, j, X + 1j * Y, args.kappa, args.cutoff or cfg.cutoff, args.level)
    bound = supnorm.cusp_sum_bound(n, j, Y, args.kappa, args.level)
    _emit_json({"n": n, "j": j, "kappa": args.kappa, "level": args.level, "Y": Y, "X": X,
                "direct": res.value, "tail_estimate": res.tail_estimate, "cutoff": res.cutoff,
                "bound": bound, "ratio": res.value / bound}, cfg, "cusp-sum", args.out)


def cmd_oracle(args, cfg):
    z = complex(args.z.replace(" ", ""))
    if args.what == "delta":
        payload = {"z": z, "delta": mo.delta_cusp_form(z), "tau": mo.delta_qexpansion(args.terms).coefficients}
    elif args.what == "norm":
        payload = {"petersson_norm_sq": mo.delta_norm_sq(), "literature": mo.DELTA_NORM_LITERATURE}
    elif args.what == "skappa":
        payload = {"z": z, "s_kappa": mo.s_kappa_direct(z)}
    else:
        pts = mo.fundamental_domain_grid(5, 2)
        errs = mo.eigen_check(pts)
        payload = {"points": pts, "relative_errors": errs, "max_relative_error": max(errs),
                   "eigenvalue": 30.0}
        if max(errs) > cfg.rtol:
            _emit_json(payload, cfg, "oracle", args.out)
            raise NumericalError(f"eigen-check relative error {max(errs):.3g} exceeds {cfg.rtol}")
    _emit_json(payload, cfg, "oracle", args.out)


def _selftest_checks():
    from .integration import gaussian_moment

    def near(a, b, tol):
        return abs(a - b) <= tol * max(1.0, abs(b))

    yield "distance i -> 2i", lambda: near(distance(1j, 2j), math.sqrt(2) * math.log(2), 1e-12)
    yield "identity action", lambda: near(act(np.eye(2), 1j).Z[0, 0], 1j, 1e-15)
    yield "gaussian moment", lambda: near(gaussian_moment(2), math.sqrt(math.pi) / 2, 1e-14)
    yield "hua n=1", lambda: near(supnorm.hua_beta(1, 2), math.pi / 2, 1e-14)
    yield "rectangular p=q=1", lambda: near(supnorm.rectangular_beta(1, 1, 1), math.pi, 1e-14)
    yield "cusp local factor", lambda: near(supnorm.cusp_local_factor(2, 10), 76.5, 1e-14)
    yield "H_1 polynomial", lambda: near(supnorm.compact_H_polynomial(1, 12, 1)[0],
                                         math.sqrt(math.pi) * (0.5 + 121 / 4), 1e-12)
    yield "cocompact exponent", lambda: supnorm.cocompact_bound(2, 10).exponent == 3
    yield "cofinite exponent", lambda: supnorm.cofinite_bound(1, 12).exponent == supnorm.Fraction(3, 2)
    yield "empty periodization", lambda: supnorm.periodized_heat_bound(1, 1j, 12, 0.1, [])[0] == 0.0
    yield "tau(2) = -24", lambda: mo.delta_qexpansion(60).coefficients[1] == -24
    yield "delta periodic", lambda: near(mo.delta_cusp_form(0.2 + 1j), mo.delta_cusp_form(1.2 + 1j), 1e-12)
    yield "phi at origin", lambda: spherical.complex_spherical([1.0], [0.0]) == 1.0
    yield "weyl sum", lambda: near(root_system.weyl_alternating_sum([0.3, 0.7], [0.2, 0.5]),
                                   root_system.weyl_alternating_sum_brute([0.3, 0.7], [0.2, 0.5]), 1e-12)
    yield "minkowski diag(4,1)", lambda: np.allclose(reduction.minkowski_reduce(np.diag([4.0, 1.0]))[0],
                                                     np.diag([1.0, 4.0]))
    yield "siegel reduce 0.7+0.1i", lambda: near(reduction.siegel_reduce(np.array([[0.7 + 0.1j]]))
                                                 .Z_reduced.Z[0, 0].imag, 1.0, 1e-9)


def cmd_selftest(args, cfg):
    t0 = time.time()
    results = []
    for name, check in _selftest_checks():
        try:
            ok = bool(check())
            msg = ""
        except SiegelHeatError as exc:
            ok, msg = False, str(exc)
        results.append({"check": name, "passed": ok, "message": msg})
        print(f"{'PASS' if ok else 'FAIL'}  {name}{'  ' + msg if msg else ''}", file=sys.stderr)
    elapsed = time.time() - t0
    failed = [r for r in results if not r["passed"]]
    _emit_json({"checks": results, "failed": len(failed), "seconds": round(elapsed, 3),
                "quick": args.quick}, cfg, "selftest", args.out)
    if failed:
        raise NumericalError(f"{len(failed)} selftest checks failed")


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    common.add_argument("--samples", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--points", type=int)
    common.add_argument("--out", help="output path (default stdout)")

    p = argparse.ArgumentParser(prog="siegel-heat", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("act", parents=[common], help="apply a symplectic matrix to Z")
    s.add_argument("--Z", required=True)
    s.add_argument("--g", required=True)
    s.set_defaults(func=cmd_act)

    s = sub.add_parser("distance", parents=[common], help="invariant distance and radial coordinates")
    s.add_argument("--Z", default=EXAMPLE_PAIR[0])
    s.add_argument("--W", default=EXAMPLE_PAIR[1])
    s.add_argument("--convention", choices=["paper", "metric"], default="paper")
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("reduce", parents=[common], help="Siegel reduction of Z or Minkowski reduction of Y")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--Z")
    g.add_argument("--Y")
    s.add_argument("--max-iter", type=int, default=200)
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("spherical", parents=[common], help="spherical functions")
    s.add_argument("--n", type=int)
    s.add_argument("--lambda", "--lam", dest="lam", required=True)
    s.add_argument("--r", required=True)
    s.add_argument("--method", choices=["fj", "hc", "complex"], default="fj")
    s.add_argument("--kappa", type=float, default=0.0)
    s.set_defaults(func=cmd_spherical)

    s = sub.add_parser("cfunction", parents=[common], help="Plancherel density |c(lambda)|^-2")
    s.add_argument("--lambda", "--lam", dest="lam", required=True)
    s.set_defaults(func=cmd_cfunction)

    s = sub.add_parser("heat", parents=[common], help="heat kernel at radial coordinates r")
    s.add_argument("--n", type=int)
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--r", required=True)
    s.add_argument("--method", choices=["fj", "spectral", "bound", "oracle"], default="fj")
    s.add_argument("--kappa", type=float, default=0.0)
    s.set_defaults(func=cmd_heat)

    s = sub.add_parser("bound", parents=[common], help="sup-norm bound table over a kappa range")
    s.add_argument("--setting", choices=["cocompact", "cofinite"], required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--kappa-min", type=float, required=True)
    s.add_argument("--kappa-max", type=float, required=True)
    s.add_argument("--kappa-step", type=float, default=1.0)
    s.add_argument("--level", type=int, default=1)
    s.add_argument("--report", help="BoundReport JSON path (default: <out>.json when --out is set)")
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("cusp-sum", parents=[common], help="direct lattice sum over W_j and its majorant")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--j", type=int, default=0)
    s.add_argument("--kappa", type=float, required=True)
    s.add_argument("--cutoff", type=int)
    s.add_argument("--level", type=int, default=1)
    s.add_argument("--Y", help="imaginary part (default kappa*level/(2 c2) * 1)")
    s.add_argument("--X", help="real part (default 0)")
    s.set_defaults(func=cmd_cusp_sum)

    s = sub.add_parser("oracle", parents=[common], help="degree-one ground truth for weight 12")
    s.add_argument("--what", choices=["delta", "norm", "skappa", "eigen-check"], required=True)
    s.add_argument("--z", default="1j")
    s.add_argument("--terms", type=int, default=20)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("selftest", parents=[common], help="fast sanity checks")
    s.add_argument("--quick", action="store_true")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, {"samples": args.samples, "seed": args.seed,
                                        "workers": args.workers, "points": args.points})
        args.func(args, cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return exc.exit_code
    except SiegelHeatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
