"""``bcl`` command-line front end.

Exit codes: 0 success, 1 failed verification, 2 bad arguments or domain
error, 3 a state beat the conjectured minimum output entropy, 4 no search
start converged.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .channels import Amplifier, Cascade, Loss, apply_channel
from .entropy import g_function, gaussian_effective_gain, holevo_chi_general, von_neumann_entropy
from .errors import BclError, DomainError
from .fock import Truncation, coherent_state, fock_state, squeezed_state, thermal_state
from .moe import DEFAULT_SEED, SearchConfig, minimize
from .verify import SUITES

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_VIOLATION, EXIT_NONCONVERGED = 0, 1, 2, 3, 4
MAX_SWEEP_POINTS = 10_000
LN2 = math.log(2)


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int | None = None
    tool_version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def default_dim(fallback: int) -> int:
    env = os.environ.get("BCL_DEFAULT_DIM")
    return int(env) if env else fallback


def fmt(x: float) -> str:
    return f"{x:.9g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_json(payload: dict) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def write_csv(header: list[str], rows: list[list], out: str | None, manifest: RunManifest) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    _emit(buf.getvalue(), out)
    if out:
        with open(out + ".manifest.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dump_json(asdict(manifest)))


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _scale(units: str) -> float:
    return 1.0 / LN2 if units == "bits" else 1.0


def cmd_capacity(args) -> int:
    if args.n_out is not None or args.n_ase is not None:
        if args.n_out is None or args.n_ase is None:
            raise DomainError("--n-out and --n-ase must be given together")
        n_out, n_ase = args.n_out, args.n_ase
        params = {"n_out": n_out, "n_ase": n_ase}
    else:
        if args.gain < 1 or args.photons < 0:
            raise DomainError("need --gain >= 1 and --photons >= 0")
        n_out, n_ase = args.photons * args.gain, args.gain - 1
        params = {"gain": args.gain, "photons": args.photons}
    k = _scale(args.units)
    chi = holevo_chi_general(n_out, n_ase) * k
    g_total = g_function(n_out + n_ase) * k
    g_noise = g_function(n_ase) * k
    params["units"] = args.units
    manifest = RunManifest("capacity", params)
    if args.format == "json":
        _emit(dump_json({"manifest": asdict(manifest),
                         "result": {"chi": chi, "g_signal_plus_noise": g_total, "g_noise": g_noise,
                                    "units": args.units}}), args.out)
    else:
        write_csv(["chi", "g_signal_plus_noise", "g_noise", "units"],
                  [[chi, g_total, g_noise, args.units]], args.out, manifest)
    return EXIT_OK


def cmd_verify(args) -> int:
    suite = SUITES[args.suite]
    kwargs = {"seed": args.seed}
    if args.dim is not None:
        kwargs["dim"] = args.dim
    elif os.environ.get("BCL_DEFAULT_DIM"):
        kwargs["dim"] = default_dim(0)
    if args.epsilon is not None:
        kwargs["epsilon"] = args.epsilon
    checks = suite(**kwargs)
    manifest = RunManifest("verify", {"suite": args.suite, **kwargs}, seed=args.seed)
    ok = all(c.passed for c in checks)
    if args.format == "json":
        _emit(dump_json({"manifest": asdict(manifest), "passed": ok,
                         "checks": [c.as_dict() for c in checks]}), args.out)
    else:
        header = ["suite", "name", "value", "expected", "tolerance", "passed", "note"]
        write_csv(header, [[c.suite, c.name, c.value, c.expected, c.tolerance,
                            "PASS" if c.passed else "FAIL", c.note] for c in checks], args.out, manifest)
    return EXIT_OK if ok else EXIT_FAIL


def _channel_from_args(args):
    stages = []
    if args.gain is not None and args.gain != 1:
        stages.append(Amplifier(args.gain))
    if args.eta is not None and args.eta != 1:
        stages.append(Loss(args.eta))
    if not stages:
        return Amplifier(1.0)
    return stages[0] if len(stages) == 1 else Cascade(tuple(stages))


def _spec_dict(spec) -> dict:
    if isinstance(spec, Cascade):
        return {"cascade": [_spec_dict(s) for s in spec.stages]}
    return {type(spec).__name__.lower(): asdict(spec)}


def cmd_moe(args) -> int:
    spec = _channel_from_args(args)
    dim = args.dim if args.dim is not None else default_dim(20)
    cfg = SearchConfig(dim=dim, starts=args.starts, seed=args.seed, max_iters=args.max_iters)
    res = minimize(spec, cfg)
    k = _scale(args.units)
    params = {"channel": _spec_dict(spec), "dim": dim, "starts": args.starts,
              "max_iters": args.max_iters, "units": args.units}
    manifest = RunManifest("moe", params, seed=args.seed)
    result = {
        "min_entropy": res.min_entropy_nats * k,
        "conjectured_bound": res.bound_nats * k,
        "min_evaluated": res.min_evaluated_nats * k,
        "coherent_fidelity": res.coherent_fidelity,
        "fitted_alpha": res.fitted_alpha,
        "variance": res.variance,
        "start_index": res.start_index,
        "iterations": res.iterations,
        "converged": res.converged,
        "starts_converged": res.n_converged,
        "evaluations": res.evaluations,
        "failed_evaluations": res.failed_evaluations,
        "argmin": [[z.real, z.imag] for z in res.argmin.amplitudes],
        "starts": [asdict(s) for s in res.starts],
        "violations": res.violations,
        "units": args.units,
    }
    _emit(dump_json({"manifest": asdict(manifest), "result": result}), args.out)
    if res.violations:
        sys.stderr.write(f"conjecture-violating state found: {len(res.violations)} evaluations below "
                         f"{res.bound_nats:.9g} nats; amplitudes are in the 'violations' field\n")
        return EXIT_VIOLATION
    if res.n_converged == 0:
        sys.stderr.write("no start reached the gradient tolerance\n")
        return EXIT_NONCONVERGED
    return EXIT_OK


def _grid(start: float, stop: float, step: float) -> np.ndarray:
    if step <= 0 or stop < start:
        raise DomainError(f"empty range: start={start}, stop={stop}, step={step}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    if n > MAX_SWEEP_POINTS:
        raise DomainError(f"{n} grid points exceed the limit of {MAX_SWEEP_POINTS}")
    return start + step * np.arange(n)


def cmd_sweep(args) -> int:
    grid = _grid(args.start, args.stop, args.step)
    k = _scale(args.units)
    rows = []
    if args.variable == "gain":
        header = ["gain", "chi", "g_signal_plus_noise", "g_noise"]
        for g in grid:
            if g < 1:
                raise DomainError("gain values must be >= 1")
            n_out, n_ase = args.photons * g, g - 1
            rows.append([g, holevo_chi_general(n_out, n_ase) * k,
                         g_function(n_out + n_ase) * k, g_function(n_ase) * k])
    elif args.variable == "photons":
        header = ["photons", "chi", "g_signal_plus_noise", "g_noise"]
        for n in grid:
            if n < 0:
                raise DomainError("photon numbers must be >= 0")
            n_out, n_ase = n * args.gain, args.gain - 1
            rows.append([n, holevo_chi_general(n_out, n_ase) * k,
                         g_function(n_out + n_ase) * k, g_function(n_ase) * k])
    else:
        header = ["squeeze", "effective_gain", "output_entropy"]
        for r in grid:
            gp = gaussian_effective_gain(args.gain, r)
            rows.append([r, gp, g_function(gp - 1) * k])
    params = {"variable": args.variable, "start": args.start, "stop": args.stop, "step": args.step,
              "gain": args.gain, "photons": args.photons, "units": args.units}
    write_csv(header, rows, args.out, RunManifest("sweep", params))
    return EXIT_OK


def cmd_entropy(args) -> int:
    dim = args.dim if args.dim is not None else default_dim(40)
    trunc = Truncation(dim, leakage_tol=args.leakage_tol)
    alpha = complex(args.alpha_re, args.alpha_im)
    if args.state == "coherent":
        rho = coherent_state(alpha, trunc).density()
    elif args.state == "fock":
        rho = fock_state(args.level, trunc).density()
    elif args.state == "thermal":
        rho = thermal_state(args.photons, trunc)
    else:
        rho = squeezed_state(args.squeeze, trunc, alpha=alpha).density()
    spec = _channel_from_args(args)
    rep = von_neumann_entropy(apply_channel(rho, spec).output)
    k = _scale(args.units)
    params = {"state": args.state, "dim": dim, "alpha": alpha, "level": args.level,
              "photons": args.photons, "squeeze": args.squeeze, "channel": _spec_dict(spec),
              "units": args.units}
    manifest = RunManifest("entropy", params)
    top = [float(x) for x in rep.spectrum[:8]]
    if args.format == "json":
        _emit(dump_json({"manifest": asdict(manifest),
                         "result": {"entropy": rep.entropy_nats * k, "leakage": rep.leakage,
                                    "clipped_mass": rep.clipped_mass, "spectrum_head": top,
                                    "units": args.units}}), args.out)
    else:
        write_csv(["entropy", "leakage", "clipped_mass", "largest_eigenvalue", "units"],
                  [[rep.entropy_nats * k, rep.leakage, rep.clipped_mass, top[0], args.units]],
                  args.out, manifest)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bcl", description="Bosonic channel entropy and capacity laboratory.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, formats=True):
        sp.add_argument("--units", choices=["nats", "bits"], default="nats")
        if formats:
            sp.add_argument("--format", choices=["csv", "json"], default="csv")
        sp.add_argument("--out", default=None, help="output file (default: stdout)")

    c = sub.add_parser("capacity", help="Holevo information of the amplified channel")
    c.add_argument("--gain", type=float, default=1.0)
    c.add_argument("--photons", type=float, default=1.0)
    c.add_argument("--n-out", type=float, default=None)
    c.add_argument("--n-ase", type=float, default=None)
    common(c)
    c.set_defaults(func=cmd_capacity)

    v = sub.add_parser("verify", help="run a numerical property suite")
    v.add_argument("--suite", choices=sorted(SUITES), required=True)
    v.add_argument("--dim", type=int, default=None)
    v.add_argument("--epsilon", type=float, default=None)
    v.add_argument("--seed", type=int, default=0)
    common(v)
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("moe", help="minimum output entropy search over pure inputs")
    m.add_argument("--gain", type=float, default=1.2)
    m.add_argument("--eta", type=float, default=None, help="loss applied after the amplifier")
    m.add_argument("--dim", type=int, default=None)
    m.add_argument("--starts", type=int, default=8)
    m.add_argument("--seed", type=int, default=DEFAULT_SEED)
    m.add_argument("--max-iters", type=int, default=300)
    common(m, formats=False)
    m.set_defaults(func=cmd_moe)

    s = sub.add_parser("sweep", help="tabulate capacity or effective gain over a grid")
    s.add_argument("--variable", choices=["gain", "photons", "squeeze"], required=True)
    s.add_argument("--start", type=float, required=True)
    s.add_argument("--stop", type=float, required=True)
    s.add_argument("--step", type=float, required=True)
    s.add_argument("--gain", type=float, default=1.5)
    s.add_argument("--photons", type=float, default=1.0)
    common(s, formats=False)
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("entropy", help="output entropy of a named state through a channel")
    e.add_argument("--state", choices=["coherent", "fock", "thermal", "squeezed"], required=True)
    e.add_argument("--alpha-re", type=float, default=0.0)
    e.add_argument("--alpha-im", type=float, default=0.0)
    e.add_argument("--level", type=int, default=1, help="Fock level for --state fock")
    e.add_argument("--photons", type=float, default=1.0, help="mean photons for --state thermal")
    e.add_argument("--squeeze", type=float, default=0.0)
    e.add_argument("--gain", type=float, default=None)
    e.add_argument("--eta", type=float, default=None)
    e.add_argument("--dim", type=int, default=None)
    e.add_argument("--leakage-tol", type=float, default=1e-8)
    common(e)
    e.set_defaults(func=cmd_entropy)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DomainError, BclError) as exc:
        sys.stderr.write(f"bcl {args.command}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
