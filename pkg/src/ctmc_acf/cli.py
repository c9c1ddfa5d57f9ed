"""Command-line front end.

    ctmc-acf validate  --model m.json [--echo-json]
    ctmc-acf analyze   --model m.json [--p 1 --p 2 ...]
    ctmc-acf acf-grid  --model m.json --tau-start 0 --tau-stop 2 --tau-count 5 [--compare-sim]
    ctmc-acf simulate  --model m.json --tau-start 0 --tau-stop 2 --tau-count 5 --n 100000 --seed 1
    ctmc-acf pointproc --model m.json --i 1 --j 2 --tau 1.0

State indices on the command line are 1-based.  Failures print a single
``ERROR <code>: <detail>`` line on stderr and exit with status 1 (input or
validation problems) or 2 (numerical failures).
"""
from __future__ import annotations

import argparse
import contextlib
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .acf import (
    UNIT_STATIONARY_NOTE,
    acf_grid,
    is_stationary_unit_model,
    try_acf_mixture,
    write_acf_csv,
)
from .errors import CtmcError
from .lpnorm import classify, classify_chain
from .model import dump_model, load_model, stationary_distribution
from .pointproc import arrival_report
from .simulate import empirical_acf, min_horizon, write_empirical_csv
from .spectral import decompose

COMMANDS = ("validate", "analyze", "acf-grid", "simulate", "pointproc")


@dataclass
class RunConfig:
    command: str
    model_path: str
    tau_start: float = 0.0
    tau_stop: float = 1.0
    tau_count: int = 11
    p_list: list = field(default_factory=lambda: [1.0, 2.0, 3.0])
    n_trajectories: int = 10000
    horizon: float | None = None
    seed: int = 0
    output: str | None = None
    threads: int = 1
    echo_json: bool = False
    compare_sim: bool = False
    i: int = 1
    j: int = 1
    tau: float = 0.0

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.tau_count < 2:
            raise ValueError("--tau-count must be at least 2")
        if not self.tau_stop > self.tau_start >= 0:
            raise ValueError("need --tau-stop > --tau-start >= 0")
        if self.n_trajectories < 1:
            raise ValueError("--n must be at least 1")
        if not -(1 << 63) <= self.seed < (1 << 64):
            raise ValueError("--seed must fit in 64 bits")
        if self.threads < 1:
            raise ValueError("--threads must be at least 1")

    def grid(self) -> np.ndarray:
        return np.linspace(self.tau_start, self.tau_stop, self.tau_count)


def _g(x) -> str:
    return f"{float(x):.17g}"


def _complex_pair(z) -> list:
    return [float(z.real), float(z.imag)]


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _cmd_validate(cfg, model, out):
    if cfg.echo_json:
        out.write(dump_model(model) + "\n")
        return 0
    gen = model.generator
    pi = stationary_distribution(gen)
    out.write(f"N: {gen.n}\n")
    out.write("states: " + " ".join(_g(v) for v in gen.states.values) + "\n")
    out.write("stationary: " + " ".join(_g(p) for p in pi.probs) + "\n")
    try:
        d = decompose(gen)
    except CtmcError as exc:
        if exc.code != "DegenerateSpectrum":
            raise
        out.write(f"eigenvalues: unavailable ({exc})\n")
    else:
        out.write("eigenvalues: " + " ".join(
            _g(g.real) if g.imag == 0 else f"{_g(g.real)}{'+' if g.imag >= 0 else '-'}{_g(abs(g.imag))}j"
            for g in d.eigenvalues) + "\n")
    return 0


def _cmd_analyze(cfg, model, out):
    gen, pi0 = model.generator, model.initial
    mixture = try_acf_mixture(gen, pi0)
    notes = []
    if mixture is None:
        _warn("DegenerateSpectrum", "mixture unavailable, falling back to grid evaluation")
        report = classify_chain(gen, pi0, cfg.p_list)
        mix_json = None
    else:
        report = classify(mixture, cfg.p_list)
        mix_json = {
            "c": mixture.constant_c,
            "terms": [{"rate": _complex_pair(g), "weight": _complex_pair(a)}
                      for g, a in zip(mixture.rates, mixture.weights)],
        }
    if is_stationary_unit_model(gen, pi0):
        notes.append(UNIT_STATIONARY_NOTE)
    doc = {"mixture": mix_json, "lp": report.to_json_dict(), "notes": notes}
    out.write(json.dumps(doc, indent=2) + "\n")
    return 0


def _cmd_acf_grid(cfg, model, out):
    taus = cfg.grid()
    values = acf_grid(model.generator, model.initial, taus)
    sim = None
    if cfg.compare_sim:
        sim = _simulate(cfg, model, taus).estimates
    write_acf_csv(out, taus, values, sim)
    return 0


def _simulate(cfg, model, lags):
    horizon = cfg.horizon if cfg.horizon is not None else min_horizon(model.generator, lags)
    return empirical_acf(model.generator, model.initial, lags, cfg.n_trajectories,
                         horizon, cfg.seed, workers=cfg.threads)


def _cmd_simulate(cfg, model, out):
    write_empirical_csv(out, _simulate(cfg, model, cfg.grid()))
    return 0


def _cmd_pointproc(cfg, model, out):
    r = arrival_report(model.generator, model.initial, cfg.i - 1, cfg.j - 1, cfg.tau)
    out.write(json.dumps({
        "i": cfg.i, "j": cfg.j, "tau": r.tau,
        "equilibrium": r.equilibrium,
        "transient": r.transient,
        "conditional": r.conditional,
    }) + "\n")
    return 0


HANDLERS = {
    "validate": _cmd_validate,
    "analyze": _cmd_analyze,
    "acf-grid": _cmd_acf_grid,
    "simulate": _cmd_simulate,
    "pointproc": _cmd_pointproc,
}


def _warn(code, detail):
    print(f"WARNING {code}: {detail}", file=sys.stderr)


def _error(code, detail) -> None:
    print(f"ERROR {code}: {detail}", file=sys.stderr)


def run(cfg: RunConfig) -> int:
    try:
        model = load_model(cfg.model_path)
        with _output(cfg.output) as out:
            return HANDLERS[cfg.command](cfg, model, out)
    except CtmcError as exc:
        _error(exc.code, exc.detail)
        return 2 if exc.numerical else 1
    except (ValueError, IndexError) as exc:
        _error("InvalidArgument", str(exc))
        return 1
    except ArithmeticError as exc:
        _error("NumericalError", str(exc))
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctmc-acf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="model JSON file")
    common.add_argument("--out", default=None, help="output file (default stdout)")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--tau-start", type=float, default=0.0)
    grid.add_argument("--tau-stop", type=float, default=1.0)
    grid.add_argument("--tau-count", type=int, default=11)

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--n", type=int, default=10000, help="number of trajectories")
    mc.add_argument("--horizon", type=float, default=None)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("validate", parents=[common], help="check a model and print its basics")
    p.add_argument("--echo-json", action="store_true", help="print the parsed model as JSON")
    p = sub.add_parser("analyze", parents=[common], help="mixture form and L^p report")
    p.add_argument("--p", type=float, action="append", dest="p_list", help="exponent, repeatable")
    p = sub.add_parser("acf-grid", parents=[common, grid, mc], help="exact R(tau) on a grid as CSV")
    p.add_argument("--compare-sim", action="store_true", help="add a simulated column")
    sub.add_parser("simulate", parents=[common, grid, mc], help="Monte Carlo R(tau) as CSV")
    p = sub.add_parser("pointproc", parents=[common], help="arrival attribution probabilities")
    p.add_argument("--i", type=int, required=True, help="initial state (1-based)")
    p.add_argument("--j", type=int, required=True, help="arrival stream (1-based)")
    p.add_argument("--tau", type=float, required=True)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    kw = {"command": ns.command, "model_path": ns.model, "output": ns.out}
    for name in ("tau_start", "tau_stop", "tau_count", "horizon", "seed", "threads",
                 "echo_json", "compare_sim", "i", "j", "tau"):
        if hasattr(ns, name):
            kw[name] = getattr(ns, name)
    if getattr(ns, "n", None) is not None:
        kw["n_trajectories"] = ns.n
    if getattr(ns, "p_list", None):
        kw["p_list"] = ns.p_list
    return RunConfig(**kw)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except ValueError as exc:
        _error("InvalidArgument", str(exc))
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
