"""Command-line pipeline: simulate, fst, qot, estimate, analyze, scan.

Each command runs one stage and writes its artifact atomically. Any flag can
also come from a JSON ``--config`` file whose keys are the flag names with
dashes replaced by underscores; flags given on the command line win.

Failures print one line ``error: <category>: <detail>`` to stderr and exit 1
(2 for usage errors).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as qio
from .analysis import Reconstructed, build_report, phase_scan
from .bayes import (
    PAIR_CONFIG,
    SamplerConfig,
    estimate_full,
    estimate_pairs,
    interval_from_values,
    posterior_mean,
)
from .core import StateError, check_density, partial_trace, pure_density
from .exact import IncompleteScheduleError, full_schedule, reconstruct_full, full_stokes
from .qot import pair_stokes, qot_schedule, reconstruct_pairs
from .source import NoiseSpec, SourceParams, four_photon_state, ghz_state, simulate_dataset


class CliError(Exception):
    def __init__(self, category: str, detail: str):
        self.category = category
        super().__init__(detail)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


# ---------------------------------------------------------------- state specs


def parse_state(spec: str) -> np.ndarray:
    """Density matrix from ``ghzN[:phase]``, ``prime:ta,tb,t1,t2`` or ``matrix:PATH``."""
    spec = spec.strip()
    try:
        if spec.startswith("ghz"):
            body, _, phase = spec[3:].partition(":")
            return pure_density(ghz_state(int(body), float(phase) if phase else 0.0))
        if spec.startswith("prime:"):
            angles = [float(x) for x in spec[6:].split(",")]
            if len(angles) != 4:
                raise ValueError("prime needs four angles ta,tb,t1,t2")
            return pure_density(four_photon_state(SourceParams(*angles)))
        if spec.startswith("matrix:"):
            return check_density(load_state(spec[7:]), "matrix")
    except (ValueError, StateError) as exc:
        raise CliError("invalid-state", f"{spec!r}: {exc}") from None
    raise CliError("invalid-state", f"unrecognized state spec {spec!r}")


def load_state(path, pair=None) -> np.ndarray:
    """Point-estimate density matrix from any artifact this CLI writes."""
    return _load_estimate(path, pair).state


def _load_estimate(path, pair=None) -> Reconstructed:
    path = Path(path)
    if path.suffix == ".npz":
        sets = qio.read_samples(path)
        if pair is not None and qio.pair_key(pair) in sets:
            return Reconstructed.of(sets[qio.pair_key(pair)])
        if "fst" not in sets:
            raise CliError("invalid-input", f"{path} has no usable sample set")
        return _reduce(Reconstructed.of(sets["fst"]), pair)
    doc = qio.read_json(path)
    if pair is not None and "pairs" in doc:
        for entry in doc["pairs"]:
            if tuple(entry["pair"]) == tuple(pair):
                return Reconstructed(_matrix_of(entry, path))
        raise CliError("invalid-input", f"{path} has no estimate for pair {tuple(pair)}")
    return _reduce(Reconstructed(_matrix_of(doc, path)), pair)


def _matrix_of(doc, path) -> np.ndarray:
    for key in ("posterior_mean", "physical"):
        if key in doc:
            doc = doc[key]
            break
    if not isinstance(doc, dict) or "dim" not in doc:
        raise CliError("invalid-input", f"{path} does not hold a density matrix")
    return qio.density_from_dict(doc)


def _reduce(est: Reconstructed, pair) -> Reconstructed:
    if pair is None:
        return est
    samples = None if est.samples is None else est.samples.marginal(pair)
    return Reconstructed(partial_trace(est.state, pair), samples)


def _load_qot(path) -> dict:
    path = Path(path)
    if path.suffix == ".npz":
        return {qio.parse_pair_key(k): v for k, v in qio.read_samples(path).items()
                if k.startswith("pair-")}
    doc = qio.read_json(path)
    if "pairs" not in doc:
        raise CliError("invalid-input", f"{path} has no pair estimates")
    out = {}
    for entry in doc["pairs"]:
        out[tuple(entry["pair"])] = _matrix_of(entry, path)
    return out


# ---------------------------------------------------------------- commands


def _sampler_config(a) -> SamplerConfig:
    return SamplerConfig(
        beta=a.beta, iterations=a.iterations, burn_in=a.burn_in, seed=a.seed,
        sigma_floor=a.sigma_floor, count_floor=a.count_floor,
    )


def cmd_simulate(a, meta):
    rho = parse_state(a.state)
    n = rho.shape[0].bit_length() - 1
    sched = full_schedule(n) if a.schedule == "full" else qot_schedule(n).settings
    data = simulate_dataset(rho, sched, NoiseSpec(a.counts, a.noise, a.seed))
    qio.write_count_file(data, a.output)
    return f"wrote {len(data)} records to {a.output}"


def cmd_fst(a, meta):
    data = qio.read_count_file(a.input)
    rec = reconstruct_full(data)
    qio.write_json(a.output, {
        "config": meta,
        "n_qubits": data.n_qubits,
        "stokes": qio.stokes_to_dict(full_stokes(data)),
        "raw": qio.density_to_dict(rec.raw),
        "physical": qio.density_to_dict(rec.physical),
    })
    return f"wrote full reconstruction to {a.output}"


def cmd_qot(a, meta):
    data = qio.read_count_file(a.input)
    pairs = reconstruct_pairs(data)
    qio.write_json(a.output, {
        "config": meta,
        "n_qubits": data.n_qubits,
        "pairs": [
            {
                "pair": list(p),
                "stokes": qio.stokes_to_dict(pair_stokes(data, p)),
                "raw": qio.density_to_dict(r.raw),
                "physical": qio.density_to_dict(r.physical),
            }
            for p, r in pairs.items()
        ],
    })
    return f"wrote {len(pairs)} pair reconstructions to {a.output}"


def _summarize(samples, level=0.95) -> dict:
    kept = samples.retained
    lo, hi = np.empty(kept.shape[1]), np.empty(kept.shape[1])
    for k in range(kept.shape[1]):
        lo[k], hi[k] = interval_from_values(kept[:, k], level)
    ones = np.ones(1)
    shape = (4,) * samples.n_qubits
    return {
        "posterior_mean": qio.density_to_dict(posterior_mean(samples)),
        "acceptance_rate": samples.acceptance_rate,
        "n_sweeps": len(samples.samples),
        "burn_in_index": samples.burn_in_index,
        "stokes_mean": qio.stokes_to_dict(np.concatenate([ones, kept.mean(0)]).reshape(shape)),
        "stokes_std": qio.stokes_to_dict(np.concatenate([[0.0], kept.std(0)]).reshape(shape)),
        "interval_level": level,
        "stokes_lo": qio.stokes_to_dict(np.concatenate([ones, lo]).reshape(shape)),
        "stokes_hi": qio.stokes_to_dict(np.concatenate([ones, hi]).reshape(shape)),
    }


def cmd_estimate(a, meta):
    data = qio.read_count_file(a.input)
    cfg = _sampler_config(a)
    if a.scheme == "fst":
        s = estimate_full(data, cfg)
        doc = {"config": meta, "scheme": "fst", **_summarize(s)}
        sets = {"fst": s}
    else:
        pairs = estimate_pairs(data, cfg)
        doc = {"config": meta, "scheme": "qot",
               "pairs": [{"pair": list(p), **_summarize(s)} for p, s in pairs.items()]}
        sets = {qio.pair_key(p): s for p, s in pairs.items()}
    qio.write_json(a.output, doc)
    if a.samples:
        qio.write_samples(a.samples, sets)
    return f"wrote {a.scheme} estimate to {a.output}"


def cmd_analyze(a, meta):
    if not a.fst and not a.qot:
        raise CliError("invalid-config", "analyze needs --fst, --qot, or both")
    ref = parse_state(a.reference)
    fst = _load_estimate(a.fst) if a.fst else None
    qot = _load_qot(a.qot) if a.qot else None
    report = build_report(ref, fst, qot, level=a.level)
    qio.write_json(a.output, {"config": meta, **report.to_dict()})
    table = report.to_table() + "\n"
    if a.table:
        qio.atomic_write_text(a.table, table)
    return table.rstrip("\n")


def cmd_scan(a, meta):
    est = load_state(a.estimate, a.pair)
    scan = phase_scan(est, pair=tuple(a.pair) if a.pair else None, grid_step=a.grid_step)
    qio.atomic_write_text(a.output, qio.scan_to_csv(scan))
    return f"peak theta1={scan.peak[0]:g} theta2={scan.peak[1]:g} fidelity={scan.peak_fidelity:.6f}"


# ---------------------------------------------------------------- parser


_SAMPLER_FIELDS = ("beta", "iterations", "burn_in", "sigma_floor", "count_floor")


def _add_sampler_flags(p):
    # None means "the default for the chosen scheme"
    p.add_argument("--beta", type=float, help="proposal scale")
    p.add_argument("--iterations", type=int, help="sweeps")
    p.add_argument("--burn-in", type=float, help="discarded fraction")
    p.add_argument("--sigma-floor", type=float)
    p.add_argument("--count-floor", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qotomo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON file of default flag values")
        p.set_defaults(func=func)
        return p

    p = command("simulate", cmd_simulate, "simulate a count file")
    p.add_argument("--state", required=True, help="ghzN[:phase] | prime:ta,tb,t1,t2 | matrix:PATH")
    p.add_argument("--schedule", choices=["full", "qot"], default="full")
    p.add_argument("--counts", type=int, default=NoiseSpec().counts_per_setting,
                   help="events per setting")
    p.add_argument("--noise", type=float, default=0.0, help="white-noise fraction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", required=True)

    p = command("fst", cmd_fst, "full-state linear inversion")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", required=True)

    p = command("qot", cmd_qot, "two-qubit marginals from an overlapping schedule")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", required=True)

    p = command("estimate", cmd_estimate, "Bayesian mean estimation")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--scheme", choices=["fst", "qot"], default="fst")
    p.add_argument("--seed", type=int, default=0)
    _add_sampler_flags(p)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--samples", help="also store the raw chains (.npz)")

    p = command("analyze", cmd_analyze, "compare estimates with a reference state")
    p.add_argument("--reference", required=True, help="state spec, as for simulate")
    p.add_argument("--fst", help="full estimate: .npz samples or .json artifact")
    p.add_argument("--qot", help="pair estimates: .npz samples or .json artifact")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--table", help="also write the text table here")

    p = command("scan", cmd_scan, "phase scan against the rotated reference")
    p.add_argument("--estimate", required=True)
    p.add_argument("--pair", type=int, nargs=2, metavar=("X1", "X2"))
    p.add_argument("--grid-step", type=float, default=3.0)
    p.add_argument("--output", "-o", required=True)
    return parser


_NOT_ECHOED = {"func", "command", "config", "output", "samples", "table"}


def _config_path(argv) -> str | None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv[1:])
    return known.config


def _resolve(argv) -> argparse.Namespace:
    parser = build_parser()
    choices = parser._subparsers._group_actions[0].choices
    path = _config_path(argv) if argv and argv[0] in choices else None
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError("invalid-config", f"{path}: {exc}") from None
        if not isinstance(cfg, dict):
            raise CliError("invalid-config", f"{path} must hold a JSON object")
        sub = choices[argv[0]]
        known = {a.dest for a in sub._actions} - {"help", "config", "func"}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise CliError("invalid-config", f"unknown config keys: {', '.join(unknown)}")
        # config values become defaults; required flags may then be omitted
        for action in sub._actions:
            if action.dest in cfg:
                action.required = False
        sub.set_defaults(**cfg)
    args = parser.parse_args(argv)
    if args.command == "estimate":
        base = SamplerConfig() if args.scheme == "fst" else PAIR_CONFIG
        for f in _SAMPLER_FIELDS:
            if getattr(args, f) is None:
                setattr(args, f, getattr(base, f))
    return args


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _resolve(argv)
        meta = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED}
        print(f"config: {args.command} {json.dumps(meta, sort_keys=True)}", file=sys.stderr)
        message = args.func(args, {"command": args.command, **meta})
    except CliError as exc:
        return _fail(exc.category, str(exc), 2 if exc.category == "usage" else 1)
    except qio.CountFileError as exc:
        return _fail(exc.category, str(exc))
    except IncompleteScheduleError as exc:
        return _fail("schedule-incomplete", str(exc))
    except StateError as exc:
        return _fail("invalid-state", str(exc))
    except OSError as exc:
        return _fail("io", str(exc))
    except ValueError as exc:
        return _fail("invalid-input", str(exc))
    print(message)
    return 0


def _fail(category: str, detail: str, code: int = 1) -> int:
    print(f"error: {category}: {' '.join(detail.split())}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
