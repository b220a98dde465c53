"""Command-line driver: optimize gates, check equivalence, run studies.

Configuration is JSON, layered built-in defaults <- config file <-
command-line flags.  Every file-writing run also emits a manifest
echoing the fully resolved configuration and the library version, and
carries no timestamps, so identical configs give byte-identical output.

Exit codes: 0 success (or: equivalent), 1 negative verdict, 2 usage or
configuration error, 3 numerical-invariant violation (a parsed matrix
failing its unitarity/density invariant, or a propagation exceeding the
unitarity budget).
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import __version__
from .core import EncodedSpace, Unitary
from .decoherence import (
    RandomStateSpec,
    dephasing_study,
    crossover_temperature,
    sle_bitflip_exact,
    temperature_sweep,
)
from .dynamics import ControlField, na2_model
from .encoding import ea_operators, ea_signature, probe_states
from .gates import (
    cnot_class,
    hadamard_class,
    nearest_class_form,
    pauli_class,
    phase_class,
    weak_identity_class,
)
from .io import (
    field_to_json,
    layered_config,
    matrix_from_json,
    matrix_to_json,
    read_json,
    record_to_json,
    sweep_to_csv,
    write_json,
)
from .optimizer import TARGET_PRESETS, FidelityFunctional, GAConfig, ga_optimize

_GA_FIELDS = {f.name for f in dataclasses.fields(GAConfig)}


class InvariantViolation(Exception):
    """A numerical invariant failed on otherwise well-formed input."""


def _manifest_path(out_path: str) -> str:
    return out_path + ".manifest.json"


def _write_manifest(out_path: str, command: str, config: dict) -> None:
    write_json(
        _manifest_path(out_path),
        {"version": __version__, "command": command, "config": config},
    )


def _load_unitary(path: str, space: EncodedSpace | None = None) -> Unitary:
    m = matrix_from_json(read_json(path))
    try:
        return Unitary(m, space)
    except ValueError as exc:
        raise InvariantViolation(f"{path}: {exc}") from exc


def _resolve_threads(flag) -> int | None:
    if flag is not None:
        return flag
    env = os.environ.get("MLEQC_THREADS")
    return int(env) if env else None


def cmd_optimize(args) -> int:
    file_cfg = read_json(args.config) if args.config else {}
    target = args.target or file_cfg.get("target") or "mle-x"
    if target not in TARGET_PRESETS:
        print(f"unknown target {target!r}", file=sys.stderr)
        return 2
    preset = dict(TARGET_PRESETS[target])
    kind = preset.pop("kind")
    builtin_cfg = {
        "model": "na2",
        "target": target,
        "t_final": preset.pop("t_final"),
        "ga": preset,
        "out": f"record_{target}.json",
    }
    flags = {
        "out": args.out,
        "ga": {
            k: v
            for k, v in {
                "seed": args.seed,
                "generations": args.generations,
                "population_size": args.population,
            }.items()
            if v is not None
        },
    }
    cfg = layered_config(builtin_cfg, args.config, flags)
    cfg["target"] = target
    if not cfg.get("model"):
        print("config missing required section: model", file=sys.stderr)
        return 2
    if cfg["model"] != "na2":
        print(f"unknown model {cfg['model']!r}", file=sys.stderr)
        return 2

    system = na2_model()
    template = ControlField.template(system, t_final=cfg["t_final"])
    functional = FidelityFunctional(kind, n=system.dim // 2)
    ga_cfg = GAConfig(**{k: v for k, v in cfg["ga"].items() if k in _GA_FIELDS})
    record = ga_optimize(system, template, functional, ga_cfg)

    out = cfg["out"]
    echo = dict(cfg)
    echo["ga"] = dataclasses.asdict(ga_cfg)
    write_json(out, record_to_json(record, echo, __version__))
    write_json(out + ".field.json", field_to_json(record.best_field))
    _write_manifest(out, "optimize", echo)
    print(f"{target} best fidelity {record.best_fidelity[-1]:.6f} "
          f"({record.total_propagations} propagations)")
    return 0


def cmd_evaluate(args) -> int:
    from . import optimizer

    m = matrix_from_json(read_json(args.matrix))
    fn = {
        "mle_x": lambda: optimizer.fidelity_mle_x(m, args.n),
        "mle_z": lambda: optimizer.fidelity_mle_z(m, args.n),
        "sle_x": lambda: optimizer.fidelity_sle_x(m),
        "sle_z": lambda: optimizer.fidelity_sle_z(m),
    }.get(args.kind)
    if fn is None:
        print(f"unknown functional kind {args.kind!r}", file=sys.stderr)
        return 2
    print(repr(fn()))
    return 0


def cmd_equiv(args) -> int:
    space = EncodedSpace(args.qubits, args.n)
    u1 = _load_unitary(args.file1, space)
    u2 = _load_unitary(args.file2, space)
    ops = ea_operators(space)
    deviation = 0.0
    for probe in probe_states(space):
        s1 = ea_signature(
            type(probe)(space, u1.matrix @ probe.amplitudes), ops
        )
        s2 = ea_signature(
            type(probe)(space, u2.matrix @ probe.amplitudes), ops
        )
        deviation = max(deviation, s1.max_deviation(s2))
    equivalent = deviation <= args.tol
    _, _, res1 = nearest_class_form(u1, args.qubits, args.n)
    _, _, res2 = nearest_class_form(u2, args.qubits, args.n)
    print(f"verdict: {'equivalent' if equivalent else 'not equivalent'}")
    print(f"max EA-signature deviation: {deviation:.3e}")
    print(f"class-factorization residuals: {res1:.3e} {res2:.3e}")
    return 0 if equivalent else 1


def cmd_gate(args) -> int:
    n = args.n
    makers = {
        "weak-identity": lambda: weak_identity_class(n),
        "pauli-x": lambda: pauli_class("x", n),
        "pauli-y": lambda: pauli_class("y", n),
        "pauli-z": lambda: pauli_class("z", n),
        "hadamard": lambda: hadamard_class(n),
        "phase": lambda: phase_class(args.phi, n),
        "cnot": lambda: cnot_class(n),
    }
    maker = makers.get(args.gate_class)
    if maker is None:
        print(f"unknown gate class {args.gate_class!r}", file=sys.stderr)
        return 2
    cls = maker()
    member = cls.sample(args.seed) if args.seed is not None else cls.canonical_member()
    write_json(args.out, matrix_to_json(member))
    _write_manifest(
        args.out,
        "gate",
        {"class": args.gate_class, "n": n, "phi": args.phi, "seed": args.seed},
    )
    print(f"{args.gate_class} member ({member.dim}x{member.dim}) -> {args.out}")
    return 0


def cmd_sweep(args) -> int:
    cfg = layered_config(
        {"t_min": 70.0, "t_max": 120.0, "steps": 26, "out": "sweep.csv"},
        args.config,
        {
            "t_min": args.t_min,
            "t_max": args.t_max,
            "steps": args.steps,
            "out": args.out,
        },
    )
    if args.exact:
        u_mle = pauli_class("x", 2).canonical_member()
        u_sle = sle_bitflip_exact(4)
        provenance = {"gates": "exact"}
    elif args.gates:
        paths = args.gates.split(",")
        if len(paths) != 2:
            print("--gates needs two record files: mle.json,sle.json", file=sys.stderr)
            return 2
        records = [read_json(p) for p in paths]
        units = []
        for p, rec in zip(paths, records):
            try:
                units.append(Unitary(matrix_from_json(rec["final_unitary"])))
            except ValueError as exc:
                raise InvariantViolation(f"{p}: {exc}") from exc
        u_mle, u_sle = units
        provenance = {"gates": paths}
    else:
        print("sweep requires --exact or --gates", file=sys.stderr)
        return 2

    table = temperature_sweep(
        u_mle, u_sle, cfg["t_min"], cfg["t_max"], int(cfg["steps"])
    )
    out = cfg["out"]
    sweep_to_csv(out, table)
    from .decoherence import BOLTZMANN

    meta = dict(cfg)
    meta.update(provenance)
    meta["boltzmann_constant"] = BOLTZMANN
    mirror = {
        "metadata": meta,
        "T_kelvin": [float(x) for x in table.temperatures],
        "delta": [float(x) for x in table.deltas],
        "eps_mle": [float(x) for x in table.eps_mle],
        "eps_sle": [float(x) for x in table.eps_sle],
        "eps_sle_oracle": [float(x) for x in table.eps_sle_oracle],
    }
    write_json(out + ".json", mirror)
    _write_manifest(out, "sweep", meta)
    cross = crossover_temperature(table)
    if cross is not None:
        print(f"crossover temperature: {cross:.2f} K")
    else:
        print("no crossover in range")
    print(f"sweep table ({int(cfg['steps'])} rows) -> {out}")
    return 0


def cmd_dephase(args) -> int:
    if args.exact:
        cls = pauli_class(args.gate or "x", 2)
        u = cls.canonical_member()
    elif args.record:
        rec = read_json(args.record)
        target = rec.get("config", {}).get("target", "mle-x")
        axis = args.gate or ("z" if target.endswith("z") else "x")
        cls = pauli_class(axis, 2)
        try:
            u = Unitary(matrix_from_json(rec["final_unitary"]))
        except ValueError as exc:
            raise InvariantViolation(f"{args.record}: {exc}") from exc
    else:
        print("dephase requires --record or --exact", file=sys.stderr)
        return 2
    result = dephasing_study(
        u,
        cls,
        RandomStateSpec(seed=args.seed),
        args.samples,
        threads=_resolve_threads(args.threads),
    )
    summary = {
        "mean_pure": result.mean_pure,
        "stderr_pure": result.stderr_pure,
        "mean_dephased": result.mean_dephased,
        "stderr_dephased": result.stderr_dephased,
        "num_samples": result.num_samples,
        "seed": args.seed,
        "gate_class": cls.name,
    }
    write_json(args.out, summary)
    _write_manifest(
        args.out,
        "dephase",
        {
            "record": args.record,
            "exact": args.exact,
            "samples": args.samples,
            "seed": args.seed,
            "gate_class": cls.name,
        },
    )
    print(
        f"mean eps pure {result.mean_pure:.6f} (se {result.stderr_pure:.1e}), "
        f"dephased {result.mean_dephased:.6f} (se {result.stderr_dephased:.1e})"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mleqc",
        description="Multilevel-encoded qubit gates: optimization and error studies.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="GA search for a gate field")
    p.add_argument("--target", choices=sorted(TARGET_PRESETS))
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--generations", type=int)
    p.add_argument("--population", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("evaluate", help="fidelity functional of a matrix file")
    p.add_argument("--matrix", required=True)
    p.add_argument("--kind", required=True)
    p.add_argument("--n", type=int, default=2)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("equiv", help="logical equivalence of two unitaries")
    p.add_argument("file1")
    p.add_argument("file2")
    p.add_argument("--n", type=int, default=2, help="encoding dimension")
    p.add_argument("--qubits", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("gate", help="emit a gate-class member matrix")
    p.add_argument("gate_class")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--phi", type=float, default=np.pi / 2)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="gate.json")
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("sweep", help="temperature sweep of both error metrics")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--gates", help="mle_record.json,sle_record.json")
    p.add_argument("--config")
    p.add_argument("--t-min", type=float, dest="t_min")
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--steps", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("dephase", help="random-state dephasing study")
    p.add_argument("--record")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--gate", choices=["x", "z"])
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", default="dephase.json")
    p.set_defaults(func=cmd_dephase)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"numerical invariant violated: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
