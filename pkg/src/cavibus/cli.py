"""Batch front door: parse a config, run one scenario, persist results.

Every run writes results.json (deterministic bytes for a fixed config and
seed), any scenario CSV tables, and manifest.json listing each emitted file
with its sha256 digest.  Angles are accepted as fractions of pi ("pi/8",
"3pi/8") to keep configs exact; CSV cells carry 17 significant digits.

Exit codes: 0 success, 1 usage error, 2 numerical failure (diagnostic JSON
is still written), 3 truncation guard.
"""
from __future__ import annotations

import argparse
import datetime
import hashlib
import itertools
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import backend_name
from .cluster import cluster_target, generate_cluster, reduced_purity, run_measurement_sequence
from .errors import IntegrationError, TruncationError
from .gates import cluster_generator, composite_cluster_unitary, ideal_collective_gate, solve_schedule
from .model import SystemParams, default_params, to_angular
from .opensys import NoiseParams, feasibility_report, thermal_insensitivity_scan
from .phases import decompose_phases, loop_area
from .propagator import b_trajectory
from .spaces import basis_state, fidelity, operator_distance, qubit_space

SCENARIOS = ("gate", "schedule", "cluster", "phases", "thermal", "feasibility",
             "mbqc", "sweep")

_PARAM_KEYS = {"E_c", "E_J", "gate_charge", "flux", "omega_c", "g", "n_max",
               "delta", "omega", "num_qubits"}

_ANGLE_RE = re.compile(r"^\s*([+-]?[\d.]*)\s*\*?\s*pi\s*(?:/\s*([\d.]+))?\s*$")
_UNIT_RE = re.compile(r"^\s*([+-]?[\d.eE+-]+)\s*(ueV|GHz|MHz|rad/ns|ns|us|ps)\s*$")


def parse_value(text: str):
    """Parse a --set value: pi fraction, unit-suffixed quantity, number, or string."""
    m = _ANGLE_RE.match(text)
    if m:
        num = float(m.group(1)) if m.group(1) not in ("", "+", "-") else float(m.group(1) + "1")
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    m = _UNIT_RE.match(text)
    if m:
        return {"value": float(m.group(1)), "unit": m.group(2)}
    try:
        f = float(text)
        return int(f) if f.is_integer() and "." not in text and "e" not in text.lower() else f
    except ValueError:
        return text


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode()


def _amplitude_pairs(state) -> list:
    return [[float(a.real), float(a.imag)] for a in state.amplitudes]


class _Writer:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.files: list[dict] = []
        out_dir.mkdir(parents=True, exist_ok=True)

    def write_bytes(self, name: str, data: bytes) -> None:
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        self.files.append({"name": name, "sha256": hashlib.sha256(data).hexdigest(),
                           "bytes": len(data)})

    def write_json(self, name: str, obj) -> None:
        self.write_bytes(name, _json_bytes(obj))

    def write_csv(self, name: str, header: list[str], rows) -> None:
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(
                f"{v:.17g}" if isinstance(v, float) else str(v) for v in row))
        self.write_bytes(name, ("\n".join(lines) + "\n").encode())


def _build_params(options: dict) -> SystemParams:
    base = default_params(
        num_qubits=int(options.pop("num_qubits", 2)),
        n_max=int(options.pop("n_max", 25)),
        k=int(options.get("k", 1)),
        n_odd_index=int(options.get("n_odd", 0)),
    ).to_dict()
    for key in list(options):
        if key in _PARAM_KEYS:
            base[key] = options.pop(key)
    base.pop("omega", None)
    if "delta" in options:
        base["delta"] = options.pop("delta")
    return SystemParams.from_dict(base)


def _load_config(args) -> dict:
    options: dict = {}
    if args.params:
        with open(args.params) as fh:
            options.update(json.load(fh))
    for item in args.set or []:
        if "=" not in item:
            raise SystemExit(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        options[key.strip()] = parse_value(value.strip())
    return options


def _scenario_gate(options, writer, seed):
    n = int(options.get("N", options.get("num_qubits", 2)))
    gamma = float(options.get("gamma", math.pi / 8))
    gate = ideal_collective_gate(n, gamma)
    results = {"scenario": "gate", "N": n, "gamma": gamma}
    if n == 2:
        space = qubit_space(2)
        epr = (basis_state(space, [0, 0]).amplitudes
               + 1j * basis_state(space, [1, 1]).amplitudes) / math.sqrt(2)
        out = gate.matrix @ basis_state(space, [0, 0]).amplitudes
        results["epr_fidelity"] = float(abs(np.vdot(epr, out)) ** 2)
    results["unitarity_defect"] = float(np.max(np.abs(
        gate.matrix.conj().T @ gate.matrix - np.eye(gate.space.dim))))
    return results


def _scenario_schedule(options, writer, seed):
    sp = _build_params(options)
    n = int(options.get("N", sp.num_qubits))
    k = int(options.get("k", 1))
    n_odd = int(options.get("n_odd", 0))
    out = {"scenario": "schedule", "N": n}
    for mode in ("paper", "corrected"):
        sched = solve_schedule(sp, n, k, n_odd, mode)
        dist = operator_distance(composite_cluster_unitary(n, sched),
                                 cluster_generator(n, sched.gamma))
        out[mode] = {"schedule": sched.to_dict(),
                     "distance_to_exact_generator": dist}
    return out


def _scenario_cluster(options, writer, seed):
    sp = _build_params(options)
    sched = solve_schedule(sp, sp.num_qubits, int(options.get("k", 1)),
                           int(options.get("n_odd", 0)),
                           str(options.get("t1_mode", "corrected")))
    tier = str(options.get("tier", "ideal"))
    if "nbar" in options:
        init = ("thermal", float(options["nbar"]))
    else:
        init = ("fock", int(options.get("fock", 0)))
    res = generate_cluster(sp, sched, tier=tier, cavity_init=init)
    purities = [reduced_purity(res.state, q) for q in range(sp.num_qubits)]
    return {"scenario": "cluster", "tier": tier, "cavity_init": list(init),
            "fidelity": res.fidelity, "schedule": sched.to_dict(),
            "reduced_purities": purities}


def _scenario_phases(options, writer, seed):
    sp = _build_params(options)
    k = int(options.get("k", 1))
    dec = decompose_phases(sp, k)
    T = 2 * math.pi * k / sp.drive.delta
    traj = b_trajectory(sp, np.linspace(0.0, T, int(options.get("points", 1001))))
    writer.write_csv("trajectory.csv", ["t", "re_b", "im_b"], traj.rows())
    return {"scenario": "phases", "k": k, "decomposition": dec.to_dict(),
            "loop_area_analytic": loop_area(sp, k)}


def _scenario_thermal(options, writer, seed):
    sp = _build_params(options)
    sched = solve_schedule(sp, sp.num_qubits, int(options.get("k", 1)),
                           int(options.get("n_odd", 0)))
    tier = str(options.get("tier", "lamb_dicke"))
    inits: list = []
    fock = options.get("fock", "0,1,2")
    if fock != "":
        inits += [int(x) for x in str(fock).split(",") if x != ""]
    if "nbar" in options:
        inits += [("thermal", float(x)) for x in str(options["nbar"]).split(",")]
    rows = thermal_insensitivity_scan(sp, sched, inits, tier=tier)
    writer.write_csv("scan.csv", ["label", "fidelity"], rows)
    fids = [f for _, f in rows]
    return {"scenario": "thermal", "tier": tier,
            "rows": [[label, f] for label, f in rows],
            "spread": max(fids) - min(fids)}


def _scenario_feasibility(options, writer, seed):
    sp = _build_params(options)
    noise = NoiseParams.from_quality(
        omega_c=sp.cavity.omega_c,
        Q=float(options.get("Q", 1e6)),
        T_d=float(to_angular_time(options.get("T_d", {"value": 0.5, "unit": "us"}))),
    )
    omega_rabi = to_angular(options.get("Omega", {"value": 15, "unit": "MHz"}))
    gamma_q = to_angular_time(options.get("gamma_q", {"value": 2, "unit": "us"}))
    rep = feasibility_report(sp, noise, omega_rabi, gamma_q,
                             N=int(options.get("N", sp.num_qubits)),
                             k=int(options.get("k", 1)),
                             n_odd_index=int(options.get("n_odd", 0)))
    return {"scenario": "feasibility", "report": rep.to_dict()}


def to_angular_time(value) -> float:
    from .model import to_time_ns
    return to_time_ns(value)


def _scenario_mbqc(options, writer, seed):
    sp = _build_params(options)
    n = sp.num_qubits
    gamma = float(options.get("gamma", math.pi / 8))
    target = cluster_target(n, gamma)
    order = [int(x) for x in str(options.get("measure", "")).split(",") if x != ""] \
        or list(range(n - 1))
    records = run_measurement_sequence(target.state, order, seed=seed)
    out_records = []
    for q, rec in zip(order, records):
        entry = {"qubit": q, "outcome": rec.outcome, "probability": rec.probability}
        if rec.post_state is not None:
            entry["post_state"] = _amplitude_pairs(rec.post_state)
        out_records.append(entry)
    final = records[-1].post_state if records and records[-1].post_state else target.state
    return {"scenario": "mbqc", "N": n, "gamma": gamma, "seed": seed,
            "cluster_state": _amplitude_pairs(target.state),
            "measurements": out_records,
            "final_state": _amplitude_pairs(final)}


def _scenario_sweep(options, writer, seed, sweep_specs, base_scenario):
    if base_scenario in (None, "sweep"):
        raise SystemExit("sweep needs --base-scenario pointing at another scenario")
    keys, value_lists = [], []
    for spec in sweep_specs:
        key, _, values = spec.partition("=")
        keys.append(key.strip())
        value_lists.append([parse_value(v) for v in values.split(",")])
    index = []
    for i, combo in enumerate(itertools.product(*value_lists)):
        sub_options = dict(options)
        sub_options.update(dict(zip(keys, combo)))
        sub = _Writer(writer.out_dir / f"sweep_{i:03d}")
        results = SCENARIO_FUNCS[base_scenario](sub_options, sub, seed)
        sub.write_json("results.json", results)
        index.append({"combo": {k: c for k, c in zip(keys, combo)},
                      "dir": f"sweep_{i:03d}",
                      "files": sub.files})
    return {"scenario": "sweep", "base_scenario": base_scenario, "runs": index}


SCENARIO_FUNCS = {
    "gate": _scenario_gate,
    "schedule": _scenario_schedule,
    "cluster": _scenario_cluster,
    "phases": _scenario_phases,
    "thermal": _scenario_thermal,
    "feasibility": _scenario_feasibility,
    "mbqc": _scenario_mbqc,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cavibus",
                                description="Collective-gate simulator batch runner")
    p.add_argument("--scenario", required=True, choices=SCENARIOS)
    p.add_argument("--params", help="JSON parameter file (see README schema)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a parameter or scenario knob (repeatable)")
    p.add_argument("--tier", help="simulation tier for cluster/thermal scenarios")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="cavibus-results", help="output directory")
    p.add_argument("--sweep", action="append", metavar="KEY=V1,V2,...",
                   help="sweep values (sweep scenario only; repeatable)")
    p.add_argument("--base-scenario", choices=[s for s in SCENARIOS if s != "sweep"],
                   help="scenario each sweep point runs")
    p.add_argument("--force-large", action="store_true",
                   help="lift the large-problem guard")
    return p


def run(args) -> int:
    options = _load_config(args)
    if args.tier:
        options["tier"] = args.tier
    dim_guard = 2 ** int(options.get("num_qubits", 2)) * (int(options.get("n_max", 25)) + 1)
    if dim_guard > 4096 and not args.force_large:
        print(f"problem dimension {dim_guard} needs --force-large", file=sys.stderr)
        return 1

    writer = _Writer(Path(args.out))
    config_echo = {"scenario": args.scenario, "options": options, "seed": args.seed,
                   "tier": args.tier, "sweep": args.sweep,
                   "base_scenario": args.base_scenario}
    try:
        if args.scenario == "sweep":
            results = _scenario_sweep(options, writer, args.seed, args.sweep or [],
                                      args.base_scenario)
        else:
            results = SCENARIO_FUNCS[args.scenario](options, writer, args.seed)
    except TruncationError as exc:
        writer.write_json("error.json", {"error": "truncation", "detail": str(exc)})
        _write_manifest(writer, config_echo, failed=True)
        print(f"truncation guard: {exc}", file=sys.stderr)
        return 3
    except (IntegrationError, FloatingPointError, np.linalg.LinAlgError) as exc:
        writer.write_json("error.json", {"error": "numerical", "detail": str(exc)})
        _write_manifest(writer, config_echo, failed=True)
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1

    writer.write_json("results.json", results)
    _write_manifest(writer, config_echo)
    print(f"wrote {len(writer.files) + 1} files to {writer.out_dir}")
    return 0


def _write_manifest(writer: _Writer, config_echo: dict, failed: bool = False) -> None:
    manifest = {
        "artifact_version": __version__,
        "backend": backend_name(),
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": config_echo,
        "failed": failed,
        "files": writer.files,
    }
    # manifest lists every other file; it is not listed itself
    (writer.out_dir / "manifest.json").write_bytes(_json_bytes(manifest))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return run(args)
    except SystemExit as exc:
        if exc.code not in (0, None):
            print(str(exc), file=sys.stderr)
            return 1
        return 0


if __name__ == "__main__":
    sys.exit(main())
