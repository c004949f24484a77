"""Batch experiment driver.

Subcommands mirror the experiment kinds: `arithmetize`, `completeness`,
`soundness-lp`, `tests`, `hyp-probe`, `round-probe`, `report`. Every command
accepts `--config FILE` (TOML) whose values act as flag defaults; explicit
flags win. Reports are JSON plus a CSV summary row per parameter point, and
are byte-identical for identical (config, seed) pairs: wall-clock timing goes
to a separate `.meta.json` sidecar so the main report stays deterministic.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import click

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover - py310 path
    import tomli as tomllib

from . import __version__
from .circuits import (
    CircuitFormatError,
    arithmetize,
    evaluate,
    intended_proof,
    parse_circuit,
)
from .errors import InvalidInput, ScopeExceeded
from .gf2 import BitVector
from .probes import (
    flatten_probe,
    hypothesis_probe,
    rounding_probe,
    self_correction_probe,
)
from .salp import max_acceptance
from .simplex import export_lp_text
from .strategy import Domain, loads_strategy, repeated_classical
from .verifier import (
    AlmssVerifier,
    FullVerifier,
    RepeatedAlmssVerifier,
    acceptance_classical,
    acceptance_mc,
    consistency_test,
    linearity_test,
    run_report,
)


def _load_config(path):
    if not path:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, rows: list):
    if not rows:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    path.write_text(buf.getvalue())


def _emit(out, name: str, config: dict, payload: dict, rows=None,
          wall_ms: float = 0.0):
    payload = dict(payload)
    payload["config_hash"] = _config_hash(config)
    payload["version"] = __version__
    if out:
        base = Path(out)
        base.mkdir(parents=True, exist_ok=True)
        _write_json(base / f"{name}.json", payload)
        if rows:
            _write_csv(base / f"{name}.csv", rows)
        _write_json(base / f"{name}.meta.json", {"wall_time_ms": wall_ms})
        click.echo(str(base / f"{name}.json"))
    else:
        click.echo(json.dumps(payload, sort_keys=True, indent=2))


def _read_circuit(path: str):
    try:
        return parse_circuit(Path(path).read_text())
    except FileNotFoundError:
        raise click.UsageError(f"circuit file not found: {path}")
    except CircuitFormatError as e:
        raise click.UsageError(f"{path}: {e}")


def _parse_bits(bits: str) -> BitVector:
    if not bits or any(c not in "01" for c in bits):
        raise click.UsageError("input must be a nonempty string of 0/1")
    return BitVector.from_string(bits)


def _guard(fn):
    try:
        return fn()
    except ScopeExceeded as e:
        click.echo(json.dumps({"error": "scope exceeded", "detail": str(e)}),
                   err=True)
        sys.exit(3)
    except InvalidInput as e:
        click.echo(json.dumps({"error": "invalid input", "detail": str(e)}),
                   err=True)
        sys.exit(2)


@click.group()
@click.version_option(version=__version__)
def main():
    """Desk-scale experiments with non-signaling PCP verifiers."""


@main.command("arithmetize")
@click.argument("circuit_path")
@click.option("-x", "--input-bits", required=True, help="input bit string")
@click.option("--out", default=None, help="output directory")
@click.option("--config", default=None, help="TOML config file")
def cmd_arithmetize(circuit_path, input_bits, out, config):
    """Emit the quadratic constraint system of a circuit run."""
    cfg = _load_config(config)
    circuit = _read_circuit(circuit_path)
    x = _parse_bits(input_bits)

    def work():
        cs = arithmetize(circuit, x)
        w = evaluate(circuit, x)
        payload = {
            "experiment": "arithmetize",
            "circuit": circuit_path,
            "input": input_bits,
            "n_vars": cs.n_vars,
            "m": cs.m,
            "wires": w.to_string(),
            "satisfied": cs.holds_on(w),
            "constraints": [
                {"P": p.to_string(), "c": c} for p, c in cs.constraints
            ],
        }
        return payload

    start = time.perf_counter()
    payload = _guard(work)
    _emit(out, "arithmetize", {"cfg": cfg, "circuit": circuit_path,
                               "input": input_bits},
          payload, wall_ms=(time.perf_counter() - start) * 1000)


@main.command("completeness")
@click.argument("circuit_path")
@click.option("-x", "--input-bits", required=True)
@click.option("--alg", type=click.Choice(["1", "2", "3"]), default="1")
@click.option("-t", "--repetitions", type=int, default=1)
@click.option("--exact/--mc", "exact", default=True)
@click.option("--samples", type=int, default=2000)
@click.option("--seed", type=int, default=0)
@click.option("--out", default=None)
@click.option("--config", default=None)
def cmd_completeness(circuit_path, input_bits, alg, repetitions, exact,
                     samples, seed, out, config):
    """Acceptance of the intended proof on a (satisfying) instance."""
    cfg = _load_config(config)
    circuit = _read_circuit(circuit_path)
    x = _parse_bits(input_bits)

    def work():
        cs = arithmetize(circuit, x)
        w = evaluate(circuit, x)
        proof = intended_proof(w)
        base = Domain("bitmatrix", cs.n_vars)
        t = repetitions
        if alg == "1":
            verifier = AlmssVerifier(cs)
            strategy = repeated_classical(proof, base, 1, base_linear=True)
        elif alg == "2":
            verifier = (
                AlmssVerifier(cs) if t == 1 else RepeatedAlmssVerifier(cs, t)
            )
            strategy = repeated_classical(proof, base, max(t, 1),
                                          base_linear=True)
        else:
            verifier = FullVerifier(cs, t)
            strategy = repeated_classical(proof, base, 2 * t,
                                          base_linear=True)
        if exact:
            value = acceptance_classical(strategy, verifier)
            report = run_report(verifier.name, circuit_path, t, None, value)
        else:
            est = acceptance_mc(strategy, verifier, samples, seed)
            report = run_report(verifier.name, circuit_path, t, None, est)
        report["experiment"] = "completeness"
        report["input"] = input_bits
        return report

    start = time.perf_counter()
    payload = _guard(work)
    wall = (time.perf_counter() - start) * 1000
    payload.pop("wall_time_ms", None)
    key = {"cfg": cfg, "circuit": circuit_path, "input": input_bits,
           "alg": alg, "t": repetitions, "exact": exact,
           "samples": samples, "seed": seed}
    row = {k: payload[k] for k in ("verifier", "mode", "acceptance")}
    _emit(out, "completeness", key, payload, rows=[row], wall_ms=wall)


@main.command("soundness-lp")
@click.argument("circuit_path")
@click.option("-x", "--input-bits", required=True)
@click.option("-k", "--locality", type=int, default=4)
@click.option("--linear-pins/--no-linear-pins", default=True)
@click.option("--family", type=click.Choice(["issued", "complete"]),
              default="complete")
@click.option("--export-lp", "export", is_flag=True, default=False)
@click.option("--out", default=None)
@click.option("--config", default=None)
def cmd_soundness_lp(circuit_path, input_bits, locality, linear_pins, family,
                     export, out, config):
    """Optimal non-signaling acceptance of the 4-query verifier via the LP."""
    cfg = _load_config(config)
    circuit = _read_circuit(circuit_path)
    x = _parse_bits(input_bits)

    def work():
        cs = arithmetize(circuit, x)
        verifier = AlmssVerifier(cs)
        domain = Domain("bitmatrix", cs.n_vars)
        res = max_acceptance(verifier, domain, locality, family=family,
                             linear_pins=linear_pins)
        payload = {
            "experiment": "soundness-lp",
            "circuit": circuit_path,
            "input": input_bits,
            "k": locality,
            "family": family,
            "label": res.label,
            "linear_pins": linear_pins,
            "optimum": str(res.value),
            "certificate_ok": res.certificate_ok,
            "n_variables": len(res.sap.program.variables),
            "n_constraints": len(res.sap.program.constraints),
        }
        if export:
            text, sidecar = export_lp_text(res.sap.program, "soundness-lp")
            payload["lp_text"] = text
            payload["lp_sidecar"] = sidecar
        return payload

    start = time.perf_counter()
    payload = _guard(work)
    wall = (time.perf_counter() - start) * 1000
    key = {"cfg": cfg, "circuit": circuit_path, "input": input_bits,
           "k": locality, "family": family, "linear_pins": linear_pins}
    row = {k: payload[k] for k in ("k", "family", "label", "optimum",
                                   "certificate_ok")}
    _emit(out, "soundness-lp", key, payload, rows=[row], wall_ms=wall)


@main.command("tests")
@click.option("--battery", type=click.Choice(["self-correction", "flatten"]),
              default="self-correction")
@click.option("--strategy", "strategy_path", default=None,
              help="run the linearity/consistency tests on a strategy JSON")
@click.option("--out", default=None)
@click.option("--config", default=None)
def cmd_tests(battery, strategy_path, out, config):
    """Linearity/consistency test batteries and transformation guarantees."""
    cfg = _load_config(config)

    def work():
        if strategy_path:
            doc = Path(strategy_path).read_text()
            strat = loads_strategy(doc)
            payload = {
                "experiment": "tests",
                "strategy": strategy_path,
                "linearity_test": str(linearity_test(strat)),
            }
            if strat.t % 2 == 0:
                payload["consistency_test"] = str(consistency_test(strat))
            return payload, None
        if battery == "self-correction":
            rows = self_correction_probe()
        else:
            rows = flatten_probe()
        payload = {
            "experiment": "tests",
            "battery": battery,
            "rows": rows,
            "all_bounds_ok": all(
                all(v for k, v in r.items() if k.endswith("_ok") and v is not None)
                for r in rows
            ),
        }
        return payload, rows

    start = time.perf_counter()
    payload, rows = _guard(work)
    wall = (time.perf_counter() - start) * 1000
    key = {"cfg": cfg, "battery": battery, "strategy": strategy_path}
    _emit(out, "tests", key, payload, rows=rows, wall_ms=wall)


@main.command("hyp-probe")
@click.option("--eps", "eps_list", multiple=True,
              default=("0", "1/16", "1/8"), help="epsilon grid, rationals")
@click.option("-k", "--locality", type=int, default=3)
@click.option("--k-prime", type=int, default=2)
@click.option("-n", "--bits", type=int, default=2)
@click.option("--out", default=None)
@click.option("--config", default=None)
def cmd_hyp_probe(eps_list, locality, k_prime, bits, out, config):
    """Measure the distance curve from noisy families to the exact polytope."""
    cfg = _load_config(config)

    def work():
        grid = [Fraction(e) for e in eps_list]
        rows = hypothesis_probe(bits, locality, k_prime, grid)
        return {
            "experiment": "hyp-probe",
            "k": locality,
            "k_prime": k_prime,
            "rows": rows,
        }, rows

    start = time.perf_counter()
    payload, rows = _guard(work)
    wall = (time.perf_counter() - start) * 1000
    key = {"cfg": cfg, "eps": list(eps_list), "k": locality,
           "k_prime": k_prime, "n": bits}
    _emit(out, "hyp-probe", key, payload, rows=rows, wall_ms=wall)


@main.command("round-probe")
@click.option("--eps", "eps_list", multiple=True, default=("1/64", "1/16"))
@click.option("--k-bar", type=int, default=4)
@click.option("-n", "--bits", type=int, default=2)
@click.option("--out", default=None)
@click.option("--config", default=None)
def cmd_round_probe(eps_list, k_bar, bits, out, config):
    """Nearest exactly-linear family probe with the sqrt-eps bound check."""
    cfg = _load_config(config)

    def work():
        grid = [Fraction(e) for e in eps_list]
        rows = rounding_probe(bits, k_bar, grid)
        return {
            "experiment": "round-probe",
            "k_bar": k_bar,
            "rows": rows,
        }, rows

    start = time.perf_counter()
    payload, rows = _guard(work)
    wall = (time.perf_counter() - start) * 1000
    key = {"cfg": cfg, "eps": list(eps_list), "k_bar": k_bar, "n": bits}
    _emit(out, "round-probe", key, payload, rows=rows, wall_ms=wall)


@main.command("report")
@click.argument("path")
def cmd_report(path):
    """Render a JSON report as a human-readable summary."""
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise click.UsageError(f"no such report: {path}")
    except json.JSONDecodeError as e:
        raise click.UsageError(f"not a JSON report: {e}")
    click.echo(f"experiment : {doc.get('experiment', doc.get('verifier', '?'))}")
    for key in sorted(doc):
        if key in ("rows", "constraints", "lp_text", "lp_sidecar"):
            continue
        click.echo(f"{key:<20s} {doc[key]}")
    rows = doc.get("rows")
    if rows:
        click.echo(f"rows ({len(rows)}):")
        for row in rows:
            click.echo("  " + json.dumps(row, sort_keys=True))


if __name__ == "__main__":
    main()
