"""Command-line entry point: ``stabatlas <command> ...``.

Every command prints a short summary, writes its artifacts under ``--out``
and records them in ``manifest.json`` there.  Exit status is 0 on success,
1 when a computation fails and 2 for usage errors.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import click
import numpy as np

from . import dicke_cone, graph_atlas, group_engine, magic_kit, stab_census
from .clifford_core import ALPHABET, CORE_RELATIONS, verify_relations
from .state_space import DenseState, parse_state_spec

FORMATS_GRAPH = ("dot", "graphml", "json")
FORMATS_TABLE = ("csv", "json")


def _tool_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:  # pragma: no cover - running from a checkout
        return "0+unknown"


class Run:
    """Collects outputs of one command and writes the manifest."""

    def __init__(self, command: str, params: dict, out: str | None):
        self.command = command
        self.params = {k: v for k, v in sorted(params.items()) if k not in ("out", "threads")}
        self.out = Path(out) if out else None
        self.outputs: list[dict[str, str]] = []
        self.inputs: dict[str, str] = {}

    def add_input(self, path: str) -> None:
        self.inputs[path] = hashlib.sha256(Path(path).read_bytes()).hexdigest()

    def write(self, name: str, text: str) -> None:
        if self.out is None:
            return
        self.out.mkdir(parents=True, exist_ok=True)
        data = text.encode()
        (self.out / name).write_bytes(data)
        self.outputs.append({"file": name, "sha256": hashlib.sha256(data).hexdigest()})

    def finish(self) -> None:
        if self.out is None:
            return
        stable = {
            "command": self.command,
            "parameters": self.params,
            "tool_version": _tool_version(),
            "inputs": self.inputs,
            "outputs": self.outputs,
        }
        digest = hashlib.sha256(json.dumps(stable, sort_keys=True).encode()).hexdigest()
        epoch = os.environ.get("SOURCE_DATE_EPOCH")
        stamp = time.gmtime(int(epoch)) if epoch else time.gmtime()
        manifest = dict(stable, manifest_hash=digest, timestamp=time.strftime("%Y-%m-%dT%H:%M:%SZ", stamp))
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


GROUP_ALIASES = {"HC": "H1,H2,C12,C21", "C2": "H1,H2,P1,P2,C12,C21"}


def _parse_gens(text: str) -> list[str]:
    text = GROUP_ALIASES.get(text.strip(), text)
    gens = [g.strip() for g in text.split(",") if g.strip()]
    bad = [g for g in gens if g not in ALPHABET]
    if not gens or bad:
        raise click.BadParameter(f"generators must come from {','.join(ALPHABET)} or be HC/C2")
    return gens


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "-", text).strip("-")


def _group_slug(gens: list[str]) -> str:
    return "".join(group_engine._canonical_gens(gens))


def _load_table(gens: list[str], mod_phase: bool) -> group_engine.SubgroupTable:
    return group_engine.close_subgroup(
        gens, mod_phase=mod_phase, cache_dir=group_engine.cache_dir_default()
    )


def _state(spec: str) -> DenseState:
    if spec.startswith("named:"):
        return graph_atlas.load_named_state(spec.split(":", 1)[1])
    try:
        return parse_state_spec(spec)
    except (ValueError, OSError) as exc:
        raise click.BadParameter(str(exc), param_hint="--state") from exc


def _emit(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


common_out = click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory.")
common_threads = click.option("--threads", type=click.IntRange(1, 256), default=1, show_default=True)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log cache and progress messages.")
def cli(verbose: bool) -> None:
    """Exact two-qubit Clifford orbits, entropy censuses, Dicke cones and magic."""
    if verbose:
        import logging

        logging.basicConfig(level=logging.INFO)


# ---------------------------------------------------------------------------
# groups


@cli.group()
def group() -> None:
    """Subgroup closure and phase reduction."""


@group.command("close")
@click.option("--gens", required=True, help="Comma-separated generators, e.g. H1,P1.")
@click.option("--mod-phase", is_flag=True, help="Work modulo global phase.")
@common_out
def group_close(gens: str, mod_phase: bool, out: str | None) -> None:
    g = _parse_gens(gens)
    run = Run("group close", {"gens": g, "mod_phase": mod_phase}, out)
    table = _load_table(g, mod_phase)
    click.echo(f"order {table.order}")
    click.echo(f"diameter {table.diameter}")
    run.write(
        f"{_group_slug(g)}_group.json",
        _emit({"generators": g, "mod_phase": mod_phase, "order": table.order, "diameter": table.diameter}),
    )
    run.finish()


@group.command("reduce")
@click.option("--gens", required=True)
@common_out
def group_reduce(gens: str, out: str | None) -> None:
    """Order and diameter with phase, phase factor, diameter mod phase."""
    g = _parse_gens(gens)
    run = Run("group reduce", {"gens": g}, out)
    row = group_engine.phase_reduction(g)
    for k, v in row.items():
        click.echo(f"{k} {v}")
    run.write(f"{_group_slug(g)}_reduction.json", _emit(dict(row, generators=g)))
    run.finish()


# ---------------------------------------------------------------------------
# graphs


def _graph_outputs(run: Run, g: graph_atlas.QuotientGraph, stem: str, fmt: str) -> None:
    metrics = graph_atlas.graph_metrics(g)
    for k in ("vertices", "edges", "colors", "diameter", "wl_hash"):
        click.echo(f"{k} {metrics[k]}")
    run.write(f"{stem}.{fmt}", graph_atlas.export_graph(g, fmt))
    run.write(f"{stem}_metrics.json", _emit(metrics))


@cli.command()
@click.option("--gens", required=True)
@click.option("--mod-phase", is_flag=True)
@click.option("--format", "fmt", type=click.Choice(FORMATS_GRAPH), default="json", show_default=True)
@common_out
def cayley(gens: str, mod_phase: bool, fmt: str, out: str | None) -> None:
    """Cayley graph of a generated subgroup."""
    g = _parse_gens(gens)
    run = Run("cayley", {"gens": g, "mod_phase": mod_phase, "format": fmt}, out)
    graph = graph_atlas.cayley_graph(_load_table(g, mod_phase))
    _graph_outputs(run, graph, f"{_group_slug(g)}_identity_cayley", fmt)
    run.finish()


def _quotient_command(kind: str):
    @click.option("--gens", default="H1,H2,C12,C21", show_default=True)
    @click.option("--state", "state_spec", required=True, help="dicke:N,k | ghz:N | w:N | zeros:N | basis:bits | file:path | named:name")
    @click.option("--format", "fmt", type=click.Choice(FORMATS_GRAPH), default="json", show_default=True)
    @click.option("--tolerance", type=float, default=1e-9, show_default=True)
    @common_out
    @common_threads
    def command(gens: str, state_spec: str, fmt: str, tolerance: float, out: str | None, threads: int) -> None:
        g = _parse_gens(gens)
        run = Run(kind, {"gens": g, "state": state_spec, "format": fmt, "tolerance": tolerance}, out)
        if state_spec.startswith("file:"):
            run.add_input(state_spec[5:])
        state = _state(state_spec)
        table = _load_table(g, True)
        builder = graph_atlas.reachability_graph if kind == "reach" else graph_atlas.contracted_graph
        graph = builder(table, state, tolerance, state_label=state_spec, threads=threads)
        click.echo(f"stabilizer_order {graph.metadata['stabilizer_order']}")
        stem = f"{_group_slug(g)}_{_slug(state_spec)}_{'reachability' if kind == 'reach' else 'contracted'}"
        _graph_outputs(run, graph, stem, fmt)
        run.finish()

    return command


cli.command("reach", help="Reachability graph: left cosets of the state's stabilizer.")(
    _quotient_command("reach")
)
cli.command("contract", help="Contracted graph: local-subgroup double cosets.")(
    _quotient_command("contract")
)


# ---------------------------------------------------------------------------
# census


@cli.command()
@click.option("--n", "n", type=click.IntRange(1, 5), required=True)
@click.option("--format", "fmt", type=click.Choice(FORMATS_TABLE), default="csv", show_default=True)
@common_out
def census(n: int, fmt: str, out: str | None) -> None:
    """Entropy-vector census of all n-qubit stabilizer states."""
    run = Run("census", {"n": n, "format": fmt}, out)
    if n == 1:
        rows = []
        text = "entropy_vector,count,holographic,violated_inequalities\n"
        summary = {"n": 1, "states": stab_census.stabilizer_state_count(1), "distinct_vectors": 0}
        body = text if fmt == "csv" else _emit(summary)
    else:
        rows = stab_census.entropy_census(n)
        body = stab_census.census_to_csv(rows) if fmt == "csv" else stab_census.census_to_json(n, rows) + "\n"
    click.echo(body, nl=False)
    run.write(f"census_n{n}.{fmt}", body)
    run.finish()


# ---------------------------------------------------------------------------
# dicke


@cli.group()
def dicke() -> None:
    """Dicke-state entropies, cones, star graphs and stabilizers."""


def _dspec(N: int, k: int) -> dicke_cone.DickeSpec:
    try:
        return dicke_cone.DickeSpec(N, k)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from exc


@dicke.command("entropy")
@click.argument("N", type=int)
@click.argument("k", type=int)
@click.option("--bits", is_flag=True, help="Report bits instead of nats.")
@common_out
def dicke_entropy(n: int, k: int, bits: bool, out: str | None) -> None:
    """Entanglement entropy of every ell-qubit cut of D(N,k)."""
    spec = _dspec(n, k)
    run = Run("dicke entropy", {"N": n, "k": k, "bits": bits}, out)
    lines = ["ell,entropy"]
    for ell in range(0, n + 1):
        lines.append(f"{ell},{dicke_cone.dicke_entropy(spec, ell, bits=bits) + 0.0:.15g}")
    body = "\n".join(lines) + "\n"
    click.echo(body, nl=False)
    run.write(f"{spec.label}_entropy.csv", body)
    run.finish()


@dicke.command("cone")
@click.argument("N", type=int)
@click.argument("k", type=int)
@common_out
def dicke_cone_cmd(n: int, k: int, out: str | None) -> None:
    """Entropy vector of D(N,k) with inequality and cone checks."""
    spec = _dspec(n, k)
    run = Run("dicke cone", {"N": n, "k": k}, out)
    rep = dicke_cone.dicke_entropy_vector(spec)
    body = _emit(
        {
            "N": n,
            "k": k,
            "vector_bits": [round(c, 12) for c in rep.vector.components],
            "holographic": rep.holographic,
            "inequalities": rep.flags,
            "sqec": rep.sqec_ok,
            "shec": rep.shec_ok,
        }
    )
    click.echo(body, nl=False)
    run.write(f"{spec.label}_cone.json", body)
    run.finish()


@dicke.command("stars")
@click.argument("N", type=int)
@click.argument("k", type=int)
@click.argument("ell", type=int)
@common_out
def dicke_stars(n: int, k: int, ell: int, out: str | None) -> None:
    """Star graphs realizing the symmetrized entropy at ELL."""
    spec = _dspec(n, k)
    run = Run("dicke stars", {"N": n, "k": k, "ell": ell}, out)
    graphs, total = dicke_cone.star_realization(spec, ell)
    lines = ["graph,cut_size,weight,coefficient,min_cut"]
    for i, g in enumerate(graphs):
        lines.append(f"{i},{g.cut_size},{g.w:.15g},{g.coefficient:.15g},{g.min_cut():.15g}")
    lines.append(f"total,,,,{total:.15g}")
    body = "\n".join(lines) + "\n"
    click.echo(body, nl=False)
    run.write(f"{spec.label}_stars_l{ell}.csv", body)
    run.finish()


@dicke.command("stabilizers")
@click.argument("N", type=int)
@click.argument("k", type=int)
@common_out
def dicke_stab(n: int, k: int, out: str | None) -> None:
    """Pauli and Clifford stabilizers of D(N,k) with orbit sizes."""
    spec = _dspec(n, k)
    run = Run("dicke stabilizers", {"N": n, "k": k}, out)
    rep = dicke_cone.dicke_stabilizers(spec)
    body = _emit(
        {
            "pauli_stabilizer": rep.pauli_stabilizer,
            "pauli_orbit": rep.pauli_orbit,
            "hc_stabilizer": rep.hc_stabilizer,
            "hc_orbit": rep.hc_orbit,
            "c2_stabilizer": rep.c2_stabilizer,
            "c2_orbit": rep.c2_orbit,
            "claims_checked": rep.claims_checked,
        }
    )
    click.echo(body, nl=False)
    run.write(f"{spec.label}_stabilizers.json", body)
    run.finish()


@dicke.command("cardinality")
@click.argument("N", type=int)
@common_out
def dicke_card(n: int, out: str | None) -> None:
    """Distinct nonzero entropies on the (HC) orbit of the W state."""
    _dspec(n, 1)
    run = Run("dicke cardinality", {"N": n}, out)
    value = dicke_cone.entanglement_cardinality(n)
    body = _emit({"N": n, "distinct_nonzero_entropies": value, "conjecture": dicke_cone.cardinality_conjecture(n)})
    click.echo(body, nl=False)
    run.write(f"D{n}_1_cardinality.json", body)
    run.finish()


# ---------------------------------------------------------------------------
# magic


@cli.group()
def magic() -> None:
    """Spectrum magic estimates and bounds."""


def _read_spectrum(path: str) -> magic_kit.Spectrum:
    try:
        data = json.loads(Path(path).read_text())
        return magic_kit.Spectrum.from_values(data["values"])
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise click.BadParameter(f"cannot read spectrum: {exc}", param_hint="--spectrum") from exc


@magic.command("m2")
@click.option("--spectrum", "path", required=True, type=click.Path(exists=True, dir_okay=False))
@common_out
def magic_m2(path: str, out: str | None) -> None:
    """M2 estimate, averaged value and bounds for a JSON spectrum file."""
    run = Run("magic m2", {"spectrum": Path(path).name}, out)
    run.add_input(path)
    sp = _read_spectrum(path)
    b = magic_kit.m2_bounds(sp)
    body = _emit(
        {
            "m2_estimate": b.estimate,
            "upper_2s2": b.upper_2s2,
            "upper_antiflat": b.upper_antiflat,
            "averaged": b.averaged,
            "relative_flatness": b.relative_flatness,
            "anti_flatness": magic_kit.anti_flatness(sp),
            "capacity_n1": magic_kit.capacity(sp, 1.0),
        }
    )
    click.echo(body, nl=False)
    run.write("m2.json", body)
    run.finish()


def _ising_impl(n, gmin, gmax, steps, cut, bias, fmt, out, threads) -> None:
    run = Run("ising", {"n": n, "gmin": gmin, "gmax": gmax, "steps": steps, "cut": cut, "bias": bias, "format": fmt}, out)
    if cut >= n:
        raise click.BadParameter("cut must be smaller than n", param_hint="--cut")
    gs = np.linspace(gmin, gmax, steps) if steps > 1 else np.array([gmin])
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda g: magic_kit.ising_magic_scan(n, [g], [cut], bias), gs))
    rows = [r for part in parts for r in part]
    body = magic_kit.scan_to_csv(rows) if fmt == "csv" else _emit(rows)
    click.echo(body, nl=False)
    run.write(f"ising_n{n}_cut{cut}.{fmt}", body)
    run.finish()


def _ising_options(f):
    for opt in reversed(
        [
            click.option("--n", "n", type=click.IntRange(2, 14), default=10, show_default=True),
            click.option("--gmin", type=float, default=-0.23, show_default=True),
            click.option("--gmax", type=float, default=0.22, show_default=True),
            click.option("--steps", type=click.IntRange(1, 10000), default=31, show_default=True),
            click.option("--cut", type=int, default=5, show_default=True),
            click.option("--bias", type=click.FloatRange(0, None), default=0.0, show_default=True),
            click.option("--format", "fmt", type=click.Choice(FORMATS_TABLE), default="csv", show_default=True),
            common_out,
            common_threads,
        ]
    ):
        f = opt(f)
    return f


@magic.command("ising")
@_ising_options
def magic_ising(**kw) -> None:
    """Transverse-field Ising magic scan (same as the top-level command)."""
    _ising_impl(**kw)


@cli.command("ising")
@_ising_options
def ising(**kw) -> None:
    """Transverse-field Ising magic scan over g = theta - pi/4."""
    _ising_impl(**kw)


# ---------------------------------------------------------------------------
# verify


@cli.group()
def verify() -> None:
    """Self-checks against closed forms."""


@verify.command("relations")
@common_out
def verify_rel(out: str | None) -> None:
    run = Run("verify relations", {}, out)
    results = verify_relations()
    lines = []
    for r in results:
        lines.append(f"{'pass' if r.passed else 'FAIL'} {r.relation.name}: {r.relation.left} = {r.relation.right}")
    body = "\n".join(lines) + "\n"
    click.echo(body, nl=False)
    names = {r.relation.name for r in results}
    click.echo(f"{len(set(CORE_RELATIONS) & names)} core identities checked")
    run.write("relations.txt", body)
    run.finish()
    if not all(r.passed for r in results):
        raise group_engine.GroupError("relation check failed")


@verify.command("orders")
@common_out
def verify_orders(out: str | None) -> None:
    run = Run("verify orders", {}, out)
    c1 = _load_table(["H1", "P1"], False)
    c1m = _load_table(["H1", "P1"], True)
    c2 = _load_table(list(ALPHABET), False)
    c2m = _load_table(list(ALPHABET), True)
    f1, f2 = group_engine.clifford_order_formula(1), group_engine.clifford_order_formula(2)
    ok = (c1.order, c1m.order, c2.order, c2m.order) == (
        f1.with_phase_order,
        f1.mod_phase_order,
        f2.with_phase_order,
        f2.mod_phase_order,
    )
    report = {
        "C1": [c1.order, c1m.order],
        "C2": [c2.order, c2m.order],
        "formula": {"C1": [f1.with_phase_order, f1.mod_phase_order], "C2": [f2.with_phase_order, f2.mod_phase_order]},
        "diversity_ratio": {str(n): group_engine.clifford_order_formula(n).ratio for n in range(1, 5)},
        "ok": ok,
    }
    body = _emit(report)
    click.echo(body, nl=False)
    run.write("orders.json", body)
    run.finish()
    if not ok:
        raise group_engine.GroupError("Clifford order mismatch")


# ---------------------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    """Run the CLI and map failures onto exit codes."""
    try:
        cli.main(args=argv, prog_name="stabatlas", standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return 2
    except click.Abort:
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except ValueError as exc:
        click.echo(f"Error: {exc}", err=True)
        return 2
    except Exception as exc:  # computation failures
        click.echo(f"Error: {type(exc).__name__}: {exc}", err=True)
        return 1
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    entry()
