"""Command-line front end.

Configuration comes from an optional key=value file (``--config``) and from
flags; flags win.  Exit codes: 0 every check passed, 1 a check failed,
2 usage error.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, fields

import numpy as np

from .core_model import (
    DomainError,
    EntangleError,
    QuantumNumbers,
    SystemParams,
    make_grid,
    make_system,
)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _choice(*options):
    def convert(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text

    return convert


def _positive(text):
    value = float(text)
    if not (value > 0 and math.isfinite(value)):
        raise ValueError("expected a positive number")
    return value


def _finite(text):
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("expected a finite number")
    return value


def _floats(text):
    return tuple(_finite(p) for p in text.split(",") if p.strip())


def _triple(text):
    values = _floats(text)
    if len(values) != 3:
        raise ValueError("expected three comma-separated numbers")
    return values


def _quantum(text):
    if len([p for p in text.split(",") if p.strip()]) != 3:
        raise ValueError("expected three comma-separated integers l1,l2,l3")
    return QuantumNumbers.parse(text).as_tuple()


def _int_choice(*options):
    def convert(text):
        value = int(text)
        if value not in options:
            raise ValueError(f"expected one of {', '.join(map(str, options))}")
        return value

    return convert


def _count(text):
    value = int(text)
    if not 1 <= value <= 12:
        raise ValueError("expected an integer from 1 to 12")
    return value


def _extent_or_auto(text):
    return "auto" if text == "auto" else _positive(text)


def _energy_list(text):
    values = _floats(text)
    if not values:
        raise ValueError("expected at least one energy")
    return values


# key: (converter, default, help)
CONFIG_KEYS = {
    "m1": (_positive, "2.0", "mass of particle 1 (natural units: 2)"),
    "m2": (_positive, "2.0", "mass of particle 2 (natural units: 2)"),
    "hbar": (_positive, "1.0", "reduced Planck constant"),
    "omega": (_positive, "1.0", "oscillator angular frequency"),
    "l": (_quantum, "0,0,0", "oscillator quantum numbers l1,l2,l3"),
    "ref": (_choice("ground", "numeric"), "ground", "reference state: closed-form ground or oracle ground"),
    "potential": (_choice("oscillator", "quartic", "file"), "oscillator", "relative potential"),
    "potential_file": (str, "", "two-column CSV (x, v) used with potential=file"),
    "quartic_strength": (_positive, "1.0", "c in v = c x^4 for potential=quartic"),
    "h": (_positive, "0.05", "grid spacing"),
    "extent": (_positive, "8.0", "grid half-width"),
    "order": (_int_choice(2, 4), "4", "central-difference order (2 or 4)"),
    "suite": (str, "oscillator-core", "check suite for verify"),
    "tau_normalization": (_choice("keep", "drop"), "keep", "keep or drop the peak of ln|Psi'| in tau"),
    "log_derivative": (_choice("sampled", "closed"), "sampled", "reference log-derivative: stencil or closed form"),
    "out": (str, "", "output path (stdout when empty)"),
    "format": (_choice("csv", "json"), "csv", "report format"),
    "inject_energy_error": (_finite, "0.0", "shift E_n by this many hbar*omega (proves checks can fail)"),
    "tol_closed": (_positive, "1e-06", "tolerance for closed-form checks"),
    "tol_oracle": (_positive, "0.0001", "tolerance for oracle-backed checks"),
    "tol_exact": (_positive, "1e-08", "tolerance for exact-identity checks"),
    "com_momentum": (_triple, "0,0,0", "center-of-mass momentum P for the com check"),
    "oracle_h": (_positive, "0.01", "oracle grid spacing"),
    "oracle_extent": (_extent_or_auto, "auto", "oracle grid half-width, or auto"),
    "states": (_count, "3", "number of oracle eigenpairs (at most 12)"),
    "dim": (_int_choice(1, 2, 3), "1", "grid dimension for map"),
    "energy": (_energy_list, "", "map energy E, or comma-separated energies for cr-check"),
}


@dataclass(frozen=True)
class RunConfig:
    m1: float
    m2: float
    hbar: float
    omega: float
    l: tuple
    ref: str
    potential: str
    potential_file: str
    quartic_strength: float
    h: float
    extent: float
    order: int
    suite: str
    tau_normalization: str
    log_derivative: str
    out: str
    format: str
    inject_energy_error: float
    tol_closed: float
    tol_oracle: float
    tol_exact: float
    com_momentum: tuple
    oracle_h: float
    oracle_extent: object
    states: int
    dim: int
    energy: tuple

    @property
    def params(self) -> SystemParams:
        return make_system(self.m1, self.m2, self.hbar, self.omega)


assert tuple(f.name for f in fields(RunConfig)) == tuple(CONFIG_KEYS)


def read_config_text(text: str) -> dict[str, str]:
    """Flat key=value lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def parse_config(file_text: str = "", flags: dict[str, str] | None = None, command: str = "verify") -> RunConfig:
    """Merge file values and flag values (flags win) into a validated RunConfig."""
    raw = {k: spec[1] for k, spec in CONFIG_KEYS.items()}
    raw.update(read_config_text(file_text))
    for key, value in (flags or {}).items():
        if key not in CONFIG_KEYS:
            raise UsageError(f"unknown key {key!r}")
        if value is not None:
            raw[key] = value
    values = {}
    for key, (convert, _, _) in CONFIG_KEYS.items():
        text = str(raw[key]).strip()
        if key == "energy" and not text:
            values[key] = ()
            continue
        try:
            values[key] = convert(text)
        except (ValueError, DomainError) as exc:
            raise UsageError(f"bad value for {key}: {text!r} ({exc})") from None
    config = RunConfig(**values)
    _check_contradictions(config, command)
    return config


def _check_contradictions(config: RunConfig, command: str):
    if config.potential == "file" and not config.potential_file:
        raise UsageError("potential=file needs potential_file")
    if config.potential_file and config.potential != "file":
        raise UsageError(f"potential_file given but potential={config.potential}")
    if (command == "verify" and config.suite in ("oscillator-core", "oscillator-spectrum")
            and config.potential != "oscillator"):
        raise UsageError(f"suite {config.suite} needs potential=oscillator, got {config.potential}")
    try:
        make_grid(config.extent, config.h)
    except DomainError as exc:
        raise UsageError(f"bad grid: {exc}") from None


def suite_config(config: RunConfig):
    from .residuals import SuiteConfig

    table = _load_potential_table(config.potential_file) if config.potential == "file" else None
    return SuiteConfig(
        suite=config.suite,
        params=config.params,
        l=config.l,
        ref=config.ref,
        potential=config.potential,
        potential_table=table,
        quartic_strength=config.quartic_strength,
        h=config.h,
        extent=config.extent,
        order=config.order,
        tau_normalization=config.tau_normalization,
        log_derivative=config.log_derivative,
        inject_energy_error=config.inject_energy_error,
        tol_closed=config.tol_closed,
        tol_oracle=config.tol_oracle,
        tol_exact=config.tol_exact,
        com_momentum=config.com_momentum,
        oracle_h=config.oracle_h,
        oracle_states=config.states,
    )


def _load_potential_table(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read potential file {path!r}: {exc.strerror}") from None
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        try:
            if len(parts) != 2:
                raise ValueError
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError:
            if rows or lineno > 1:
                raise UsageError(f"{path}:{lineno}: expected two numeric columns x,v") from None
            # a header line is allowed
    if len(rows) < 2:
        raise UsageError(f"potential file {path!r} needs at least two rows")
    x, v = zip(*rows)
    return tuple(x), tuple(v)


def _potential(config: RunConfig, dim: int = 1):
    from .residuals import oscillator_potential, quartic_potential, tabulated_potential

    if config.potential == "oscillator":
        return oscillator_potential(config.params, dim)
    if config.potential == "quartic":
        return quartic_potential(config.quartic_strength, dim)
    return tabulated_potential(*_load_potential_table(config.potential_file), dim=dim, description="file")


# ---------------------------------------------------------------------------
# subcommands


def _emit_table(out, header, rows, fmt, extra=None):
    if fmt == "json":
        doc = {"rows": [dict(zip(header, r)) for r in rows]}
        doc.update(extra or {})
        json.dump(doc, out, indent=2, sort_keys=True)
        out.write("\n")
    else:
        import csv

        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def cmd_verify(config: RunConfig, out) -> int:
    from .residuals import aggregate_pass, run_suite, write_reports_csv, write_reports_json

    try:
        reports = run_suite(suite_config(config))
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if config.format == "json":
        write_reports_json(out, reports, config.params)
    else:
        write_reports_csv(out, reports)
    return EXIT_PASS if aggregate_pass(reports) else EXIT_FAIL


def _reference(config: RunConfig, dim: int):
    from .oscillator import ground_state

    if config.ref == "ground":
        return ground_state(config.params, dim)
    from .residuals import _core_reference

    ref, _ = _core_reference(suite_config(config), dim)
    return ref


def cmd_map(config: RunConfig, out) -> int:
    from .entangle_map import write_tau_csv

    ref = _reference(config, config.dim)
    energy = config.energy[0] if config.energy else ref.energy_m
    grid = make_grid(config.extent, config.h, config.dim)
    write_tau_csv(out, ref, energy, grid, config.tau_normalization)
    return EXIT_PASS


def cmd_ladder(config: RunConfig, out) -> int:
    from .diffcalc import ladder_apply
    from .oscillator import eigenstate, ground_state

    params = config.params
    grid = make_grid(config.extent, config.h, 3)
    ref = ground_state(params)
    state = eigenstate(config.l, params)
    rows = []
    ok = True
    for axis in (1, 2, 3):
        li = config.l[axis - 1]
        for direction in ("lower", "raise"):
            res = ladder_apply(state, ref, axis, direction, params, grid, config.order, config.log_derivative)
            expected = math.sqrt(li) if direction == "lower" else math.sqrt(li + 1)
            if res.target is None:
                error, tol = res.orthogonal_residual, config.tol_exact
            else:
                error, tol = abs(res.coefficient - expected), config.tol_closed
            passed = error <= tol
            ok &= passed
            target = res.target.label if res.target is not None else "0"
            rows.append([str(axis), direction, state.label, target, repr(res.coefficient), repr(expected),
                         repr(error), repr(res.orthogonal_residual), "true" if passed else "false"])
    header = ["axis", "direction", "state", "target", "coefficient", "expected", "error",
              "orthogonal_residual", "pass"]
    _emit_table(out, header, rows, config.format, {"aggregate_pass": ok})
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_solve(config: RunConfig, out) -> int:
    from .spectral_oracle import auto_extent, solve_1d, write_eigenpairs_csv

    params = config.params
    potential = _potential(config, 1)
    v = potential.axes[0]
    extent = config.oracle_extent
    if extent == "auto":
        rough_grid = make_grid(10.0, 0.05)
        rough = solve_1d(v(rough_grid.axis(0)), rough_grid, params, config.states, refine=False)
        extent = auto_extent(v, params, rough[-1].energy)
        extent = math.ceil(extent / (4 * config.oracle_h)) * 4 * config.oracle_h
    try:
        grid = make_grid(round(extent, 10), config.oracle_h)
    except DomainError as exc:
        raise UsageError(f"bad oracle grid: {exc}") from None
    pairs = solve_1d(v(grid.axis(0)), grid, params, config.states)
    ok = all(p.node_count == p.index for p in pairs) and all(
        b.energy > a.energy for a, b in zip(pairs, pairs[1:]))
    if config.format == "json":
        doc = {
            "aggregate_pass": ok,
            "params": params.summary(),
            "grid": grid.summary(),
            "states": [{"index": p.index, "energy": p.energy, "raw_energy": p.raw_energy,
                        "node_count": p.node_count, "psi": p.wavefunction.tolist()} for p in pairs],
            "x": grid.axis(0).tolist(),
        }
        json.dump(doc, out, indent=2, sort_keys=True)
        out.write("\n")
    else:
        write_eigenpairs_csv(out, pairs)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_cr_check(config: RunConfig, out) -> int:
    from .diffcalc import cr_pair_residual, cr_residual, probe_rectangle
    from .oscillator import energy_of
    from .residuals import aggregate_pass, write_reports_csv, write_reports_json

    energies = config.energy or (energy_of(sum(config.l), config.params),)
    reports = []
    for E in energies:
        probe = probe_rectangle(lambda s, E=E: np.exp(-1j * E * s / config.hbar))
        reports.append(cr_residual(probe, config.order, config.tol_exact, name=f"cr_laplace[E={E!r}]"))
        reports.append(cr_pair_residual(probe, config.order, config.tol_exact, name=f"cr_pair[E={E!r}]"))
    if config.format == "json":
        write_reports_json(out, reports, config.params)
    else:
        write_reports_csv(out, reports)
    return EXIT_PASS if aggregate_pass(reports) else EXIT_FAIL


COMMANDS = {
    "verify": (cmd_verify, "run a check suite and write the report"),
    "map": (cmd_map, "export the tau field of the entangling map as CSV"),
    "ladder": (cmd_ladder, "print the ladder-coefficient table for the state l"),
    "solve": (cmd_solve, "run the 1D spectral oracle and export eigenpairs"),
    "cr-check": (cmd_cr_check, "holomorphy probe of exp(-i E s / hbar)"),
}


def _keys_help() -> str:
    lines = ["config keys (file: key=value, flag: --key-name):"]
    for key, (_, default, text) in CONFIG_KEYS.items():
        shown = default if default else "(none)"
        lines.append(f"  {key:<20} {text} [default {shown}]")
    return "\n".join(lines)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="entangle-verify",
        description="Numerical checks of the entangled-coordinate form of the two-body Schrodinger equation.",
        epilog=_keys_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(COMMANDS) + "}")
    for name, (_, text) in COMMANDS.items():
        p = sub.add_parser(name, help=text, description=text, epilog=_keys_help(),
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", help="key=value config file; flags override it")
        for key, (_, _, help_text) in CONFIG_KEYS.items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, default=None, help=help_text)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            # --help exits 0 through argparse
            return int(exc.code or 0)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        file_text = ""
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    file_text = fh.read()
            except OSError as exc:
                raise UsageError(f"cannot read config {args.config!r}: {exc.strerror}") from None
        flags = {k: getattr(args, k) for k in CONFIG_KEYS}
        config = parse_config(file_text, flags, args.command)
        handler = COMMANDS[args.command][0]
        # the report is assembled in memory and written once
        buffer = io.StringIO()
        code = handler(config, buffer)
        if config.out:
            with open(config.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(buffer.getvalue())
        else:
            sys.stdout.write(buffer.getvalue())
        return code
    except UsageError as exc:
        print(f"entangle-verify: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EntangleError as exc:
        print(f"entangle-verify: error: {exc}", file=sys.stderr)
        return EXIT_FAIL
