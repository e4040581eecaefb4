"""Batch evaluation of family points driven by INI config files.

Configs are INI files. A single-family run uses a ``[family]`` section;
``compare`` uses exactly two ``[family.<name>]`` sections::

    [run]
    tol = 1e-9
    epsilon = 1e-12
    out = results.csv
    mode = bound            ; per-point evaluation for sweeps: bound | validate

    [family]
    family = ucs
    d = 2
    alpha = 2
    nu = 1

    [sweep]
    parameter = nu          ; any family parameter
    from = 0
    to = 8
    steps = 33
    spacing = linear        ; linear | log
    ; values = 1, 2, 4, 8   ; explicit points instead of from/to/steps
    ; match_n_total = 16    ; retune alpha at every point

    [compare]
    match = n_total         ; n_total | photon_budget
    anchor = gecs           ; family whose mean photon number is the target
"""

from __future__ import annotations

import configparser
import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .bounds import analyze, phase_crb, scheme_generators
from .errors import ConfigError, MultiphaseError, ResourceError, UnreachableTargetError
from .families import (
    Family,
    FamilySpec,
    PARAMETERS,
    crossover_nu,
    family_analytics,
    match_mean_photon,
    realize,
)
from .fock import DEFAULT_EPSILON
from .qfim import qfim_covariance, qfim_fd_oracle

COMMANDS = ("bound", "validate", "sweep", "compare")
DEFAULT_TOL = 1e-9
ORACLE_TOL = 1e-6
FD_STEP = 1e-4
DISCREPANCY_FLOOR = 1e-12

INPUT_COLUMNS = (
    "command",
    "label",
    "point",
    "family",
    "scheme",
    "d",
    "alpha",
    "nu",
    "gamma",
    "n_photons",
    "epsilon",
    "target_n_total",
    "tol",
)
OUTPUT_COLUMNS = (
    "n_total",
    "bound_analytic",
    "bound_oracle",
    "discrepancy",
    "mandel_q",
    "correlation_j",
    "route",
    "status",
)

OK = "ok"
TOLERANCE_FAILURE = "tolerance_failure"
RESOURCE_ERROR = "resource_error"

EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3


@dataclass
class SweepAxis:
    parameter: str
    values: list
    match_n_total: Optional[float] = None
    family: Optional[str] = None


@dataclass
class RunConfig:
    command: str
    families: dict[str, FamilySpec]
    tol: float = DEFAULT_TOL
    epsilon: float = DEFAULT_EPSILON
    out: Optional[str] = None
    mode: str = "bound"
    sweep: Optional[SweepAxis] = None
    match: str = "n_total"
    anchor: Optional[str] = None

    @property
    def family(self) -> FamilySpec:
        return next(iter(self.families.values()))


@dataclass
class ResultRow:
    inputs: dict
    n_total: Optional[float] = None
    bound_analytic: Optional[float] = None
    bound_oracle: Optional[float] = None
    discrepancy: Optional[float] = None
    mandel_q: Optional[float] = None
    correlation_j: Optional[float] = None
    route: str = ""
    status: str = OK
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == OK

    def as_dict(self) -> dict:
        out = {k: self.inputs.get(k) for k in INPUT_COLUMNS}
        out.update({k: getattr(self, k) for k in OUTPUT_COLUMNS})
        out.update(self.extra)
        return out


# config parsing

_INT_FIELDS = {"d", "n_photons"}


def _parse_value(name, raw):
    raw = raw.strip()
    try:
        if name == "alpha":
            return complex(raw.replace(" ", ""))
        if name == "gamma" and raw.lower() == "auto":
            return "auto"
        if name in _INT_FIELDS:
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        return float(raw)
    except ValueError:
        raise ConfigError(f"cannot parse {name} = {raw!r}", name) from None


def _family_from_section(section, epsilon, allow_missing_alpha=False) -> FamilySpec:
    if "family" not in section:
        raise ConfigError("family section lacks a 'family' key", "family")
    kwargs = {"family": section["family"].strip().lower(), "epsilon": epsilon}
    allowed = {"family", "d", "alpha", "nu", "gamma", "n_photons", "epsilon"}
    for key, raw in section.items():
        if key not in allowed:
            raise ConfigError(f"unknown family parameter {key!r}", key)
        if key != "family":
            kwargs[key] = _parse_value(key, raw)
    try:
        family = Family(kwargs["family"])
    except ValueError:
        raise ConfigError(f"unknown family {kwargs['family']!r}", "family") from None
    if allow_missing_alpha and "alpha" in PARAMETERS[family] and "alpha" not in kwargs:
        kwargs["alpha"] = 1.0
    return FamilySpec(**kwargs)


def _sweep_values(section):
    if "values" in section:
        try:
            values = [float(v) for v in section["values"].split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"cannot parse sweep values {section['values']!r}", "values") from None
        if not values:
            raise ConfigError("empty sweep values", "values")
        return values
    for key in ("from", "to", "steps"):
        if key not in section:
            raise ConfigError(f"sweep needs {key!r} (or 'values')", key)
    try:
        start, stop = float(section["from"]), float(section["to"])
        steps = int(section["steps"])
    except ValueError:
        raise ConfigError("sweep from/to/steps must be numeric", "sweep") from None
    spacing = section.get("spacing", "linear").strip().lower()
    if steps < 1:
        raise ConfigError("steps must be >= 1", "steps")
    if steps > 1 and not start < stop:
        raise ConfigError("sweep needs from < to", "from")
    if steps == 1:
        return [start]
    if spacing == "linear":
        return list(np.linspace(start, stop, steps))
    if spacing == "log":
        if start <= 0:
            raise ConfigError("log spacing needs from > 0", "from")
        return list(np.geomspace(start, stop, steps))
    raise ConfigError(f"unknown spacing {spacing!r}", "spacing")


def _coerce_axis_value(parameter, value):
    if parameter in _INT_FIELDS:
        if abs(value - round(value)) > 1e-9:
            raise ConfigError(f"sweep value {value!r} is not an integer {parameter}", parameter)
        return int(round(value))
    if parameter == "alpha":
        return complex(value)
    return float(value)


def parse_config(text: str, command: Optional[str] = None) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    run = parser["run"] if parser.has_section("run") else {}
    command = command or run.get("command", "").strip()
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}", "command")

    def number(key, default):
        if key not in run:
            return default
        try:
            return float(run[key])
        except ValueError:
            raise ConfigError(f"cannot parse {key} = {run[key]!r}", key) from None

    tol = number("tol", DEFAULT_TOL)
    epsilon = number("epsilon", DEFAULT_EPSILON)
    mode = run.get("mode", "bound").strip()
    if mode not in ("bound", "validate"):
        raise ConfigError(f"unknown mode {mode!r}", "mode")

    sweep_section = parser["sweep"] if parser.has_section("sweep") else None
    match_n_total = None
    if sweep_section is not None and "match_n_total" in sweep_section:
        match_n_total = _parse_value("match_n_total", sweep_section["match_n_total"])

    families = {}
    if command == "compare":
        names = [s for s in parser.sections() if s.startswith("family.")]
        if len(names) != 2:
            raise ConfigError(f"compare needs exactly two [family.<name>] sections, found {len(names)}", "family")
        for s in names:
            families[s.split(".", 1)[1]] = _family_from_section(parser[s], epsilon, allow_missing_alpha=True)
    else:
        if not parser.has_section("family"):
            raise ConfigError("missing [family] section", "family")
        families["main"] = _family_from_section(parser["family"], epsilon, allow_missing_alpha=match_n_total is not None)

    match, anchor = "n_total", None
    if command == "compare":
        cmp = parser["compare"] if parser.has_section("compare") else {}
        match = cmp.get("match", "n_total").strip()
        if match not in ("n_total", "photon_budget"):
            raise ConfigError(f"unknown match rule {match!r}", "match")
        anchor = cmp.get("anchor", "").strip() or list(families)[0]
        if anchor not in families:
            raise ConfigError(f"anchor {anchor!r} is not a defined family", "anchor")
        kinds = {f.family for f in families.values()}
        if match == "photon_budget" and kinds != {Family.GNS, Family.UNO}:
            raise ConfigError("photon_budget matching compares a gns and a uno family", "match")

    sweep = None
    if command == "sweep" and sweep_section is None:
        raise ConfigError("sweep command needs a [sweep] section", "sweep")
    if sweep_section is not None and command in ("sweep", "compare"):
        parameter = sweep_section.get("parameter", "").strip()
        target = sweep_section.get("family", "").strip() or None
        if target is not None and target not in families:
            raise ConfigError(f"sweep family {target!r} is not defined", "family")
        owner = families[target or _sweep_owner(list(families), anchor)]
        if parameter != "d" and parameter not in PARAMETERS[owner.family]:
            raise ConfigError(f"{owner.family.value} has no parameter {parameter!r} to sweep", "parameter")
        values = [_coerce_axis_value(parameter, v) for v in _sweep_values(sweep_section)]
        sweep = SweepAxis(parameter, values, match_n_total, target)

    return RunConfig(command, families, tol, epsilon, run.get("out"), mode, sweep, match, anchor)


def _sweep_owner(names, anchor):
    """Default family a compare sweep acts on: the one that is not the anchor."""
    if anchor is None or len(names) == 1:
        return names[0]
    return names[1] if names[0] == anchor else names[0]


def load_config(path: str, command: Optional[str] = None) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}", "config") from None
    return parse_config(text, command)


# evaluation


def _inputs(command, spec: FamilySpec, tol, label="", point=None, target=None):
    return {
        "command": command,
        "label": label,
        "point": point,
        "family": spec.family.value,
        "scheme": spec.scheme,
        "d": spec.d,
        "alpha": spec.alpha,
        "nu": spec.nu,
        "gamma": spec.gamma,
        "n_photons": spec.n_photons,
        "epsilon": spec.epsilon,
        "target_n_total": target,
        "tol": tol,
    }


def _error_status(exc):
    if isinstance(exc, ResourceError):
        return RESOURCE_ERROR
    if isinstance(exc, UnreachableTargetError):
        return "unreachable"
    return f"error:{type(exc).__name__}"


def run_bound(spec: FamilySpec, tol: float = DEFAULT_TOL, **echo) -> ResultRow:
    """Closed-form bound for one family point; nothing is built in Fock space."""
    row = ResultRow(_inputs("bound", spec, tol, **echo))
    try:
        a = family_analytics(spec)
    except MultiphaseError as exc:
        row.status = _error_status(exc)
        return row
    row.n_total = a.n_total
    row.bound_analytic = a.bound_exact
    row.mandel_q = a.mandel_q
    row.correlation_j = a.correlation_j
    row.route = "closed-form"
    return row


def run_validate(spec: FamilySpec, tol: float = DEFAULT_TOL, **echo) -> ResultRow:
    """Check the closed-form bound against the Fock-space QFIM of the realized state.

    ``bound_oracle`` is the per-phase CRB (worst phase) from inverting the
    covariance QFIM; the finite-difference QFIM must agree with it to
    ``ORACLE_TOL`` or the row is marked ``oracle_mismatch``. The difference
    step shrinks with the largest generator standard deviation so that
    bright states stay inside the central-difference accuracy window.
    """
    row = ResultRow(_inputs("validate", spec, tol, **echo))
    try:
        analytic = family_analytics(spec)
        state = realize(spec)
        gens = scheme_generators(spec.scheme, spec.d)
        f_cov = qfim_covariance(state, gens)
        # truncation error of the central difference grows like (step * spread)^2
        spread = math.sqrt(float(np.max(np.diag(f_cov.matrix)))) / 2
        f_fd = qfim_fd_oracle(state, gens, FD_STEP / max(1.0, spread))
        crb = phase_crb(f_cov, spec.scheme, spec.d)
        crb_fd = phase_crb(f_fd, spec.scheme, spec.d)
        report = analyze(state, spec.scheme, spec.d)
    except MultiphaseError as exc:
        row.status = _error_status(exc)
        return row
    errors = np.abs(crb - analytic.bound_exact)
    worst = int(np.argmax(errors))
    row.n_total = analytic.n_total
    row.bound_analytic = analytic.bound_exact
    row.bound_oracle = float(crb[worst])
    row.discrepancy = float(errors[worst] / max(analytic.bound_exact, DISCREPANCY_FLOOR))
    row.mandel_q = report.mandel_q
    row.correlation_j = report.correlation_j
    row.route = "matrix-inverse" if report.route == "closed-form" else "matrix-inverse(asymmetric)"
    fd_gap = float(np.max(np.abs(crb_fd - crb) / np.abs(crb)))
    if row.discrepancy > tol:
        row.status = TOLERANCE_FAILURE
    elif fd_gap > ORACLE_TOL:
        row.status = "oracle_mismatch"
    return row


def _evaluate(config: RunConfig, spec, **echo):
    if config.mode == "validate":
        return run_validate(spec, config.tol, **echo)
    return run_bound(spec, config.tol, **echo)


def _sweep_point(spec, axis: SweepAxis, value):
    spec = replace(spec, **{axis.parameter: value})
    if axis.match_n_total is not None:
        spec = match_mean_photon(spec, axis.match_n_total)
    return spec


def run_sweep(config: RunConfig) -> list[ResultRow]:
    """One row per axis point, in axis order; failing points become error rows."""
    axis = config.sweep
    base = config.family
    rows = []
    for k, value in enumerate(axis.values):
        try:
            spec = _sweep_point(base, axis, value)
        except MultiphaseError as exc:
            row = ResultRow(_inputs("sweep", base, config.tol, point=k, target=axis.match_n_total))
            row.inputs[axis.parameter] = value
            row.status = _error_status(exc)
            rows.append(row)
            continue
        row = _evaluate(config, spec, point=k, target=axis.match_n_total)
        row.inputs["command"] = "sweep"
        rows.append(row)
    return rows


def _verdict(rows, labels):
    bounds = [r.bound_analytic for r in rows]
    if any(b is None for b in bounds):
        return "undecided"
    if math.isclose(bounds[0], bounds[1], rel_tol=1e-12):
        return "tie"
    return labels[int(np.argmin(bounds))]


def uno_bound(n_photons: float, nu: float) -> float:
    """Per-phase imaging bound of an array of UNO probes, ``1/(4V)``; N may be fractional."""
    var = n_photons**2 * nu**2 / (1.0 + nu**2) ** 2
    if var <= 0:
        raise UnreachableTargetError("UNO variance vanishes")
    return 1.0 / (4.0 * var)


def _compare_n_total(config, specs, point=None):
    names = list(specs)
    anchor = config.anchor
    other = names[1] if names[0] == anchor else names[0]
    a_row = run_bound(specs[anchor], config.tol, label=anchor, point=point)
    a_row.inputs["command"] = "compare"

    def paired(b_row, verdict=None):
        ordered = [a_row, b_row] if names[0] == anchor else [b_row, a_row]
        verdict = verdict or _verdict(ordered, names)
        for r in ordered:
            r.extra["verdict"] = verdict
        return ordered

    if not a_row.ok:
        b_row = ResultRow(_inputs("compare", specs[other], config.tol, label=other, point=point))
        b_row.status = "error:anchor"
        return paired(b_row, "undecided")
    target = a_row.n_total
    try:
        matched = match_mean_photon(specs[other], target)
    except MultiphaseError as exc:
        b_row = ResultRow(_inputs("compare", specs[other], config.tol, label=other, point=point, target=target))
        b_row.status = _error_status(exc)
        return paired(b_row, "undecided")
    b_row = run_bound(matched, config.tol, label=other, point=point, target=target)
    b_row.inputs["command"] = "compare"
    return paired(b_row)


def _compare_photon_budget(config, specs, point=None):
    names = list(specs)
    gns_name = next(n for n in names if specs[n].family is Family.GNS)
    uno_name = next(n for n in names if specs[n].family is Family.UNO)
    gns, uno = specs[gns_name], specs[uno_name]
    if gns.d != uno.d:
        raise ConfigError("gns and uno must share d", "d")
    g_row = run_bound(gns, config.tol, label=gns_name, point=point)
    same_n = replace(uno, n_photons=gns.n_photons)
    u_row = run_bound(same_n, config.tol, label=f"{uno_name}[equal_n]", point=point)
    # equal mean photon number over the d probe modes, N allowed to be fractional
    n_equal = gns.n_photons * (1.0 + uno.nu**2) / uno.d
    t_row = ResultRow(_inputs("compare", same_n, config.tol, label=f"{uno_name}[equal_n_total]", point=point, target=float(gns.n_photons)))
    t_row.inputs["n_photons"] = n_equal
    try:
        t_row.bound_analytic = uno_bound(n_equal, uno.nu)
        p = 1.0 / (1.0 + uno.nu**2)
        t_row.n_total = float(gns.n_photons)
        t_row.mandel_q = n_equal * (1 - p) - 1
        t_row.correlation_j = 0.0
        t_row.route = "closed-form"
    except MultiphaseError as exc:
        t_row.status = _error_status(exc)
    rows = [g_row, u_row, t_row]
    for r in rows:
        r.inputs["command"] = "compare"
    v_n = _verdict([g_row, u_row], [gns_name, uno_name])
    v_total = _verdict([g_row, t_row], [gns_name, uno_name])
    for r in rows:
        r.extra["verdict_equal_n"] = v_n
        r.extra["verdict_equal_n_total"] = v_total
    return rows


def run_compare(config: RunConfig) -> list[ResultRow]:
    """Paired rows for two families under a matching rule, plus verdict columns."""
    compare = _compare_photon_budget if config.match == "photon_budget" else _compare_n_total
    if config.sweep is None:
        return compare(config, config.families)
    axis = config.sweep
    owner = axis.family or _sweep_owner(list(config.families), config.anchor)
    # d is shared by both sides of a photon-budget comparison
    targets = list(config.families) if config.match == "photon_budget" and axis.parameter == "d" else [owner]
    rows = []
    for k, value in enumerate(axis.values):
        specs = dict(config.families)
        try:
            for name in targets:
                specs[name] = replace(specs[name], **{axis.parameter: value})
        except ConfigError as exc:
            row = ResultRow(_inputs("compare", specs[owner], config.tol, label=owner, point=k))
            row.status = _error_status(exc)
            rows.append(row)
            continue
        rows.extend(compare(config, specs, point=k))
    return rows


def header_notes(config: RunConfig) -> list[str]:
    kinds = {s.family for s in config.families.values()}
    if config.command == "compare" and kinds == {Family.UCS, Family.GECS}:
        d = config.family.d
        return [f"crossover_nu={crossover_nu(d)!r} (d={d})"]
    return []


def run(config: RunConfig) -> list[ResultRow]:
    if config.command == "bound":
        return [run_bound(config.family, config.tol)]
    if config.command == "validate":
        return [run_validate(config.family, config.tol)]
    if config.command == "sweep":
        return run_sweep(config)
    return run_compare(config)


def exit_code(rows: list[ResultRow]) -> int:
    if any(r.status == RESOURCE_ERROR for r in rows):
        return EXIT_RESOURCE
    if any(not r.ok for r in rows):
        return EXIT_TOLERANCE
    return EXIT_OK


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, complex):
        return repr(value.real) if value.imag == 0 else repr(value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def format_csv(rows: list[ResultRow], notes: list[str] = ()) -> str:
    """CSV text with shortest round-trip floats; ``notes`` become leading ``#`` lines."""
    columns = list(INPUT_COLUMNS) + list(OUTPUT_COLUMNS)
    for r in rows:
        for k in r.extra:
            if k not in columns:
                columns.append(k)
    buf = io.StringIO()
    for note in notes:
        buf.write(f"# {note}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        d = r.as_dict()
        writer.writerow([_fmt(d.get(c)) for c in columns])
    return buf.getvalue()
