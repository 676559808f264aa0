"""Simulation decks: parsing, validation, canonical dumps.

A deck is a YAML document with a fixed tree of sections (device,
statistics, flux_scheme, recombination, stepper, output, seed).  The
parser validates the whole tree before constructing anything heavy and
reports every problem it finds in one ConfigError, each prefixed with
the dotted path of the offending field.  Unknown keys are hard errors
and name the nearest valid spelling, so a typo like "mobilty" surfaces
at parse time instead of silently defaulting the physics.

parse_config and dump_config are inverses up to canonicalization:
dumping a parsed deck and parsing the dump reproduces the same
normalized tree, which makes deck files diffable and lets tests pin
configs byte for byte.
"""

from __future__ import annotations

import dataclasses
import difflib
from dataclasses import dataclass, field

import numpy as np
import yaml

from .device import (BoxDoping, Contact, DeviceSpec, DopingProfile,
                     InterfaceSpec, MaterialRegion, RobinSegment,
                     SheetDoping, SurfaceSegment, validate_device)
from .errors import ConfigError, DomainError
from .operators import FluxScheme
from .recombination import (Auger, Avalanche, MassAction, ShockleyReadHall,
                            SurfaceSRH)
from .statistics import StatisticsModel, boltzmann, fermi_dirac_half
from .transient import SimulationModels, TimeStepperConfig

__all__ = [
    "OutputSink", "SimulationConfig", "parse_config", "load_config",
    "dump_config", "build_statistics", "build_models",
]

_STATISTICS = ("boltzmann", "fermi_dirac_half")
_BULK_MODELS = {
    "mass_action": MassAction,
    "shockley_read_hall": ShockleyReadHall,
    "auger": Auger,
    "avalanche": Avalanche,
}
_SURFACE_MODELS = {
    "surface_srh": SurfaceSRH,
}
_SINK_KINDS = ("snapshot", "series", "probe", "report")


@dataclass(frozen=True)
class OutputSink:
    """One declared output file.

    snapshot: final fields over the mesh, one row per cell.
    series:   one row per accepted step (time, step diagnostics,
              terminal current per contact).
    probe:    fields at the cell nearest ``position``, one row per step.
    report:   JSON run summary; carries the blow-up record when the
              integration ends early.
    """
    kind: str
    path: str
    position: tuple[float, ...] | None = None


@dataclass(frozen=True)
class SimulationConfig:
    device: DeviceSpec
    statistics: tuple[str, str] = ("boltzmann", "boltzmann")
    flux_scheme: str = "scharfetter_gummel"
    recombination: tuple = ()
    stepper: TimeStepperConfig = field(
        default_factory=lambda: TimeStepperConfig(dt_init=0.01, t_end=1.0))
    output: tuple[OutputSink, ...] = ()
    seed: int = 0


def build_statistics(name: str) -> StatisticsModel:
    if name == "boltzmann":
        return boltzmann()
    if name == "fermi_dirac_half":
        return fermi_dirac_half()
    raise DomainError(f"unknown statistics {name!r}")


def build_models(config: SimulationConfig) -> SimulationModels:
    """Instantiate the solver-facing model bundle for a parsed deck."""
    return SimulationModels(
        stats=(build_statistics(config.statistics[0]),
               build_statistics(config.statistics[1])),
        scheme=FluxScheme(config.flux_scheme),
        bulk=config.recombination,
    )


# ---------------------------------------------------------------------------
# validation helpers: every check appends "path: message" and returns a
# safe fallback so the walk can continue and report everything at once

def _suggest(key: str, allowed) -> str:
    names = sorted(str(a) for a in allowed)
    close = difflib.get_close_matches(key, names, n=1, cutoff=0.4)
    if close:
        return f" (did you mean {close[0]!r}?)"
    return f" (valid keys: {', '.join(names)})"


def _check_keys(node: dict, allowed, path: str, problems: list) -> None:
    for key in node:
        if key not in allowed:
            problems.append(
                f"{path}.{key}: unknown key{_suggest(str(key), allowed)}")


def _mapping(node, path: str, problems: list) -> dict:
    if node is None:
        return {}
    if not isinstance(node, dict):
        problems.append(f"{path}: expected a mapping, got {type(node).__name__}")
        return {}
    return node


def _sequence(node, path: str, problems: list) -> list:
    if node is None:
        return []
    if not isinstance(node, list):
        problems.append(f"{path}: expected a list, got {type(node).__name__}")
        return []
    return node


def _float(node, path: str, problems: list, default: float = 0.0) -> float:
    if isinstance(node, (int, float)) and not isinstance(node, bool):
        return float(node)
    problems.append(f"{path}: expected a number, got {node!r}")
    return default


def _int(node, path: str, problems: list, default: int = 0) -> int:
    if isinstance(node, int) and not isinstance(node, bool):
        return node
    problems.append(f"{path}: expected an integer, got {node!r}")
    return default


def _str_choice(node, choices, path: str, problems: list) -> str:
    if isinstance(node, str) and node in choices:
        return node
    if isinstance(node, str):
        problems.append(f"{path}: unknown value {node!r}"
                        f"{_suggest(node, choices)}")
    else:
        problems.append(f"{path}: expected one of {sorted(choices)}")
    return next(iter(choices))


def _series(node, path: str, problems: list):
    """A contact value: scalar, or [[t, v], ...] with increasing t."""
    if isinstance(node, (int, float)) and not isinstance(node, bool):
        return float(node)
    if isinstance(node, list):
        pairs = []
        for i, entry in enumerate(node):
            if (not isinstance(entry, list) or len(entry) != 2
                    or not all(isinstance(x, (int, float))
                               and not isinstance(x, bool) for x in entry)):
                problems.append(f"{path}[{i}]: expected a [time, value] pair")
                return 0.0
            pairs.append((float(entry[0]), float(entry[1])))
        if not pairs:
            problems.append(f"{path}: empty time series")
            return 0.0
        times = [t for t, _ in pairs]
        if any(b <= a for a, b in zip(times, times[1:])):
            problems.append(f"{path}: times must be strictly increasing")
        return tuple(pairs)
    problems.append(f"{path}: expected a number or a [[t, v], ...] series")
    return 0.0


def _span(node, path: str, problems: list):
    if node is None:
        return None
    if (isinstance(node, list) and len(node) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool)
                    for x in node)):
        return (float(node[0]), float(node[1]))
    problems.append(f"{path}: expected [low, high]")
    return None


def _axis_value(node, path: str, problems: list):
    """A per-axis coefficient: scalar or a list of scalars."""
    if isinstance(node, (int, float)) and not isinstance(node, bool):
        return float(node)
    if isinstance(node, list) and node and all(
            isinstance(x, (int, float)) and not isinstance(x, bool)
            for x in node):
        return tuple(float(x) for x in node)
    problems.append(f"{path}: expected a number or a list of numbers")
    return 1.0


def _model_instance(node, registry, path: str, problems: list):
    node = _mapping(node, path, problems)
    if not node:
        return None
    kind = node.get("type")
    if kind not in registry:
        known = sorted(registry)
        if isinstance(kind, str):
            problems.append(f"{path}.type: unknown model {kind!r}"
                            f"{_suggest(kind, known)}")
        else:
            problems.append(f"{path}.type: required, one of {known}")
        return None
    cls = registry[kind]
    names = [f.name for f in dataclasses.fields(cls)]
    _check_keys(node, set(names) | {"type"}, path, problems)
    kwargs = {}
    for name in names:
        if name in node:
            kwargs[name] = _float(node[name], f"{path}.{name}", problems)
    try:
        return cls(**kwargs)
    except DomainError as exc:
        problems.append(f"{path}: {exc}")
        return None


# ---------------------------------------------------------------------------
# section parsers

_REGION_KEYS = ("name", "bounds", "eps", "mu1", "mu2")
_CONTACT_KEYS = ("side", "phi", "Phi1", "Phi2", "bias", "span")
_ROBIN_KEYS = ("side", "eps_gamma", "phi_gamma", "span")
_SURFACE_KEYS = ("side", "model", "span")
_INTERFACE_KEYS = ("axis", "position", "model", "span")
_DEVICE_KEYS = ("dimension", "extent", "resolution", "regions", "contacts",
                "robin", "surfaces", "interfaces", "doping")
_DOPING_KEYS = ("boxes", "sheets")
_TOP_KEYS = ("device", "statistics", "flux_scheme", "recombination",
             "stepper", "output", "seed")
_STEPPER_KEYS = tuple(f.name for f in dataclasses.fields(TimeStepperConfig))
_SINK_KEYS = ("kind", "path", "position")


def _parse_bounds(node, dim: int, path: str, problems: list):
    seq = _sequence(node, path, problems)
    out = []
    for i, entry in enumerate(seq):
        span = _span(entry, f"{path}[{i}]", problems)
        out.append(span if span is not None else (0.0, 0.0))
    if len(out) != dim:
        problems.append(f"{path}: expected {dim} spans, got {len(out)}")
        out = tuple([(0.0, 0.0)] * dim)
    return tuple(out)


def _parse_device(node, problems: list) -> DeviceSpec | None:
    node = _mapping(node, "device", problems)
    if not node:
        problems.append("device: section is required")
        return None
    _check_keys(node, _DEVICE_KEYS, "device", problems)
    dim = _int(node.get("dimension"), "device.dimension", problems, default=1)
    if dim not in (1, 2):
        problems.append(f"device.dimension: must be 1 or 2, got {dim}")
        dim = 1
    extent = tuple(_float(x, f"device.extent[{i}]", problems, default=1.0)
                   for i, x in enumerate(
                       _sequence(node.get("extent"), "device.extent",
                                 problems)))
    resolution = tuple(_int(x, f"device.resolution[{i}]", problems, default=2)
                       for i, x in enumerate(
                           _sequence(node.get("resolution"),
                                     "device.resolution", problems)))
    if len(extent) != dim:
        problems.append(f"device.extent: expected {dim} entries")
    if len(resolution) != dim:
        problems.append(f"device.resolution: expected {dim} entries")

    regions = []
    for i, raw in enumerate(_sequence(node.get("regions"), "device.regions",
                                      problems)):
        path = f"device.regions[{i}]"
        raw = _mapping(raw, path, problems)
        _check_keys(raw, _REGION_KEYS, path, problems)
        name = raw.get("name")
        if not isinstance(name, str) or not name:
            problems.append(f"{path}.name: required nonempty string")
            name = f"region{i}"
        regions.append(MaterialRegion(
            name=name,
            bounds=_parse_bounds(raw.get("bounds"), dim, f"{path}.bounds",
                                 problems),
            eps=_axis_value(raw.get("eps", 1.0), f"{path}.eps", problems),
            mu1=_axis_value(raw.get("mu1", 1.0), f"{path}.mu1", problems),
            mu2=_axis_value(raw.get("mu2", 1.0), f"{path}.mu2", problems)))

    contacts = []
    for i, raw in enumerate(_sequence(node.get("contacts"), "device.contacts",
                                      problems)):
        path = f"device.contacts[{i}]"
        raw = _mapping(raw, path, problems)
        _check_keys(raw, _CONTACT_KEYS, path, problems)
        contacts.append(Contact(
            side=str(raw.get("side", "")),
            phi=_series(raw.get("phi", 0.0), f"{path}.phi", problems),
            Phi1=_series(raw.get("Phi1", 0.0), f"{path}.Phi1", problems),
            Phi2=_series(raw.get("Phi2", 0.0), f"{path}.Phi2", problems),
            bias=_series(raw.get("bias", 0.0), f"{path}.bias", problems),
            span=_span(raw.get("span"), f"{path}.span", problems)))

    robin = []
    for i, raw in enumerate(_sequence(node.get("robin"), "device.robin",
                                      problems)):
        path = f"device.robin[{i}]"
        raw = _mapping(raw, path, problems)
        _check_keys(raw, _ROBIN_KEYS, path, problems)
        robin.append(RobinSegment(
            side=str(raw.get("side", "")),
            eps_gamma=_float(raw.get("eps_gamma"), f"{path}.eps_gamma",
                             problems),
            phi_gamma=_series(raw.get("phi_gamma", 0.0), f"{path}.phi_gamma",
                              problems),
            span=_span(raw.get("span"), f"{path}.span", problems)))

    surfaces = []
    for i, raw in enumerate(_sequence(node.get("surfaces"), "device.surfaces",
                                      problems)):
        path = f"device.surfaces[{i}]"
        raw = _mapping(raw, path, problems)
        _check_keys(raw, _SURFACE_KEYS, path, problems)
        model = None
        if raw.get("model") is not None:
            model = _model_instance(raw["model"], _SURFACE_MODELS,
                                    f"{path}.model", problems)
        surfaces.append(SurfaceSegment(
            side=str(raw.get("side", "")), model=model,
            span=_span(raw.get("span"), f"{path}.span", problems)))

    interfaces = []
    for i, raw in enumerate(_sequence(node.get("interfaces"),
                                      "device.interfaces", problems)):
        path = f"device.interfaces[{i}]"
        raw = _mapping(raw, path, problems)
        _check_keys(raw, _INTERFACE_KEYS, path, problems)
        model = None
        if raw.get("model") is not None:
            model = _model_instance(raw["model"], _SURFACE_MODELS,
                                    f"{path}.model", problems)
        interfaces.append(InterfaceSpec(
            axis=_int(raw.get("axis", 0), f"{path}.axis", problems),
            position=_float(raw.get("position"), f"{path}.position",
                            problems),
            model=model,
            span=_span(raw.get("span"), f"{path}.span", problems)))

    doping_node = _mapping(node.get("doping"), "device.doping", problems)
    _check_keys(doping_node, _DOPING_KEYS, "device.doping", problems)
    boxes = []
    for i, raw in enumerate(_sequence(doping_node.get("boxes"),
                                      "device.doping.boxes", problems)):
        path = f"device.doping.boxes[{i}]"
        raw = _mapping(raw, path, problems)
        _check_keys(raw, ("bounds", "value"), path, problems)
        boxes.append(BoxDoping(
            bounds=_parse_bounds(raw.get("bounds"), dim, f"{path}.bounds",
                                 problems),
            value=_float(raw.get("value"), f"{path}.value", problems)))
    sheets = []
    for i, raw in enumerate(_sequence(doping_node.get("sheets"),
                                      "device.doping.sheets", problems)):
        path = f"device.doping.sheets[{i}]"
        raw = _mapping(raw, path, problems)
        _check_keys(raw, ("axis", "position", "density"), path, problems)
        sheets.append(SheetDoping(
            axis=_int(raw.get("axis", 0), f"{path}.axis", problems),
            position=_float(raw.get("position"), f"{path}.position",
                            problems),
            density=_float(raw.get("density"), f"{path}.density", problems)))

    if problems:
        return None
    return DeviceSpec(
        dimension=dim, extent=extent, resolution=resolution,
        regions=tuple(regions), contacts=tuple(contacts), robin=tuple(robin),
        surfaces=tuple(surfaces), interfaces=tuple(interfaces),
        doping=DopingProfile(bulk=tuple(boxes), sheets=tuple(sheets)))


def _parse_statistics(node, problems: list) -> tuple[str, str]:
    if node is None:
        return ("boltzmann", "boltzmann")
    if isinstance(node, str):
        name = _str_choice(node, _STATISTICS, "statistics", problems)
        return (name, name)
    node = _mapping(node, "statistics", problems)
    _check_keys(node, ("carrier1", "carrier2"), "statistics", problems)
    return (
        _str_choice(node.get("carrier1", "boltzmann"), _STATISTICS,
                    "statistics.carrier1", problems),
        _str_choice(node.get("carrier2", "boltzmann"), _STATISTICS,
                    "statistics.carrier2", problems))


def _parse_stepper(node, problems: list) -> TimeStepperConfig:
    node = _mapping(node, "stepper", problems)
    if not node:
        problems.append("stepper: section is required (dt_init, t_end)")
        return TimeStepperConfig(dt_init=0.01, t_end=1.0)
    _check_keys(node, _STEPPER_KEYS, "stepper", problems)
    kwargs = {}
    for name in _STEPPER_KEYS:
        if name not in node:
            continue
        if name in ("gummel_max_iter", "blowup_window"):
            kwargs[name] = _int(node[name], f"stepper.{name}", problems,
                                default=1)
        else:
            kwargs[name] = _float(node[name], f"stepper.{name}", problems,
                                  default=1.0)
    for required in ("dt_init", "t_end"):
        if required not in kwargs:
            problems.append(f"stepper.{required}: required")
            kwargs[required] = 1.0
    try:
        return TimeStepperConfig(**kwargs)
    except DomainError as exc:
        problems.append(f"stepper: {exc}")
        return TimeStepperConfig(dt_init=0.01, t_end=1.0)


def _parse_output(node, problems: list) -> tuple[OutputSink, ...]:
    sinks = []
    for i, raw in enumerate(_sequence(node, "output", problems)):
        path = f"output[{i}]"
        raw = _mapping(raw, path, problems)
        _check_keys(raw, _SINK_KEYS, path, problems)
        kind = _str_choice(raw.get("kind"), _SINK_KINDS, f"{path}.kind",
                           problems)
        sink_path = raw.get("path")
        if not isinstance(sink_path, str) or not sink_path:
            problems.append(f"{path}.path: required nonempty string")
            sink_path = f"sink{i}.csv"
        position = None
        if kind == "probe":
            if "position" not in raw:
                problems.append(f"{path}.position: required for probes")
            else:
                position = tuple(
                    _float(x, f"{path}.position[{j}]", problems)
                    for j, x in enumerate(
                        _sequence(raw["position"], f"{path}.position",
                                  problems)))
        elif "position" in raw:
            problems.append(f"{path}.position: only probe sinks take one")
        sinks.append(OutputSink(kind=kind, path=sink_path, position=position))
    return tuple(sinks)


def parse_config(text: str) -> SimulationConfig:
    """Parse and validate a YAML deck; raises ConfigError listing every problem."""
    try:
        tree = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"syntax: {exc}"]) from None
    if tree is None:
        raise ConfigError(["deck is empty"])
    problems: list[str] = []
    tree = _mapping(tree, "deck", problems)
    _check_keys(tree, _TOP_KEYS, "deck", problems)

    device = _parse_device(tree.get("device"), problems)
    statistics = _parse_statistics(tree.get("statistics"), problems)
    flux = tree.get("flux_scheme", "scharfetter_gummel")
    flux = _str_choice(flux, FluxScheme.variants, "flux_scheme", problems)

    bulk = []
    for i, raw in enumerate(_sequence(tree.get("recombination"),
                                      "recombination", problems)):
        model = _model_instance(raw, _BULK_MODELS, f"recombination[{i}]",
                                problems)
        if model is not None:
            bulk.append(model)

    stepper = _parse_stepper(tree.get("stepper"), problems)
    output = _parse_output(tree.get("output"), problems)
    seed = _int(tree.get("seed", 0), "seed", problems, default=0)

    if device is not None:
        report = validate_device(device)
        problems.extend(f"device: {v}" for v in report.violations)
    if problems:
        raise ConfigError(problems)
    return SimulationConfig(
        device=device, statistics=statistics, flux_scheme=flux,
        recombination=tuple(bulk), stepper=stepper, output=output, seed=seed)


def load_config(path) -> SimulationConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read())


# ---------------------------------------------------------------------------
# canonical dump

def _series_tree(value):
    if isinstance(value, tuple):
        return [[t, v] for t, v in value]
    return float(value)


def _axis_tree(value):
    if isinstance(value, tuple):
        return [float(v) for v in value]
    return float(value)


def _model_tree(model) -> dict:
    registry = {**_BULK_MODELS, **_SURFACE_MODELS}
    for name, cls in registry.items():
        if type(model) is cls:
            out = {"type": name}
            for f in dataclasses.fields(cls):
                out[f.name] = float(getattr(model, f.name))
            return out
    raise DomainError(f"cannot serialize model {type(model).__name__}")


def _device_tree(device: DeviceSpec) -> dict:
    out: dict = {
        "dimension": device.dimension,
        "extent": [float(x) for x in device.extent],
        "resolution": [int(n) for n in device.resolution],
        "regions": [
            {"name": r.name,
             "bounds": [[float(a), float(b)] for a, b in r.bounds],
             "eps": _axis_tree(r.eps), "mu1": _axis_tree(r.mu1),
             "mu2": _axis_tree(r.mu2)}
            for r in device.regions],
    }
    if device.contacts:
        out["contacts"] = [
            {k: v for k, v in (
                ("side", c.side), ("phi", _series_tree(c.phi)),
                ("Phi1", _series_tree(c.Phi1)),
                ("Phi2", _series_tree(c.Phi2)),
                ("bias", _series_tree(c.bias)),
                ("span", list(c.span) if c.span else None))
             if v is not None}
            for c in device.contacts]
    if device.robin:
        out["robin"] = [
            {k: v for k, v in (
                ("side", r.side), ("eps_gamma", float(r.eps_gamma)),
                ("phi_gamma", _series_tree(r.phi_gamma)),
                ("span", list(r.span) if r.span else None))
             if v is not None}
            for r in device.robin]
    if device.surfaces:
        out["surfaces"] = [
            {k: v for k, v in (
                ("side", s.side),
                ("model", _model_tree(s.model) if s.model else None),
                ("span", list(s.span) if s.span else None))
             if v is not None}
            for s in device.surfaces]
    if device.interfaces:
        out["interfaces"] = [
            {k: v for k, v in (
                ("axis", i.axis), ("position", float(i.position)),
                ("model", _model_tree(i.model) if i.model else None),
                ("span", list(i.span) if i.span else None))
             if v is not None}
            for i in device.interfaces]
    doping: dict = {}
    if device.doping.bulk:
        doping["boxes"] = [
            {"bounds": [[float(a), float(b)] for a, b in box.bounds],
             "value": float(box.value)}
            for box in device.doping.bulk]
    if device.doping.sheets:
        doping["sheets"] = [
            {"axis": s.axis, "position": float(s.position),
             "density": float(s.density)}
            for s in device.doping.sheets]
    if doping:
        out["doping"] = doping
    return out


def dump_config(config: SimulationConfig) -> str:
    """Canonical YAML for a config; parse_config(dump_config(c)) == c."""
    tree: dict = {"device": _device_tree(config.device)}
    tree["statistics"] = {"carrier1": config.statistics[0],
                          "carrier2": config.statistics[1]}
    tree["flux_scheme"] = config.flux_scheme
    if config.recombination:
        tree["recombination"] = [_model_tree(m) for m in config.recombination]
    stepper = {}
    for f in dataclasses.fields(TimeStepperConfig):
        value = getattr(config.stepper, f.name)
        stepper[f.name] = value if isinstance(value, int) else float(value)
    if stepper["dt_max"] == np.inf:
        del stepper["dt_max"]  # YAML has no portable infinity literal
    tree["stepper"] = stepper
    if config.output:
        tree["output"] = [
            {k: v for k, v in (
                ("kind", s.kind), ("path", s.path),
                ("position", list(s.position) if s.position else None))
             if v is not None}
            for s in config.output]
    tree["seed"] = config.seed
    return yaml.safe_dump(tree, sort_keys=False, default_flow_style=None)
