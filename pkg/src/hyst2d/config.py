"""YAML run configuration: strict schema walking and object builders.

Every entry is checked by type and name; unknown keys fail with the dotted
path of the offending entry, so typos surface instead of being ignored.
"""

from __future__ import annotations

import numpy as np
import yaml

from .errors import ConfigError
from .foliation import (
    Annulus,
    FoliationPair,
    LinearFoliation,
    RadialFoliation,
    Rectangle,
    TabulatedFoliation,
)
from .identify import TransversalCurve
from .plane import RelayGrid, build_grid
from .signal import Signal2D

TASKS = ("drive", "variation", "reduce", "identify", "recover")


def _require_map(node, path: str) -> dict:
    if not isinstance(node, dict):
        raise ConfigError(f"expected a mapping, got {type(node).__name__}", path)
    return node


def _check_keys(node: dict, path: str, required: set[str], optional: set[str]):
    for key in node:
        if key not in required and key not in optional:
            raise ConfigError("unknown key", f"{path}.{key}" if path else key)
    for key in required:
        if key not in node:
            raise ConfigError(f"missing required key {key!r}", path or key)


def _number(node, path: str) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(f"expected a number, got {node!r}", path)
    return float(node)


def _integer(node, path: str) -> int:
    if isinstance(node, bool) or not isinstance(node, int):
        raise ConfigError(f"expected an integer, got {node!r}", path)
    return int(node)


def _string(node, path: str) -> str:
    if not isinstance(node, str):
        raise ConfigError(f"expected a string, got {node!r}", path)
    return node


def _pair(node, path: str) -> tuple[float, float]:
    if not isinstance(node, (list, tuple)) or len(node) != 2:
        raise ConfigError("expected a pair of numbers", path)
    return (_number(node[0], f"{path}[0]"), _number(node[1], f"{path}[1]"))


def _number_list(node, path: str) -> list[float]:
    if not isinstance(node, (list, tuple)) or not node:
        raise ConfigError("expected a non-empty list of numbers", path)
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(node)]


def _points(node, path: str, min_len: int = 2) -> np.ndarray:
    if not isinstance(node, (list, tuple)) or len(node) < min_len:
        raise ConfigError(f"expected at least {min_len} planar points", path)
    return np.asarray([_pair(p, f"{path}[{i}]") for i, p in enumerate(node)])


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid yaml: {exc}")
    cfg = _require_map(raw, "")
    _check_keys(cfg, "", {"task", "foliation"},
                {"seed", "semantics", "signal", "grid", "relay", "variation",
                 "identify", "recover", "output"})
    task = _string(cfg["task"], "task")
    if task not in TASKS:
        raise ConfigError(f"task must be one of {TASKS}", "task")
    if "seed" in cfg:
        _integer(cfg["seed"], "seed")
    if "semantics" in cfg:
        if _string(cfg["semantics"], "semantics") not in ("threshold", "exit"):
            raise ConfigError("semantics must be 'threshold' or 'exit'", "semantics")
    _validate_foliation_cfg(cfg["foliation"], "foliation")
    if "output" in cfg:
        out = _require_map(cfg["output"], "output")
        _check_keys(out, "output", set(), {"plots"})
        if "plots" in out and not isinstance(out["plots"], bool):
            raise ConfigError("expected a boolean", "output.plots")
    needs = {
        "drive": ("signal", "grid"),
        "variation": ("signal", "relay"),
        "reduce": ("signal",),
        "identify": ("grid", "identify"),
        "recover": ("grid", "recover"),
    }[task]
    for section in needs:
        if section not in cfg:
            raise ConfigError(f"task {task!r} requires section {section!r}", section)
    if "signal" in cfg:
        _validate_signal_cfg(cfg["signal"], "signal")
    if "grid" in cfg:
        _validate_grid_cfg(cfg["grid"], "grid")
    if "relay" in cfg:
        relay = _require_map(cfg["relay"], "relay")
        _check_keys(relay, "relay", {"c0", "c1"}, {"initial"})
        _number(relay["c0"], "relay.c0")
        _number(relay["c1"], "relay.c1")
        if "initial" in relay and _integer(relay["initial"], "relay.initial") not in (0, 1):
            raise ConfigError("initial must be 0 or 1", "relay.initial")
    if "variation" in cfg:
        var = _require_map(cfg["variation"], "variation")
        _check_keys(var, "variation", set(), {"omega_grid", "probe"})
        if "omega_grid" in var:
            _integer(var["omega_grid"], "variation.omega_grid")
        if "probe" in var:
            probe = _require_map(var["probe"], "variation.probe")
            _check_keys(probe, "variation.probe", set(), {"trials", "max_flips"})
            for k in probe:
                _integer(probe[k], f"variation.probe.{k}")
    if "identify" in cfg:
        ident = _require_map(cfg["identify"], "identify")
        _check_keys(ident, "identify", {"curve", "s0", "s1"}, {"band_margin"})
        _validate_curve_cfg(ident["curve"], "identify.curve")
        for ax in ("s0", "s1"):
            _lattice_cfg(ident[ax], f"identify.{ax}")
        if "band_margin" in ident:
            _number(ident["band_margin"], "identify.band_margin")
    if "recover" in cfg:
        rec = _require_map(cfg["recover"], "recover")
        _check_keys(rec, "recover",
                    {"curves", "target", "s_ref", "s_span", "scan_step", "fd_step"},
                    {"tol", "family"})
        if not isinstance(rec["curves"], list) or not rec["curves"]:
            raise ConfigError("expected a non-empty list of curves", "recover.curves")
        for i, cc in enumerate(rec["curves"]):
            _validate_curve_cfg(cc, f"recover.curves[{i}]")
        _number(rec["target"], "recover.target")
        _number(rec["s_ref"], "recover.s_ref")
        _pair(rec["s_span"], "recover.s_span")
        _number(rec["scan_step"], "recover.scan_step")
        _number(rec["fd_step"], "recover.fd_step")
        if "tol" in rec:
            _number(rec["tol"], "recover.tol")
        if "family" in rec:
            fam = _integer(rec["family"], "recover.family")
            if fam not in (0, 1):
                raise ConfigError("family must be 0 or 1", "recover.family")
    return cfg


def _lattice_cfg(node, path: str) -> tuple[float, float, int]:
    if not isinstance(node, (list, tuple)) or len(node) != 3:
        raise ConfigError("expected [start, stop, count]", path)
    lo = _number(node[0], f"{path}[0]")
    hi = _number(node[1], f"{path}[1]")
    n = _integer(node[2], f"{path}[2]")
    if n < 3:
        raise ConfigError("lattice needs at least 3 nodes", f"{path}[2]")
    if not lo < hi:
        raise ConfigError("lattice span must be increasing", path)
    return lo, hi, n


def _validate_curve_cfg(node, path: str):
    c = _require_map(node, path)
    _check_keys(c, path, {"points"}, {"s_start"})
    _points(c["points"], f"{path}.points")
    if "s_start" in c:
        _number(c["s_start"], f"{path}.s_start")


def _validate_domain_cfg(node, path: str):
    dom = _require_map(node, path)
    shape = _string(dom.get("shape", ""), f"{path}.shape")
    if shape == "rectangle":
        _check_keys(dom, path, {"shape", "x1", "x2"}, set())
        _pair(dom["x1"], f"{path}.x1")
        _pair(dom["x2"], f"{path}.x2")
    elif shape == "annulus":
        _check_keys(dom, path, {"shape", "center", "r_min", "r_max"}, set())
        _pair(dom["center"], f"{path}.center")
        _number(dom["r_min"], f"{path}.r_min")
        _number(dom["r_max"], f"{path}.r_max")
    else:
        raise ConfigError("shape must be 'rectangle' or 'annulus'", f"{path}.shape")


def _validate_foliation_cfg(node, path: str):
    fol = _require_map(node, path)
    kind = _string(fol.get("kind", ""), f"{path}.kind")
    common_req = {"kind", "domain", "c0_range", "c1_range"}
    common_opt = {"min_gap"}
    if kind == "linear":
        _check_keys(fol, path, common_req | {"normal"}, common_opt)
        _pair(fol["normal"], f"{path}.normal")
    elif kind == "radial":
        _check_keys(fol, path, common_req | {"center", "constant"}, common_opt)
        _pair(fol["center"], f"{path}.center")
        _number(fol["constant"], f"{path}.constant")
    elif kind == "tabulated":
        _check_keys(fol, path,
                    common_req | {"x1_nodes", "x2_nodes", "c0_table", "c1_table"},
                    common_opt)
        n1 = len(_number_list(fol["x1_nodes"], f"{path}.x1_nodes"))
        n2 = len(_number_list(fol["x2_nodes"], f"{path}.x2_nodes"))
        for tkey in ("c0_table", "c1_table"):
            tbl = fol[tkey]
            if not isinstance(tbl, list) or len(tbl) != n1:
                raise ConfigError(f"expected {n1} rows", f"{path}.{tkey}")
            for i, row in enumerate(tbl):
                if len(_number_list(row, f"{path}.{tkey}[{i}]")) != n2:
                    raise ConfigError(f"expected {n2} columns", f"{path}.{tkey}[{i}]")
    else:
        raise ConfigError("kind must be 'linear', 'radial', or 'tabulated'",
                          f"{path}.kind")
    _validate_domain_cfg(fol["domain"], f"{path}.domain")
    _pair(fol["c0_range"], f"{path}.c0_range")
    _pair(fol["c1_range"], f"{path}.c1_range")
    if "min_gap" in fol:
        _number(fol["min_gap"], f"{path}.min_gap")


def _validate_signal_cfg(node, path: str):
    sig = _require_map(node, path)
    kind = _string(sig.get("kind", ""), f"{path}.kind")
    if kind == "waypoints":
        _check_keys(sig, path, {"kind", "points"}, {"times", "resample"})
        pts = _points(sig["points"], f"{path}.points")
        if "times" in sig:
            times = _number_list(sig["times"], f"{path}.times")
            if len(times) != len(pts):
                raise ConfigError("times must match points in length", f"{path}.times")
    elif kind == "sine":
        _check_keys(sig, path, {"kind", "center", "radius", "t_end", "samples"},
                    {"turns", "phase", "resample"})
        _pair(sig["center"], f"{path}.center")
        _number(sig["radius"], f"{path}.radius")
        _number(sig["t_end"], f"{path}.t_end")
        _integer(sig["samples"], f"{path}.samples")
        for opt in ("turns", "phase"):
            if opt in sig:
                _number(sig[opt], f"{path}.{opt}")
    elif kind == "csv":
        _check_keys(sig, path, {"kind", "path"}, {"resample"})
        _string(sig["path"], f"{path}.path")
    else:
        raise ConfigError("kind must be 'waypoints', 'sine', or 'csv'",
                          f"{path}.kind")
    if "resample" in sig:
        if _number(sig["resample"], f"{path}.resample") <= 0:
            raise ConfigError("resample step must be positive", f"{path}.resample")


def _validate_grid_cfg(node, path: str):
    grid = _require_map(node, path)
    _check_keys(grid, path, {"n0", "n1"}, {"weight", "initial"})
    for k in ("n0", "n1"):
        if _integer(grid[k], f"{path}.{k}") < 1:
            raise ConfigError("must be >= 1", f"{path}.{k}")
    if "weight" in grid and not isinstance(grid["weight"], (int, float, str)):
        raise ConfigError("weight must be a number or expression string",
                          f"{path}.weight")
    if "initial" in grid and _integer(grid["initial"], f"{path}.initial") not in (0, 1):
        raise ConfigError("initial must be 0 or 1", f"{path}.initial")


# ---------------------------------------------------------------------------
# builders (schemas already validated)


def build_foliation(cfg: dict) -> FoliationPair:
    fol = cfg["foliation"]
    dom = fol["domain"]
    if dom["shape"] == "rectangle":
        domain = Rectangle(dom["x1"][0], dom["x1"][1], dom["x2"][0], dom["x2"][1])
    else:
        domain = Annulus(tuple(dom["center"]), dom["r_min"], dom["r_max"])
    kw = {"min_gap": fol.get("min_gap", 1e-6)}
    try:
        if fol["kind"] == "linear":
            return LinearFoliation(domain, fol["normal"], fol["c0_range"],
                                   fol["c1_range"], **kw)
        if fol["kind"] == "radial":
            return RadialFoliation(domain, fol["center"], fol["constant"],
                                   fol["c0_range"], fol["c1_range"], **kw)
        return TabulatedFoliation(domain, fol["x1_nodes"], fol["x2_nodes"],
                                  fol["c0_table"], fol["c1_table"],
                                  fol["c0_range"], fol["c1_range"], **kw)
    except ValueError as exc:
        raise ConfigError(str(exc), "foliation")


def build_signal(cfg: dict) -> Signal2D:
    sig = cfg["signal"]
    try:
        if sig["kind"] == "waypoints":
            u = Signal2D.from_waypoints(sig["points"], sig.get("times"))
        elif sig["kind"] == "sine":
            u = Signal2D.sine(tuple(sig["center"]), sig["radius"], sig["t_end"],
                              sig["samples"], phase=sig.get("phase", 0.0),
                              turns=sig.get("turns", 1.0))
        else:
            u = Signal2D.from_csv(sig["path"])
    except Exception as exc:
        raise ConfigError(str(exc), "signal")
    if "resample" in sig:
        u = u.resample(sig["resample"])
    return u


def build_grid_cfg(cfg: dict, f: FoliationPair) -> RelayGrid:
    grid = cfg["grid"]
    try:
        return build_grid(f, grid["n0"], grid["n1"],
                          weight=grid.get("weight", 1.0),
                          xi=grid.get("initial", 0))
    except ValueError as exc:
        raise ConfigError(str(exc), "grid")


def build_curve(node: dict) -> TransversalCurve:
    try:
        return TransversalCurve(np.asarray(node["points"], dtype=float),
                                s_start=node.get("s_start", 0.0))
    except ValueError as exc:
        raise ConfigError(str(exc), "curve")


def lattice_nodes(node) -> np.ndarray:
    lo, hi, n = node
    return np.linspace(float(lo), float(hi), int(n))
