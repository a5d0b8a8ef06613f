"""Command line pipeline: trace -> solve -> develop -> analyze, with exports.

Configuration is JSON.  ``sqrt_phi`` is either a string such as
``"z^2 + 5 + 2i/z"`` (see :func:`parse_sqrt_phi`) or coefficient arrays
``{"poly": [[j, re, im], ...], "laurent": [[k, re, im], ...]}`` where entry
``[j, re, im]`` of ``poly`` multiplies z^j and entry ``[k, re, im]`` of
``laurent`` multiplies z^-k.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analyze, hopf, hyp2, levelset, reconstruct, sinhgordon
from .errors import ConfigInvalid, EmptyInput, MinendError, StageFailed

log = logging.getLogger("minend")

FORMAT_VERSION = 1
STAGES = ("validate", "thresholds", "trace", "solve", "develop", "analyze", "figure")
DEPENDS = {
    "validate": (),
    "thresholds": ("validate",),
    "trace": ("thresholds",),
    "solve": ("thresholds",),
    "develop": ("solve",),
    "analyze": ("develop",),
    "figure": ("trace",),
}
CONFIG_KEYS = {
    "sqrt_phi", "stages", "thresholds", "levels", "escape_radius", "grid",
    "tolerances", "out", "cache",
}
DEFAULT_GRID = {"u": [-4.0, 4.0], "height": 6.0, "spacing": 0.04, "amplitude": 0.2}
DEFAULT_TOL = {"trace": 1e-9, "solve": 1e-10, "drift": 0.5}
DEFAULT_LEVELS = ["-2C0", "-0.5C0", "0", "0.5C0", "2C0"]


# --------------------------------------------------------------------------
# formatting
# --------------------------------------------------------------------------

def fmt(x) -> str:
    """Round-trip float formatting with 17 significant digits."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def dump_json(obj, indent: int = 0) -> str:
    """Deterministic JSON: sorted keys, floats at 17 digits, non-finite as null."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return "null" if obj is None else ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dump_json(obj[k], indent + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + dump_json(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _canonical(obj):
    """Bit-exact canonical form for hashing: floats become hex strings."""
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj).hex()
    if isinstance(obj, complex):
        return [obj.real.hex(), obj.imag.hex()]
    return obj


def cache_key(inputs) -> str:
    """sha256 of the canonical serialization of the stage inputs."""
    blob = json.dumps(_canonical(inputs), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TERM = re.compile(
    rf"^(?P<coef>\((?P<paren>[^()]*)\)|(?P<num>{_NUM})?(?P<i>i)?)\s*\*?\s*"
    rf"(?:(?P<div>/)\s*)?(?P<z>z(?:\s*\^\s*(?P<pow>\d+))?)?$"
)


def _parse_complex(text: str) -> complex:
    t = text.replace(" ", "").replace("i", "j")
    if not t:
        raise ValueError("empty coefficient")
    return complex(t)


def _split_terms(s: str):
    terms, depth, cur = [], 0, ""
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "+-" and depth == 0 and cur.strip() and not re.search(r"[eE]$", cur.strip()):
            terms.append(cur)
            cur = ch
        else:
            cur += ch
    terms.append(cur)
    return [t.strip() for t in terms if t.strip()]


def parse_sqrt_phi(text: str) -> dict:
    """Parse ``"z^2 + 5 + 2i/z"``-style sums into raw coefficient lists.

    A term is ``[coef][*]z[^n]``, ``[coef]/z[^n]`` or a bare coefficient; a
    coefficient is a real number, an imaginary number such as ``2i``, ``i``,
    or a parenthesized complex number like ``(1-2i)``.
    """
    if not isinstance(text, str) or not text.strip():
        raise ConfigInvalid("sqrt_phi string is empty")
    poly: dict = {}
    laurent: dict = {}
    for term in _split_terms(text):
        sign = 1.0
        body = term
        while body and body[0] in "+-":
            sign = -sign if body[0] == "-" else sign
            body = body[1:].strip()
        mt = _TERM.match(body)
        if not mt or not body:
            raise ConfigInvalid(f"cannot parse term {term!r}")
        if mt.group("paren") is not None:
            try:
                c = _parse_complex(mt.group("paren"))
            except ValueError as exc:
                raise ConfigInvalid(f"bad coefficient in {term!r}") from exc
        else:
            num = mt.group("num")
            if num is None and mt.group("i") is None:
                c = 1.0
            else:
                c = float(num) if num is not None else 1.0
            if mt.group("i"):
                c = 1j * c
        c = sign * complex(c)
        has_z = mt.group("z") is not None
        power = int(mt.group("pow")) if mt.group("pow") else 1
        if mt.group("div"):
            if not has_z:
                raise ConfigInvalid(f"division needs a power of z in {term!r}")
            if power == 0:
                poly[0] = poly.get(0, 0) + c
            else:
                laurent[power] = laurent.get(power, 0) + c
        else:
            deg = power if has_z else 0
            poly[deg] = poly.get(deg, 0) + c
    return _raw_from_maps(poly, laurent)


def _raw_from_maps(poly: dict, laurent: dict) -> dict:
    deg = max(poly) if poly else 0
    K = max(laurent) if laurent else 0
    p = [complex(poly.get(j, 0)) for j in range(deg + 1)]
    q = [complex(laurent.get(k, 0)) for k in range(1, K + 1)]
    return {"poly": [[c.real, c.imag] for c in p], "laurent": [[c.real, c.imag] for c in q]}


def _raw_from_arrays(obj: dict) -> dict:
    maps = {}
    for key in ("poly", "laurent"):
        acc = {}
        for entry in obj.get(key, []):
            if not (isinstance(entry, (list, tuple)) and len(entry) == 3):
                raise ConfigInvalid(f"{key} entries must be [power, re, im]")
            k, re_, im_ = entry
            if int(k) != k or k < (1 if key == "laurent" else 0):
                raise ConfigInvalid(f"bad power {k!r} in {key}")
            acc[int(k)] = acc.get(int(k), 0) + complex(float(re_), float(im_))
        maps[key] = acc
    extra = set(obj) - {"poly", "laurent"}
    if extra:
        raise ConfigInvalid(f"unknown sqrt_phi keys {sorted(extra)}")
    return _raw_from_maps(maps["poly"], maps["laurent"])


@dataclass
class RunConfig:
    hopf: hopf.HopfData
    raw: dict
    stages: list
    overrides: dict = field(default_factory=dict)
    levels: list = field(default_factory=lambda: list(DEFAULT_LEVELS))
    escape_radius: float | None = None
    grid: dict = field(default_factory=lambda: dict(DEFAULT_GRID))
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOL))
    out: str = "out"
    cache: bool = True

    def inputs(self) -> dict:
        """Everything that determines the artifacts (the output directory excluded)."""
        return {
            "hopf": self.hopf.as_dict(), "overrides": self.overrides, "levels": self.levels,
            "escape_radius": self.escape_radius, "grid": self.grid, "tolerances": self.tolerances,
            "stages": self.stages,
        }


def order_stages(stages) -> list:
    """Stages sorted by dependency; warns when the given order differs."""
    bad = [s for s in stages if s not in STAGES]
    if bad:
        raise ConfigInvalid(f"unknown stages {bad}")
    ordered = sorted(dict.fromkeys(stages), key=STAGES.index)
    if ordered != list(stages):
        log.warning("stages reordered by dependency: %s -> %s", list(stages), ordered)
    return ordered


def load_config(data: dict, base: Path | None = None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigInvalid("config must be a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigInvalid(f"unknown config keys {sorted(unknown)}")
    if "sqrt_phi" not in data:
        raise ConfigInvalid("config needs sqrt_phi")
    sp = data["sqrt_phi"]
    if isinstance(sp, str):
        raw = parse_sqrt_phi(sp)
    elif isinstance(sp, dict):
        raw = _raw_from_arrays(sp)
    elif isinstance(sp, (int, float)):
        raw = parse_sqrt_phi(repr(float(sp)))
    else:
        raise ConfigInvalid("sqrt_phi must be a string or coefficient arrays")
    try:
        d = hopf.validate(raw)
    except (ValueError, MinendError) as exc:
        raise ConfigInvalid(f"invalid Hopf data: {exc}") from exc
    stages = order_stages(list(data.get("stages", STAGES)))
    grid = dict(DEFAULT_GRID)
    grid.update(data.get("grid", {}))
    if set(grid) - set(DEFAULT_GRID):
        raise ConfigInvalid(f"unknown grid keys {sorted(set(grid) - set(DEFAULT_GRID))}")
    tol = dict(DEFAULT_TOL)
    tol.update(data.get("tolerances", {}))
    if set(tol) - set(DEFAULT_TOL):
        raise ConfigInvalid(f"unknown tolerance keys {sorted(set(tol) - set(DEFAULT_TOL))}")
    for k, v in tol.items():
        if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
            raise ConfigInvalid(f"tolerance {k} must be positive")
    for k in ("height", "spacing"):
        if not float(grid[k]) > 0:
            raise ConfigInvalid(f"grid {k} must be positive")
    if abs(float(grid["amplitude"])) > sinhgordon.TRUST:
        raise ConfigInvalid("grid amplitude exceeds the trust bound")
    # sections are sampled at speed 2 cosh(omega) <= 2 cosh(amplitude)
    section_step = 2.0 * math.cosh(float(grid["amplitude"])) * float(grid["spacing"])
    if "analyze" in stages and section_step >= hyp2.MAX_SPACING:
        raise ConfigInvalid(f"grid spacing gives section steps {section_step:.3g}; curvature "
                            f"estimates need steps below {hyp2.MAX_SPACING:g}")
    levels = data.get("levels", list(DEFAULT_LEVELS))
    if not isinstance(levels, list) or not levels:
        raise ConfigInvalid("levels must be a nonempty list")
    for lv in levels:
        _level_value(lv, 1.0)
    esc = data.get("escape_radius")
    if esc is not None and not float(esc) > 0:
        raise ConfigInvalid("escape_radius must be positive")
    out = data.get("out", "out")
    if base is not None and not os.path.isabs(out):
        out = str(base / out)
    overrides = data.get("thresholds", {})
    if not isinstance(overrides, dict):
        raise ConfigInvalid("thresholds must be an object of overrides")
    return RunConfig(d, raw, stages, overrides, levels, esc, grid, tol, out,
                     bool(data.get("cache", True)))


def _level_value(value, C0: float) -> float:
    """A level is a number or a multiple of C0 such as ``"0.5C0"``."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        s = value.replace(" ", "")
        try:
            if s.endswith("C0"):
                head = s[:-2]
                mult = 1.0 if head in ("", "+") else -1.0 if head == "-" else float(head)
                return mult * C0
            return float(s)
        except ValueError:
            pass
    raise ConfigInvalid(f"bad level {value!r}")


# --------------------------------------------------------------------------
# exports
# --------------------------------------------------------------------------

def write_curves_csv(path, structure: levelset.LevelStructure, d: hopf.HopfData) -> None:
    lines = [f"# format_version={FORMAT_VERSION}", f"# C={fmt(structure.C)}",
             "curve,kind,index,i,x,y,theta,re_w,im_w"]
    for ci, c in enumerate(structure.curves):
        w = hopf.W_value(d, c.points, c.thetas)
        for i, (p, t, wi) in enumerate(zip(c.points, c.thetas, w)):
            lines.append(",".join([str(ci), c.kind, str(c.index), str(i), fmt(p.real), fmt(p.imag),
                                   fmt(t), fmt(wi.real), fmt(wi.imag)]))
    Path(path).write_text("\n".join(lines) + "\n")


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _svg_text(x, y, s, size=12):
    s = s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    return f'<text x="{x:.2f}" y="{y:.2f}" font-family="monospace" font-size="{size}">{s}</text>'


def export_svg(obj, path, m: int | None = None, thresholds: hopf.ThresholdSet | None = None,
               size: int = 600, plot_radius: float | None = None) -> str:
    """Write a standalone SVG of level curves or of an omega field.

    ``obj`` is a LevelStructure, a list of them, or an OmegaField.  Curves
    are drawn in the z-plane inside a window of radius ``plot_radius``
    (default 3 R2) with the circles S_R1 and S_R2; the legend lists m, the
    levels and the thresholds.  Output is byte-deterministic.
    """
    if isinstance(obj, sinhgordon.OmegaField):
        svg = _field_svg(obj, size)
    else:
        structures = [obj] if isinstance(obj, levelset.LevelStructure) else list(obj)
        if not structures or not any(s.curves for s in structures):
            raise EmptyInput("no curves to draw")
        svg = _census_svg(structures, m, thresholds, size, plot_radius)
    Path(path).write_text(svg)
    return svg


def _census_svg(structures, m, th, size, plot_radius):
    if plot_radius is None:
        plot_radius = 3.0 * th.R2 if th is not None else max(
            float(np.max(np.abs(c.points))) for s in structures for c in s.curves)
    half = size / 2.0
    scale = half / plot_radius

    def xy(p):
        return half + scale * p.real, half - scale * p.imag

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size + 100}" '
           f'viewBox="0 0 {size} {size + 100}">',
           f'<rect x="0" y="0" width="{size}" height="{size + 100}" fill="white"/>',
           f'<clipPath id="win"><rect x="0" y="0" width="{size}" height="{size}"/></clipPath>']
    if th is not None:
        for R, dash in ((th.R1, "4 3"), (th.R2, "1 3")):
            out.append(f'<circle cx="{half:.2f}" cy="{half:.2f}" r="{scale * R:.2f}" fill="none" '
                       f'stroke="#888" stroke-dasharray="{dash}"/>')
    out.append('<g clip-path="url(#win)" fill="none" stroke-width="1.5">')
    for si, s in enumerate(structures):
        colour = _PALETTE[si % len(_PALETTE)]
        for c in s.curves:
            pts = c.points
            keep = np.abs(pts) <= 1.5 * plot_radius
            idx = np.flatnonzero(keep)
            if idx.size < 2:
                continue
            # include one point past the window so the stroke reaches the edge
            lo, hi = idx[0], min(idx[-1] + 1, pts.size - 1)
            path = " ".join(f"{x:.2f},{y:.2f}" for x, y in map(xy, pts[lo:hi + 1]))
            out.append(f'<polyline stroke="{colour}" points="{path}"><title>{c.label} C={fmt(s.C)}'
                       f'</title></polyline>')
    out.append("</g>")
    y = size + 18
    legend = f"m = {m}" if m is not None else "m = ?"
    if th is not None:
        legend += (f"   R1 = {th.R1:.4g}  R2 = {th.R2:.4g}  R3 = {th.R3:.4g}  "
                   f"C0 = {th.C0:.4g}")
    out.append(_svg_text(8, y, legend))
    for si, s in enumerate(structures):
        colour = _PALETTE[si % len(_PALETTE)]
        row, col = divmod(si, 3)
        x0 = 8 + col * (size / 3)
        y0 = y + 20 + 18 * row
        out.append(f'<rect x="{x0:.2f}" y="{y0 - 9:.2f}" width="12" height="4" fill="{colour}"/>')
        out.append(_svg_text(x0 + 16, y0, f"C = {s.C:.6g}  H:{s.counts.get('H', 0)} "
                                          f"L:{s.counts.get('L', 0)}", 11))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _field_svg(f: sinhgordon.OmegaField, size):
    vals = f.values
    if vals.size == 0:
        raise EmptyInput("empty field")
    nv, nu = vals.shape
    step_u = max(1, nu // 80)
    step_v = max(1, nv // 80)
    sub = vals[::step_v, ::step_u]
    vmax = max(float(np.max(np.abs(sub))), 1e-300)
    h, w = sub.shape
    cw, ch = size / w, size / h
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size + 40}" '
           f'viewBox="0 0 {size} {size + 40}">', '<g stroke="none">']
    for i in range(h):
        for j in range(w):
            t = sub[i, j] / vmax
            r = int(round(255 * (1 - max(-t, 0))))
            b = int(round(255 * (1 - max(t, 0))))
            g = min(r, b)
            out.append(f'<rect x="{j * cw:.2f}" y="{size - (i + 1) * ch:.2f}" width="{cw:.2f}" '
                       f'height="{ch:.2f}" fill="#{r:02x}{g:02x}{b:02x}"/>')
    out.append("</g>")
    out.append(_svg_text(8, size + 24, f"omega on [{f.grid.u0:.4g}, {f.grid.u1:.4g}] x "
                                       f"[{f.grid.v0:.4g}, {f.grid.v1:.4g}], max |omega| = {vmax:.4g}"))
    out.append("</svg>")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# pipeline
# --------------------------------------------------------------------------

@dataclass
class ArtifactManifest:
    files: list = field(default_factory=list)
    key: str = ""

    def add(self, path, kind: str, root) -> None:
        rel = os.path.relpath(path, root)
        self.files.append({"path": rel, "kind": kind, "sha256": sha256_file(path)})

    def as_dict(self) -> dict:
        return {"format_version": FORMAT_VERSION, "inputs_sha256": self.key,
                "files": sorted(self.files, key=lambda e: e["path"])}

    def verify(self, root) -> bool:
        return all(
            os.path.exists(os.path.join(root, e["path"]))
            and sha256_file(os.path.join(root, e["path"])) == e["sha256"]
            for e in self.files
        )


def _closure(stages) -> list:
    need = set()

    def visit(s):
        if s not in need:
            need.add(s)
            for p in DEPENDS[s]:
                visit(p)

    for s in stages:
        visit(s)
    return sorted(need, key=STAGES.index)


class Pipeline:
    """Runs stages in dependency order; artifacts only for requested stages."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.root = Path(cfg.out)
        self.manifest = ArtifactManifest(key=cache_key(cfg.inputs()))
        self.state: dict = {}
        self.cache_hit = False

    def run(self) -> ArtifactManifest:
        requested = set(self.cfg.stages)
        self.root.mkdir(parents=True, exist_ok=True)
        for stage in _closure(self.cfg.stages):
            try:
                getattr(self, f"_{stage}")(stage in requested)
            except StageFailed:
                raise
            except (MinendError, ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
                raise StageFailed(stage, f"{type(exc).__name__}: {exc}") from exc
        man_path = self.root / "manifest.json"
        man_path.write_text(dump_json(self.manifest.as_dict()) + "\n")
        return self.manifest

    # individual stages ------------------------------------------------------

    def _validate(self, write):
        self.state["hopf"] = self.cfg.hopf

    def _thresholds(self, write):
        th = hopf.compute_thresholds(self.cfg.hopf, self.cfg.overrides)
        self.state["th"] = th
        if write:
            p = self.root / "thresholds.json"
            p.write_text(dump_json({"hopf": self.cfg.hopf.as_dict(), "thresholds": th.as_dict()}) + "\n")
            self.manifest.add(p, "thresholds JSON", self.root)

    def _trace(self, write):
        d, th = self.cfg.hopf, self.state["th"]
        params = levelset.TraceParams(tol=self.cfg.tolerances["trace"])
        out = []
        for idx, lv in enumerate(self.cfg.levels):
            C = _level_value(lv, th.C0)
            ls = levelset.level_structure(d, th, C, escape_radius=self.cfg.escape_radius,
                                          params=params)
            expected = levelset.expected_counts(d.m, C, th.C0)
            if ls.counts != expected:
                raise StageFailed("trace", f"level {C:g}: counts {ls.counts}, expected {expected}")
            out.append(ls)
            if write:
                p = self.root / f"curves_C{idx}.csv"
                write_curves_csv(p, ls, d)
                self.manifest.add(p, "curve CSV", self.root)
        self.state["census"] = out

    def _grid(self):
        g = self.cfg.grid
        th = self.state["th"]
        return sinhgordon.make_grid(g["u"], (th.C0, th.C0 + float(g["height"])), float(g["spacing"]))

    def _solve(self, write):
        grid = self._grid()
        bc = sinhgordon.bump_condition(grid, float(self.cfg.grid["amplitude"]))
        key = cache_key({"hopf": self.cfg.hopf.as_dict(),
                         "thresholds": {k: v for k, v in self.state["th"].as_dict().items()
                                        if k != "source"},
                         "grid": grid.as_dict(), "bc": bc.as_dict(),
                         "tolerance": self.cfg.tolerances["solve"]})
        cdir = self.root / ".cache"
        cpath = cdir / f"solve_{key}.npz"
        f = None
        if self.cfg.cache and cpath.exists():
            data = np.load(cpath)
            f = sinhgordon.OmegaField(grid, data["values"], bc, float(data["residual"]), True,
                                      list(data["history"]))
            self.cache_hit = True
            log.info("solve: cache hit %s", key[:12])
        if f is None:
            f = sinhgordon.solve(grid, bc, tol=self.cfg.tolerances["solve"])
            if self.cfg.cache:
                cdir.mkdir(exist_ok=True)
                np.savez(cpath, values=f.values, residual=f.residual_sup, history=np.array(f.history))
        self.state["field"] = f
        if write:
            p = self.root / "field.csv"
            sinhgordon.write_field_csv(p, f)
            self.manifest.add(p, "field CSV", self.root)

    def _develop(self, write):
        f = self.state["field"]
        m = self.cfg.hopf.m
        g = f.grid
        ends = []
        for j in range(m + 1):
            seed = ((g.nu // 2, 0), 0j, 2 * math.pi * j / (m + 1))
            s = reconstruct.develop(f, seed, drift_tol=self.cfg.tolerances["drift"])
            ends.append(s)
            if write:
                p = self.root / f"immersion_j{j}.csv"
                reconstruct.write_immersion_csv(p, s)
                self.manifest.add(p, "immersion CSV", self.root)
        self.state["ends"] = ends

    def _analyze(self, write):
        d, th = self.cfg.hopf, self.state["th"]
        ends = self.state["ends"]
        report = build_report(d, th, ends)
        self.state["report"] = report
        if write:
            p = self.root / "report.json"
            body = report.as_dict()
            body["thresholds"] = th.as_dict()
            p.write_text(dump_json(body) + "\n")
            self.manifest.add(p, "report JSON", self.root)

    def _figure(self, write):
        if write:
            p = self.root / "figure.svg"
            export_svg(self.state["census"], p, self.cfg.hopf.m, self.state["th"])
            self.manifest.add(p, "figure SVG", self.root)


def section_verdicts(end, k_bound_cap: float = 0.99) -> dict:
    """Checks on the developed sections of one chart (bottom row excluded)."""
    z = end.z
    nv, nu = z.shape
    gam = hyp2.geodesic_between(hyp2.DiskPoint(z[-1, 0]), hyp2.DiskPoint(z[-1, -1]))
    top_dev = float(np.max(np.abs(hyp2.signed_distances(z[-1], gam)[0])))
    rows = [z[iv] for iv in range(1, nv)]
    c1 = analyze.c1_convergence_report(rows, gam, slack=top_dev)
    c1.metrics["slack"] = top_dev
    mid = nu // 2
    n_pass, n_total, worst = 0, 0, {}
    for iv in range(1, nv):
        for half in (z[iv, mid:], z[iv, mid::-1]):
            _, feet = hyp2.signed_distances(half[:1], gam)
            foot = complex(feet[0])
            t = hyp2.tangent_direction(gam, foot)
            g1 = hyp2.geodesic_between(hyp2.DiskPoint(foot), hyp2.DiskPoint(foot + 1e-3 * 1j * t))
            kb = min(max(1e-3, 1.05 * float(np.max(np.abs(hyp2.discrete_curvature(half))))),
                     k_bound_cap)
            v = analyze.horizontal_graph_check(half, g1, kb)
            n_total += 1
            n_pass += v.passed
            if not v.passed and not worst:
                worst = dict(v.metrics, row=iv)
    graph = analyze.Verdict("horizontal_graph", n_pass == n_total,
                            {"sections": n_total, "passed": n_pass, "first_failure": worst})
    kb = min(max(1e-3, 1.05 * float(np.max(np.abs(hyp2.discrete_curvature(z[-1]))))), k_bound_cap)
    ua = [analyze.unique_asymptote_check(row, kb) for row in (z[-1], z[-1][::-1])]
    uniq = analyze.Verdict("unique_asymptote", all(v.passed for v in ua),
                           {"forward": ua[0].metrics, "backward": ua[1].metrics})
    return {"c1_convergence": c1, "horizontal_graph": graph, "unique_asymptote": uniq,
            "properness": analyze.properness_check(end)}


def build_report(d: hopf.HopfData, th: hopf.ThresholdSet, ends) -> analyze.EndReport:
    est = analyze.asymptotic_points(ends)
    verdicts = {}
    for j, end in enumerate(ends):
        for name, v in section_verdicts(end).items():
            verdicts[f"{name}_j{j}"] = v
    verdicts["asymptotic_points"] = analyze.Verdict(
        "asymptotic_points", est.cross_level < 1e-2,
        {"cross_level": est.cross_level, "angle_gap": est.angle_gap, "tail_spread": est.tail_spread},
    )
    try:
        C = float(ends[0].v[ends[0].v.shape[0] // 2, 0])
        samples = np.concatenate([analyze.section_decay_samples(d, th, e, j, C)
                                  for j, e in enumerate(ends)])
        fit = analyze.curvature_decay_fit(samples)
        decay = {"c1_fit": fit["c1_fit"], "r2_of_fit": fit["r2"], "c2_fit": fit["c2_fit"],
                 "n": fit["n"], "span": fit["span"], "no_decay": fit["no_decay"]}
    except MinendError as exc:
        decay = {"c1_fit": None, "r2_of_fit": None, "error": f"{type(exc).__name__}: {exc}"}
    return analyze.EndReport(d.m, d.beta, est.points, decay, verdicts)


def run(config_path, overrides: dict | None = None) -> ArtifactManifest:
    """Load a config file, apply CLI overrides and run its stages."""
    path = Path(config_path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config {config_path}: {exc}") from exc
    if overrides:
        data = dict(data)
        data.update({k: v for k, v in overrides.items() if v is not None})
    cfg = load_config(data)
    return Pipeline(cfg).run()


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="minend", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in STAGES + ("all",):
        sp = sub.add_parser(name, help=f"run the {name} stage" if name != "all" else
                            "run the stages listed in the config (default: every stage)")
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--out", help="output directory (overrides the config)")
        sp.add_argument("--no-cache", action="store_true", help="ignore and do not write the solve cache")
        sp.add_argument("--escape-radius", type=float, help="radius at which traces stop")
        sp.add_argument("--seed-levels", help='comma separated levels, e.g. "0,0.5C0,-2C0"')
        sp.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    over = {"out": args.out, "escape_radius": args.escape_radius}
    if args.no_cache:
        over["cache"] = False
    if args.seed_levels:
        over["levels"] = [s.strip() for s in args.seed_levels.split(",") if s.strip()]
    if args.command != "all":
        over["stages"] = [args.command]
    try:
        if args.command == "validate":
            data = json.loads(Path(args.config).read_text())
            data.update({k: v for k, v in over.items() if v is not None})
            cfg = load_config(data)
            print(dump_json(cfg.hopf.as_dict()))
            return 0
        manifest = run(args.config, over)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StageFailed as exc:
        print(f"stage failure: {exc}", file=sys.stderr)
        return 3
    for e in manifest.as_dict()["files"]:
        print(f"{e['kind']:16s} {e['path']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
