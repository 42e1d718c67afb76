"""
Experiments along Teichmueller geodesics: per-time scans of one curve, the quasi-convexity
constant of the resulting series, average slopes, distance lower bounds and the seeded
property suite over square-tiled surfaces.

"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Optional

import numpy as np

from .config import DEFAULTS
from .curves import (
    FlatCurve,
    flat_length,
    hv_lengths,
    landmark_curve,
    tighten,
    torus_curve,
    trace_chain,
)
from .decomposition import find_cylinders, find_short_curves
from .errors import BudgetError, ConstructionError, NonConvergenceError, PreconditionError
from .estimators import (
    Direction,
    Kind,
    arc_cost,
    arcs_bound,
    classify_essential,
    curve_arcs,
    ext_estimate,
    ext_lower_bound,
    hyp_estimate,
    hyp_lower_bound,
    maskit_band,
)
from .flow import flow_curve, flow_surface, make_scan
from .geometry.develop import Budget
from .geometry.utils import cross, unit
from .surface import build_flat_torus, build_slit_tori, build_square_tiled

logger = logging.getLogger(__name__)

CSV_HEADER = ("t", "flat_len", "h", "v", "ext", "hyp", "ext_lb", "hyp_lb", "class", "case", "dominance", "flags")


# ---- scans -------------------------------------------------------------------------------


@dataclass
class ScanRow:
    t: float
    flat_len: float = math.nan
    h: float = math.nan
    v: float = math.nan
    ext: float = math.nan
    hyp: float = math.nan
    ext_lb: float = math.nan
    hyp_lb: float = math.nan
    ext_arcs: float = math.nan
    hyp_arcs: float = math.nan
    ext_class: Optional[dict] = None
    hyp_class: Optional[dict] = None
    summary: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    @property
    def clean(self):
        return not any(flag in ("budget", "tighten") for flag in self.flags)

    def value(self, kind):
        return self.ext if Kind(kind) is Kind.EXT else self.hyp

    def classification(self, kind):
        return self.ext_class if Kind(kind) is Kind.EXT else self.hyp_class

    def csv_row(self):
        cls = self.ext_class or {}

        return [
            repr(self.t),
            repr(self.flat_len),
            repr(self.h),
            repr(self.v),
            repr(self.ext),
            repr(self.hyp),
            repr(self.ext_lb),
            repr(self.hyp_lb),
            cls.get("direction", ""),
            str(cls.get("case", "")),
            repr(cls["dominance"]) if "dominance" in cls else "",
            ";".join(self.flags),
        ]

    def to_dict(self):
        return {
            "t": self.t,
            "flat_len": self.flat_len,
            "h": self.h,
            "v": self.v,
            "ext": self.ext,
            "hyp": self.hyp,
            "ext_lb": self.ext_lb,
            "hyp_lb": self.hyp_lb,
            "ext_arcs": self.ext_arcs,
            "hyp_arcs": self.hyp_arcs,
            "ext_class": self.ext_class,
            "hyp_class": self.hyp_class,
            "summary": self.summary,
            "flags": list(self.flags),
        }


@dataclass
class ScanResult:
    times: list
    rows: list
    surface: str = ""
    curve: str = ""
    seed: Optional[int] = None
    m0: float = DEFAULTS.m0

    def clean_rows(self):
        return [row for row in self.rows if row.clean]

    def series(self, kind):
        rows = self.clean_rows()

        return np.array([row.t for row in rows]), np.array([row.value(kind) for row in rows])

    def to_dict(self):
        return {
            "schema": "teichscan-scan/1",
            "surface": self.surface,
            "curve": self.curve,
            "seed": self.seed,
            "m0": self.m0,
            "times": list(self.times),
            "rows": [row.to_dict() for row in self.rows],
        }


def _tightened(surface, curve, defaults, flags):
    try:
        return curve.with_chain(tighten(surface, curve.chain(), defaults.tighten_budget))
    except NonConvergenceError as error:
        logger.warning("%s", error)
        flags.append("tighten")
        return curve.with_chain(error.best)


def evaluate(surface, curve, tt, t=0.0, defaults=DEFAULTS):
    """
    Evaluates every estimate of a tightened curve against a decomposition of its surface.

    """
    row = ScanRow(float(t))

    row.flat_len = flat_length(curve)
    row.h, row.v = hv_lengths(curve)

    ext = ext_estimate(surface, curve, tt)
    hyp = hyp_estimate(surface, curve, tt)
    row.ext, row.hyp = ext.total, hyp.total
    row.ext_lb = ext_lower_bound(surface, curve, tt).total
    row.hyp_lb = hyp_lower_bound(surface, curve, tt).total
    row.flags.extend(flag for flag in ext.flags if flag not in row.flags)

    row.ext_class = classify_essential(surface, curve, tt, Kind.EXT, ext, defaults.balanced_tolerance).to_dict()
    row.hyp_class = classify_essential(surface, curve, tt, Kind.HYP, hyp, defaults.balanced_tolerance).to_dict()

    costs = [arc_cost(surface, arc, tt) for arc in curve_arcs(curve, tt)]
    row.ext_arcs = arcs_bound(costs, Kind.EXT)
    row.hyp_arcs = arcs_bound(costs, Kind.HYP)
    if any(cost.fallback for cost in costs):
        row.flags.append("arc-fallback")

    row.summary = tt.summary()

    return row


def _scan_sample(args):
    """
    Evaluates one time sample. Runs in worker processes.

    """
    surface, curve, t, m0, defaults = args

    flowed = flow_surface(surface, t)
    flags = []
    moved = _tightened(flowed, flow_curve(curve, t), defaults, flags)

    try:
        tt = find_short_curves(flowed, m0, defaults, Budget(defaults.develop_budget))
    except BudgetError as error:
        logger.warning("Time %s: %s", t, error)
        row = ScanRow(float(t), flags=flags + ["budget"])
        row.flat_len = flat_length(moved)
        row.h, row.v = hv_lengths(moved)
        return row

    row = evaluate(flowed, moved, tt, t, defaults)
    row.flags = flags + row.flags
    logger.debug("Scanned t = %s: ext %.6g, hyp %.6g", t, row.ext, row.hyp)

    return row


def _map(func, items, jobs):
    """
    Maps func over items, in worker processes when jobs > 1. Order is preserved.

    """
    if not jobs or jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    with Pool(min(jobs, len(items))) as pool:
        return pool.map(func, items)


def scan(s, gamma, grid, m0=DEFAULTS.m0, defaults=DEFAULTS, jobs=1, seed=None):
    """
    Flows the surface to each time of the grid, re-tightens the curve there and records
    its lengths, estimates and classification.
    NOTE: A sample that runs out of budget is flagged and the scan carries on.

    """
    times = [float(t) for t in grid]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise PreconditionError("Scan times must be strictly increasing")
    if not times:
        raise PreconditionError("Scan needs at least one time")

    rows = _map(_scan_sample, [(s, gamma, t, m0, defaults) for t in times], jobs)

    flagged = sum(1 for row in rows if not row.clean)
    if flagged:
        logger.warning("%s of %s scan rows are flagged", flagged, len(rows))

    return ScanResult(times, rows, repr(s), gamma.name, seed, m0)


# ---- quasi-convexity ---------------------------------------------------------------------


@dataclass
class QuasiConvexityReport:
    k_ext: float
    k_hyp: float
    argmax_ext: Optional[tuple]
    argmax_hyp: Optional[tuple]

    def to_dict(self):
        return {
            "schema": "teichscan-quasiconvexity/1",
            "K_ext": self.k_ext,
            "K_hyp": self.k_hyp,
            "argmax_ext": list(self.argmax_ext) if self.argmax_ext else None,
            "argmax_hyp": list(self.argmax_hyp) if self.argmax_hyp else None,
        }


def quasiconvexity_constant(times, values):
    """
    Returns (K, (a, b, c)): the largest values[b] / max(values[a], values[c]) over a < b < c,
    floored at 1.

    """
    values = np.asarray(values, dtype=float)
    if len(values) < 3:
        raise PreconditionError(f"Quasi-convexity needs at least 3 samples, got {len(values)}")

    # Smallest value strictly before / after each index
    before = np.minimum.accumulate(values)
    after = np.minimum.accumulate(values[::-1])[::-1]
    before_at = [int(np.argmin(values[: j + 1])) for j in range(len(values))]
    after_at = [j + int(np.argmin(values[j:])) for j in range(len(values))]

    best, triple = -math.inf, None
    for j in range(1, len(values) - 1):
        floor = max(before[j - 1], after[j + 1])
        if floor <= 0:
            continue

        ratio = values[j] / floor
        if ratio > best:
            best = ratio
            triple = (times[before_at[j - 1]], times[j], times[after_at[j + 1]])

    return float(max(best, 1.0)), triple


def quasiconvexity(result):
    """
    Measures the quasi-convexity constant of both series of a scan over its clean rows.

    """
    rows = result.clean_rows()
    if len(rows) < 3:
        raise PreconditionError(f"Quasi-convexity needs at least 3 clean rows, got {len(rows)}")

    times = [row.t for row in rows]
    k_ext, at_ext = quasiconvexity_constant(times, [row.ext for row in rows])
    k_hyp, at_hyp = quasiconvexity_constant(times, [row.hyp for row in rows])

    return QuasiConvexityReport(k_ext, k_hyp, at_ext, at_hyp)


def convexity_violations(result, kind=Kind.EXT):
    """
    Returns every sampled triple whose middle value lies strictly above the chord of its ends.

    """
    times, values = result.series(kind)
    found = []

    for i in range(len(times)):
        for j in range(i + 1, len(times)):
            for k in range(j + 1, len(times)):
                share = (times[j] - times[i]) / (times[k] - times[i])
                chord = values[i] + share * (values[k] - values[i])
                if values[j] > chord * (1 + 1e-12):
                    found.append((float(times[i]), float(times[j]), float(times[k])))

    return found


def slope_report(result, first, second):
    """
    Returns {kind: (slope on first, slope on second)}: average slopes between interval ends,
    reading values off the clean rows by linear interpolation.

    """
    report = {}
    for kind in (Kind.EXT, Kind.HYP):
        times, values = result.series(kind)
        slopes = []

        for lo, hi in (first, second):
            if not hi > lo:
                raise PreconditionError(f"Empty slope interval ({lo}, {hi})")
            if len(times) == 0 or lo < times[0] - 1e-9 or hi > times[-1] + 1e-9:
                raise PreconditionError(f"Slope interval ({lo}, {hi}) leaves the scanned range")

            left, right = np.interp([lo, hi], times, values)
            slopes.append(float((right - left) / (hi - lo)))

        report[kind.value] = tuple(slopes)

    return report


def kerckhoff_gap(ext_at_x, ext_at_u):
    """
    Returns 1/2 log(ext_at_u / ext_at_x), a lower bound for the Teichmueller distance.

    """
    if not (ext_at_x > 0 and ext_at_u > 0):
        raise PreconditionError(f"Kerckhoff gap needs positive extremal lengths, got {ext_at_x} and {ext_at_u}")

    return 0.5 * math.log(ext_at_u / ext_at_x)


def distance_lower_bound(scans, i, j):
    """
    Returns the best lower bound for the distance between samples i and j over several scans
    of the same grid.

    """
    if isinstance(scans, ScanResult):
        scans = [scans]

    best = 0.0
    for result in scans:
        a, b = result.rows[i], result.rows[j]
        if a.clean and b.clean and a.ext > 0 and b.ext > 0:
            best = max(best, abs(kerckhoff_gap(a.ext, b.ext)))

    return best


# ---- slit tori ---------------------------------------------------------------------------


@dataclass
class SlitToriExample:
    a: float
    scan: ScanResult
    report: QuasiConvexityReport
    slopes: dict
    violations: list
    gap: float

    def to_dict(self):
        return {
            "schema": "teichscan-quasiconvexity/1",
            "a": self.a,
            "K_ext": self.report.k_ext,
            "K_hyp": self.report.k_hyp,
            "argmax_ext": list(self.report.argmax_ext) if self.report.argmax_ext else None,
            "argmax_hyp": list(self.report.argmax_hyp) if self.report.argmax_hyp else None,
            "slopes": {kind: list(values) for kind, values in self.slopes.items()},
            "violations": [list(v) for v in self.violations],
            "kerckhoff_gap": self.gap,
        }


def slit_tori_example(a, grid=None, m0=DEFAULTS.m0, defaults=DEFAULTS, jobs=1):
    """
    Scans the curve alpha on two slit tori glued along a cylinder of circumference and
    height a, then measures its quasi-convexity, its average slopes before and after t = 0
    and the midpoint violations of convexity.

    """
    surface = build_slit_tori(a)
    alpha = landmark_curve(surface, "alpha")
    if grid is None:
        grid = make_scan(-2.0, 0.5 * math.log(1 / a**2), defaults.t_step)

    # The triangles are a/2 wide, so developments cross about 1/a of them
    scale = max(1.0, 0.1 / a)
    if scale > 1.0:
        defaults = defaults.model_copy(update={"develop_budget": int(defaults.develop_budget * scale)})

    result = scan(surface, alpha, grid, m0, defaults, jobs)
    report = quasiconvexity(result)

    clean = result.clean_rows()
    slopes = {}
    if clean:
        lo, hi = clean[0].t, clean[-1].t
        first = (max(lo, -2.0), min(0.0, hi))
        second = (max(0.0, lo), min(0.5 * math.log(1 / a**2), hi))
        if first[1] > first[0] and second[1] > second[0]:
            slopes = slope_report(result, first, second)
        if len(clean) < len(result.rows):
            flagged = len(result.rows) - len(clean)
            logger.warning("Slit tori a = %s: %s of %s rows flagged", a, flagged, len(result.rows))

    gap = kerckhoff_gap(clean[0].ext, clean[-1].ext) if clean and clean[0].ext > 0 and clean[-1].ext > 0 else 0.0

    logger.info("Slit tori a = %s: K_ext %.6g, K_hyp %.6g", a, report.k_ext, report.k_hyp)

    return SlitToriExample(a, result, report, slopes, convexity_violations(result), gap)


# ---- suite -------------------------------------------------------------------------------


SUITE_DIRECTIONS = {"horizontal": (1.0, 0.0), "vertical": (0.0, 1.0), "diagonal": (1.0, 1.0)}


def random_square_tiled(rng, max_squares=12):
    """
    Draws a connected square-tiled surface with at most max_squares squares.

    """
    while True:
        n = int(rng.integers(1, max_squares + 1))
        horiz = [int(i) for i in rng.permutation(n)]
        vert = [int(i) for i in rng.permutation(n)]
        try:
            return horiz, vert, build_square_tiled(horiz, vert)
        except ConstructionError:
            continue


def suite_curves(surface, count=3):
    """
    Returns boundary curves of a horizontal, a vertical and a diagonal cylinder, topped up
    with the shortest cylinders of other directions until there are count curves.

    """
    bound = math.sqrt(2) * surface.area() + 1e-9
    cylinders = find_cylinders(surface, bound)
    curves = []
    used = []

    def take(cylinder, name):
        boundary = cylinder.boundary_curve("right").chain()
        curves.append(FlatCurve(tighten(surface, boundary), 1.0, name))
        used.append(cylinder.direction)

    for name, direction in SUITE_DIRECTIONS.items():
        target = unit(np.array(direction))
        for cylinder in cylinders:
            if abs(cross(cylinder.direction, target)) <= 1e-9:
                take(cylinder, name)
                break

    for cylinder in sorted(cylinders, key=lambda c: c.circumference):
        if len(curves) >= count:
            break
        if any(abs(cross(cylinder.direction, u)) <= 1e-9 for u in used):
            continue
        h, v = cylinder.direction
        take(cylinder, f"slope-{math.degrees(math.atan2(v, h)):.1f}")

    if len(curves) < count:
        logger.warning("Only %s cylinder directions within %.6g", len(curves), bound)

    return curves


@dataclass
class Member:
    label: str
    surface: object
    curves: list


def _ratio(numerator, denominator):
    if denominator > 0 and math.isfinite(numerator):
        return numerator / denominator

    return math.nan


def _intersects(curve_pieces, tt, piece):
    """
    Checks if traced pieces pass through a thick piece outside the short cylinders.

    """
    for p in curve_pieces.pieces:
        middle = (p.start + p.end) / 2
        if any(a.cylinder.contains(p.tri, middle) for a in tt.shorts):
            continue
        if tt.piece_at(p.tri, middle) is piece:
            return True

    return False


def _member_report(args):
    """
    Runs every suite check on one surface. Runs in worker processes.

    """
    member, times, m0, defaults = args
    s = member.surface

    decompositions = {}
    flags = []
    for t in times:
        try:
            decompositions[t] = find_short_curves(flow_surface(s, t), m0, defaults, Budget(defaults.develop_budget))
        except BudgetError as error:
            logger.warning("%s at t = %s: %s", member.label, t, error)
            flags.append(f"budget@{t}")

    checks = {
        "ext_length": [],
        "subsurface": [],
        "monotone": [],
        "arcs": [],
        "k": [],
        "lower": [],
        "maskit": [],
    }
    curves = []

    for curve in member.curves:
        rows = []
        for t in times:
            if t not in decompositions:
                continue
            tt = decompositions[t]
            row_flags = []
            moved = _tightened(tt.surface, flow_curve(curve, t), defaults, row_flags)
            row = evaluate(tt.surface, moved, tt, t, defaults)
            row.flags = row_flags + row.flags
            rows.append(row)

        result = ScanResult([r.t for r in rows], rows, member.label, curve.name, None, m0)
        clean = result.clean_rows()

        for r in clean:
            checks["arcs"].append(_ratio(r.ext_arcs, r.ext))
            checks["arcs"].append(_ratio(r.hyp_arcs, r.hyp))
            checks["lower"].append(_ratio(r.ext_lb, r.ext))
            checks["lower"].append(_ratio(r.hyp_lb, r.hyp))
            if member.label == "torus" and r.ext > 0 and r.hyp > 0:
                band = maskit_band(r.ext, r.hyp)
                checks["maskit"].append(max(band.lower / band.ratio, band.ratio / band.upper))

        for i, ra in enumerate(clean):
            for rb in clean[i + 1 :]:
                if "short-curve" in ra.flags and "short-curve" in rb.flags:
                    ratio = (ra.ext / ra.flat_len) / (math.exp(rb.t - ra.t) * rb.ext / rb.flat_len)
                    checks["ext_length"].append(ratio)
                for kind in (Kind.EXT, Kind.HYP):
                    cls = ra.classification(kind)
                    if cls and cls["direction"] == Direction.HORIZONTAL.value:
                        checks["monotone"].append(_ratio(ra.value(kind), rb.value(kind)))

        k_ext = k_hyp = math.nan
        if len(clean) >= 3:
            report = quasiconvexity(result)
            k_ext, k_hyp = report.k_ext, report.k_hyp
            checks["k"].extend([k_ext, k_hyp])

        curves.append({"curve": curve.name, "K_ext": k_ext, "K_hyp": k_hyp, "rows": len(rows), "clean": len(clean)})

    # Thick pieces at time a against short curves at later times b
    ordered = sorted(decompositions)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1 :]:
            for beta in decompositions[b].shorts:
                pulled = trace_chain(decompositions[a].surface, flow_curve(beta.core, a - b).chain())
                for piece in decompositions[a].pieces:
                    if piece.degenerate or piece.diam <= 0:
                        continue
                    if _intersects(pulled, decompositions[a], piece):
                        checks["subsurface"].append(beta.d / (math.exp(b - a) * piece.diam))

    constants = {name: _finite_max(values) for name, values in checks.items()}

    return {"surface": member.label, "curves": curves, "constants": constants, "flags": flags}


def _finite_max(values):
    finite = [v for v in values if math.isfinite(v)]

    return max(finite) if finite else None


def _members(seed, size):
    rng = np.random.default_rng(seed)
    torus = build_flat_torus(1.0, 1.0)
    members = [Member("torus", torus, [torus_curve(torus, 1, 0), torus_curve(torus, 0, 1), torus_curve(torus, 1, 1)])]

    while len(members) < size:
        horiz, vert, surface = random_square_tiled(rng)
        curves = suite_curves(surface)
        members.append(Member(f"square-tiled {horiz} {vert}", surface, curves))

    return members


def property_suite(seed=0, size=20, grid=None, m0=DEFAULTS.m0, defaults=DEFAULTS, jobs=1):
    """
    Runs the cross-checks on the unit torus and size - 1 seeded square-tiled surfaces and
    compares each measured constant with its cap.

    """
    if size < 1:
        raise PreconditionError(f"Suite size must be positive, got {size}")

    times = [float(t) for t in (grid if grid is not None else make_scan(-3.0, 3.0, defaults.t_step))]
    members = _members(seed, size)

    reports = _map(_member_report, [(member, times, m0, defaults) for member in members], jobs)

    caps = {
        "ext_length": defaults.cap_ext_length,
        "subsurface": defaults.cap_subsurface,
        "monotone": defaults.cap_monotone,
        "arcs": defaults.cap_arcs,
        "k": defaults.cap_k,
        "lower": defaults.cap_lower,
        "maskit": defaults.cap_maskit,
    }

    constants = {}
    for name in caps:
        values = [r["constants"][name] for r in reports if r["constants"][name] is not None]
        constants[name] = max(values) if values else None

    passed = {name: constants[name] is None or constants[name] <= cap for name, cap in caps.items()}
    for name, ok in passed.items():
        verdict = "pass" if ok else "FAIL"
        logger.info("Suite check %s: %s (constant %s, cap %s)", name, verdict, constants[name], caps[name])

    return {
        "schema": "teichscan-suite/1",
        "seed": seed,
        "size": size,
        "m0": m0,
        "times": times,
        "constants": constants,
        "caps": caps,
        "passed": passed,
        "members": reports,
    }
