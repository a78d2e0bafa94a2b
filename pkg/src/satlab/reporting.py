"""Deterministic result serialization.

CSV columns are fixed per report type, floats are printed with 17
significant digits so parsing them back reproduces the double exactly,
and JSON is emitted with sorted keys and a schema tag. The SVG writer is
a small hand-rolled log-log scatter; no plotting dependency, identical
bytes for identical inputs.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "RATES_HEADER",
    "DIRECTIONS_HEADER",
    "SATURATION_HEADER",
    "BOUNDS_HEADER",
    "ADVERSARY_HEADER",
    "format_float",
    "write_csv",
    "write_json",
    "write_loglog_svg",
    "rate_rows",
    "direction_rows",
    "saturation_rows",
    "bound_rows",
    "adversary_rows",
    "rate_payload",
    "saturation_payload",
    "bound_payload",
    "adversary_payload",
    "constants_payload",
    "verification_payload",
]

RATES_HEADER = ("delta", "worst_error", "alpha", "rule", "converged")
DIRECTIONS_HEADER = (
    "delta", "kind", "index", "alpha", "error", "residual", "rule", "converged", "note",
)
SATURATION_HEADER = (
    "lam_k", "delta_k", "alpha_k", "error_k", "ratio_k", "delta_over_alpha", "checks_passed",
)
BOUNDS_HEADER = (
    "alpha", "error", "error_bound", "error_ok",
    "residual", "residual_bound", "residual_ok", "converged",
)
ADVERSARY_HEADER = (
    "lam_k", "delta_k", "alpha_k", "sq_error_noisy", "sq_error_exact", "sq_shift",
    "inner_product", "lower_bound", "pythagoras_residual",
    "sign_ok", "pythagoras_ok", "inner_identity_ok", "chain_ok", "all_passed",
)


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, header, rows) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
    except OSError as exc:
        raise InvalidInputError(f"cannot write {path}: {exc}") from exc


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_json(path, payload: dict) -> None:
    body = dict(payload)
    body.setdefault("satlab_schema", 1)
    text = json.dumps(_jsonable(body), sort_keys=True, indent=2, allow_nan=False)
    try:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    except OSError as exc:
        raise InvalidInputError(f"cannot write {path}: {exc}") from exc


# row builders: one tuple per CSV line, in report order


def rate_rows(report):
    rows = [
        (s.delta, s.worst_error, s.alpha, s.rule, s.converged)
        for s in report.samples
    ]
    rows.extend((delta, None, None, report.rule, False) for delta, _ in report.failures)
    rows.sort(key=lambda r: -r[0])
    return rows


def direction_rows(report):
    return [
        (delta, row.kind, row.index, row.alpha, row.error, row.residual,
         row.rule, row.converged, row.note)
        for delta, row in report.direction_rows
    ]


def saturation_rows(report):
    return [
        (r.lam_k, r.delta_k, r.alpha_k, r.error_k, r.ratio_k,
         r.delta_over_alpha, r.checks_passed)
        for r in report.rows
    ]


def bound_rows(report):
    return [
        (r.alpha, r.error, r.error_bound, r.error_ok,
         r.residual, r.residual_bound, r.residual_ok, r.converged)
        for r in report.rows
    ]


def adversary_rows(checks_list):
    return [
        (c.lam_k, c.delta_k, c.alpha_k, c.sq_error_noisy, c.sq_error_exact,
         c.sq_shift, c.inner_product, c.lower_bound, c.pythagoras_residual,
         c.sign_ok, c.pythagoras_ok, c.inner_identity_ok, c.chain_ok, c.all_passed)
        for c in checks_list
    ]


# JSON payload builders


def rate_payload(report) -> dict:
    return {
        "rule": report.rule,
        "slope": report.slope,
        "intercept": report.intercept,
        "r_squared": report.r_squared,
        "samples": [
            {
                "delta": s.delta,
                "worst_error": s.worst_error,
                "alpha": s.alpha,
                "rule": s.rule,
                "converged": s.converged,
                "argmax_kind": s.argmax_kind,
                "argmax_index": s.argmax_index,
            }
            for s in report.samples
        ],
        "failures": [
            {"delta": delta, "reason": reason} for delta, reason in report.failures
        ],
    }


def saturation_payload(report) -> dict:
    return {
        "ratio_floor": report.ratio_floor,
        "first_ratio": report.first_ratio,
        "ratio_trend": report.ratio_trend,
        "tail_min_delta_over_alpha": report.tail_min_delta_over_alpha,
        "first_delta_over_alpha": report.first_delta_over_alpha,
        "delta_over_alpha_trend": report.delta_over_alpha_trend,
        "rows": [
            {
                "k": r.k,
                "lam_k": r.lam_k,
                "delta_k": r.delta_k,
                "alpha_k": r.alpha_k,
                "error_k": r.error_k,
                "ratio_k": r.ratio_k,
                "delta_over_alpha": r.delta_over_alpha,
                "checks_passed": r.checks_passed,
                "converged": r.converged,
                "rule": r.rule,
                "note": r.note,
            }
            for r in report.rows
        ],
    }


def bound_payload(report) -> dict:
    return {
        "delta": report.delta,
        "norm_u": report.norm_u,
        "lipschitz_times_norm_u": report.lipschitz_times_norm_u,
        "checked": report.checked,
        "violations": report.violations,
        "rows": [
            {
                "alpha": r.alpha,
                "error": r.error,
                "error_bound": r.error_bound,
                "error_ok": r.error_ok,
                "residual": r.residual,
                "residual_bound": r.residual_bound,
                "residual_ok": r.residual_ok,
                "converged": r.converged,
            }
            for r in report.rows
        ],
    }


def adversary_payload(checks_list) -> dict:
    total = len(checks_list)
    passed = sum(1 for c in checks_list if c.all_passed)
    return {
        "cells": total,
        "cells_passed": passed,
        "rows": [
            {
                "lam_k": c.lam_k,
                "delta_k": c.delta_k,
                "alpha_k": c.alpha_k,
                "sq_error_noisy": c.sq_error_noisy,
                "sq_error_exact": c.sq_error_exact,
                "sq_shift": c.sq_shift,
                "inner_product": c.inner_product,
                "lower_bound": c.lower_bound,
                "pythagoras_residual": c.pythagoras_residual,
                "sign_ok": c.sign_ok,
                "pythagoras_ok": c.pythagoras_ok,
                "inner_identity_ok": c.inner_identity_ok,
                "chain_ok": c.chain_ok,
                "all_passed": c.all_passed,
            }
            for c in checks_list
        ],
    }


def constants_payload(report) -> dict:
    return {
        "kind": report.kind,
        "kappa0": report.kappa0,
        "lipschitz_analytic": report.lipschitz_analytic,
        "lipschitz_sampled": report.lipschitz_sampled,
        "derivative_sup": report.derivative_sup,
        "operator_norm": report.operator_norm,
        "prior_gap_norm": report.prior_gap_norm,
        "rho": report.rho,
        "source_nu": report.source_nu,
        "source_norm": report.source_norm,
        "lipschitz_times_norm_u": report.lipschitz_times_norm_u,
        "c0_range": report.c0_range,
        "c0_rule": report.c0_rule,
        "comparison_factor": report.comparison_factor,
        "tau": report.tau,
        "gamma": report.gamma,
    }


def verification_payload(report) -> dict:
    return {
        "all_passed": report.all_passed,
        "total_failed": report.total_failed,
        "suites": {
            name: {"passed": s.passed, "failed": s.failed, "skipped": s.skipped}
            for name, s in report.suites
        },
    }


def write_loglog_svg(path, points, slope, intercept, *, title="", xlabel="x", ylabel="y") -> None:
    """Log-log scatter with the fitted power law and a slope label.

    ``intercept`` is the natural-log intercept from the fit, i.e. the
    line is y = exp(intercept) * x**slope.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if not pts:
        raise InvalidInputError("svg plot needs at least one point")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise InvalidInputError("svg plot needs positive coordinates")

    width, height = 640, 480
    left, right, top, bottom = 80, 24, 42, 56
    log_x = [math.log10(x) for x, _ in pts]
    log_y = [math.log10(y) for _, y in pts]
    x_lo, x_hi = math.floor(min(log_x)), math.ceil(max(log_x))
    y_lo, y_hi = math.floor(min(log_y)), math.ceil(max(log_y))
    if x_hi == x_lo:
        x_hi += 1
    if y_hi == y_lo:
        y_hi += 1

    def sx(v):
        return left + (v - x_lo) / (x_hi - x_lo) * (width - left - right)

    def sy(v):
        return height - bottom - (v - y_lo) / (y_hi - y_lo) * (height - top - bottom)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        f'<text x="{width / 2:.2f}" y="24" text-anchor="middle" '
        f'font-family="monospace" font-size="15" fill="#222222">{title}</text>',
    ]

    # decade grid and tick labels
    for d in range(x_lo, x_hi + 1):
        x = sx(d)
        parts.append(
            f'<line x1="{x:.2f}" y1="{top}" x2="{x:.2f}" y2="{height - bottom}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{height - bottom + 18}" text-anchor="middle" '
            f'font-family="monospace" font-size="12" fill="#444444">1e{d}</text>'
        )
    for d in range(y_lo, y_hi + 1):
        y = sy(d)
        parts.append(
            f'<line x1="{left}" y1="{y:.2f}" x2="{width - right}" y2="{y:.2f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-family="monospace" font-size="12" fill="#444444">1e{d}</text>'
        )

    parts.append(
        f'<rect x="{left}" y="{top}" width="{width - left - right}" '
        f'height="{height - top - bottom}" fill="none" stroke="#333333" stroke-width="1"/>'
    )

    # fitted line across the data span, in log10 coordinates
    b10 = float(intercept) / math.log(10.0)
    fx0, fx1 = min(log_x), max(log_x)
    fy0 = float(slope) * fx0 + b10
    fy1 = float(slope) * fx1 + b10
    parts.append(
        f'<line x1="{sx(fx0):.2f}" y1="{sy(fy0):.2f}" x2="{sx(fx1):.2f}" '
        f'y2="{sy(fy1):.2f}" stroke="#c0392b" stroke-width="1.5"/>'
    )

    for lx, ly in zip(log_x, log_y):
        parts.append(
            f'<circle cx="{sx(lx):.2f}" cy="{sy(ly):.2f}" r="4" '
            f'fill="#2a6f97" fill-opacity="0.85"/>'
        )

    parts.append(
        f'<text x="{width - right - 8}" y="{top + 20}" text-anchor="end" '
        f'font-family="monospace" font-size="14" fill="#c0392b">slope {float(slope):.3f}</text>'
    )
    parts.append(
        f'<text x="{width / 2:.2f}" y="{height - 12}" text-anchor="middle" '
        f'font-family="monospace" font-size="13" fill="#222222">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{height / 2:.2f}" text-anchor="middle" '
        f'font-family="monospace" font-size="13" fill="#222222" '
        f'transform="rotate(-90 18 {height / 2:.2f})">{ylabel}</text>'
    )
    parts.append("</svg>")

    try:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("\n".join(parts) + "\n")
    except OSError as exc:
        raise InvalidInputError(f"cannot write {path}: {exc}") from exc
