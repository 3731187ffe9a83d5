"""Serialization and rendering: JSON records, CSV rows, text and SVG diagrams.

Everything here is deterministic for fixed input: no timestamps, sorted
JSON keys and fixed float formatting in SVG coordinates.
"""
from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from xml.sax.saxutils import escape

from .hecke import HeckeBlock
from .hodge import HHVector
from .lattice import SOD, Block, LineBundle, theta_lambda_coords
from .vanishing import Certificate, Check

SCHEMA_VERSION = "1.0"


# ------------------------------------------------------------------ JSON

def num(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return x


def block_to_json(b: Block) -> dict:
    out = {"family": b.family, "sym": b.sym, "twist": [b.twist.m, b.twist.n], "annotation": b.annotation}
    if b.ambient != "M":
        out["ambient"] = b.ambient
    if b.serre_twist:
        out["serre_twist"] = b.serre_twist
    if b.dual:
        out["dual"] = True
    if b.stratum is not None:
        out["stratum"] = b.stratum
    return out


def block_from_json(d: dict) -> Block:
    return Block(d["family"], d["sym"], LineBundle(*d["twist"]), ambient=d.get("ambient", "M"),
                 serre_twist=d.get("serre_twist", 0), dual=d.get("dual", False),
                 annotation=d.get("annotation"), stratum=d.get("stratum"))


def sod_to_json(sod: SOD, g: int | None = None) -> dict:
    out = {
        "provenance": sod.provenance,
        "count": len(sod),
        "megablocks": [{"label": lab, "blocks": [block_to_json(b) for b in bs]} for lab, bs in sod.groups()],
    }
    if g is not None:
        out["text"] = sod_text(sod, g)
    return out


def sod_from_json(d: dict) -> SOD:
    return SOD.from_groups([(m["label"], [block_from_json(b) for b in m["blocks"]]) for m in d["megablocks"]],
                           d.get("provenance", ""))


def check_to_json(c: Check) -> dict:
    return {
        "predicate": c.predicate,
        "args": {k: num(v) for k, v in c.args},
        "conditions": [[q.label, num(q.lo), "<" if q.strict else "<=", num(q.hi)] for q in c.conditions],
        "holds": c.holds,
        "tight": c.tight,
        "conditional": c.conditional,
    }


def cert_to_json(c: Certificate) -> dict:
    return {
        "anchor": c.rule,
        "context": c.context,
        "verdict": c.verdict,
        "reduction": list(c.reduction),
        "checks": [check_to_json(ch) for ch in c.checks],
        "note": c.note,
    }


def hh_to_json(v: HHVector) -> dict[str, int]:
    return {str(n): d for n, d in v.dims}


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


# ------------------------------------------------------------------ text

def block_text(b: Block, g: int) -> str:
    if b.family in ("TensorE", "BarTensorE", "TensorF", "BarTensorF") and b.ambient in ("N", "NHat"):
        return HeckeBlock.from_block(b, g).label
    if b.family == "DSheaf":
        tw = "" if b.twist.is_trivial() else f"O({b.twist.m},{b.twist.n})"
        return f"{tw}D^{b.sym}_{b.stratum}"
    x, y = theta_lambda_coords(b.twist, g)
    parts = []
    if x:
        parts.append("θ" if x == 1 else f"θ^{x}")
    if y:
        parts.append("Λ" if y == 1 else f"Λ^{y}")
    bar = "bar " if b.barred else ""
    core = {"TensorDualF": "F∨", "BarTensorDualF": "F∨", "TensorF": "F", "BarTensorF": "F",
            "TensorE": "E", "BarTensorE": "E", "StructureSheaf": "O", "Mutated": "F∨"}[b.family]
    body = f"{bar}{core}^{b.sym}" if b.sym else "O"
    s = " ".join(parts + [body])
    if b.family == "Mutated":
        s = f"[{s}]"
    if b.annotation in ("InK", "InKDual"):
        s += f"∈{b.annotation}"
    return s


def sod_text(sod: SOD, g: int) -> str:
    inner = ", ".join(f"{lab}: ⟨{', '.join(block_text(b, g) for b in bs)}⟩" for lab, bs in sod.groups())
    return f"⟨{inner}⟩"


# ------------------------------------------------------------------- CSV

CSV_FIELDS = ["stage", "megablock", "position", "family", "sym", "twist_m", "twist_n", "annotation"]


def blocks_csv(stages: list[tuple[str, SOD]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for name, sod in stages:
        pos = 0
        for lab, bs in sod.groups():
            for b in bs:
                w.writerow([name, lab, pos, b.family, b.sym, b.twist.m, b.twist.n, b.annotation or ""])
                pos += 1
    return buf.getvalue()


# ------------------------------------------------------------------- SVG

def _f(v: float) -> str:
    return f"{v:.2f}"


def _svg(width: int, height: int, body: list[str], title: str) -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<title>{escape(title)}</title>",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]


def twill_svg(trajectories: list[tuple[int, int, Fraction]], events: list, t_max, x_max,
              title: str = "Farey Twill") -> str:
    """trajectories: (k, s, birth); events: objects with t, x, kind."""
    W, H, M = 720, 480, 48
    t_max, x_max = Fraction(t_max), Fraction(x_max)
    sx = lambda t: M + float(t) / max(float(t_max), 1e-9) * (W - 2 * M)
    sy = lambda x: H - M - min(float(x), float(x_max)) / max(float(x_max), 1e-9) * (H - 2 * M)
    body = [f'<line class="axis" x1="{M}" y1="{H - M}" x2="{W - M}" y2="{H - M}" stroke="black"/>',
            f'<line class="axis" x1="{M}" y1="{M}" x2="{M}" y2="{H - M}" stroke="black"/>',
            f'<text x="{W - M}" y="{H - M + 32}" font-size="12" text-anchor="end">t</text>',
            f'<text x="{M - 30}" y="{M}" font-size="12">x</text>']
    for t in range(int(t_max) + 1):
        body.append(f'<line class="tick" x1="{_f(sx(t))}" y1="{H - M}" x2="{_f(sx(t))}" y2="{H - M + 5}" stroke="black"/>')
        body.append(f'<text x="{_f(sx(t))}" y="{H - M + 18}" font-size="11" text-anchor="middle">{t}</text>')
    for x in range(int(x_max) + 1):
        body.append(f'<text x="{M - 8}" y="{_f(sy(x) + 4)}" font-size="10" text-anchor="end">{x}</text>')
    for k, s, birth in sorted(trajectories):
        pts = []
        steps = 96
        for j in range(steps + 1):
            t = Fraction(birth) + (t_max - Fraction(birth)) * Fraction(j, steps)
            if t <= k:
                if s == 0:
                    pts.append((t, Fraction(0)))
                continue
            x = Fraction(0) if s == 0 else Fraction(s) / (t - k)
            pts.append((t, min(x, x_max)))
        if len(pts) < 2:
            continue
        d = " ".join(f"{_f(sx(t))},{_f(sy(x))}" for t, x in pts)
        body.append(f'<polyline class="strand" data-k="{k}" data-s="{s}" points="{d}" fill="none" '
                    f'stroke="{PALETTE[k % len(PALETTE)]}" stroke-width="1.2"/>')
    for ev in sorted(events, key=lambda e: (e.t, e.x, e.kind)):
        cx, cy = _f(sx(ev.t)), _f(sy(ev.x))
        tag = f'data-t="{num(ev.t)}" data-x="{num(ev.x)}"'
        if ev.kind == "mutation":
            body.append(f'<circle class="mutation" {tag} cx="{cx}" cy="{cy}" r="4" fill="black"/>')
        else:
            body.append(f'<rect class="transposition" {tag} x="{_f(sx(ev.t) - 3)}" y="{_f(sy(ev.x) - 3)}" '
                        f'width="6" height="6" fill="none" stroke="gray"/>')
    return _svg(W, H, body, title)


def _row_boxes(labels: list[str], y: float, x0: float, dx: float, cls: str) -> list[str]:
    out = []
    for j, lab in enumerate(labels):
        cx = x0 + j * dx
        out.append(f'<text class="{cls}" x="{_f(cx)}" y="{_f(y)}" font-size="9" text-anchor="middle">'
                   f'{escape(lab)}</text>')
    return out


def plain_weave_svg(source: SOD, final: SOD, origins: list[int], g: int,
                    title: str = "Plain Weave") -> str:
    n = len(source)
    dx = 18
    W = max(240, 2 * 40 + dx * max(n - 1, 1))
    H = 320
    x0, top, bot = 40, 70, 250
    body = []
    colors = {"InK": "#1f77b4", "InKDual": "#d62728", "DescendsToN": "#2ca02c", None: "gray"}
    final_blocks = list(final.blocks)
    for j, o in enumerate(origins):
        b = final_blocks[j]
        x1, x2 = x0 + o * dx, x0 + j * dx
        body.append(f'<path class="strand" data-from="{o}" data-to="{j}" '
                    f'd="M {_f(x1)} {top} C {_f(x1)} {(top + bot) // 2} {_f(x2)} {(top + bot) // 2} {_f(x2)} {bot}" '
                    f'fill="none" stroke="{colors[b.annotation]}" stroke-width="1"/>')
    for sod, y, dy in ((source, top, -26), (final, bot, 36)):
        pos = 0
        for lab, bs in sod.groups():
            if bs:
                a, b = x0 + pos * dx, x0 + (pos + len(bs) - 1) * dx
                body.append(f'<line class="brace" x1="{_f(a - 6)}" y1="{y + dy // 2}" x2="{_f(b + 6)}" '
                            f'y2="{y + dy // 2}" stroke="black"/>')
                body.append(f'<text class="megablock" x="{_f((a + b) / 2)}" y="{y + dy}" font-size="12" '
                            f'text-anchor="middle">{escape(lab)}</text>')
            for j, blk in enumerate(bs):
                body.append(f'<circle class="node" cx="{_f(x0 + (pos + j) * dx)}" cy="{y}" r="3" fill="black"/>')
            pos += len(bs)
    body.append(f'<text x="{W // 2}" y="20" font-size="13" text-anchor="middle">{escape(title)} (g={g})</text>')
    return _svg(W, H, body, title)


def _braid_key(hb) -> tuple[str, int]:
    return ("AC" if hb.family in ("A", "C") else "BD", hb.k)


def hecke_svg(trace: list, g: int, title: str = "Hecke Braid") -> str:
    rows = [(rule, list(blocks)) for rule, blocks in trace]
    width_n = max((len(bs) for _, bs in rows), default=1)
    dx, dy = 70, 46
    W = 160 + dx * max(width_n, 1)
    H = 60 + dy * max(len(rows), 1)
    x0 = 140
    body = [f'<text x="{W // 2}" y="20" font-size="13" text-anchor="middle">{escape(title)} (g={g})</text>']
    for r in range(len(rows) - 1):
        a, b = rows[r][1], rows[r + 1][1]
        where = {_braid_key(hb): j for j, hb in enumerate(b)}
        for j, hb in enumerate(a):
            k2 = where.get(_braid_key(hb))
            if k2 is None:
                continue
            y1, y2 = 44 + r * dy + 6, 44 + (r + 1) * dy - 12
            body.append(f'<line class="strand" x1="{_f(x0 + j * dx)}" y1="{y1}" x2="{_f(x0 + k2 * dx)}" '
                        f'y2="{y2}" stroke="{PALETTE[0] if _braid_key(hb)[0] == "AC" else PALETTE[1]}"/>')
    for r, (rule, bs) in enumerate(rows):
        y = 44 + r * dy
        body.append(f'<text class="rule" x="8" y="{y}" font-size="10">{escape(rule)}</text>')
        body += _row_boxes([hb.label for hb in bs], y, x0, dx, "block")
    return _svg(W, H, body, title)
