"""Command-line entry point.

Exit codes: 0 pass, 1 verification failure, 2 uncertified step, 3 usage error.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .hecke import HeckeBlock, HeckeResult, bps_check, multiplicities, odd_sod, run_hecke, twist_law
from .hodge import HHVector, hh_of_blocks, hh_windows_chain
from .lattice import SOD, ModuliParams, ParamError, derive_params
from .plain_weave import PlainWeaveResult, ncr_blocks, run_plain_weave
from .report import (
    SCHEMA_VERSION, blocks_csv, cert_to_json, dumps, hecke_svg, hh_to_json, num, plain_weave_svg,
    sod_text, sod_to_json, twill_svg,
)
from .vanishing import Certificate, replay
from .weave import ModifiedResult, SodRun, build_sod, level_index_set, modified_sod
from .weights import in_window, little_window, weight_interval, window_2g

STAGES = ("farey-twill", "sod", "sod-2g", "plain-weave", "hecke", "all")
EMITS = ("json", "svg", "text", "csv")
VERIFIES = ("hh", "weights", "orthogonality", "counts", "all")
ENV_OUTPUT = "SODWEAVE_OUTPUT_DIR"

EXIT_OK, EXIT_VERIFY, EXIT_UNCERTIFIED, EXIT_USAGE = 0, 1, 2, 3


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    genus: int
    degree: int | None = None
    stage: str = "all"
    emit: frozenset = frozenset({"json"})
    verify: frozenset = frozenset({"all"})
    conjectural: bool = False
    output_dir: str | None = None

    @property
    def d(self) -> int:
        return 2 * self.genus if self.degree is None else self.degree

    def stages(self) -> list[str]:
        if self.stage != "all":
            return [self.stage]
        out = ["farey-twill", "sod"]
        if self.d == 2 * self.genus:
            out += ["sod-2g", "plain-weave"]
        return out + ["hecke"]

    def verifications(self) -> set[str]:
        return set(VERIFIES[:-1]) if "all" in self.verify else set(self.verify)

    def run_dir(self) -> Path:
        base = self.output_dir or os.environ.get(ENV_OUTPUT) or "sodweave-out"
        tag = f"g{self.genus}-hecke" if self.stage == "hecke" else f"g{self.genus}-d{self.d}-{self.stage}"
        return Path(base) / tag


@dataclass
class Bundle:
    """Everything a run produced.  check() recomputes verdicts from these fields."""

    config: RunConfig
    params: ModuliParams | None = None
    twill: ModifiedResult | None = None
    sod_run: SodRun | None = None
    plain: PlainWeaveResult | None = None
    hecke: HeckeResult | None = None
    sods: dict[str, SOD] = field(default_factory=dict)
    certificates: dict[str, list[Certificate]] = field(default_factory=dict)

    def all_certificates(self) -> list[tuple[str, Certificate]]:
        return [(stage, c) for stage, cs in self.certificates.items() for c in cs]


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Outcome:
    exit_code: int
    verdicts: list[Verdict]
    uncertified: list[str]
    warnings: list[str]

    @property
    def failures(self) -> list[str]:
        return [f"{v.name}: {v.detail}" for v in self.verdicts if not v.passed]


def validate(config: RunConfig) -> None:
    if config.stage not in STAGES:
        raise UsageError(f"unknown stage {config.stage!r}")
    if config.genus < 2:
        raise UsageError("genus must be at least 2")
    for e in config.emit:
        if e not in EMITS:
            raise UsageError(f"unknown emit format {e!r}")
    for v in config.verify:
        if v not in VERIFIES:
            raise UsageError(f"unknown verification {v!r}")
    if config.stage in ("sod-2g", "plain-weave") and config.d != 2 * config.genus:
        raise UsageError(f"stage {config.stage} needs degree 2g = {2 * config.genus}")
    if config.stage != "hecke":
        try:
            derive_params(config.genus, config.d, config.conjectural)
        except ParamError as exc:
            raise UsageError(str(exc)) from None


def execute(config: RunConfig) -> Bundle:
    validate(config)
    g = config.genus
    b = Bundle(config)
    stages = config.stages()
    m_side = [s for s in stages if s != "hecke"]
    if m_side:
        b.params = derive_params(g, config.d, config.conjectural)
    needs_sod = bool({"sod", "sod-2g", "plain-weave"} & set(stages))
    if needs_sod:
        b.sod_run = build_sod(b.params)
        b.twill = b.sod_run.modified
    elif m_side:
        b.twill = modified_sod(b.params)
    if b.twill is not None:
        b.certificates["farey-twill"] = list(b.twill.certificates)
        if "farey-twill" in stages:
            b.sods["modified"] = b.twill.sod
    if b.sod_run is not None:
        b.certificates["sod"] = b.sod_run.certificates[len(b.twill.certificates):]
        for name, sod in b.sod_run.stages:
            if name != "sod_2g" and "sod" not in stages:
                continue
            b.sods[name] = sod
    if "plain-weave" in stages:
        b.plain = run_plain_weave(g, b.sod_run.sod2g)
        b.sods["plain_weave"] = b.plain.sod
        b.certificates["plain-weave"] = list(b.plain.log)
    if "hecke" in stages:
        b.hecke = run_hecke(g)
        b.sods["hecke_start"] = b.hecke.start
        b.sods["B_even"] = b.hecke.b_even
        b.sods["B_odd"] = b.hecke.b_odd
        b.certificates["hecke"] = list(b.hecke.log)
    return b


M_SIDE = ("modified", "sod1", "reordered", "sod_2g", "plain_weave")


def _m_reference(b: Bundle, name: str) -> HHVector:
    g = b.config.genus
    params = b.params if name not in ("sod_2g", "plain_weave") else derive_params(g, 2 * g)
    return hh_windows_chain(params)


def verify_hh(b: Bundle) -> list[Verdict]:
    g = b.config.genus
    out = []
    for name in M_SIDE:
        if name in b.sods:
            ref, got = _m_reference(b, name), hh_of_blocks(b.sods[name], g)
            out.append(Verdict(f"hh:{name}", ref == got, "" if ref == got else f"residual {hh_to_json(got - ref)}"))
    if "hecke_start" in b.sods:
        ref = hh_of_blocks(odd_sod(g), g).scale(2)
        for name, sod in (("hecke_start", b.sods["hecke_start"]),
                          ("hecke_final", SOD.from_groups(b.sods["B_even"].groups() + b.sods["B_odd"].groups()))):
            got = hh_of_blocks(sod, g)
            out.append(Verdict(f"hh:{name}", ref == got, "" if ref == got else f"residual {hh_to_json(got - ref)}"))
    return out


def verify_weights(b: Bundle) -> list[Verdict]:
    g = b.config.genus
    out = []
    if "sod_2g" in b.sods:
        lo, width = window_2g(g)
        bad = [j for j, blk in enumerate(b.sods["sod_2g"].blocks) if not in_window(weight_interval(blk, g), lo, width)]
        out.append(Verdict("weights:sod_2g", not bad, f"outside window at {bad}" if bad else ""))
    if "plain_weave" in b.sods:
        lo, hi = little_window(g)
        center = [blk for lab in ("i", "ii", "iii", "iv") for blk in b.sods["plain_weave"].megablock(lab)]
        bad = [j for j, blk in enumerate(center) if not weight_interval(blk, g).within(lo, hi)]
        out.append(Verdict("weights:center", not bad, f"outside little window at {bad}" if bad else ""))
    if "B_even" in b.sods:
        for name in ("B_even", "B_odd"):
            hbs = [HeckeBlock.from_block(blk, g) for blk in b.sods[name].blocks]
            bad = [hb.label for hb in hbs if not bps_check(hb).holds]
            out.append(Verdict(f"weights:{name}", not bad, f"not quasi-BPS: {bad}" if bad else ""))
        if b.hecke is not None:
            ok = all(c.holds for c in twist_law(b.hecke))
            out.append(Verdict("weights:twist_law", ok, "" if ok else "Lambda twist leaves B_(w+2)"))
    return out


def verify_orthogonality(b: Bundle) -> list[Verdict]:
    bad = []
    for stage, c in b.all_certificates():
        for ch in c.checks:
            if replay(ch) != ch:
                bad.append(f"{stage}/{c.rule}: {c.context}")
                break
    return [Verdict("orthogonality:replay", not bad, "; ".join(bad[:5]))]


def verify_counts(b: Bundle) -> list[Verdict]:
    g = b.config.genus
    out = []
    m_names = [n for n in M_SIDE if n in b.sods]
    if m_names:
        p2 = derive_params(g, 2 * g)
        for name in m_names:
            params = p2 if name in ("sod_2g", "plain_weave") else b.params
            want = len(level_index_set(params, params.i_d))
            got = len(b.sods[name])
            out.append(Verdict(f"counts:{name}", got == want, "" if got == want else f"{got} blocks, expected {want}"))
    if "hecke_start" in b.sods:
        want = 2 * len(odd_sod(g))
        got = len(b.sods["hecke_start"])
        out.append(Verdict("counts:hecke_start", got == want, "" if got == want else f"{got} blocks, expected {want}"))
        got = len(b.sods["B_even"]) + len(b.sods["B_odd"])
        out.append(Verdict("counts:hecke_final", got == want, "" if got == want else f"{got} blocks, expected {want}"))
    return out


VERIFIERS = {"hh": verify_hh, "weights": verify_weights, "orthogonality": verify_orthogonality,
             "counts": verify_counts}


def check(b: Bundle) -> Outcome:
    verdicts = []
    for name in VERIFIES[:-1]:
        if name in b.config.verifications():
            verdicts += VERIFIERS[name](b)
    uncertified, warnings = [], []
    for stage, c in b.all_certificates():
        msg = f"{stage}/{c.rule}: {c.context} ({c.reason})" if not c.certified else ""
        if not c.certified:
            (warnings if b.config.conjectural and c.conditional else uncertified).append(msg)
        elif c.conditional:
            warnings.append(f"{stage}/{c.rule}: {c.context} (conditional on the widened range)")
    if any(not v.passed for v in verdicts):
        code = EXIT_VERIFY
    elif uncertified:
        code = EXIT_UNCERTIFIED
    else:
        code = EXIT_OK
    return Outcome(code, verdicts, uncertified, warnings)


# -------------------------------------------------------------- artifacts

def report_json(b: Bundle, outcome: Outcome) -> dict:
    g = b.config.genus
    cfg = b.config
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config": {"genus": g, "degree": None if cfg.stage == "hecke" else cfg.d, "stage": cfg.stage,
                   "emit": sorted(cfg.emit), "verify": sorted(cfg.verify), "conjectural": cfg.conjectural},
        "stages": {name: sod_to_json(sod, g) for name, sod in b.sods.items()},
        "hh": {name: hh_to_json(hh_of_blocks(sod, g)) for name, sod in b.sods.items()},
        "certificates": {stage: [cert_to_json(c) for c in cs] for stage, cs in b.certificates.items()},
        "verification": [{"name": v.name, "passed": v.passed, "detail": v.detail} for v in outcome.verdicts],
        "status": status_json(outcome),
    }
    if b.params is not None:
        p = b.params
        doc["params"] = {"g": p.g, "d": p.d, "i_d": p.i_d, "m": p.m, "m_1": p.m_1, "m_2": p.m_2, "v": p.v,
                         "proven": p.proven}
        doc["hh"]["windows_chain"] = hh_to_json(hh_windows_chain(p))
    if b.twill is not None:
        doc["events"] = [{"t": num(e.t), "x": num(e.x), "kind": e.kind, "level": e.level,
                          "participants": [list(s) for s in e.participants]} for e in b.twill.events]
    if b.plain is not None:
        doc["plain_weave"] = {"left_count": b.plain.left_count, "right_count": b.plain.right_count,
                              "center_multiset": {str(k): v for k, v in b.plain.center_multiset().items()},
                              "ncr_blocks": {str(k): v for k, v in ncr_blocks(g).items()},
                              "origins": b.plain.origins}
    if b.hecke is not None:
        doc["hecke"] = {"multiplicities": {f: {str(k): v for k, v in m.items()}
                                           for f, m in multiplicities(b.hecke).items()},
                        "odd_sod": sod_to_json(odd_sod(g), g),
                        "weights": {"B_even": 2 - g, "B_odd": 3 - g}}
    return doc


def status_json(outcome: Outcome) -> dict:
    return {"exit_code": outcome.exit_code, "failures": outcome.failures,
            "uncertified": outcome.uncertified, "warnings": outcome.warnings}


def report_text(b: Bundle, outcome: Outcome) -> str:
    g = b.config.genus
    lines = [f"sodweave g={g}" + ("" if b.params is None else f" d={b.params.d}")]
    for name, sod in b.sods.items():
        lines.append(f"{name} [{len(sod)}]: {sod_text(sod, g)}")
    for v in outcome.verdicts:
        lines.append(f"{'PASS' if v.passed else 'FAIL'} {v.name}" + (f" {v.detail}" if v.detail else ""))
    lines.append(f"uncertified steps: {len(outcome.uncertified)}")
    lines.append(f"exit {outcome.exit_code}")
    return "\n".join(lines) + "\n"


def svgs(b: Bundle) -> dict[str, str]:
    out = {}
    if b.twill is not None:
        p = b.params
        strands = sorted(level_index_set(p, p.i_d))
        traj = [(k, s, Fraction(k)) for k, s in strands]
        out["twill.svg"] = twill_svg(traj, b.twill.events, b.twill.stop_time, p.d + p.g - 1,
                                     f"Farey Twill g={p.g} d={p.d}")
    if b.plain is not None:
        out["plain_weave.svg"] = plain_weave_svg(b.plain.source, b.sods["plain_weave"], b.plain.origins,
                                                 b.config.genus)
    if b.hecke is not None:
        out["hecke_braid.svg"] = hecke_svg(b.hecke.trace, b.config.genus)
    return out


def write_artifacts(b: Bundle, outcome: Outcome) -> dict[str, Path]:
    d = b.config.run_dir()
    d.mkdir(parents=True, exist_ok=True)
    files: dict[str, str] = {}
    if "json" in b.config.emit:
        files["report.json"] = dumps(report_json(b, outcome))
    if "text" in b.config.emit:
        files["report.txt"] = report_text(b, outcome)
    if "csv" in b.config.emit:
        files["blocks.csv"] = blocks_csv(list(b.sods.items()))
    if "svg" in b.config.emit:
        files.update(svgs(b))
    if outcome.exit_code:
        files["failure.json"] = dumps(status_json(outcome))
    written = {}
    for name, text in sorted(files.items()):
        path = d / name
        path.write_text(text, encoding="utf-8")
        written[name] = path
    return written


def run(config: RunConfig) -> int:
    try:
        bundle = execute(config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    outcome = check(bundle)
    write_artifacts(bundle, outcome)
    if "text" in config.emit:
        sys.stdout.write(report_text(bundle, outcome))
    if outcome.exit_code:
        sys.stderr.write(dumps(status_json(outcome)))
    return outcome.exit_code


# -------------------------------------------------------------- argparse

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _csv_set(choices):
    def parse(text: str) -> frozenset:
        items = frozenset(x.strip() for x in text.split(",") if x.strip())
        bad = items - set(choices)
        if bad or not items:
            raise argparse.ArgumentTypeError(f"choose from {', '.join(choices)}")
        return items
    return parse


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="sodweave", description="Certified semiorthogonal decompositions and weave diagrams.")
    ap.add_argument("--genus", type=int, required=True)
    ap.add_argument("--degree", type=int, default=None, help="defaults to 2g; ignored by the hecke stage")
    ap.add_argument("--stage", choices=STAGES, default="all")
    ap.add_argument("--emit", type=_csv_set(EMITS), action="append",
                    help="comma separated subset of json,svg,text,csv (repeatable; default json)")
    ap.add_argument("--verify", type=_csv_set(VERIFIES), action="append",
                    help="comma separated subset of hh,weights,orthogonality,counts,all (default all)")
    ap.add_argument("--conjectural", action="store_true", help="allow i_d > v; conditional steps become warnings")
    ap.add_argument("--output-dir", default=None, help=f"defaults to ${ENV_OUTPUT} or ./sodweave-out")
    return ap


def parse_config(argv: list[str] | None = None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    emit = frozenset().union(*ns.emit) if ns.emit else frozenset({"json"})
    verify = frozenset().union(*ns.verify) if ns.verify else frozenset({"all"})
    return RunConfig(ns.genus, ns.degree, ns.stage, emit, verify, ns.conjectural, ns.output_dir)


def main(argv: list[str] | None = None) -> int:
    try:
        config = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(config)
