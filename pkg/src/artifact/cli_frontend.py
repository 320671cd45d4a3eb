"""Command-line front end: file IO, seeded defaults, JSON reports and an on-disk cache."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from . import semigroup_ring as sr
from .errors import BudgetError, DegeneracyError, ValidationError
from .lattice_geometry import (
    GorensteinPair,
    enumerate_faces,
    format_polytope,
    full_face,
    lattice_points,
    pair_from_polytope,
    polar_dual,
    preset_pair,
    preset_polytope,
    read_polytope,
)

log = logging.getLogger("artifact")

EXIT_OK, EXIT_VALIDATION, EXIT_DEGENERATE, EXIT_BUDGET = 0, 2, 3, 4
COMMANDS = ("validate", "dual", "faces", "r1", "chiral", "bring", "snd-probe", "quintic-demo", "elliptic-demo")


@dataclass
class RunConfig:
    command: str
    poly: str | None = None
    seed: int = 0
    kmax: int | None = None
    wmax: int | None = None
    mode: str = "modular"
    coeff_f: str | None = None
    coeff_g: str | None = None
    n0: list = field(default_factory=list)
    sigma: str | None = None
    jobs: int = 1
    out: str | None = None
    cache_dir: str | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if self.mode not in ("modular", "exact"):
            raise ValidationError(f"--mode must be 'modular' or 'exact', not {self.mode!r}")
        if self.jobs < 1:
            raise ValidationError("--jobs must be at least 1")
        for name in ("kmax", "wmax"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValidationError(f"--{name} must be non-negative")
        needs_poly = self.command not in ("quintic-demo", "elliptic-demo")
        if needs_poly and not self.poly:
            raise ValidationError(f"{self.command} needs --poly")
        for path in (self.poly, self.coeff_f, self.coeff_g, self.sigma):
            if path and not Path(path).is_file() and not _is_preset(path):
                raise ValidationError(f"no such file: {path}")


def _is_preset(name: str) -> bool:
    return name.startswith("preset:")


# ---------------------------------------------------------------------------
# inputs


def load_polytope(spec: str):
    if _is_preset(spec):
        return preset_polytope(spec.split(":", 1)[1])
    return read_polytope(spec)


def _pair(cfg: RunConfig) -> GorensteinPair:
    P = load_polytope(cfg.poly)
    if not P.is_reflexive():
        raise ValidationError("polytope is not reflexive")
    return pair_from_polytope(P)


def _coefficients(path: str | None, cone, seed: int) -> tuple[sr.CoefficientFunction, str]:
    pts = lattice_points(full_face(cone), 1)
    if path:
        return sr.read_coefficients(path, pts), f"file:{path}"
    return sr.sample_coefficients(pts, seed), f"seed:{seed}"


def _f_g(cfg: RunConfig, pair: GorensteinPair):
    f, fsrc = _coefficients(cfg.coeff_f, pair.K, cfg.seed)
    g, gsrc = _coefficients(cfg.coeff_g, pair.Kdual, cfg.seed + 1)
    return f, g, {"f": fsrc, "g": gsrc}


def _sigma(cfg: RunConfig, pair: GorensteinPair):
    from .bring_complex import fan_from_heights, parse_heights

    if not cfg.sigma:
        return None
    text = Path(cfg.sigma).read_text(encoding="utf-8")
    return fan_from_heights(pair, parse_heights(text, pair), label=f"file:{Path(cfg.sigma).name}")


# ---------------------------------------------------------------------------
# commands


def cmd_validate(cfg: RunConfig) -> dict:
    P = load_polytope(cfg.poly)
    if not P.is_reflexive():
        raise ValidationError("polytope is not reflexive (some facet is not at lattice distance 1)")
    pair = pair_from_polytope(P)
    faces = enumerate_faces(pair.K).faces
    counts: dict[int, int] = {}
    for t in faces:
        counts[t.dim] = counts.get(t.dim, 0) + 1
    return {
        "reflexive": True,
        "rank": pair.rank,
        "index": pair.index,
        "deg": list(pair.deg),
        "deg_star": list(pair.deg_star),
        "faces": len(faces),
        "faces_by_dim": sorted([d, c] for d, c in counts.items()),
        "points_delta": len(lattice_points(full_face(pair.K), 1)),
        "points_delta_star": len(lattice_points(full_face(pair.Kdual), 1)),
    }


def cmd_dual(cfg: RunConfig) -> dict:
    P = load_polytope(cfg.poly)
    if not P.is_reflexive():
        raise ValidationError("polytope is not reflexive")
    D = polar_dual(P)
    return {"dual": format_polytope(D), "vertices": [list(v) for v in D.vertices]}


def cmd_faces(cfg: RunConfig) -> dict:
    from .lattice_geometry import dual_face

    pair = _pair(cfg)
    rows = []
    for t in enumerate_faces(pair.K).faces:
        rows.append({
            "dim": t.dim,
            "rays": [list(r) for r in t.rays],
            "dual_dim": dual_face(t).dim,
        })
    return {"faces": rows, "count": len(rows)}


def cmd_r1(cfg: RunConfig) -> dict:
    from .chiral_ring import r1_dims

    pair = _pair(cfg)
    f, g, src = _f_g(cfg, pair)
    rf = r1_dims(full_face(pair.K), f, kmax=cfg.kmax, mode=cfg.mode, seed=cfg.seed)
    rg = r1_dims(full_face(pair.Kdual), g, kmax=cfg.kmax, mode=cfg.mode, seed=cfg.seed)
    return {"r1_f": rf.graded_dims, "r1_g": rg.graded_dims, "total_f": rf.total, "total_g": rg.total,
            "coefficients": src}


def cmd_chiral(cfg: RunConfig) -> dict:
    from .chiral_ring import w_table

    pair = _pair(cfg)
    f, g, src = _f_g(cfg, pair)
    table = w_table(pair.K, f, g, mode=cfg.mode, seed=cfg.seed, jobs=cfg.jobs)
    rep = table.report()
    rep["by_dim"] = sorted([d, v] for d, v in table.by_dim().items())
    rep["by_w"] = sorted([w, v] for w, v in table.by_w().items())
    rep["coefficients"] = src
    return rep


def cmd_bring(cfg: RunConfig) -> dict:
    from .bring_complex import bring_cohomology, compare_results
    from .chiral_ring import w_table

    pair = _pair(cfg)
    f, g, src = _f_g(cfg, pair)
    res = bring_cohomology(pair, f, g, cfg.wmax, mode=cfg.mode, seed=cfg.seed)
    rep = res.report()
    table = w_table(pair.K, f, g, mode=cfg.mode, seed=cfg.seed, jobs=cfg.jobs)
    rep["comparison"] = compare_results(res, table).report()
    sigma = _sigma(cfg, pair)
    if sigma is not None:
        alt = bring_cohomology(pair, f, g, cfg.wmax, sigma=sigma, mode=cfg.mode, seed=cfg.seed, check=False)
        rep["sigma_variant"] = {"label": alt.sigma, "total": alt.total, "stabilized": alt.stabilized,
                                "equal_to_plain": alt.dims == res.dims}
    rep["coefficients"] = src
    return rep


def cmd_snd_probe(cfg: RunConfig) -> dict:
    from .koszul_homology.wspace import probe_strong_nondegeneracy

    pair = _pair(cfg)
    f, _, src = _f_g(cfg, pair)
    n0_list = cfg.n0 or [tuple(pair.K.degree_vector)]
    rep = probe_strong_nondegeneracy(pair.K, f, n0_list, seed=cfg.seed, mode=cfg.mode, window=cfg.wmax)
    rep["coefficients"] = {"f": src["f"]}
    return rep


def _demo(name: str, cfg: RunConfig, bring: bool) -> dict:
    cfg.poly = f"preset:{name}"
    rep = {"preset": name, "chiral": cmd_chiral(cfg)}
    if bring:
        rep["bring"] = cmd_bring(cfg)
    return rep


def cmd_quintic_demo(cfg: RunConfig) -> dict:
    from .chiral_ring import quintic_diagonal_ring

    rep = _demo("quintic", cfg, bring=False)
    pair = preset_pair("quintic")
    _, g, _ = _f_g(cfg, pair)
    rep["diagonal_ring"] = quintic_diagonal_ring(g, pair.Kdual, cfg.mode, cfg.seed).report()
    return rep


def cmd_elliptic_demo(cfg: RunConfig) -> dict:
    return _demo("elliptic", cfg, bring=True)


HANDLERS = {
    "validate": cmd_validate,
    "dual": cmd_dual,
    "faces": cmd_faces,
    "r1": cmd_r1,
    "chiral": cmd_chiral,
    "bring": cmd_bring,
    "snd-probe": cmd_snd_probe,
    "quintic-demo": cmd_quintic_demo,
    "elliptic-demo": cmd_elliptic_demo,
}


# ---------------------------------------------------------------------------
# cache and reports


def _file_bytes(path: str | None) -> bytes:
    if not path:
        return b""
    if _is_preset(path):
        return path.encode()
    return Path(path).read_bytes()


def cache_key(cfg: RunConfig) -> str:
    h = hashlib.sha256()
    for part in (cfg.poly, cfg.coeff_f, cfg.coeff_g, cfg.sigma):
        h.update(hashlib.sha256(_file_bytes(part)).digest())
    window = {"kmax": cfg.kmax, "wmax": cfg.wmax, "n0": [list(x) for x in cfg.n0]}
    h.update(json.dumps([cfg.command, cfg.seed, cfg.mode, window, __version__], sort_keys=True).encode())
    return h.hexdigest()


def _stabilized(rep) -> bool | None:
    """Collect stabilization flags anywhere in the report; None when no part has one."""
    flags = []

    def walk(x):
        if isinstance(x, dict):
            for k, v in x.items():
                if k == "stabilized" and isinstance(v, bool):
                    flags.append(v)
                else:
                    walk(v)
        elif isinstance(x, list):
            for v in x:
                walk(v)

    walk(rep)
    return all(flags) if flags else None


def run(cfg: RunConfig) -> dict:
    cfg.validate()
    path = Path(cfg.cache_dir) / f"{cache_key(cfg)}.json" if cfg.cache_dir else None
    if path is not None and path.is_file():
        return json.loads(path.read_text(encoding="utf-8"))
    body = HANDLERS[cfg.command](cfg)
    report = {
        "command": cfg.command,
        "version": __version__,
        "seed": cfg.seed,
        "mode": cfg.mode,
        "stabilized": _stabilized(body),
        "result": body,
    }
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(report), encoding="utf-8")
    return report


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _parse_n0(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad n0 {text!r}; expected comma-separated integers") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="artifact", description="Chiral-ring computations for reflexive polytopes.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--poly", help="polytope file ('dim d' header, one vertex per line) or preset:NAME")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--coeff-f", dest="coeff_f", help="coefficients on the lattice points of Delta")
    ap.add_argument("--coeff-g", dest="coeff_g", help="coefficients on the lattice points of Delta*")
    ap.add_argument("--kmax", type=int)
    ap.add_argument("--wmax", type=int)
    ap.add_argument("--mode", default="modular", choices=("modular", "exact"))
    ap.add_argument("--sigma", help="heights on the lattice points of Delta* defining the fan")
    ap.add_argument("--n0", type=_parse_n0, action="append", default=[], help="n0 for snd-probe (repeatable)")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", help="write the JSON report here instead of stdout")
    ap.add_argument("--cache-dir", dest="cache_dir")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cfg = RunConfig(
        command=args.command, poly=args.poly, seed=args.seed, kmax=args.kmax, wmax=args.wmax, mode=args.mode,
        coeff_f=args.coeff_f, coeff_g=args.coeff_g, n0=args.n0, sigma=args.sigma, jobs=args.jobs,
        out=args.out, cache_dir=args.cache_dir,
    )
    try:
        report = run(cfg)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DegeneracyError as exc:
        print(f"degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    text = dumps(report)
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


__all__ = ["RunConfig", "build_parser", "cache_key", "main", "run"] + [f"cmd_{c.replace('-', '_')}" for c in COMMANDS]
