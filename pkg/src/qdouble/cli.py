"""Command-line front end.

Every subcommand writes one JSON document (or a text rendering with
``--format text``) to stdout or ``--out``.  Failures print
``{"error": {"code", "message"}}`` and exit with 2 (invalid input) or 3
(enumeration cap exceeded).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Callable

import numpy as np

from . import __version__
from .config import HARD_CEILING, get_caps, use_caps
from .errors import QDoubleError, ValidationError
from .groups import FinAbGroup, Subgroup

# ---------------------------------------------------------------------------
# input helpers


def _parse_ints(text: str, what: str) -> list[int]:
    try:
        vals = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise ValidationError(f"{what} must be comma-separated integers, got {text!r}") from exc
    return vals


def _group(text: str | None) -> FinAbGroup:
    if text is None:
        raise ValidationError("--group is required")
    orders = _parse_ints(text, "--group")
    if any(o < 1 for o in orders):
        raise ValidationError("cyclic orders must be positive")
    return FinAbGroup.from_orders(orders)


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc.msg}") from exc


def _cocycle(group_text: str | None, path: str | None, klass: str | None):
    """Resolve a 3-cocycle from a file, an ``H^3`` class, or the trivial cocycle."""
    from .cohomology import Cochain, enumerate_h3

    if path is not None:
        omega = Cochain.from_json(_load_json(path))
        if omega.arity != 3:
            raise ValidationError("the cocycle file must hold a 3-cochain")
        if group_text is not None and _group(group_text) != omega.group:
            raise ValidationError("--group disagrees with the cocycle's group")
        return omega.group, omega
    G = _group(group_text)
    H = enumerate_h3(G)
    if klass is None:
        coords = [0] * H.group.rank
    else:
        coords = _parse_ints(klass, "--class")
        if len(coords) != H.group.rank:
            raise ValidationError(f"H^3 class needs {H.group.rank} coordinates")
    return G, H.representative(H.group.reduce(np.array(coords, dtype=np.int64)))


def _space(path: str | None):
    from .quadratic import QuadSpace

    if path is None:
        raise ValidationError("--space is required")
    obj = _load_json(path)
    space = QuadSpace.from_json(obj)
    met = None
    if obj.get("metabolizer") is not None:
        G = space.group
        gens = np.array(obj["metabolizer"], dtype=np.int64).reshape(-1, G.rank)
        met = Subgroup.generated_by(G, G.reduce(gens))
    return space, met


def _need(args, *names: str) -> None:
    for n in names:
        if getattr(args, n) is None:
            raise ValidationError(f"--{n} is required")


# ---------------------------------------------------------------------------
# subcommands


def cmd_analyze(args) -> dict:
    from .cohomology import enumerate_h3, is_abelian, is_cocycle
    from .errors import Degenerate
    from .quadratic import find_metabolizers, gauss_sum
    from .twisted_double import DoubleAlgebra

    G, omega = _cocycle(args.group, args.cocycle, args.cls)
    if not is_cocycle(omega):
        raise ValidationError("input is not a 3-cocycle")
    out: dict = {"group": G.to_json()}
    if omega.is_normalized() and G.order <= get_caps().cohomology:
        out["h3_class"] = list(enumerate_h3(G).class_of(omega))
    out["abelian"] = is_abelian(omega)
    if not out["abelian"]:
        return out
    gam = DoubleAlgebra(G, omega).group_likes()
    space = gam.quadratic_space()
    mets = find_metabolizers(space)
    ghat = gam.ghat_subgroup()
    out["gamma"] = gam.group.to_json()
    out["quadratic_space"] = space.to_json()
    out["ghat"] = ghat.to_json()
    out["metabolizers"] = [S.to_json() for S in mets]
    out["ghat_is_metabolizer"] = any(S.key == ghat.key for S in mets)
    try:
        out["gauss"] = gauss_sum(space).to_json()
    except Degenerate:
        out["gauss"] = None
    return out


def cmd_gauge_equiv(args) -> dict:
    from .quadratic import gauge_equivalent

    G1, w1 = _cocycle(args.group, args.cocycle, args.cls)
    G2, w2 = _cocycle(args.group2 or args.group if args.cocycle2 is None else args.group2,
                      args.cocycle2, args.class2)
    v = gauge_equivalent(G1, w1, G2, w2)
    out = v.to_json()
    out["verdict"] = "equivalent" if v.equivalent else "not_equivalent"
    return out


def cmd_h3(args) -> dict:
    from .cohomology import enumerate_h3, is_abelian, lambda_report

    G = _group(args.group)
    H = enumerate_h3(G)
    rep = lambda_report(G).to_json()
    rep["h3_order"] = H.order
    rep["h3_group"] = H.group.to_json()
    rep["classes"] = [{"class": list(c), "abelian": is_abelian(w)} for c, w in H.classes()]
    return rep


def cmd_from_lattice(args) -> dict:
    from .cohomology import is_abelian, is_cocycle
    from .lattice_bridge import (LatticePair, cocycle_from_lattice, discriminant_space,
                                 lattice_to_gamma)

    _need(args, "lattice")
    pair = LatticePair.from_json(_load_json(args.lattice))
    lc = cocycle_from_lattice(pair)
    disc = discriminant_space(pair)
    ident = lattice_to_gamma(pair, lc)
    out = lc.to_json()
    out["discriminant"] = disc.to_json()
    out["identification"] = [int(v) for v in ident.perm]
    # the constructors raise CheckFailed if any certificate fails
    out["checks"] = {"is_cocycle": is_cocycle(lc.omega), "is_abelian": is_abelian(lc.omega),
                     "certified": ["tau_solves_slices", "lambda_class_matches_section",
                                   "discriminant_metabolic", "gamma_isometry"]}
    return out


def cmd_realize(args) -> dict:
    from .lattice_bridge import discriminant_space, realize_space_as_lattice

    space, met = _space(args.space)
    pair = realize_space_as_lattice(space, met)
    out = pair.to_json()
    out["discriminant"] = discriminant_space(pair).to_json()
    return out


def cmd_duality(args) -> dict:
    from .classification import dual_profile, duality_table, fusion_profiles

    _need(args, "n", "k")
    profs = fusion_profiles(args.p, args.n, args.k)
    table = duality_table(args.n, args.k, args.p)
    return {"n": args.n, "k": args.k, "p": args.p,
            "profiles": [{"profile": pr.to_json(), "dual": dual_profile(pr).to_json()} for pr in profs],
            "table": table.to_json(), "_text": table.render()}


def cmd_table1(args) -> dict:
    from .classification import table_one

    t = table_one(args.p)
    out = t.to_json()
    out["_text"] = t.render()
    return out


def cmd_census(args) -> dict:
    from .classification import brute_force_profile_census

    _need(args, "p", "n", "k")
    return brute_force_profile_census(args.p, args.n, args.k).to_json()


def cmd_gauss(args) -> dict:
    from .quadratic import gauss_sum

    space, _ = _space(args.space)
    return gauss_sum(space).to_json()


COMMANDS: dict[str, Callable] = {
    "analyze": cmd_analyze,
    "gauge-equiv": cmd_gauge_equiv,
    "h3": cmd_h3,
    "from-lattice": cmd_from_lattice,
    "realize": cmd_realize,
    "duality": cmd_duality,
    "table1": cmd_table1,
    "census": cmd_census,
    "gauss": cmd_gauss,
}


# ---------------------------------------------------------------------------
# driver


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qdouble", description="Twisted quantum doubles of abelian groups")
    ap.add_argument("--version", action="version", version=f"qdouble {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", help="write the result here instead of stdout")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--max-order", type=int,
                       help=f"largest |G| for cocycle work (ceiling {HARD_CEILING.cohomology})")
        p.add_argument("--max-subgroups", type=int,
                       help=f"subgroup enumeration cap (ceiling {HARD_CEILING.subgroups})")

    def cocycle_args(p: argparse.ArgumentParser, suffix: str = "") -> None:
        p.add_argument(f"--group{suffix}", help="invariant factors, e.g. 4,2")
        p.add_argument(f"--cocycle{suffix}", help="3-cochain JSON file")
        p.add_argument(f"--class{suffix}", dest="cls" if not suffix else f"class{suffix}",
                       help="H^3 class coordinates, e.g. 1,0")

    p = sub.add_parser("analyze", help="abelianness, group-likes, q, metabolizers, Gauss sum")
    cocycle_args(p)
    common(p)
    p = sub.add_parser("gauge-equiv", help="decide gauge equivalence of two abelian doubles")
    cocycle_args(p)
    cocycle_args(p, "2")
    common(p)
    p = sub.add_parser("h3", help="H^3 class table with Lambda kernel and image")
    p.add_argument("--group")
    common(p)
    p = sub.add_parser("from-lattice", help="cocycle and certificates from a lattice pair")
    p.add_argument("--lattice", help="lattice pair JSON file")
    common(p)
    p = sub.add_parser("realize", help="lattice pair realising a quadratic space")
    p.add_argument("--space", help="quadratic space JSON file")
    common(p)
    p = sub.add_parser("duality", help="fusion profiles and their duals")
    for name in ("p", "n", "k"):
        p.add_argument(f"--{name}", type=int)
    common(p)
    p = sub.add_parser("table1", help="the duality table for (Z_{p^2})^3")
    p.add_argument("--p", type=int)
    common(p)
    p = sub.add_parser("census", help="brute-force class counts")
    for name in ("p", "n", "k"):
        p.add_argument(f"--{name}", type=int)
    common(p)
    p = sub.add_parser("gauss", help="normalized Gauss sum of a quadratic space")
    p.add_argument("--space", help="quadratic space JSON file")
    common(p)
    return ap


def _render_text(result: dict) -> str:
    if "_text" in result:
        return result["_text"]
    lines = []
    for key in sorted(result):
        lines.append(f"{key}: {json.dumps(result[key], sort_keys=True)}")
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    caps = {}
    if args.max_order is not None:
        caps["cohomology"] = args.max_order
        caps["elements"] = max(get_caps().elements, min(args.max_order ** 2, HARD_CEILING.elements))
    if args.max_subgroups is not None:
        caps["subgroups"] = args.max_subgroups
    try:
        with use_caps(**caps):
            result = COMMANDS[args.command](args)
    except QDoubleError as exc:
        err = {"error": {"code": exc.code, "message": str(exc)}}
        _emit(json.dumps(err, sort_keys=True) + "\n", args.out)
        return exc.exit_code
    if args.format == "text":
        text = _render_text(result)
    else:
        result.pop("_text", None)
        text = json.dumps(result, sort_keys=True, indent=2) + "\n"
    _emit(text, args.out)
    return 0


def main() -> None:
    sys.exit(run())
