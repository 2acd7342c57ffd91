"""Command-line front end: ``sphfoli <subcommand> ...``.

Exit status is 0 on success, 1 when a surface fails validation (or a check
fails), and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import re
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .connection import connection_matrix, format_matrix, foliated_dimension_via_rank, rank_analysis
from .decomposition import annulus_decomposition, component_adjacency
from .deform import (
    DeformationError,
    DeformationLog,
    lambda_deform,
    make_generic,
    slide,
    split_pole,
    twist,
)
from .exactfield import FieldValue, ScalarSyntaxError, format_scalar, parse_scalar, repr_float
from .monodromy import classify_monodromy, fiber_multiplicity, holonomy_generators
from .moduli import (
    AngleVector,
    PartitionError,
    dim_coaxial,
    dim_strict,
    max_dim_coaxial,
    max_dim_strict,
    two_cone_classify,
)
from .oracle import EnumerationBoundError, enumerate_surfaces
from .sphtrig import TrigDomainError, torus_redecomposition
from .surface import (
    StripSurface,
    SurfaceParseError,
    TypePartition,
    classify_points,
    equatorial_net,
    format_surface,
    is_generic,
    is_orientable,
    parse_surface,
    validate,
)

__all__ = ["main", "run", "report", "export_dot", "GalleryEntry", "gallery_entries", "load_gallery"]


class _Failure(Exception):
    """Ends a command with exit status 1."""


# -- gallery --------------------------------------------------------------------

@dataclass(frozen=True)
class GalleryEntry:
    name: str
    surface_text: str
    expected_report: str | None


def _gallery_dir():
    return resources.files("sphfoli") / "gallery"


def gallery_entries() -> list[GalleryEntry]:
    out = []
    root = _gallery_dir()
    for item in sorted(root.iterdir(), key=lambda p: p.name):
        if item.name.endswith(".sphfoli"):
            name = item.name[: -len(".sphfoli")]
            exp = root / f"{name}.expected"
            out.append(GalleryEntry(name, item.read_text(encoding="utf-8"),
                                    exp.read_text(encoding="utf-8") if exp.is_file() else None))
    return out


def load_gallery(name: str) -> StripSurface:
    for e in gallery_entries():
        if e.name == name:
            return parse_surface(e.surface_text)
    raise KeyError(name)


# -- reports --------------------------------------------------------------------

def _fmt(v, gens=()) -> str:
    return repr_float(v) if isinstance(v, float) else format_scalar(v, gens)


def _angles(c, gens) -> str:
    return "(" + ", ".join(_fmt(a, gens) for a in c.angles) + ")"


def foliated_dimension_formula(s: StripSurface) -> int | None:
    """Closed-form dimension of the foliated stratum through ``s``; None when unstable."""
    c = classify_points(s)
    T, g = c.partition, c.genus
    if 2 * g - 2 + T.n <= 0:
        return None
    if is_orientable(s):
        return 2 * len(T.E) + 2 * g - 1
    return 2 * len(T.E) + len(T.O) + 2 * g - 2


def report(s: StripSurface) -> str:
    """Canonical multi-line report; stable enough for golden files."""
    gens = s.generators
    c = classify_points(s)
    out = [f"genus: {c.genus}", f"angles: {_angles(c, gens)}", f"type partition: {c.partition}"]
    for z in c.zeros:
        out.append(f"zero {z.label or '-'}: marks={z.s} angle={_fmt(z.angle)} index={z.index} "
                   f"latitude={_fmt(z.abs_latitude, gens)}")
    q = 0
    for p in c.poles:
        name = p.label
        if name is None:
            q += 1
            name = f"q{q}"
        out.append(f"pole {name}: angle={_fmt(p.angle, gens)} index=2")
    out.append(f"index sum: {c.index_sum}")
    gen = is_generic(s)
    out.append(f"generic: {'yes' if gen else 'no'}")
    out.append(f"orientable: {'yes' if is_orientable(s) else 'no'}")
    cm = connection_matrix(s)
    out.append("connection matrix:")
    out.extend("  " + line for line in format_matrix(cm, generators=gens).rstrip("\n").split("\n"))
    cls = classify_monodromy(holonomy_generators(s))
    out.append(f"monodromy: {cls}")
    out.append(f"fiber: {fiber_multiplicity(cls, s)}")
    if gen:
        ra = rank_analysis(cm, s, strict=False)
        out.append(f"rank: {ra.rank} of m={ra.m}")
        out.append(f"dimension (rank route): {foliated_dimension_via_rank(s)}")
    form = foliated_dimension_formula(s)
    out.append(f"dimension (formula): {form if form is not None else 'n/a'}")
    return "\n".join(out) + "\n"


def summary_line(s: StripSurface) -> str:
    c = classify_points(s)
    cls = classify_monodromy(holonomy_generators(s))
    fib = fiber_multiplicity(cls, s)
    fib_txt = f"fiber {fib.count}" if fib.kind == "Finite" else f"fiber {fib.kind}"
    dim = foliated_dimension_formula(s)
    return (f"g={c.genus}, θ={_angles(c, s.generators)}, T={c.partition}, "
            f"{'generic' if is_generic(s) else 'non-generic'}, "
            f"{'orientable' if is_orientable(s) else 'non-orientable'}, {cls}, {fib_txt}, dim {'n/a' if dim is None else dim}")


# -- DOT export ---------------------------------------------------------------------

def export_dot(s: StripSurface, which: str = "dual") -> str:
    gens = s.generators
    lines = []
    if which == "dual":
        lines.append("graph dual {")
        for i, bg in enumerate(s.bigons):
            lines.append(f'  {s.ids[i]} [label="{s.ids[i]}\\nw={_fmt(bg.width, gens)}"];')
        for g in s.gluings:
            lab = f"{g.a.side}{g.a.index}-{g.b.side}{g.b.index}" + (" flip" if g.flip else "")
            lines.append(f'  {s.ids[g.a.bigon]} -- {s.ids[g.b.bigon]} [label="{lab}"];')
    elif which == "equatorial":
        net = equatorial_net(s)
        lines.append("graph equatorial {")
        for v in net.vertices:
            z = s.zero_classes[v]
            lines.append(f'  z{v} [label="{z.label or "z" + str(v)}"];')
        open_ends = 0
        for a, b, chain in net.edges:
            if b < 0:
                open_ends += 1
                lines.append(f'  open{open_ends} [shape=point];')
                target = f"open{open_ends}"
            else:
                target = f"z{b}"
            lab = ",".join(s.ids[c] for c in chain)
            lines.append(f'  z{a} -- {target} [label="{lab}"];')
        for k, chain in enumerate(net.cycles):
            lines.append(f'  cycle{k} [shape=circle, label="{",".join(s.ids[c] for c in chain)}"];')
    elif which == "annuli":
        dec = annulus_decomposition(s)
        lines.append("graph annuli {")
        for i, comp in enumerate(dec.components):
            shape = "doublecircle" if comp.kind == "disk" else "box"
            lines.append(f'  c{i} [shape={shape}, label="{comp.kind} h={_fmt(comp.height, gens)} '
                         f'c={_fmt(comp.circumference, gens)}"];')
        for a, b, level in component_adjacency(s, dec):
            lines.append(f'  c{a} -- c{b} [label="t={level}"];')
    else:
        raise ValueError(f"unknown graph {which!r}")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- argument helpers ---------------------------------------------------------------

def _read_surface(path: str) -> StripSurface:
    if path == "-":
        text = sys.stdin.read()
        where = "<stdin>"
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise _Failure(f"{path}: {e.strerror}") from None
        where = path
    try:
        return parse_surface(text)
    except SurfaceParseError as e:
        raise _Failure(f"{where}: {e}") from None


def _valid_surface(path: str) -> StripSurface:
    s = _read_surface(path)
    rep = validate(s)
    if not rep.ok:
        raise _Failure("invalid surface:\n" + str(rep))
    return s


def _scalars(text: str, gens: list[str]) -> list[FieldValue]:
    try:
        return [parse_scalar(part.strip(), gens) for part in text.split(",") if part.strip()]
    except ScalarSyntaxError as e:
        raise _Failure(f"bad scalar: {e}") from None


def _generators(spec: str | None) -> tuple[list[str], list[float]]:
    if not spec:
        return [], []
    names, values = [], []
    for tok in spec.replace(",", " ").split():
        name, _, val = tok.partition("=")
        names.append(name)
        if val:
            values.append(float(val))
    return names, values


def _partition(text: str) -> TypePartition:
    groups = re.findall(r"\{[^}]*\}|∅", text)
    if len(groups) != 3:
        raise _Failure(f"type partition must have three groups like '({{1}},{{2,3}},∅)', got {text!r}")
    sets = []
    for g in groups:
        body = "" if g == "∅" else g[1:-1]
        sets.append({int(x) for x in body.split(",") if x.strip()})
    return TypePartition(*sets)


# -- subcommands --------------------------------------------------------------------

def _cmd_validate(a, out):
    s = _read_surface(a.file)
    rep = validate(s)
    out.write(str(rep) + "\n")
    if not rep.ok:
        raise _Failure(None)


def _cmd_info(a, out):
    s = _valid_surface(a.file)
    out.write(summary_line(s) + "\n" if a.short else report(s))


def _cmd_matrix(a, out):
    s = _valid_surface(a.file)
    out.write(format_matrix(connection_matrix(s), a.format, s.generators))


def _cmd_monodromy(a, out):
    s = _valid_surface(a.file)
    gens = holonomy_generators(s)
    cls = classify_monodromy(gens)
    for g in gens:
        kind = "rot" if g.sign == 1 else "refl"
        out.write(f"generator: {kind}({format_scalar(g.angle, s.generators)})\n")
    out.write(f"class: {cls}\n")
    out.write(f"fiber: {fiber_multiplicity(cls, s)}\n")


def _cmd_annuli(a, out):
    s = _valid_surface(a.file)
    dec = annulus_decomposition(s)
    gens = s.generators
    for i, c in enumerate(dec.components):
        bands = " ".join(f"{s.ids[b]}[{_fmt(lo, gens)},{_fmt(hi, gens)}]" for b, lo, hi in c.bands)
        extra = ""
        if c.kind == "disk":
            p = s.pole_classes[c.pole]
            extra = f" pole={p.label or 'smooth'}"
        out.write(f"{i}: {c.kind} height={_fmt(c.height, gens)} circumference={_fmt(c.circumference, gens)}{extra} bands={bands}\n")


def _angle_vector(a) -> AngleVector:
    names, values = _generators(a.generators)
    theta = _scalars(a.theta, names)
    try:
        return AngleVector(tuple(theta), a.genus, tuple(values))
    except ValueError as e:
        raise _Failure(str(e)) from None


def _cmd_dim(a, out):
    av = _angle_vector(a)
    T = _partition(a.type)
    try:
        d = dim_coaxial(a.genus, av, T) if a.coaxial else dim_strict(a.genus, av, T)
    except PartitionError as e:
        raise _Failure(str(e)) from None
    out.write(f"{d}\n")


def _cmd_maxdim(a, out):
    av = _angle_vector(a)
    try:
        d = max_dim_coaxial(a.genus, av) if a.coaxial else max_dim_strict(a.genus, av)
    except PartitionError as e:
        raise _Failure(str(e)) from None
    out.write(f"{d}\n")


def _cmd_twocone(a, out):
    names, values = _generators(a.generators)
    t1 = _scalars(a.theta1, names)[0]
    t2 = _scalars(a.theta2, names)[0]
    try:
        out.write(two_cone_classify(t1, t2, values or None) + "\n")
    except ValueError as e:
        raise _Failure(str(e)) from None


def _cmd_deform(a, out):
    s = _valid_surface(a.file)
    log = DeformationLog()
    gens = s.generators
    try:
        if a.op == "twist":
            if a.component is None or a.psi is None:
                raise _Failure("twist needs --component and --psi")
            psi = _scalars(a.psi, list(gens))[0]
            new = twist(s, a.component, psi)
            log.record("twist", {"component": a.component, "psi": a.psi}, s, new)
        elif a.op == "slide":
            if a.zero is None or a.to is None:
                raise _Failure("slide needs --zero and --to")
            t = float(a.to) if s.mode == "float" else _scalars(a.to, list(gens))[0]
            new = slide(s, a.zero, t)
            log.record("slide", {"zero": a.zero, "to": a.to}, s, new)
        elif a.op == "split":
            if a.pole is None or a.ell is None:
                raise _Failure("split needs --pole and --ell")
            ell = float(a.ell) if s.mode == "float" else _scalars(a.ell, list(gens))[0]
            start = _scalars(a.start, list(gens))[0]
            new = split_pole(s, a.pole, start, ell)
            log.record("split", {"pole": a.pole, "start": a.start, "ell": a.ell}, s, new)
        elif a.op == "generic":
            new = make_generic(s, log)
        else:
            if a.lam is None:
                raise _Failure("lambda needs --lam")
            new = lambda_deform(s, float(a.lam))
            log.record("lambda", {"lam": a.lam}, s, new)
    except DeformationError as e:
        raise _Failure(str(e)) from None
    text = format_surface(new)
    if a.output:
        Path(a.output).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    for line in log.lines():
        out.write(f"# {line}\n")


CENSUS_FIELDS = ["pattern_id", "g", "n", "T", "b", "m", "rank", "dim_rank", "dim_formula", "orientable", "monodromy"]


def census_rows(surfaces):
    """One census row per surface; rank columns stay empty for non-generic surfaces."""
    for i, s in enumerate(surfaces, start=1):
        c = classify_points(s)
        cm = connection_matrix(s)
        row = {
            "pattern_id": i,
            "g": c.genus,
            "n": c.partition.n,
            "T": str(c.partition),
            "b": s.b,
            "m": cm.m,
            "rank": "",
            "dim_rank": "",
            "dim_formula": foliated_dimension_formula(s) if foliated_dimension_formula(s) is not None else "",
            "orientable": int(is_orientable(s)),
            "monodromy": str(classify_monodromy(holonomy_generators(s))),
        }
        problems = []
        if is_generic(s):
            ra = rank_analysis(cm, s, strict=False)
            row["rank"] = ra.rank
            row["dim_rank"] = foliated_dimension_via_rank(s)
            if not ra.consistent:
                problems.append("rank law")
            if row["dim_formula"] != "" and row["dim_formula"] != row["dim_rank"]:
                problems.append("dimension")
        if not validate(s).ok:
            problems.append("validation")
        yield row, problems


def _cmd_enumerate(a, out):
    try:
        surfaces = enumerate_surfaces(a.max_bigons, a.max_marks, a.workers)
    except EnumerationBoundError as e:
        raise _Failure(str(e)) from None
    w = csv.DictWriter(out, fieldnames=CENSUS_FIELDS, lineterminator="\n")
    w.writeheader()
    failures = 0
    for row, problems in census_rows(surfaces):
        w.writerow(row)
        failures += bool(problems)
    if a.check == "all" and failures:
        raise _Failure(f"{failures} surfaces failed the checks")


def _cmd_trig(a, out):
    try:
        r = torus_redecomposition(a.x, a.w1)
    except (TrigDomainError, ArithmeticError) as e:
        raise _Failure(str(e)) from None
    names = ("x'", "w1'", "x''", "w1''")
    for name, v in zip(names, r.as_tuple()):
        out.write(f"{name} = {repr_float(v)}\n")
    out.write(f"max residual = {max(abs(x) for x in r.residuals):.3e}\n")


def _cmd_gallery(a, out):
    entries = gallery_entries()
    if a.check:
        bad = 0
        for e in entries:
            if e.expected_report is None:
                continue
            got = report(parse_surface(e.surface_text))
            ok = got == e.expected_report
            bad += not ok
            out.write(f"{e.name}: {'pass' if ok else 'FAIL'}\n")
        if bad:
            raise _Failure(None)
        return
    if a.name is None:
        for e in entries:
            out.write(e.name + "\n")
        return
    for e in entries:
        if e.name == a.name:
            out.write(e.surface_text)
            return
    raise _Failure(f"no gallery surface named {a.name!r}")


def _cmd_export_dot(a, out):
    s = _valid_surface(a.file)
    out.write(export_dot(s, a.which))


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sphfoli", description="Strip decompositions of dihedral cone spherical surfaces.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_file(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("file", nargs="?", default="-", help="surface file, '-' for stdin")
        return sp

    with_file("validate", "check a surface and list violations").set_defaults(fn=_cmd_validate)
    sp = with_file("info", "full report for a surface")
    sp.add_argument("--short", action="store_true", help="one summary line")
    sp.set_defaults(fn=_cmd_info)
    sp = with_file("matrix", "connection matrix")
    sp.add_argument("--format", choices=("pretty", "csv"), default="pretty")
    sp.set_defaults(fn=_cmd_matrix)
    with_file("monodromy", "holonomy generators and class").set_defaults(fn=_cmd_monodromy)
    with_file("annuli", "annulus decomposition").set_defaults(fn=_cmd_annuli)

    for name, fn, help_ in (("dim", _cmd_dim, "dimension of a stratum"), ("maxdim", _cmd_maxdim, "maximal dimension")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--genus", type=int, required=True)
        sp.add_argument("--theta", required=True, help="comma-separated angles in turns")
        if name == "dim":
            sp.add_argument("--type", required=True, help="type partition, e.g. '({1},{2,3},∅)'")
        sp.add_argument("--coaxial", action="store_true")
        sp.add_argument("--generators", help="formal generators, e.g. 'tau1=1.3'")
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("twocone", help="moduli of spheres with two cone points")
    sp.add_argument("theta1")
    sp.add_argument("theta2")
    sp.add_argument("--generators")
    sp.set_defaults(fn=_cmd_twocone)

    sp = sub.add_parser("deform", help="apply a deformation")
    sp.add_argument("op", choices=("twist", "slide", "split", "generic", "lambda"))
    sp.add_argument("file", nargs="?", default="-")
    sp.add_argument("--component", type=int)
    sp.add_argument("--psi")
    sp.add_argument("--zero")
    sp.add_argument("--to")
    sp.add_argument("--pole")
    sp.add_argument("--start", default="0")
    sp.add_argument("--ell")
    sp.add_argument("--lam")
    sp.add_argument("-o", "--output")
    sp.set_defaults(fn=_cmd_deform)

    sp = sub.add_parser("enumerate", help="census of small surfaces as CSV")
    sp.add_argument("--max-bigons", type=int, required=True)
    sp.add_argument("--max-marks", type=int, default=1)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--check", choices=("none", "all"), default="none")
    sp.set_defaults(fn=_cmd_enumerate)

    sp = sub.add_parser("trig", help="spherical trigonometry checks")
    sp.add_argument("which", choices=("torus",))
    sp.add_argument("--x", type=float, required=True, help="radians")
    sp.add_argument("--w1", type=float, required=True, help="radians")
    sp.set_defaults(fn=_cmd_trig)

    sp = sub.add_parser("gallery", help="list or print built-in surfaces")
    sp.add_argument("name", nargs="?")
    sp.add_argument("--check", action="store_true", help="compare every report with its golden file")
    sp.set_defaults(fn=_cmd_gallery)

    sp = with_file("export-dot", "Graphviz DOT output")
    sp.add_argument("--which", choices=("dual", "equatorial", "annuli"), default="dual")
    sp.set_defaults(fn=_cmd_export_dot)
    return p


def run(argv, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = _parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        a.fn(a, out)
    except _Failure as e:
        if e.args and e.args[0]:
            err.write(f"sphfoli: {e.args[0]}\n")
        return 1
    return 0


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    raise SystemExit(main())
