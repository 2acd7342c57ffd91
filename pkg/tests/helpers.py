"""Shared drivers for the deformation tests."""

from fractions import Fraction

from sphfoli.decomposition import annulus_decomposition
from sphfoli.deform import DeformationError, _twist, invariants, slide, twist
from sphfoli.surface import canonical_key, lat_lt


def random_fraction(rng, lo=0, hi=1, max_den=24):
    """Rational in [lo, hi) with a small denominator."""
    den = rng.randint(1, max_den)
    num = rng.randrange(den)
    return lo + (hi - lo) * Fraction(num, den)


def annulus_indices(s):
    return [i for i, c in enumerate(annulus_decomposition(s).components) if c.kind == "annulus"]


def even_zero_labels(s):
    return [z.label for z in s.zero_classes if z.s % 2 == 0 and z.label is not None]


def random_twist(s, rng):
    """Twist a random annulus by a random amount; None when there is no annulus."""
    choices = annulus_indices(s)
    if not choices:
        return None
    i = rng.choice(choices)
    c = annulus_decomposition(s).components[i]
    psi = c.circumference * random_fraction(rng)
    return twist(s, i, psi), ("twist", i, psi)


def random_slide(s, rng, attempts=20):
    """Slide a random even zero to a random admissible latitude; None if nothing admissible was hit."""
    labels = even_zero_labels(s)
    if not labels:
        return None
    for _ in range(attempts):
        label = rng.choice(labels)
        t = Fraction(rng.randint(1, 47), 48)
        try:
            return slide(s, label, t), ("slide", label, t)
        except DeformationError:
            continue
    return None


def check_preserved(before, after, op):
    """Genus, angles, partition and labeled absolute latitudes survive; a slid zero moves as asked."""
    a, b = invariants(before), invariants(after)
    problems = []
    for key in ("genus", "angles", "partition"):
        if a[key] != b[key]:
            problems.append(f"{key}: {a[key]} -> {b[key]}")
    lat_a, lat_b = dict(a["latitudes"]), dict(b["latitudes"])
    if op[0] == "slide":
        label, t = op[1], op[2]
        want = min(t, 1 - t)
        if lat_b.pop(label) != want:
            problems.append(f"slid zero {label} not at {want}")
        lat_a.pop(label)
    if lat_a != lat_b:
        problems.append(f"latitudes: {lat_a} -> {lat_b}")
    return problems


def twist_is_additive(s, i, frac1, frac2):
    """Twisting by psi1 then psi2 equals one twist by psi1 + psi2 reduced mod the circumference."""
    c = annulus_decomposition(s).components[i]
    C = c.circumference
    psi1, psi2 = C * frac1, C * frac2
    once, eng = _twist(s, i, psi1)
    r = c.rects[0]
    x = s.bigons[r.bigon].width * Fraction(1, 3)
    t = r.lo + (r.hi - r.lo) * Fraction(1, 3)
    nb, _, nt = eng.map_point(r.bigon, x, t)
    j = annulus_decomposition(once).component_at(nb, nt)
    twice = twist(once, j, psi2)
    total = psi1 + psi2
    if not lat_lt(total, C, s.embedding):
        total = total - C
    return canonical_key(twice) == canonical_key(twist(s, i, total))
