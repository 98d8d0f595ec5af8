"""Named generator-set scenarios used by the verification pipeline.

Every scenario is a free rank-2 Schottky group in some linear disguise:

- schottky-so21:     two hyperbolic isometries of the hyperbolic plane inside
                     SO(2,1) c SL(3,R), crossing axes (angle psi), equal
                     translation length t.
- fuchsian-irr-sl3:  an SL(2,R) Schottky group pushed through the irreducible
                     3-dimensional representation (Sym^2).
- fuchsian-red-sl3:  the same Schottky group embedded reducibly, g -> diag(g, 1).
- cocycle-sl3:       the reducible embedding deformed by a translation
                     cocycle u: [[g, u(g)], [0, 1]]; u free on the generators
                     (mode "random"), a coboundary g.v - v (mode "coboundary"),
                     or zero (mode "zero").
- product-sl4:       g -> j1(g) (x) j2(g) for two Schottky SL(2,R)
                     representations with different parameters.  Exact
                     exponent values from closed-surface examples are not
                     reproducible for free groups, so this scenario carries
                     sandwich inequalities only.
- dgk-embed:         any base scenario post-composed with Sym^2 (the embedding
                     into the projectivized cone of quadratic forms).

Ping-pong sanity is enforced by a separation heuristic: every letter
(generators and inverses) must be proximal, and each attractor must make an
angle of at least SEPARATION_ANGLE with its own and every other letter's
repelling hyperplane (g^-1's repeller contains g's attractor by construction,
so that pair is exempt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .linalg import ProjPoint, proximality_gaps, _principal_eigvec
from .reps import principal_sl2, sym_square, tensor_product_many
from .words import GeneratorSet

SEPARATION_ANGLE = 0.3  # radians
DEFAULT_T = 2.0
DEFAULT_PSI = math.pi / 2

SCENARIO_NAMES = ("schottky-so21", "fuchsian-irr-sl3", "fuchsian-red-sl3",
                  "cocycle-sl3", "product-sl4", "dgk-embed")

_DESCRIPTIONS = {
    "schottky-so21": "rank-2 Schottky in SO(2,1) c SL(3,R), crossing axes",
    "fuchsian-irr-sl3": "SL(2,R) Schottky via the irreducible rep in SL(3,R)",
    "fuchsian-red-sl3": "SL(2,R) Schottky embedded reducibly as diag(g, 1)",
    "cocycle-sl3": "reducible embedding deformed by a translation cocycle",
    "product-sl4": "tensor product j1 (x) j2 of two SL(2,R) Schottky reps",
    "dgk-embed": "base scenario pushed through Sym^2 (quadratic-form cone)",
}


@dataclass(frozen=True)
class Cocycle:
    """A translation cocycle on the free group: u(gh) = u(g) + g.u(h).

    Stored by its values on the generators (label -> R^2 vector); the
    extension to all words is realized by the block matrices
    [[g, u(g)], [0, 1]], whose products implement the rule exactly.
    """

    labels: tuple
    vectors: tuple          # one 2-vector per generator, as tuples
    mode: str = "random"
    coboundary_v: tuple | None = None

    def value(self, label: str) -> np.ndarray:
        return np.array(self.vectors[self.labels.index(label)])


@dataclass(frozen=True)
class Scenario:
    """A resolved scenario: generators plus verification metadata."""

    name: str
    gs: GeneratorSet
    params: dict
    convex_cocompact: bool
    equality_checks: tuple = ()
    aux: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.gs.n


def list_scenarios():
    """(name, description) pairs for the catalog."""
    return [(name, _DESCRIPTIONS[name]) for name in SCENARIO_NAMES]


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------

def so21_boost(t: float) -> np.ndarray:
    """Boost along the first axis for the form x1^2 + x2^2 - x3^2."""
    ch, sh = math.cosh(t), math.sinh(t)
    return np.array([[ch, 0.0, sh], [0.0, 1.0, 0.0], [sh, 0.0, ch]])


def so21_rotation(psi: float) -> np.ndarray:
    c, s = math.cos(psi), math.sin(psi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def sl2_schottky_pair(t: float, psi: float):
    """Two hyperbolic elements of SL(2,R), axes through i crossing at psi,
    both of translation length t (eigenvalues e^(t/2))."""
    a = np.diag([math.exp(t / 2.0), math.exp(-t / 2.0)])
    half = psi / 2.0  # PSL(2) double cover: rotation by psi/2 turns H^2 by psi
    c, s = math.cos(half), math.sin(half)
    r = np.array([[c, -s], [s, c]])
    b = r @ a @ r.T
    return a, b


def _check_separation(gs: GeneratorSet, context: str):
    """Ping-pong separation heuristic; raises ConfigurationError on failure."""
    letters = gs.letter_mats
    infos = [proximality_gaps(m) for m in letters]
    for j, info in enumerate(infos):
        if not info.proximal:
            raise ConfigurationError(
                f"{context}: letter {j} is not proximal ({info.reason})")
        if info.angle < SEPARATION_ANGLE:
            raise ConfigurationError(
                f"{context}: letter {j} proximality angle {info.angle:.3f} "
                f"below {SEPARATION_ANGLE}")
    tops = [ProjPoint(_principal_eigvec(m, "top")) for m in letters]
    # repelling hyperplane normal of h = top left eigenvector of h
    normals = [ProjPoint(_principal_eigvec(m.T, "top")) for m in letters]
    for a in range(len(letters)):
        for b in range(len(letters)):
            if b == a or b == (a ^ 1):
                continue
            sine = abs(float(tops[a].vec @ normals[b].vec))
            angle = math.asin(min(1.0, sine))
            if angle < SEPARATION_ANGLE:
                raise ConfigurationError(
                    f"{context}: attractor of letter {a} only {angle:.3f} rad "
                    f"from repeller of letter {b}")


def _embed_reducible(g2: np.ndarray, u: np.ndarray | None = None) -> np.ndarray:
    out = np.eye(3)
    out[:2, :2] = g2
    if u is not None:
        out[:2, 2] = u
    return out


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def build_scenario(name: str, *, t: float | None = None,
                   psi: float | None = None, seed: int = 0,
                   cocycle: str = "random", base: str = "schottky-so21",
                   t2: float | None = None, psi2: float | None = None) -> Scenario:
    """Construct a catalog scenario with resolved parameters.

    Raises ConfigurationError for unknown names, bad parameters, and
    ping-pong configurations failing the separation heuristic.
    """
    if name not in SCENARIO_NAMES:
        raise ConfigurationError(
            f"unknown scenario {name!r}; catalog: {', '.join(SCENARIO_NAMES)}")
    t = DEFAULT_T if t is None else float(t)
    psi = DEFAULT_PSI if psi is None else float(psi)
    if t <= 0:
        raise ConfigurationError("translation length t must be positive")
    if not 0 < psi < math.pi:
        raise ConfigurationError("axis angle psi must lie in (0, pi)")
    params = {"t": t, "psi": psi, "seed": int(seed)}

    if name == "schottky-so21":
        a = so21_boost(t)
        rot = so21_rotation(psi)
        b = rot @ so21_boost(t) @ rot.T
        gs = GeneratorSet([a, b], labels=("a", "b"))
        _check_separation(gs, name)
        return Scenario(name, gs, params, convex_cocompact=True,
                        equality_checks=("two_delta1n_equals_delta12",))

    if name in ("fuchsian-irr-sl3", "fuchsian-red-sl3", "cocycle-sl3"):
        a2, b2 = sl2_schottky_pair(t, psi)
        gs2 = GeneratorSet([a2, b2], labels=("a", "b"))
        _check_separation(gs2, name + " (SL(2) factor)")
        if name == "fuchsian-irr-sl3":
            gens = [principal_sl2(a2, 3), principal_sl2(b2, 3)]
            gs = GeneratorSet(gens, labels=("a", "b"))
            return Scenario(name, gs, params, convex_cocompact=True,
                            equality_checks=("two_delta1n_equals_delta12",),
                            aux={"sl2": gs2})
        if name == "fuchsian-red-sl3":
            gens = [_embed_reducible(a2), _embed_reducible(b2)]
            gs = GeneratorSet(gens, labels=("a", "b"))
            return Scenario(name, gs, params, convex_cocompact=False,
                            equality_checks=("delta1n_equals_half_delta12",),
                            aux={"sl2": gs2})
        # cocycle-sl3
        if cocycle not in ("random", "coboundary", "zero"):
            raise ConfigurationError(f"unknown cocycle mode {cocycle!r}")
        rng = np.random.default_rng(seed)
        cob_v = None
        if cocycle == "random":
            vecs = rng.uniform(-1.0, 1.0, size=(2, 2))
        elif cocycle == "coboundary":
            cob_v = rng.uniform(-1.0, 1.0, size=2)
            vecs = np.stack([a2 @ cob_v - cob_v, b2 @ cob_v - cob_v])
        else:
            vecs = np.zeros((2, 2))
        coc = Cocycle(labels=("a", "b"),
                      vectors=tuple(tuple(v) for v in vecs), mode=cocycle,
                      coboundary_v=None if cob_v is None else tuple(cob_v))
        gens = [_embed_reducible(a2, vecs[0]), _embed_reducible(b2, vecs[1])]
        gs = GeneratorSet(gens, labels=("a", "b"))
        params = dict(params, cocycle=cocycle)
        return Scenario(name, gs, params, convex_cocompact=False,
                        equality_checks=("limit_lines_on_invariant_plane",),
                        aux={"sl2": gs2, "cocycle": coc})

    if name == "product-sl4":
        # second factor runs FASTER than the first: slower crossing-axis
        # pairs (t below ~2 at psi/2 rotation scale) contain elliptic words,
        # the group is then not free and delta_12 of the product diverges
        t2 = 1.2 * t if t2 is None else float(t2)
        psi2 = 0.75 * psi if psi2 is None else float(psi2)
        if t2 <= 0 or not 0 < psi2 < math.pi:
            raise ConfigurationError("bad second-factor parameters")
        a1, b1 = sl2_schottky_pair(t, psi)
        a2, b2 = sl2_schottky_pair(t2, psi2)
        gs_f1 = GeneratorSet([a1, b1], labels=("a", "b"))
        gs_f2 = GeneratorSet([a2, b2], labels=("a", "b"))
        _check_separation(gs_f1, name + " (factor 1)")
        _check_separation(gs_f2, name + " (factor 2)")
        gens = tensor_product_many(np.stack([a1, b1]), np.stack([a2, b2]))
        gs = GeneratorSet(list(gens), labels=("a", "b"))
        params = dict(params, t2=t2, psi2=psi2)
        return Scenario(name, gs, params, convex_cocompact=False,
                        aux={"factor1": gs_f1, "factor2": gs_f2})

    # dgk-embed
    if base == "dgk-embed":
        raise ConfigurationError("dgk-embed cannot use itself as base")
    inner = build_scenario(base, t=t, psi=psi, seed=seed, cocycle=cocycle,
                           t2=t2, psi2=psi2)
    gens = [sym_square(m) for m in inner.gs.letter_mats[0::2]]
    gs = GeneratorSet(gens, labels=inner.gs.labels)
    params = dict(params, base=base)
    return Scenario("dgk-embed", gs, params, convex_cocompact=True,
                    aux={"base": inner})


# ---------------------------------------------------------------------------
# key=value config files
# ---------------------------------------------------------------------------

_INT_KEYS = {"seed", "max_len", "word_len", "count", "budget", "scales", "n"}
_FLOAT_KEYS = {"t", "psi", "t2", "psi2", "bin"}


def parse_config(path: str) -> dict:
    """Parse a key=value config file (one pair per line, # comments)."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(
                    f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key in _INT_KEYS:
                try:
                    out[key] = int(value)
                except ValueError:
                    raise ConfigurationError(
                        f"{path}:{lineno}: {key} needs an integer") from None
            elif key in _FLOAT_KEYS:
                try:
                    out[key] = float(value)
                except ValueError:
                    raise ConfigurationError(
                        f"{path}:{lineno}: {key} needs a number") from None
            else:
                out[key] = value
    return out


def scenario_from_config(cfg: dict) -> Scenario:
    if "name" not in cfg:
        raise ConfigurationError("config needs a scenario name")
    kwargs = {k: cfg[k] for k in ("t", "psi", "t2", "psi2", "seed",
                                  "cocycle", "base") if k in cfg}
    return build_scenario(cfg["name"], **kwargs)
