"""Finite-quotient witness pipelines for residually finite groups.

For a chosen modulus schedule, each stage reduces the group modulo a
congruence kernel, matches characters of the central image against a target
schedule of characters of the center, induces the matched characters up to
the quotient, and records how far each probe element is moved from the
identity.  Central probes in the distinguished subgroup must approach the
identity at rate 1/n; probes whose image leaves the central image are
pushed at least sqrt(2) away by the induced structure.

The LEF side packages injective, multiplicative-on-a-finite-set maps into
finite groups and turns them into sqrt(2)-separated unitaries through the
regular representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .finrep import MonomialMatrix, monomial_norm_minus_identity, regular_rep
from .groups import (AbelsElement, FiniteGroup, FreeWord, HeisenbergElement,
                     PAdicLaurent, center_membership, group_from_elements,
                     mulclose, multiplicative_order)

__all__ = [
    "chord",
    "CenterCharacter",
    "CharMatch",
    "GammaChoice",
    "ChooseGammaError",
    "choose_gamma",
    "AbelsQuotientModel",
    "HeisenbergQuotientModel",
    "AbelsInstance",
    "HeisenbergInstance",
    "get_instance",
    "MFProbeRow",
    "MFStageRecord",
    "MFRun",
    "run_mf",
    "SeparationRow",
    "SeparationReport",
    "separation_report",
    "DIMENSION_CAP",
    "SQRT2",
    "LEFWitness",
    "LefSearchError",
    "lef_witness_search",
    "LefReport",
    "verify_lef_witness",
    "lef_to_unitaries",
    "sl2_word_image",
    "DEFAULT_LEF_SCHEDULE",
]

SQRT2 = math.sqrt(2.0)
DIMENSION_CAP = 100_000


def chord(rotation: Fraction | float) -> float:
    """|exp(2 pi i r) - 1| = 2 |sin(pi r)|."""
    return 2.0 * abs(math.sin(math.pi * float(rotation)))


# ---------------------------------------------------------------------------
# Character schedules on the center
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CenterCharacter:
    """A character of the center, trivial on the distinguished subgroup N.

    ``rotation`` maps a central element to the exact rotation number of its
    character value.
    """

    param: int
    rotation: Callable[[object], Fraction]

    def value_distance_to_one(self, x) -> float:
        return chord(self.rotation(x))


def _abels_character(a: int, prime: int) -> CenterCharacter:
    def rotation(x: AbelsElement) -> Fraction:
        v = x.x14
        return Fraction(a * v.mantissa, prime**v.expo) % 1

    return CenterCharacter(param=a, rotation=rotation)


def _trivial_character(a: int) -> CenterCharacter:
    return CenterCharacter(param=a, rotation=lambda x: Fraction(0))


# ---------------------------------------------------------------------------
# Character matching against a finite central image
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CharMatch:
    param: int
    char_index: int
    discrepancy: float
    matched: bool


@dataclass(frozen=True)
class GammaChoice:
    results: tuple[CharMatch, ...]
    tolerance: float

    @property
    def discrepancy(self) -> float:
        return max((r.discrepancy for r in self.results), default=0.0)

    @property
    def ok(self) -> bool:
        return all(r.matched for r in self.results)

    def matched_indices(self) -> list[int]:
        return [r.char_index for r in self.results if r.matched]


class ChooseGammaError(RuntimeError):
    """No character fits within tolerance; carries the best attempt."""

    def __init__(self, choice: GammaChoice):
        self.choice = choice
        super().__init__(
            f"no character within tolerance {choice.tolerance}; "
            f"best discrepancy {choice.discrepancy:.6f} "
            "(the modulus schedule is too sparse for this character)")


def match_character(omega: CenterCharacter, center_reduce: Callable[[object], int],
                    center_order: int, exhaustion: Sequence, tolerance: float) -> CharMatch:
    """Best character of the cyclic central image against one target character.

    Fast path: a target that is exactly trivial on the exhaustion is matched
    by the trivial character with zero discrepancy.  Otherwise the (small)
    dual is searched exhaustively.
    """
    rotations = [omega.rotation(x) for x in exhaustion]
    if all(r == 0 for r in rotations):
        return CharMatch(param=omega.param, char_index=0, discrepancy=0.0, matched=True)
    coords = [center_reduce(x) for x in exhaustion]
    best_j, best_disc = 0, math.inf
    for j in range(center_order):
        disc = 0.0
        for rot, c in zip(rotations, coords):
            disc = max(disc, chord(rot - Fraction(j * c, center_order)))
            if disc >= best_disc:
                break
        if disc < best_disc:
            best_j, best_disc = j, disc
    return CharMatch(param=omega.param, char_index=best_j, discrepancy=best_disc,
                     matched=best_disc < tolerance)


def choose_gamma(omegas: Sequence[CenterCharacter], center_reduce, center_order: int,
                 exhaustion: Sequence, tolerance: float,
                 *, raise_on_failure: bool = True) -> GammaChoice:
    """Match every scheduled character; fail loudly when one cannot be placed."""
    results = tuple(match_character(w, center_reduce, center_order, exhaustion, tolerance)
                    for w in omegas)
    choice = GammaChoice(results=results, tolerance=tolerance)
    if raise_on_failure and not choice.ok:
        raise ChooseGammaError(choice)
    return choice


# ---------------------------------------------------------------------------
# Congruence quotient models with vectorized coset actions
# ---------------------------------------------------------------------------


class AbelsQuotientModel:
    """Mod-m image of the 4x4 group, with cosets of the central image
    enumerated by stripping the corner coordinate."""

    def __init__(self, modulus: int, prime: int = 2):
        if math.gcd(modulus, prime) != 1:
            raise ValueError(f"modulus {modulus} not coprime to prime {prime}")
        self.modulus = modulus
        self.prime = prime
        self.diag_order = multiplicative_order(prime, modulus)
        self.index = self.diag_order**2 * modulus**5
        self.order = self.index * modulus
        self.center_order = modulus
        self._transversal = None
        self._pow_table = np.array(
            [pow(prime, j, modulus) for j in range(self.diag_order)], dtype=np.int64)

    def reduce(self, g: AbelsElement) -> tuple[int, ...]:
        m = self.modulus
        return (g.k_exp % self.diag_order, g.n_exp % self.diag_order,
                g.x12.reduce_mod(m), g.x13.reduce_mod(m), g.x14.reduce_mod(m),
                g.x23.reduce_mod(m), g.x24.reduce_mod(m), g.x34.reduce_mod(m))

    def in_center_image(self, gdata: tuple[int, ...]) -> bool:
        da, db, x12, x13, _, x23, x24, x34 = gdata
        return not (da or db or x12 or x13 or x23 or x24 or x34)

    def central_coordinate(self, gdata: tuple[int, ...]) -> int:
        return gdata[4]

    def _ensure_transversal(self):
        if self._transversal is not None:
            return
        idx = np.arange(self.index, dtype=np.int64)
        m, d = self.modulus, self.diag_order
        r = idx
        x34 = r % m; r = r // m
        x24 = r % m; r = r // m
        x23 = r % m; r = r // m
        x13 = r % m; r = r // m
        x12 = r % m; r = r // m
        db = r % d
        da = r // d
        self._transversal = (da, db, x12, x13, x23, x24, x34)

    def _encode(self, da, db, x12, x13, x23, x24, x34):
        m, d = self.modulus, self.diag_order
        return ((((((da * d + db) * m + x12) * m + x13) * m + x23) * m + x24) * m + x34)

    def act(self, gdata: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
        """Permutation of cosets and central phase coordinate of left
        multiplication by g."""
        self._ensure_transversal()
        da, db, x12, x13, x23, x24, x34 = self._transversal
        m = self.modulus
        ga, gb, g12, g13, g14, g23, g24, g34 = gdata
        pk_g = int(self._pow_table[ga])
        pn_g = int(self._pow_table[gb])
        p_t = self._pow_table[da]
        q_t = self._pow_table[db]
        c12 = (x12 + g12 * p_t) % m
        c13 = (x13 + g12 * x23 + g13 * q_t) % m
        c14 = (g12 * x24 + g13 * x34 + g14) % m
        c23 = (pk_g * x23 + g23 * q_t) % m
        c24 = (pk_g * x24 + g23 * x34 + g24) % m
        c34 = (pn_g * x34 + g34) % m
        a2 = (da + ga) % self.diag_order
        b2 = (db + gb) % self.diag_order
        perm = self._encode(a2, b2, c12, c13, c23, c24, c34)
        return perm, c14


class HeisenbergQuotientModel:
    """Mod-m Heisenberg quotient; cosets of the center are (a, b) pairs."""

    def __init__(self, modulus: int):
        self.modulus = modulus
        self.index = modulus**2
        self.order = modulus**3
        self.center_order = modulus
        self._transversal = None

    def reduce(self, g: HeisenbergElement) -> tuple[int, int, int]:
        m = self.modulus
        return (g.a % m, g.b % m, g.c % m)

    def in_center_image(self, gdata) -> bool:
        return gdata[0] == 0 and gdata[1] == 0

    def central_coordinate(self, gdata) -> int:
        return gdata[2]

    def _ensure_transversal(self):
        if self._transversal is None:
            idx = np.arange(self.index, dtype=np.int64)
            self._transversal = (idx // self.modulus, idx % self.modulus)

    def act(self, gdata) -> tuple[np.ndarray, np.ndarray]:
        self._ensure_transversal()
        ta, tb = self._transversal
        m = self.modulus
        ga, gb, gc = gdata
        a2 = (ta + ga) % m
        b2 = (tb + gb) % m
        phase = (gc + ga * tb) % m
        return a2 * m + b2, phase


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------


class AbelsInstance:
    """The 4x4 matrix group over integers with p inverted; N is the integer
    corner subgroup inside the center."""

    name = "abels"

    def __init__(self, prime: int = 2):
        self.prime = prime

    def identity(self) -> AbelsElement:
        return AbelsElement(self.prime)

    def center_test(self, x) -> bool:
        return center_membership(x).in_center

    def n_test(self, x) -> bool:
        return center_membership(x).in_n

    def characters(self, count: int) -> list[CenterCharacter]:
        return [_abels_character(a, self.prime) for a in range(1, count + 1)]

    def exhaustion(self, n: int) -> list[AbelsElement]:
        seen: set[PAdicLaurent] = set()
        out = []
        for k in range(n + 1):
            for u in range(-n, n + 1):
                v = PAdicLaurent(u, k, self.prime)
                if v not in seen:
                    seen.add(v)
                    out.append(AbelsElement(self.prime, x14=v))
        out.sort(key=lambda g: (g.x14.expo, g.x14.mantissa))
        return out

    def in_exhaustion(self, x: AbelsElement, n: int) -> bool:
        if not self.center_test(x):
            return False
        return abs(x.x14.mantissa) <= n and x.x14.expo <= n

    def make_model(self, modulus: int) -> AbelsQuotientModel:
        return AbelsQuotientModel(modulus, self.prime)

    def default_moduli(self, stages: int = 4) -> list[int]:
        return [2 * i + 3 for i in range(stages)]

    def default_probes(self) -> list[tuple[str, AbelsElement]]:
        p = self.prime
        return [
            ("x14=1", AbelsElement(p, x14=1)),
            ("x14=1/p", AbelsElement(p, x14=(1, 1))),
            ("x23=1", AbelsElement(p, x23=1)),
        ]


class HeisenbergInstance:
    """Integer Heisenberg group; N equals the center, so every scheduled
    character is trivial."""

    name = "heisenberg"

    def identity(self) -> HeisenbergElement:
        return HeisenbergElement()

    def center_test(self, x) -> bool:
        return center_membership(x).in_center

    def n_test(self, x) -> bool:
        return center_membership(x).in_n

    def characters(self, count: int) -> list[CenterCharacter]:
        return [_trivial_character(a) for a in range(1, count + 1)]

    def exhaustion(self, n: int) -> list[HeisenbergElement]:
        return [HeisenbergElement(0, 0, c) for c in range(-n, n + 1)]

    def in_exhaustion(self, x: HeisenbergElement, n: int) -> bool:
        return self.center_test(x) and abs(x.c) <= n

    def make_model(self, modulus: int) -> HeisenbergQuotientModel:
        return HeisenbergQuotientModel(modulus)

    def default_moduli(self, stages: int = 3) -> list[int]:
        return [3**(i + 1) for i in range(stages)]

    def default_probes(self) -> list[tuple[str, HeisenbergElement]]:
        return [
            ("(0,0,1)", HeisenbergElement(0, 0, 1)),
            ("(0,0,2)", HeisenbergElement(0, 0, 2)),
            ("(1,0,0)", HeisenbergElement(1, 0, 0)),
            ("(0,1,0)", HeisenbergElement(0, 1, 0)),
            ("(3,0,0)", HeisenbergElement(3, 0, 0)),
        ]


def get_instance(name: str, prime: int = 2):
    if name == "abels":
        return AbelsInstance(prime)
    if name == "heisenberg":
        return HeisenbergInstance()
    raise ValueError(f"unknown instance {name!r}")


# ---------------------------------------------------------------------------
# The staged pipeline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MFProbeRow:
    label: str
    norm: float
    in_center_image: bool


@dataclass
class MFStageRecord:
    stage: int
    modulus: int
    tolerance: float
    index: int
    dim: int
    skipped: bool = False
    skip_reason: str = ""
    char_results: tuple[CharMatch, ...] = ()
    gamma: tuple[int, ...] = ()
    gamma_is_fallback: bool = False
    identity_ok: bool = True
    probe_rows: list[MFProbeRow] = field(default_factory=list)

    def matched_params(self) -> list[int]:
        return [r.param for r in self.char_results if r.matched]


@dataclass
class MFRun:
    instance: str
    moduli: list[int]
    cap: int
    probes: list[tuple[str, object]]
    stages: list[MFStageRecord]

    def completed_stages(self) -> list[MFStageRecord]:
        return [s for s in self.stages if not s.skipped]


def _stage_probe_norm(model, gamma: Sequence[int], gdata) -> tuple[float, bool]:
    m = model.center_order
    if model.in_center_image(gdata):
        c = model.central_coordinate(gdata)
        norm = max(chord(Fraction(j * c, m)) for j in set(gamma))
        return norm, True
    perm, phase = model.act(gdata)
    norm = 0.0
    for j in set(gamma):
        mono = MonomialMatrix(perm, (j * phase) % m, m)
        norm = max(norm, monomial_norm_minus_identity(mono))
    return norm, False


def run_mf(instance, *, moduli: Sequence[int] | None = None,
           stages: int | None = None,
           probes: Sequence[tuple[str, object]] | None = None,
           cap: int = DIMENSION_CAP) -> MFRun:
    """Run the staged witness pipeline.

    Stage n uses the n-th modulus, the first n scheduled characters, the
    depth-n exhaustion of the center and tolerance 1/n.  Characters that fail
    to match within tolerance are recorded as explicit failures; the stage is
    assembled from the matched ones (the trivial character when none match).
    Stages whose induced dimension exceeds the cap are reported skipped.
    """
    if moduli is None:
        moduli = instance.default_moduli(stages or 3)
    moduli = list(moduli)
    if stages is None:
        stages = len(moduli)
    if stages > len(moduli):
        raise ValueError(f"need {stages} moduli, got {len(moduli)}")
    if probes is None:
        probes = instance.default_probes()
    probes = list(probes)
    records: list[MFStageRecord] = []
    for n in range(1, stages + 1):
        modulus = moduli[n - 1]
        tolerance = 1.0 / n
        model = instance.make_model(modulus)
        omegas = instance.characters(n)
        exhaustion = instance.exhaustion(n)
        choice = choose_gamma(omegas, lambda x: model.central_coordinate(model.reduce(x)),
                              model.center_order, exhaustion, tolerance,
                              raise_on_failure=False)
        gamma = choice.matched_indices()
        fallback = not gamma
        if fallback:
            gamma = [0]
        dim = len(gamma) * model.index
        record = MFStageRecord(stage=n, modulus=modulus, tolerance=tolerance,
                               index=model.index, dim=dim,
                               char_results=choice.results, gamma=tuple(gamma),
                               gamma_is_fallback=fallback)
        if dim > cap:
            record.skipped = True
            record.skip_reason = f"induced dimension {dim} exceeds cap {cap}"
            records.append(record)
            continue
        id_data = model.reduce(instance.identity())
        norm_id, central = _stage_probe_norm(model, gamma, id_data)
        record.identity_ok = central and norm_id == 0.0
        for label, x in probes:
            norm, in_zn = _stage_probe_norm(model, gamma, model.reduce(x))
            record.probe_rows.append(MFProbeRow(label=label, norm=norm,
                                                in_center_image=in_zn))
        records.append(record)
    return MFRun(instance=instance.name, moduli=moduli, cap=cap,
                 probes=probes, stages=records)


# ---------------------------------------------------------------------------
# Separation report
# ---------------------------------------------------------------------------

N_PROBE_SLACK = 1e-9
OFF_CENTER_SLACK = 1e-9


@dataclass(frozen=True)
class SeparationRow:
    probe: str
    classification: str
    stage: int
    modulus: int
    norm: float
    in_center_image: bool
    covered: bool
    separating_matched: bool


@dataclass
class SeparationReport:
    rows: list[SeparationRow]
    violations: list[str]
    stages_completed: int
    stages_skipped: int

    @property
    def ok(self) -> bool:
        return not self.violations


def separation_report(run: MFRun, instance) -> SeparationReport:
    """Classify each probe and assert the per-class guarantees stage by stage.

    Probes in N must satisfy the 1/n bound wherever the exhaustion covers
    them; probes whose image leaves the central image must be at least
    sqrt(2) away; probes in the center but outside N get a recorded lower
    bound at stages where a separating character was actually matched.
    """
    probe_map = {label: x for label, x in run.probes}
    completed = run.completed_stages()
    rows: list[SeparationRow] = []
    violations: list[str] = []
    for label, x in run.probes:
        central = instance.center_test(x)
        in_n = instance.n_test(x)
        classification = ("n_member" if in_n else
                          "center_not_n" if central else "off_center")
        covered_anywhere = False
        off_center_stage_seen = False
        for record in completed:
            row_data = next(r for r in record.probe_rows if r.label == label)
            covered = central and instance.in_exhaustion(x, record.stage)
            covered_anywhere = covered_anywhere or covered
            separating = False
            if central:
                omegas = instance.characters(record.stage)
                matched_params = set(record.matched_params())
                separating = any(w.param in matched_params and w.rotation(x) != 0
                                 for w in omegas)
            rows.append(SeparationRow(
                probe=label, classification=classification, stage=record.stage,
                modulus=record.modulus, norm=row_data.norm,
                in_center_image=row_data.in_center_image, covered=covered,
                separating_matched=separating))
            if classification == "n_member" and covered:
                bound = record.tolerance + N_PROBE_SLACK
                if row_data.norm > bound:
                    violations.append(
                        f"probe {label}: stage {record.stage} norm {row_data.norm} "
                        f"exceeds {bound}")
            if classification == "off_center" and not row_data.in_center_image:
                off_center_stage_seen = True
                if row_data.norm < SQRT2 - OFF_CENTER_SLACK:
                    violations.append(
                        f"probe {label}: stage {record.stage} norm {row_data.norm} "
                        f"below sqrt(2)")
        if central and completed and not covered_anywhere:
            violations.append(f"probe {label} not covered by the exhaustion "
                              "at any computed stage")
        if classification == "off_center" and completed and not off_center_stage_seen:
            violations.append(f"probe {label} never left the central image; "
                              "extend the modulus schedule")
    return SeparationReport(rows=rows, violations=violations,
                            stages_completed=len(completed),
                            stages_skipped=len(run.stages) - len(completed))


# ---------------------------------------------------------------------------
# LEF witnesses through the 2x2 embedding
# ---------------------------------------------------------------------------

_SL2_GENERATORS = {
    "a": ((1, 2), (0, 1)),
    "b": ((1, 0), (2, 1)),
    "A": ((1, -2), (0, 1)),
    "B": ((1, 0), (-2, 1)),
}

DEFAULT_LEF_SCHEDULE = tuple(range(2, 50))


def _mat_mul_mod(x, y, m: int):
    return (
        ((x[0][0] * y[0][0] + x[0][1] * y[1][0]) % m,
         (x[0][0] * y[0][1] + x[0][1] * y[1][1]) % m),
        ((x[1][0] * y[0][0] + x[1][1] * y[1][0]) % m,
         (x[1][0] * y[0][1] + x[1][1] * y[1][1]) % m),
    )


def sl2_word_image(w: FreeWord, m: int):
    """Image of a free word under a -> [[1,2],[0,1]], b -> [[1,0],[2,1]] mod m."""
    from .groups import LETTERS

    out = ((1 % m, 0), (0, 1 % m))
    for code in w.codes:
        gen = _SL2_GENERATORS[LETTERS[code]]
        gen = tuple(tuple(v % m for v in row) for row in gen)
        out = _mat_mul_mod(out, gen, m)
    return out


class LefSearchError(RuntimeError):
    pass


@dataclass
class LEFWitness:
    """A finite set F, a finite group H and a map multiplicative on F."""

    elements: list[FreeWord]
    modulus: int
    group: FiniteGroup
    phi: dict[FreeWord, int]

    def domain(self) -> set[FreeWord]:
        return set(self.phi)


def lef_witness_search(elements: Sequence[FreeWord],
                       schedule: Sequence[int] = DEFAULT_LEF_SCHEDULE,
                       *, instance: str = "free2") -> LEFWitness:
    """Smallest modulus in the schedule whose reduction is injective on F."""
    if instance != "free2":
        raise ValueError(f"unknown LEF instance {instance!r}")
    elements = list(elements)
    for m in schedule:
        images = {w: sl2_word_image(w, m) for w in elements}
        if len(set(images.values())) != len(elements):
            continue
        gens = [tuple(tuple(v % m for v in row) for row in g)
                for g in _SL2_GENERATORS.values()]
        identity = ((1 % m, 0), (0, 1 % m))
        closure = mulclose(gens, lambda x, y: _mat_mul_mod(x, y, m), identity)
        group = group_from_elements(closure, lambda x, y: _mat_mul_mod(x, y, m))
        index = {x: i for i, x in enumerate(closure)}
        phi: dict[FreeWord, int] = {}
        for s in elements:
            for t in elements:
                w = s * t
                if w not in phi:
                    phi[w] = index[sl2_word_image(w, m)]
        for w in elements:
            phi.setdefault(w, index[images[w]])
        return LEFWitness(elements=elements, modulus=m, group=group, phi=phi)
    raise LefSearchError("modulus schedule exhausted without an injective reduction")


@dataclass
class LefReport:
    injectivity_violations: list[str] = field(default_factory=list)
    multiplicativity_violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.injectivity_violations and not self.multiplicativity_violations


def verify_lef_witness(witness: LEFWitness) -> LefReport:
    """Check injectivity on F and multiplicativity for all pairs from F."""
    report = LefReport()
    seen: dict[int, FreeWord] = {}
    for w in witness.elements:
        img = witness.phi[w]
        if img in seen and seen[img] != w:
            report.injectivity_violations.append(f"{seen[img]} and {w} share an image")
        seen[img] = w
    for s in witness.elements:
        for t in witness.elements:
            st = s * t
            if st not in witness.phi:
                raise ValueError(f"phi undefined on needed product {st}")
            if witness.group.mul(witness.phi[s], witness.phi[t]) != witness.phi[st]:
                report.multiplicativity_violations.append(
                    f"phi({s})phi({t}) != phi({s}{t})")
    return report


def lef_to_unitaries(witness: LEFWitness) -> tuple[object, float]:
    """Compose with the regular representation of H.

    Returns the representation and the minimum pairwise distance over F,
    which the regular representation keeps at sqrt(2) or more for distinct
    images.  A singleton F has no pairs and reports infinity.
    """
    report = verify_lef_witness(witness)
    if not report.ok:
        raise ValueError("invalid witness: " + "; ".join(
            report.injectivity_violations + report.multiplicativity_violations))
    rep = regular_rep(witness.group)
    group = witness.group
    min_distance = math.inf
    elems = witness.elements
    for i, s in enumerate(elems):
        for t in elems[i + 1:]:
            g = group.mul(group.inv(witness.phi[t]), witness.phi[s])
            min_distance = min(min_distance, rep.norm_minus_identity(g))
    return rep, min_distance
