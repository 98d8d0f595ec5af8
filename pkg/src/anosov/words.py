"""Free-group ball and conjugacy-class enumeration over matrix generators.

Generators g_1..g_k give 2k letters, interleaved as
(g_1, g_1^-1, g_2, g_2^-1, ...); letter j has inverse j ^ 1.  Reduced words
are enumerated level by level in lexicographic order on letter indices,
carrying the running matrix product along the prefix tree as batched numpy
multiplications, so a rank-2 ball of radius 12 (about one million entries)
takes seconds.

With ``free_flag`` set, counts follow the free-group formula
2k (2k-1)^(l-1) per length.  Without it, entries are deduplicated by a
1e-6 grid hash on the matrix (earliest, hence shortest, word kept;
collisions inside a cell are checked against the actual matrices).

Conjugacy classes are enumerated as cyclically reduced words up to
rotation (inverse classes are NOT merged), represented by the
lexicographically least rotation.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ResourceBudgetError, UnsupportedModeError
from .linalg import (CartanVector, SquareMatrix, cartan_from_exterior_stacks,
                     exterior_power_many, jordan_from_exterior_stacks)

DEFAULT_BUDGET = 10_000_000
COND_LIMIT = 1e10
DEDUP_GRID = 1e-6


def worker_count() -> int:
    """Batch-chunk granularity, from ANOSOV_WORKERS or machine parallelism.

    Only sizes numpy batch chunks; every reduction is an exact integer
    count or an order-fixed float pass, so results are identical for any
    setting.
    """
    raw = os.environ.get("ANOSOV_WORKERS", "")
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise InputError("ANOSOV_WORKERS must be an integer") from None
        if value < 1:
            raise InputError("ANOSOV_WORKERS must be positive")
        return value
    return os.cpu_count() or 1


def _batched_matmul(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """lhs @ rhs in worker-sized chunks (identical results for any chunking)."""
    n = lhs.shape[0]
    step = max(1, -(-n // worker_count()))
    if step >= n:
        return lhs @ rhs
    out = np.empty_like(lhs)
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        out[lo:hi] = lhs[lo:hi] @ rhs[lo:hi]
    return out


def _letter_ext_stacks(gs: "GeneratorSet") -> list:
    """Lambda^i of every letter, i = 2..n-1 (letters are mild, minors exact)."""
    return [exterior_power_many(gs.letter_mats, i) for i in range(2, gs.n)]


def free_ball_size(k: int, max_len: int) -> int:
    """1 + sum over lengths of 2k (2k-1)^(l-1): reduced words, identity included."""
    if max_len < 0:
        raise InputError("max_len must be >= 0")
    total = 1
    per = 2 * k
    for _ in range(max_len):
        total += per
        per *= 2 * k - 1
    return total


class GeneratorSet:
    """Matrix generators with labels; the shared alphabet for enumeration."""

    def __init__(self, matrices, labels=None, free_flag: bool = True):
        mats = [SquareMatrix(m) if not isinstance(m, SquareMatrix) else m
                for m in matrices]
        if not mats:
            raise InputError("need at least one generator")
        n = mats[0].n
        if any(m.n != n for m in mats):
            raise InputError("generators must share one dimension")
        k = len(mats)
        if labels is None:
            labels = tuple("abcdefgh"[i] for i in range(k)) if k <= 8 else \
                tuple(f"g{i}" for i in range(k))
        labels = tuple(str(s) for s in labels)
        if len(labels) != k or len(set(labels)) != k:
            raise InputError("labels must be unique, one per generator")
        gens = np.stack([m.mat for m in mats])
        conds = np.linalg.cond(gens)
        if np.any(conds >= COND_LIMIT):
            raise InputError(f"generator condition number {conds.max():.3g} "
                             f"exceeds limit {COND_LIMIT:g}")
        # letter array: (2k, n, n), even = generator, odd = its inverse
        letters = np.empty((2 * k, n, n))
        letters[0::2] = gens
        letters[1::2] = np.linalg.inv(gens)
        flat = letters.reshape(2 * k, -1)
        scale = max(1.0, float(np.abs(flat).max()))
        for a in range(2 * k):
            for b in range(a + 1, 2 * k):
                if np.max(np.abs(flat[a] - flat[b])) <= 1e-12 * scale:
                    raise InputError("letter matrices are not pairwise distinct")
        self.n = n
        self.k = k
        self.labels = labels
        self.free_flag = bool(free_flag)
        self.letter_mats = letters
        self.letter_mats.flags.writeable = False

    def letter_label(self, j: int) -> str:
        base = self.labels[j // 2]
        if j % 2 == 0:
            return base
        up = base.upper()
        return up if up != base else base + "^-1"

    def generator_matrix(self, i: int) -> np.ndarray:
        return self.letter_mats[2 * i]

    def word_string(self, letters) -> str:
        return "".join(self.letter_label(int(j)) for j in letters)

    def __repr__(self):
        return (f"GeneratorSet(k={self.k}, n={self.n}, "
                f"labels={self.labels}, free={self.free_flag})")


@dataclass(frozen=True)
class Word:
    """A reduced word in the letters of a GeneratorSet."""

    letters: tuple

    def __post_init__(self):
        ls = tuple(int(j) for j in self.letters)
        if any(j < 0 for j in ls):
            raise InputError("letter indices must be nonnegative")
        for a, b in zip(ls, ls[1:]):
            if a == b ^ 1:
                raise InputError("word is not reduced")
        object.__setattr__(self, "letters", ls)

    def __len__(self):
        return len(self.letters)

    def render(self, gs: GeneratorSet) -> str:
        return gs.word_string(self.letters)


@dataclass(frozen=True)
class BallEntry:
    word: Word
    matrix: np.ndarray
    mu: CartanVector


@dataclass(frozen=True)
class ConjClassEntry:
    """A conjugacy class: least-rotation cyclically reduced word plus lambda."""

    word: Word
    lam: CartanVector


class _Level:
    __slots__ = ("words", "mats", "mu")

    def __init__(self, words, mats, mu):
        self.words = words
        self.mats = mats
        self.mu = mu


def word_matrix(gs: GeneratorSet, word) -> np.ndarray:
    """Ordered product of letter matrices for a Word or letter sequence."""
    letters = word.letters if isinstance(word, Word) else tuple(int(j) for j in word)
    out = np.eye(gs.n)
    for j in letters:
        if not 0 <= j < 2 * gs.k:
            raise InputError(f"letter index {j} out of range")
        out = out @ gs.letter_mats[j]
    return out


def _next_level_words(prev: np.ndarray, two_k: int):
    """Extend reduced words by one letter, lexicographic order preserved.

    Returns (row_sel, letter_sel, words): the selected prefix row and new
    letter per extension, plus the stacked word array.
    """
    N, L = prev.shape
    if L == 0:
        letters = np.arange(two_k, dtype=np.int8)
        return np.zeros(two_k, dtype=np.int64), letters, letters[:, None]
    last = prev[:, -1].astype(np.int16)
    row_parts = []
    let_parts = []
    for c in range(two_k):
        rows = np.nonzero(last != (c ^ 1))[0]
        row_parts.append(rows)
        let_parts.append(np.full(rows.shape[0], c, dtype=np.int8))
    rows = np.concatenate(row_parts)
    letters = np.concatenate(let_parts)
    order = np.argsort(rows.astype(np.int64) * two_k + letters, kind="stable")
    rows = rows[order]
    letters = letters[order]
    words = np.empty((rows.shape[0], L + 1), dtype=np.int8)
    words[:, :L] = prev[rows]
    words[:, L] = letters
    return rows, letters, words


def _dedup_keys(mats: np.ndarray) -> np.ndarray:
    """Grid keys for matrix deduplication: rounded entries as a byte view."""
    q = np.round(mats.reshape(mats.shape[0], -1) / DEDUP_GRID).astype(np.int64)
    q = np.ascontiguousarray(q)
    return q.view([("", q.dtype)] * q.shape[1]).ravel()


class Ball:
    """All reduced-word entries up to max_len, with matrices and mu values."""

    def __init__(self, gs: GeneratorSet, max_len: int,
                 budget: int = DEFAULT_BUDGET):
        bound = free_ball_size(gs.k, max_len)
        if bound > budget:
            raise ResourceBudgetError(
                f"ball up to length {max_len} holds {bound} entries, "
                f"over budget {budget}", required=bound, budget=budget)
        self.gs = gs
        self.max_len = max_len
        n = gs.n
        two_k = 2 * gs.k
        ident = np.eye(n)[None]
        levels = [_Level(np.empty((1, 0), dtype=np.int8), ident,
                         np.zeros((1, n)))]
        seen = None
        if not gs.free_flag:
            seen = set(_dedup_keys(ident).tolist())
        exact = {} if not gs.free_flag else None
        # Higher exterior powers ride along as products of per-letter
        # minors; minors of the finished product would cancel to noise
        # for strongly graded words.  Only the previous level is kept.
        letter_exts = _letter_ext_stacks(gs)
        prev_exts = [np.eye(e.shape[-1])[None].copy() for e in letter_exts]
        for _ in range(max_len):
            prev = levels[-1]
            if prev.words.shape[0] == 0:
                break
            rows, letters, words = _next_level_words(prev.words, two_k)
            mats = _batched_matmul(prev.mats[rows], gs.letter_mats[letters])
            exts = [_batched_matmul(pe[rows], le[letters])
                    for pe, le in zip(prev_exts, letter_exts)]
            if not gs.free_flag:
                keep = self._dedup_filter(words, mats, seen, exact)
                words, mats = words[keep], mats[keep]
                exts = [e[keep] for e in exts]
                if words.shape[0] == 0:
                    levels.append(_Level(words, mats, np.zeros((0, n))))
                    prev_exts = exts
                    continue
            mu = cartan_from_exterior_stacks([mats] + exts)
            levels.append(_Level(words, mats, mu))
            prev_exts = exts
        self.levels = levels
        self.total = sum(lv.words.shape[0] for lv in levels)

    @staticmethod
    def _dedup_filter(words, mats, seen, exact):
        keys = _dedup_keys(mats)
        keep = np.ones(words.shape[0], dtype=bool)
        flat = mats.reshape(mats.shape[0], -1)
        for i, key in enumerate(keys.tolist()):
            if key in seen:
                # same grid cell: confirm against the stored representative
                rep = exact.get(key)
                if rep is None or np.max(np.abs(flat[i] - rep)) <= 3 * DEDUP_GRID:
                    keep[i] = False
                    continue
            seen.add(key)
            exact[key] = flat[i].copy()
        return keep

    def mu_all(self) -> np.ndarray:
        return np.concatenate([lv.mu for lv in self.levels])

    def lengths_all(self) -> np.ndarray:
        return np.concatenate([np.full(lv.words.shape[0], L, dtype=np.int64)
                               for L, lv in enumerate(self.levels)])

    def level_size(self, length: int) -> int:
        return self.levels[length].words.shape[0] if length < len(self.levels) else 0

    def entries(self):
        for lv in self.levels:
            for i in range(lv.words.shape[0]):
                yield BallEntry(Word(tuple(int(x) for x in lv.words[i])),
                                lv.mats[i].copy(),
                                CartanVector(tuple(lv.mu[i])))


def enumerate_ball(gs: GeneratorSet, max_len: int,
                   budget: int = DEFAULT_BUDGET):
    """Stream of BallEntry: identity first, then by length, lexicographic."""
    ball = Ball(gs, max_len, budget)
    return ball.entries()


# ---------------------------------------------------------------------------
# conjugacy classes
# ---------------------------------------------------------------------------

def _words_only_levels(gs: GeneratorSet, max_len: int, budget: int):
    bound = free_ball_size(gs.k, max_len)
    if bound > budget:
        raise ResourceBudgetError(
            f"word enumeration up to length {max_len} holds {bound} entries, "
            f"over budget {budget}", required=bound, budget=budget)
    two_k = 2 * gs.k
    levels = [np.empty((1, 0), dtype=np.int8)]
    for _ in range(max_len):
        _, _, words = _next_level_words(levels[-1], two_k)
        levels.append(words)
    return levels


def _min_rotation_keys(words: np.ndarray, two_k: int):
    """Encode every rotation of each word in one integer and take the min.

    Words of length L over 2k letters are packed base-2k, most significant
    digit first, so integer order is lexicographic order.
    """
    N, L = words.shape
    if L * math.log2(two_k) >= 62:
        raise InputError(f"words of length {L} overflow the rotation packing")
    W = words.astype(np.int64)
    weights = (two_k ** np.arange(L - 1, -1, -1)).astype(np.int64)
    best = None
    for r in range(L):
        rot = np.concatenate([W[:, r:], W[:, :r]], axis=1)
        key = rot @ weights
        best = key if best is None else np.minimum(best, key)
    return best


def _decode_words(keys: np.ndarray, L: int, two_k: int) -> np.ndarray:
    out = np.empty((keys.shape[0], L), dtype=np.int8)
    rem = keys.copy()
    for pos in range(L - 1, -1, -1):
        out[:, pos] = rem % two_k
        rem //= two_k
    return out


class ConjugacyClasses:
    """Cyclic classes of cyclically reduced words with Jordan projections."""

    def __init__(self, gs: GeneratorSet, max_len: int,
                 budget: int = DEFAULT_BUDGET):
        if not gs.free_flag:
            raise UnsupportedModeError(
                "conjugacy enumeration needs free_flag generators")
        if max_len < 1:
            raise InputError("max_len must be >= 1 for conjugacy classes")
        self.gs = gs
        self.max_len = max_len
        two_k = 2 * gs.k
        levels = _words_only_levels(gs, max_len, budget)
        letter_exts = _letter_ext_stacks(gs)
        self.reps = []   # per length: (N_l, l) canonical representative words
        self.lams = []   # per length: (N_l, n) Jordan projections
        for L in range(1, max_len + 1):
            words = levels[L]
            if L > 1:  # cyclically reduced: first letter != inverse of last
                cyc = words[:, 0] != (words[:, -1] ^ 1)
                words = words[cyc]
            keys = _min_rotation_keys(words, two_k)
            reps = _decode_words(np.unique(keys), L, two_k)
            stacks = [np.broadcast_to(np.eye(e.shape[-1]),
                                      (reps.shape[0], e.shape[-1], e.shape[-1]))
                      for e in [gs.letter_mats] + letter_exts]
            for pos in range(L):
                stacks = [_batched_matmul(np.ascontiguousarray(s),
                                          e[reps[:, pos]])
                          for s, e in zip(stacks, [gs.letter_mats] + letter_exts)]
            self.reps.append(reps)
            self.lams.append(jordan_from_exterior_stacks(stacks))
        self.total = sum(r.shape[0] for r in self.reps)

    def lam_all(self) -> np.ndarray:
        return np.concatenate(self.lams)

    def lengths_all(self) -> np.ndarray:
        return np.concatenate([np.full(r.shape[0], L + 1, dtype=np.int64)
                               for L, r in enumerate(self.reps)])

    def entries(self):
        for reps, lams in zip(self.reps, self.lams):
            for i in range(reps.shape[0]):
                yield ConjClassEntry(Word(tuple(int(x) for x in reps[i])),
                                     CartanVector(tuple(lams[i])))


def enumerate_conjugacy_classes(gs: GeneratorSet, max_len: int,
                                budget: int = DEFAULT_BUDGET):
    """Stream of ConjClassEntry, one per nontrivial cyclic class, by length."""
    return ConjugacyClasses(gs, max_len, budget).entries()


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def write_ball_csv(ball: Ball, path: str) -> int:
    """word,length,mu_1..mu_n with 12 significant digits; returns row count."""
    n = ball.gs.n
    rows = 0
    with open(path, "w") as fh:
        fh.write("word,length," + ",".join(f"mu_{i+1}" for i in range(n)) + "\n")
        for L, lv in enumerate(ball.levels):
            for i in range(lv.words.shape[0]):
                word = ball.gs.word_string(lv.words[i])
                vals = ",".join(f"{x:.12g}" for x in lv.mu[i])
                fh.write(f"{word},{L},{vals}\n")
                rows += 1
    return rows


def write_classes_csv(classes: ConjugacyClasses, path: str) -> int:
    """word,length,lambda_1..lambda_n with 12 significant digits."""
    n = classes.gs.n
    rows = 0
    with open(path, "w") as fh:
        fh.write("word,length," +
                 ",".join(f"lambda_{i+1}" for i in range(n)) + "\n")
        for L, (reps, lams) in enumerate(zip(classes.reps, classes.lams)):
            for i in range(reps.shape[0]):
                word = classes.gs.word_string(reps[i])
                vals = ",".join(f"{x:.12g}" for x in lams[i])
                fh.write(f"{word},{L + 1},{vals}\n")
                rows += 1
    return rows
