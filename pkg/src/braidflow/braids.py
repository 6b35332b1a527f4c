"""Braid words on n strands: reduction, permutations, writhe, linking numbers.

A braid word is a sequence of nonzero signed generator indices: the letter
``+i`` is the generator crossing strands at positions i, i+1 (1-based, with
the strand coming from position i passing in front), ``-i`` its inverse.
Words multiply by concatenation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


class NotPureError(ValueError):
    """Raised when an operation defined only for pure braids gets a non-pure word."""


@dataclass(frozen=True)
class BraidWord:
    """A word in the braid group B_n, stored as a tuple of signed letters."""

    n: int
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 strands, got n={self.n}")
        object.__setattr__(self, "letters", tuple(self.letters))
        for a in self.letters:
            if a == 0 or abs(a) > self.n - 1:
                raise ValueError(f"letter {a} out of range for n={self.n}")

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other: "BraidWord") -> "BraidWord":
        if self.n != other.n:
            raise ValueError("strand counts differ")
        return BraidWord(self.n, self.letters + other.letters)

    def __pow__(self, k: int) -> "BraidWord":
        if k >= 0:
            return BraidWord(self.n, self.letters * k)
        return self.inverse() ** (-k)

    def inverse(self) -> "BraidWord":
        return BraidWord(self.n, tuple(-a for a in reversed(self.letters)))

    def conjugate_by(self, u: "BraidWord") -> "BraidWord":
        """u * self * u^-1."""
        return u * self * u.inverse()

    def __str__(self):
        return " ".join(str(a) for a in self.letters) if self.letters else "e"


def word(letters: Iterable[int], n: int = 3) -> BraidWord:
    """Convenience constructor, defaulting to B_3."""
    return BraidWord(n, tuple(letters))


def parse_word(text: str, n: int = 3) -> BraidWord:
    """Parse whitespace-separated signed generator indices ("1 2 -1 2")."""
    text = text.strip()
    if not text or text == "e":
        return BraidWord(n)
    return BraidWord(n, tuple(int(tok) for tok in text.split()))


def free_reduce(w: BraidWord) -> BraidWord:
    """Cancel adjacent inverse pairs until none remain.

    The result represents the same braid group element, and reducing again
    is a no-op.
    """
    stack: list[int] = []
    for a in w.letters:
        if stack and stack[-1] == -a:
            stack.pop()
        else:
            stack.append(a)
    return BraidWord(w.n, tuple(stack))


def braid_permutation(w: BraidWord) -> tuple[int, ...]:
    """Image of the word in the symmetric group on strand positions.

    Returns the one-line tuple p with p[start] = end: the strand entering at
    position i (0-based) leaves at position p[i].  A word is pure iff this is
    the identity.
    """
    # pos[s] = current position of the strand that started at s
    pos = list(range(w.n))
    for a in w.letters:
        i = abs(a) - 1
        lo = pos.index(i)
        hi = pos.index(i + 1)
        pos[lo], pos[hi] = pos[hi], pos[lo]
    out = [0] * w.n
    for start, p in enumerate(pos):
        out[start] = p
    return tuple(out)


def is_pure(w: BraidWord) -> bool:
    return braid_permutation(w) == tuple(range(w.n))


def writhe(w: BraidWord) -> int:
    """Exponent sum of the word; a homomorphism B_n -> Z."""
    return sum(1 if a > 0 else -1 for a in w.letters)


def linking_numbers(w: BraidWord) -> list[list[int]]:
    """Pairwise linking numbers lk_ij of a pure braid.

    lk_ij is half the signed count of crossings between the strands starting
    at positions i and j; for a pure braid every pairwise count is even.  Each
    lk_ij is a homomorphism on the pure braid group.
    """
    if not is_pure(w):
        raise NotPureError(f"word {w} is not pure")
    n = w.n
    counts = [[0] * n for _ in range(n)]
    # positions -> strand ids, updated as crossings occur
    strand_at = list(range(n))
    for a in w.letters:
        i = abs(a) - 1
        s, t = strand_at[i], strand_at[i + 1]
        sign = 1 if a > 0 else -1
        counts[s][t] += sign
        counts[t][s] += sign
        strand_at[i], strand_at[i + 1] = t, s
    lk = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if counts[i][j] % 2 != 0:
                raise NotPureError(f"odd crossing count for strands {i},{j}")
            lk[i][j] = counts[i][j] // 2
    return lk


def full_twist(n: int = 3) -> BraidWord:
    """The central full twist: (sigma_1 ... sigma_{n-1})^n.

    In B_3 this is (sigma_1 sigma_2)^3; all pairwise linking numbers are 1.
    """
    return BraidWord(n, tuple(range(1, n)) * n)


def random_word(rng, n: int = 3, min_len: int = 1, max_len: int = 10) -> BraidWord:
    """Uniform random word: length uniform in [min_len, max_len], letters
    uniform over the 2(n-1) signed generators.  Deterministic given rng state."""
    length = int(rng.integers(min_len, max_len + 1))
    gens = [i for i in range(1, n)] + [-i for i in range(1, n)]
    letters = tuple(gens[int(k)] for k in rng.integers(0, len(gens), size=length))
    return BraidWord(n, letters)
