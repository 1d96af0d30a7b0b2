"""Mode words over the alphabet {1..D} and their length-then-lexicographic order.

Words are plain tuples of 1-based mode labels; the empty tuple is the empty
word and sits at index 1.  Enumeration indices are 1-based throughout.
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence

ModeWord = tuple[int, ...]


class InvalidWordError(ValueError):
    """A mode word contains letters outside 1..D or an index is out of range."""


def as_mode_word(letters: Sequence[int], D: int | None = None) -> ModeWord:
    """Normalize ``letters`` to a tuple, checking the 1..D range when D is given."""
    word = tuple(int(q) for q in letters)
    for q in word:
        if q < 1 or (D is not None and q > D):
            raise InvalidWordError(f"mode {q} outside 1..{D}")
    return word


def count_words_up_to(L: int, D: int) -> int:
    """Number of words of length at most L over {1..D}: sum of D**k, k=0..L.

    Exact integer arithmetic, so there is no silent wraparound for any input.
    """
    if L < 0:
        raise ValueError("L must be nonnegative")
    if D < 1:
        raise ValueError("D must be positive")
    if D == 1:
        return L + 1
    return (D ** (L + 1) - 1) // (D - 1)


def word_at_index(i: int, D: int) -> ModeWord:
    """The i-th word in the length-then-lexicographic enumeration (i >= 1).

    Index 1 is the empty word; within a fixed length words are ordered by
    componentwise integer comparison.  Inverse of :func:`index_of_word`.
    """
    if i < 1:
        raise InvalidWordError("word indices start at 1")
    if D < 1:
        raise ValueError("D must be positive")
    k = 0
    base = 0  # number of words strictly shorter than k
    while i > base + D**k:
        base += D**k
        k += 1
    offset = i - base - 1  # 0-based position among words of length k
    letters = []
    for _ in range(k):
        offset, digit = divmod(offset, D)
        letters.append(digit + 1)
    return tuple(reversed(letters))


def index_of_word(v: Sequence[int], D: int) -> int:
    """1-based position of ``v`` in the enumeration used by :func:`word_at_index`."""
    word = as_mode_word(v, D)
    k = len(word)
    base = count_words_up_to(k - 1, D) if k > 0 else 0
    offset = 0
    for q in word:
        offset = offset * D + (q - 1)
    return base + offset + 1


def words_up_to(L: int, D: int) -> Iterator[ModeWord]:
    """All words of length at most L, in enumeration order."""
    total = count_words_up_to(L, D)
    for i in range(1, total + 1):
        yield word_at_index(i, D)


def subword(v: Sequence[int], j: int, k: int) -> ModeWord:
    """Letters j..k of ``v`` (0-based, inclusive); empty when j > k."""
    word = as_mode_word(v)
    if not (0 <= j <= len(word) - 1) or not (0 <= k <= len(word) - 1):
        raise InvalidWordError(f"positions ({j}, {k}) out of range for |v|={len(word)}")
    if j > k:
        return ()
    return word[j : k + 1]
