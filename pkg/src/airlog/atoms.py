"""Interned ground atoms.

An atom is a predicate applied to symbol (str) or integer arguments; timesteps
appear as the final integer argument. Atoms are interned process-wide:
constructing the same (predicate, args) twice returns the same object, so
default identity equality/hash is exact and cheap, and every atom carries a
stable integer handle.
"""

from __future__ import annotations


class Atom:
    __slots__ = ("pred", "args", "index")

    pred: str
    args: tuple
    index: int

    def __init__(self, pred, args, index):
        object.__setattr__(self, "pred", pred)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "index", index)

    def __setattr__(self, name, value):
        raise AttributeError("atoms are immutable")

    @property
    def step(self):
        """Final integer argument, or None when the atom is not timed."""
        if self.args and isinstance(self.args[-1], int):
            return self.args[-1]
        return None

    def is_step_unary(self) -> bool:
        """True for atoms of shape pred(t) with a single integer argument."""
        return len(self.args) == 1 and isinstance(self.args[0], int)

    def __str__(self):
        if not self.args:
            return self.pred
        return "%s(%s)" % (self.pred, ",".join(str(a) for a in self.args))

    def __repr__(self):
        return "Atom(%s)" % self

    def __reduce__(self):
        # re-intern on unpickling so identity semantics survive
        return (atom, (self.pred, *self.args))


_table: dict[tuple, Atom] = {}
_by_index: list[Atom] = []


def atom(pred: str, *args) -> Atom:
    """Return the interned atom for ``pred(args...)``."""
    key = (pred, args)
    a = _table.get(key)
    if a is None:
        a = Atom(pred, args, len(_by_index))
        _table[key] = a
        _by_index.append(a)
    return a


def atom_count() -> int:
    return len(_by_index)


def atom_by_index(i: int) -> Atom:
    return _by_index[i]
