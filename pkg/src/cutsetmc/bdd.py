"""Reduced ordered binary decision diagrams.

Nodes live in a shared table owned by a `BddTable`; a `Bdd` value is a thin
handle (table, node index). Diagrams are reduced and canonical, so two
handles from the same table denote the same function iff their node indices
are equal. No complemented edges, no dynamic reordering.
"""

from __future__ import annotations

# Terminals are nodes 0 (false) and 1 (true) and sit below every variable.
_TERMINAL_LEVEL = 1 << 30


class BddError(Exception):
    pass


class BddTable:
    """Node table plus operation caches for one analysis session.

    Variable indices double as levels: smaller index = closer to the root.
    The table can grow new variables at the end of the order (used when the
    temporal tableau adds its bookkeeping bits after the model is encoded).
    """

    def __init__(self, nvars: int = 0):
        if nvars < 0:
            raise ValueError("variable count must be >= 0")
        self.nvars = nvars
        # node id -> (level, low, high); ids 0 and 1 are the terminals
        self._nodes = [(_TERMINAL_LEVEL, 0, 0), (_TERMINAL_LEVEL, 1, 1)]
        self._unique = {}
        self._cache = {}
        self._varsets = []   # registered level tuples for quantification
        self._varsets_member = []
        self._renames = []   # registered level->level dicts

    # -- construction ---------------------------------------------------

    @property
    def false(self) -> "Bdd":
        return Bdd(self, 0)

    @property
    def true(self) -> "Bdd":
        return Bdd(self, 1)

    def const(self, value: bool) -> "Bdd":
        return Bdd(self, 1 if value else 0)

    def var(self, index: int) -> "Bdd":
        if not 0 <= index < self.nvars:
            raise BddError(f"variable index {index} out of range (nvars={self.nvars})")
        return Bdd(self, self._mk(index, 0, 1))

    def nvar(self, index: int) -> "Bdd":
        if not 0 <= index < self.nvars:
            raise BddError(f"variable index {index} out of range (nvars={self.nvars})")
        return Bdd(self, self._mk(index, 1, 0))

    def add_vars(self, count: int) -> int:
        """Append `count` fresh variables at the bottom of the order.

        Returns the index of the first new variable.
        """
        if count < 0:
            raise ValueError("count must be >= 0")
        first = self.nvars
        self.nvars += count
        return first

    def _mk(self, level, low, high):
        if low == high:
            return low
        key = (level, low, high)
        found = self._unique.get(key)
        if found is not None:
            return found
        self._nodes.append(key)
        node = len(self._nodes) - 1
        self._unique[key] = node
        return node

    def __len__(self):
        return len(self._nodes)

    # -- core operations (node-index level) ------------------------------

    def _ite(self, f, g, h):
        if f == 1:
            return g
        if f == 0:
            return h
        if g == h:
            return g
        if g == 1 and h == 0:
            return f
        key = ("ite", f, g, h)
        found = self._cache.get(key)
        if found is not None:
            return found
        nodes = self._nodes
        level = min(nodes[f][0], nodes[g][0], nodes[h][0])
        f0, f1 = self._cofactors(f, level)
        g0, g1 = self._cofactors(g, level)
        h0, h1 = self._cofactors(h, level)
        res = self._mk(level, self._ite(f0, g0, h0), self._ite(f1, g1, h1))
        self._cache[key] = res
        return res

    def _cofactors(self, f, level):
        node = self._nodes[f]
        if node[0] == level:
            return node[1], node[2]
        return f, f

    def _not(self, f):
        return self._ite(f, 0, 1)

    def _and(self, f, g):
        return self._ite(f, g, 0)

    def _or(self, f, g):
        return self._ite(f, 1, g)

    def _exists(self, f, setid):
        if f <= 1:
            return f
        levels = self._varsets[setid]
        node = self._nodes[f]
        if node[0] > levels[-1]:
            return f
        key = ("ex", f, setid)
        found = self._cache.get(key)
        if found is not None:
            return found
        low = self._exists(node[1], setid)
        high = self._exists(node[2], setid)
        if node[0] in self._varsets_member[setid]:
            res = self._or(low, high)
        else:
            res = self._mk(node[0], low, high)
        self._cache[key] = res
        return res

    def _and_exists(self, f, g, setid):
        """Relational product: exists(levels, f & g) without the intermediate."""
        if f == 0 or g == 0:
            return 0
        if f == 1 and g == 1:
            return 1
        if f == 1:
            return self._exists(g, setid)
        if g == 1:
            return self._exists(f, setid)
        if f > g:
            f, g = g, f
        key = ("ae", f, g, setid)
        found = self._cache.get(key)
        if found is not None:
            return found
        levels = self._varsets[setid]
        if self._nodes[f][0] > levels[-1] and self._nodes[g][0] > levels[-1]:
            res = self._and(f, g)
        else:
            level = min(self._nodes[f][0], self._nodes[g][0])
            f0, f1 = self._cofactors(f, level)
            g0, g1 = self._cofactors(g, level)
            low = self._and_exists(f0, g0, setid)
            if level in self._varsets_member[setid]:
                if low == 1:
                    res = 1
                else:
                    res = self._or(low, self._and_exists(f1, g1, setid))
            else:
                res = self._mk(level, low, self._and_exists(f1, g1, setid))
        self._cache[key] = res
        return res

    def _rename(self, f, mapid):
        if f <= 1:
            return f
        key = ("rn", f, mapid)
        found = self._cache.get(key)
        if found is not None:
            return found
        level, low, high = self._nodes[f]
        mapping = self._renames[mapid]
        res = self._mk(mapping.get(level, level),
                       self._rename(low, mapid), self._rename(high, mapid))
        self._cache[key] = res
        return res

    # -- registration of quantifier sets / rename maps -------------------

    def register_varset(self, levels) -> int:
        levels = tuple(sorted(set(levels)))
        for i, existing in enumerate(self._varsets):
            if existing == levels:
                return i
        self._varsets.append(levels)
        self._varsets_member.append(frozenset(levels))
        return len(self._varsets) - 1

    def register_rename(self, mapping) -> int:
        mapping = dict(mapping)
        items = sorted(mapping.items())
        for (a, ma), (b, mb) in zip(items, items[1:]):
            if not ma < mb:
                raise BddError("rename map must be strictly order-preserving")
        for i, existing in enumerate(self._renames):
            if existing == mapping:
                return i
        self._renames.append(mapping)
        return len(self._renames) - 1

    # -- ISOP (Minato-Morreale) ------------------------------------------

    def _isop(self, lower, upper):
        """Irredundant sum-of-products cover of any f with lower <= f <= upper.

        Returns (cubes, node) where cubes is a tuple of literal dicts and node
        is the BDD of their disjunction.
        """
        if lower == 0:
            return (), 0
        if upper == 1:
            return ({},), 1
        key = ("isop", lower, upper)
        found = self._cache.get(key)
        if found is not None:
            return found
        level = min(self._nodes[lower][0], self._nodes[upper][0])
        l0, l1 = self._cofactors(lower, level)
        u0, u1 = self._cofactors(upper, level)
        # cubes that must contain the negative / positive literal of `level`
        cubes0, f0 = self._isop(self._and(l0, self._not(u1)), u0)
        cubes1, f1 = self._isop(self._and(l1, self._not(u0)), u1)
        # what remains can be covered without mentioning `level`
        rest_lower = self._or(self._and(l0, self._not(f0)),
                              self._and(l1, self._not(f1)))
        cubes_d, fd = self._isop(rest_lower, self._and(u0, u1))
        cubes = tuple({level: False, **c} for c in cubes0) \
            + tuple({level: True, **c} for c in cubes1) \
            + cubes_d
        node = self._or(self._mk(level, f0, f1), fd)
        res = (cubes, node)
        self._cache[key] = res
        return res


class Bdd:
    """Handle to a node of one `BddTable`. Canonical: equal iff same node."""

    __slots__ = ("table", "node")

    def __init__(self, table: BddTable, node: int):
        self.table = table
        self.node = node

    def _check(self, other: "Bdd") -> "Bdd":
        if not isinstance(other, Bdd):
            raise TypeError(f"expected Bdd, got {type(other).__name__}")
        if other.table is not self.table:
            raise BddError("operands come from different node tables")
        return other

    # Boolean structure --------------------------------------------------

    def __and__(self, other):
        return Bdd(self.table, self.table._ite(self.node, self._check(other).node, 0))

    def __or__(self, other):
        return Bdd(self.table, self.table._ite(self.node, 1, self._check(other).node))

    def __xor__(self, other):
        t = self.table
        return Bdd(t, t._ite(self.node, t._not(self._check(other).node), other.node))

    def __invert__(self):
        return Bdd(self.table, self.table._not(self.node))

    def implies(self, other):
        return Bdd(self.table, self.table._ite(self.node, self._check(other).node, 1))

    def ite(self, then_, else_):
        t = self.table
        return Bdd(t, t._ite(self.node, self._check(then_).node, self._check(else_).node))

    def __eq__(self, other):
        return isinstance(other, Bdd) and other.table is self.table and other.node == self.node

    def __hash__(self):
        return hash((id(self.table), self.node))

    def __repr__(self):
        return f"Bdd(node={self.node})"

    @property
    def is_false(self):
        return self.node == 0

    @property
    def is_true(self):
        return self.node == 1

    # Quantification / substitution --------------------------------------

    def exists(self, indices) -> "Bdd":
        setid = self.table.register_varset(indices)
        if not self.table._varsets[setid]:
            return self
        return Bdd(self.table, self.table._exists(self.node, setid))

    def and_exists(self, other: "Bdd", indices) -> "Bdd":
        self._check(other)
        setid = self.table.register_varset(indices)
        if not self.table._varsets[setid]:
            return self & other
        return Bdd(self.table, self.table._and_exists(self.node, other.node, setid))

    def rename(self, mapping) -> "Bdd":
        mapid = self.table.register_rename(mapping)
        return Bdd(self.table, self.table._rename(self.node, mapid))

    # Inspection ----------------------------------------------------------

    def support(self) -> set:
        seen = set()
        levels = set()
        stack = [self.node]
        nodes = self.table._nodes
        while stack:
            f = stack.pop()
            if f <= 1 or f in seen:
                continue
            seen.add(f)
            level, low, high = nodes[f]
            levels.add(level)
            stack.append(low)
            stack.append(high)
        return levels

    def evaluate(self, assignment) -> bool:
        """Evaluate under a full assignment (dict index -> bool)."""
        f = self.node
        nodes = self.table._nodes
        while f > 1:
            level, low, high = nodes[f]
            f = high if assignment[level] else low
        return f == 1

    def count_nodes(self) -> int:
        seen = set()
        stack = [self.node]
        while stack:
            f = stack.pop()
            if f <= 1 or f in seen:
                continue
            seen.add(f)
            _, low, high = self.table._nodes[f]
            stack.extend((low, high))
        return len(seen)

    def pick_cube(self) -> dict:
        """Deterministic satisfying cube: lexicographically least path.

        At every node the 0-branch is preferred when it can still reach true.
        Levels not on the chosen path are left out (don't cares). Raises on
        the empty diagram; the full diagram yields the empty cube.
        """
        if self.node == 0:
            raise BddError("pick_cube of the empty diagram")
        cube = {}
        f = self.node
        nodes = self.table._nodes
        while f > 1:
            level, low, high = nodes[f]
            if low != 0:
                cube[level] = False
                f = low
            else:
                cube[level] = True
                f = high
        return cube

    def isop(self) -> list:
        """Irredundant sum-of-products cover as a list of literal dicts."""
        cubes, cover = self.table._isop(self.node, self.node)
        assert cover == self.node
        return [dict(c) for c in cubes]

    def to_dot(self, name: str = "bdd") -> str:
        lines = [f"digraph {name} {{", '  f [shape=none, label="f"];',
                 '  t0 [shape=box, label="0"];', '  t1 [shape=box, label="1"];']
        seen = set()
        stack = [self.node]
        order = []
        while stack:
            f = stack.pop()
            if f <= 1 or f in seen:
                continue
            seen.add(f)
            order.append(f)
            _, low, high = self.table._nodes[f]
            stack.extend((low, high))
        for f in order:
            level, low, high = self.table._nodes[f]
            lines.append(f'  n{f} [shape=circle, label="x{level}"];')
            lo = f"t{low}" if low <= 1 else f"n{low}"
            hi = f"t{high}" if high <= 1 else f"n{high}"
            lines.append(f"  n{f} -> {lo} [style=dashed];")
            lines.append(f"  n{f} -> {hi};")
        root = f"t{self.node}" if self.node <= 1 else f"n{self.node}"
        lines.append(f"  f -> {root};")
        lines.append("}")
        return "\n".join(lines)


def cube_to_bdd(table: BddTable, cube: dict) -> Bdd:
    result = table.true
    for index in sorted(cube):
        lit = table.var(index) if cube[index] else table.nvar(index)
        result = result & lit
    return result
