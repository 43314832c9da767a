"""Typed multi-variable transition systems with deterministic guarded blocks.

A model is a set of finite-domain variables, a set of basic event flags
(Boolean, initially false, never reset), and elementary blocks: guarded
deterministic updates. Non-determinism lies only in which enabled block
fires. This module owns the concrete `.tsm` syntax, stutter completion,
bit-level encoding and the per-block transition relations.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import prop
from .bdd import Bdd, BddTable
from .prop import Atom, Expr, Not, ParseError, TokenStream, tokenize

BOOL_DOMAIN = ("false", "true")


@dataclass(frozen=True)
class VariableDecl:
    name: str
    domain: tuple
    initial: str


@dataclass(frozen=True)
class BasicEventDecl:
    name: str


@dataclass(frozen=True)
class ElementaryBlock:
    name: str
    guard: Expr
    updates: tuple  # ((variable, value), ...) in source order


@dataclass(frozen=True)
class Model:
    variables: tuple
    events: tuple
    blocks: tuple

    def variable_names(self):
        return [v.name for v in self.variables] + [e.name for e in self.events]

    def domain_of(self, name: str) -> tuple:
        for v in self.variables:
            if v.name == name:
                return v.domain
        for e in self.events:
            if e.name == name:
                return BOOL_DOMAIN
        raise KeyError(name)

    def initial_state(self) -> dict:
        state = {v.name: v.initial for v in self.variables}
        state.update({e.name: "false" for e in self.events})
        return state

    def flag_names(self):
        return [e.name for e in self.events]

    def block_named(self, name: str) -> ElementaryBlock:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)


class ModelErrors(Exception):
    """Raised by the parser; carries every positioned error found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors))


# ---------------------------------------------------------------------------
# Parsing

def parse_expr(stream: TokenStream, symbols: dict, errors: list) -> Expr:
    return _parse_or(stream, symbols, errors)


def _parse_or(stream, symbols, errors):
    left = _parse_and(stream, symbols, errors)
    while stream.accept("|"):
        left = prop.Or(left, _parse_and(stream, symbols, errors))
    return left


def _parse_and(stream, symbols, errors):
    left = _parse_unary(stream, symbols, errors)
    while stream.accept("&"):
        left = prop.And(left, _parse_unary(stream, symbols, errors))
    return left


def _parse_unary(stream, symbols, errors):
    if stream.accept("!"):
        return Not(_parse_unary(stream, symbols, errors))
    if stream.accept("("):
        inner = _parse_or(stream, symbols, errors)
        stream.expect(")")
        return inner
    tok = stream.expect_name("expression")
    if stream.peek().text in ("=", "!="):
        negated = stream.next().text == "!="
        value = stream.expect_name("value name")
        _check_atom(tok, value, symbols, errors)
        atom = Atom(tok.text, value.text)
        return Not(atom) if negated else atom
    if tok.text == "true":
        return prop.TRUE
    if tok.text == "false":
        return prop.FALSE
    # bare name: shorthand for a Boolean-domain variable being true
    domain = symbols.get(tok.text)
    if domain is None:
        errors.append(ParseError(f"unknown variable {tok.text!r}", tok.line, tok.column))
    elif domain != BOOL_DOMAIN:
        errors.append(ParseError(
            f"variable {tok.text!r} is not Boolean and cannot appear bare",
            tok.line, tok.column))
    return Atom(tok.text, "true")


def _check_atom(var_tok, value_tok, symbols, errors):
    domain = symbols.get(var_tok.text)
    if domain is None:
        errors.append(ParseError(f"unknown variable {var_tok.text!r}",
                                 var_tok.line, var_tok.column))
    elif value_tok.text not in domain:
        errors.append(ParseError(
            f"value {value_tok.text!r} not in domain of {var_tok.text!r}",
            value_tok.line, value_tok.column))


def parse_model(text: str) -> Model:
    """Parse a `.tsm` document. Raises ModelErrors listing every problem.

    Declarations must precede use. Every declared event that no block sets
    gets a default occurrence block `{guard !E; E := true}`.
    """
    errors = []
    try:
        stream = TokenStream(tokenize(text))
    except ParseError as e:
        raise ModelErrors([e]) from None
    variables = []
    events = []
    blocks = []
    symbols = {}      # name -> domain (variables and events share a namespace)
    event_names = set()
    block_names = set()
    try:
        while stream.peek().kind != "eof":
            tok = stream.expect_name("declaration")
            if tok.text == "var":
                _parse_var(stream, symbols, variables, errors)
            elif tok.text == "event":
                _parse_event(stream, symbols, event_names, events, errors)
            elif tok.text == "block":
                _parse_block(stream, symbols, event_names, block_names, blocks, errors)
            else:
                raise ParseError(
                    f"expected 'var', 'event' or 'block', found {tok.text!r}",
                    tok.line, tok.column)
    except ParseError as e:
        errors.append(e)
    if errors:
        raise ModelErrors(errors)
    model = Model(tuple(variables), tuple(events), tuple(blocks))
    return with_occurrence_blocks(model)


def _parse_var(stream, symbols, variables, errors):
    name = stream.expect_name("variable name")
    if name.text in symbols:
        errors.append(ParseError(f"duplicate name {name.text!r}", name.line, name.column))
    stream.expect(":")
    stream.expect("{")
    values = []
    while True:
        v = stream.expect_name("value name")
        if v.text in values:
            errors.append(ParseError(f"duplicate value {v.text!r}", v.line, v.column))
        else:
            values.append(v.text)
        if not stream.accept(","):
            break
    stream.expect("}")
    init_kw = stream.expect_name("'init'")
    if init_kw.text != "init":
        raise ParseError(f"expected 'init', found {init_kw.text!r}",
                         init_kw.line, init_kw.column)
    init = stream.expect_name("initial value")
    if init.text not in values:
        errors.append(ParseError(
            f"initial value {init.text!r} not in domain", init.line, init.column))
    stream.expect(";")
    symbols[name.text] = tuple(values)
    variables.append(VariableDecl(name.text, tuple(values), init.text))


def _parse_event(stream, symbols, event_names, events, errors):
    name = stream.expect_name("event name")
    if name.text in symbols:
        errors.append(ParseError(f"duplicate name {name.text!r}", name.line, name.column))
    stream.expect(";")
    symbols[name.text] = BOOL_DOMAIN
    event_names.add(name.text)
    events.append(BasicEventDecl(name.text))


def _parse_block(stream, symbols, event_names, block_names, blocks, errors):
    name = stream.expect_name("block name")
    if name.text in block_names:
        errors.append(ParseError(f"duplicate block {name.text!r}", name.line, name.column))
    block_names.add(name.text)
    stream.expect("{")
    guard_kw = stream.expect_name("'guard'")
    if guard_kw.text != "guard":
        raise ParseError(f"expected 'guard', found {guard_kw.text!r}",
                         guard_kw.line, guard_kw.column)
    stream.accept(":")
    guard = parse_expr(stream, symbols, errors)
    stream.expect(";")
    updates = []
    assigned = set()
    while not stream.accept("}"):
        target = stream.expect_name("update target")
        stream.expect(":=")
        value = stream.expect_name("value name")
        stream.expect(";")
        domain = symbols.get(target.text)
        if domain is None:
            errors.append(ParseError(f"unknown variable {target.text!r}",
                                     target.line, target.column))
            continue
        if value.text not in domain:
            errors.append(ParseError(
                f"value {value.text!r} not in domain of {target.text!r}",
                value.line, value.column))
            continue
        if target.text in event_names and value.text == "false":
            errors.append(ParseError(
                f"basic event flag {target.text!r} may not be reset to false",
                value.line, value.column))
            continue
        if target.text in assigned:
            errors.append(ParseError(f"variable {target.text!r} assigned twice",
                                     target.line, target.column))
            continue
        assigned.add(target.text)
        updates.append((target.text, value.text))
    blocks.append(ElementaryBlock(name.text, guard, tuple(updates)))


def with_occurrence_blocks(model: Model) -> Model:
    """Add `{guard !E; E := true}` for every event no block already sets."""
    covered = set()
    for b in model.blocks:
        for target, value in b.updates:
            if value == "true" and target in {e.name for e in model.events}:
                covered.add(target)
    new_blocks = list(model.blocks)
    taken = {b.name for b in model.blocks}
    for e in model.events:
        if e.name in covered:
            continue
        name = f"occ_{e.name}"
        while name in taken:
            name = "_" + name
        taken.add(name)
        new_blocks.append(ElementaryBlock(
            name, Not(Atom(e.name, "true")), ((e.name, "true"),)))
    return replace(model, blocks=tuple(new_blocks))


STUTTER_BLOCK = "_stutter"


def complete_model(model: Model) -> Model:
    """Ensure totality: add a self-loop block enabled exactly when no other
    block is. Idempotent; with an always-enabled block present the stutter
    guard is simply unsatisfiable."""
    if any(b.name == STUTTER_BLOCK for b in model.blocks):
        return model
    guard = Not(prop.disj([b.guard for b in model.blocks]))
    stutter = ElementaryBlock(STUTTER_BLOCK, guard, ())
    return replace(model, blocks=model.blocks + (stutter,))


def print_model(model: Model) -> str:
    """Canonical text form; parse_model(print_model(m)) == m."""
    lines = []
    for v in model.variables:
        lines.append(f"var {v.name} : {{{', '.join(v.domain)}}} init {v.initial};")
    for e in model.events:
        lines.append(f"event {e.name};")
    for b in model.blocks:
        lines.append(f"block {b.name} {{")
        lines.append(f"  guard: {prop.to_text(b.guard)};")
        for target, value in b.updates:
            lines.append(f"  {target} := {value};")
        lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Bit-level encoding

@dataclass(frozen=True)
class VarLayout:
    name: str
    domain: tuple
    bits: tuple          # ((cur_index, next_index), ...) LSB first
    codes: dict          # value name -> tuple of bools


@dataclass
class VariableMap:
    layouts: tuple
    by_name: dict = field(init=False)

    def __post_init__(self):
        self.by_name = {l.name: l for l in self.layouts}

    @property
    def cur_levels(self):
        return [cur for l in self.layouts for cur, _ in l.bits]

    @property
    def next_levels(self):
        return [nxt for l in self.layouts for _, nxt in l.bits]

    @property
    def cur_to_next(self):
        return {cur: nxt for l in self.layouts for cur, nxt in l.bits}

    @property
    def next_to_cur(self):
        return {nxt: cur for l in self.layouts for cur, nxt in l.bits}

    @property
    def total_bits(self):
        return sum(len(l.bits) for l in self.layouts)


def encode(model: Model, order=None) -> VariableMap:
    """Lay out current/next bit pairs, interleaved per variable.

    A domain of size k takes ceil(log2 k) bits; size-1 domains take none.
    `order` may list all variable and event names to override declaration
    order.
    """
    names = model.variable_names()
    if order is not None:
        order = list(order)
        if sorted(order) != sorted(names):
            raise ValueError("variable order must be a permutation of all "
                             "declared variable and event names")
        names = order
    layouts = []
    index = 0
    for name in names:
        domain = model.domain_of(name)
        width = max(len(domain) - 1, 0).bit_length()
        bits = []
        for _ in range(width):
            bits.append((index, index + 1))
            index += 2
        codes = {value: tuple(bool((i >> b) & 1) for b in range(width))
                 for i, value in enumerate(domain)}
        layouts.append(VarLayout(name, domain, tuple(bits), codes))
    return VariableMap(tuple(layouts))


class SymbolicModel:
    """A completed model encoded over a fresh BDD table.

    Publishes the per-block transition relations (over current and next
    bits, domain constraints folded in), the domain-constraint diagrams and
    the encoded initial state.
    """

    def __init__(self, model: Model, order=None):
        model = complete_model(model)
        self.model = model
        self.vm = encode(model, order)
        self.table = BddTable(2 * self.vm.total_bits)
        self.domain_cur = self._domain_constraint(prime=False)
        self.domain_next = self._domain_constraint(prime=True)
        self.init = self.state_bdd(model.initial_state())
        self.block_order = [b.name for b in model.blocks]
        self.relations = {b.name: self._block_relation(b) for b in model.blocks}
        self.flag_levels = {
            e.name: self.vm.by_name[e.name].bits[0][0] for e in model.events}

    # -- encoding helpers -------------------------------------------------

    def var_eq(self, name: str, value: str, prime=False) -> Bdd:
        layout = self.vm.by_name[name]
        if value not in layout.codes:
            raise KeyError(f"{value!r} not in domain of {name!r}")
        result = self.table.true
        for (cur, nxt), bit in zip(layout.bits, layout.codes[value]):
            idx = nxt if prime else cur
            result = result & (self.table.var(idx) if bit else self.table.nvar(idx))
        return result

    def expr_bdd(self, expr: Expr, prime=False) -> Bdd:
        if isinstance(expr, prop.TrueExpr):
            return self.table.true
        if isinstance(expr, prop.FalseExpr):
            return self.table.false
        if isinstance(expr, Atom):
            return self.var_eq(expr.var, expr.value, prime)
        if isinstance(expr, Not):
            return ~self.expr_bdd(expr.operand, prime)
        if isinstance(expr, prop.And):
            return self.expr_bdd(expr.left, prime) & self.expr_bdd(expr.right, prime)
        if isinstance(expr, prop.Or):
            return self.expr_bdd(expr.left, prime) | self.expr_bdd(expr.right, prime)
        raise TypeError(f"not a propositional expression: {expr!r}")

    def state_bdd(self, state: dict, prime=False) -> Bdd:
        result = self.table.true
        for name, value in state.items():
            result = result & self.var_eq(name, value, prime)
        return result

    def decode_state(self, cube: dict) -> dict:
        """Decode a full cube over current bits into a state dict."""
        state = {}
        for layout in self.vm.layouts:
            bits = tuple(cube[cur] for cur, _ in layout.bits)
            for value, code in layout.codes.items():
                if code == bits:
                    state[layout.name] = value
                    break
            else:
                raise ValueError(f"bit pattern of {layout.name!r} decodes to no value")
        return state

    def _domain_constraint(self, prime) -> Bdd:
        result = self.table.true
        for layout in self.vm.layouts:
            if (1 << len(layout.bits)) == len(layout.domain):
                continue
            ok = self.table.false
            for value in layout.domain:
                ok = ok | self.var_eq(layout.name, value, prime)
            result = result & ok
        return result

    def _block_relation(self, block: ElementaryBlock) -> Bdd:
        rel = self.expr_bdd(block.guard, prime=False)
        assigned = {target for target, _ in block.updates}
        for target, value in block.updates:
            rel = rel & self.var_eq(target, value, prime=True)
        for layout in self.vm.layouts:
            if layout.name in assigned:
                continue
            for cur, nxt in layout.bits:
                same = ~(self.table.var(cur) ^ self.table.var(nxt))
                rel = rel & same
        return rel & self.domain_cur & self.domain_next
