"""Model parsing, completion, encoding and transition-relation tests."""

import itertools
import random

import pytest

from cutsetmc import prop
from cutsetmc.model import (
    Model, ModelErrors, SymbolicModel, complete_model, encode,
    parse_model, print_model, STUTTER_BLOCK,
)


def states_of(model):
    names = model.variable_names()
    domains = [model.domain_of(n) for n in names]
    for combo in itertools.product(*domains):
        yield dict(zip(names, combo))


def explicit_successors(model, block, state):
    if not prop.evaluate(block.guard, state):
        return None
    nxt = dict(state)
    for target, value in block.updates:
        nxt[target] = value
    return nxt


class TestParse:
    def test_minimal_model(self):
        m = parse_model("var X:{a,b} init a; block t {guard X=a; X:=b;}")
        assert len(m.variables) == 1
        assert [b.name for b in m.blocks] == ["t"]
        assert m.blocks[0].updates == (("X", "b"),)

    def test_event_declares_boolean_flag(self):
        m = parse_model("event E1F;")
        assert m.domain_of("E1F") == ("false", "true")
        assert m.initial_state()["E1F"] == "false"

    def test_flag_reset_rejected(self):
        with pytest.raises(ModelErrors) as exc:
            parse_model("event E1F; block t {guard true; E1F:=false;}")
        assert any("may not be reset" in str(e) for e in exc.value.errors)

    def test_default_occurrence_block(self):
        m = parse_model("event E1F;")
        occ = m.block_named("occ_E1F")
        assert occ.updates == (("E1F", "true"),)
        assert occ.guard == prop.Not(prop.Atom("E1F", "true"))

    def test_custom_occurrence_block_suppresses_default(self):
        m = parse_model(
            "var X:{a,b} init a; event E1F;\n"
            "block boom {guard X=a & !E1F; E1F:=true; X:=b;}")
        assert not any(b.name.startswith("occ_") for b in m.blocks)

    def test_syntax_error_position(self):
        with pytest.raises(ModelErrors) as exc:
            parse_model("var X:{a,b} init a\nblock t {guard X=a;}")
        err = exc.value.errors[0]
        assert err.line == 2

    def test_duplicate_name(self):
        with pytest.raises(ModelErrors) as exc:
            parse_model("var X:{a} init a; event X;")
        assert any("duplicate" in str(e) for e in exc.value.errors)

    def test_unknown_value(self):
        with pytest.raises(ModelErrors) as exc:
            parse_model("var X:{a,b} init a; block t {guard X=c;}")
        assert any("not in domain" in str(e) for e in exc.value.errors)

    def test_multiple_errors_collected(self):
        with pytest.raises(ModelErrors) as exc:
            parse_model("var X:{a,b} init c; block t {guard X=z;}")
        assert len(exc.value.errors) == 2

    def test_bare_flag_in_guard(self):
        m = parse_model("event E; block t {guard E; }")
        assert m.block_named("t").guard == prop.Atom("E", "true")

    def test_bare_non_boolean_rejected(self):
        with pytest.raises(ModelErrors):
            parse_model("var X:{a,b} init a; block t {guard X;}")

    def test_comments_ignored(self):
        m = parse_model("# header\nvar X:{a} init a; # trailing\n")
        assert m.variables[0].name == "X"


class TestRoundTrip:
    CASES = [
        "var X:{a,b} init a; block t {guard X=a; X:=b;}",
        "event E1F; event E2F; block t {guard E1F & !E2F;}",
        "var X:{a,b,c} init b; event F;\n"
        "block u {guard (X=a | X=b) & !(X=c); X:=c;}\n"
        "block v {guard X!=a & F; X:=a;}",
    ]

    @pytest.mark.parametrize("text", CASES)
    def test_parse_print_parse(self, text):
        m = parse_model(text)
        assert parse_model(print_model(m)) == m

    def test_completion_survives_round_trip(self):
        m = complete_model(parse_model(self.CASES[0]))
        assert parse_model(print_model(m)) == m


class TestCompletion:
    def test_adds_stutter(self):
        m = parse_model("var X:{a,b} init a; block t {guard X=a; X:=b;}")
        c = complete_model(m)
        assert any(b.name == STUTTER_BLOCK for b in c.blocks)

    def test_idempotent(self):
        m = complete_model(parse_model("var X:{a} init a;"))
        assert complete_model(m) == m

    def test_no_blocks_single_state(self):
        m = complete_model(parse_model("var X:{a} init a;"))
        stutter = m.block_named(STUTTER_BLOCK)
        assert prop.evaluate(stutter.guard, {"X": "a"})
        assert stutter.updates == ()

    def test_every_state_has_enabled_block(self):
        m = complete_model(parse_model(
            "var X:{a,b,c} init a;\n"
            "block t {guard X=a; X:=b;}\n"
            "block u {guard X=b; X:=c;}"))
        for state in states_of(m):
            assert any(prop.evaluate(b.guard, state) for b in m.blocks)

    def test_stutter_unsatisfiable_when_total(self):
        m = complete_model(parse_model("var X:{a,b} init a; block t {guard true; X:=b;}"))
        stutter = m.block_named(STUTTER_BLOCK)
        for state in states_of(m):
            assert not prop.evaluate(stutter.guard, state)


class TestEncode:
    def test_domain_size_three_uses_two_bits(self):
        m = parse_model("var X:{a,b,c} init a;")
        vm = encode(m)
        assert len(vm.by_name["X"].bits) == 2

    def test_boolean_flag_single_bit(self):
        m = parse_model("event E;")
        assert len(encode(m).by_name["E"].bits) == 1

    def test_eleven_flags_eleven_bits(self):
        text = "\n".join(f"event F{i};" for i in range(11))
        vm = encode(parse_model(text))
        assert vm.total_bits == 11

    def test_singleton_domain_zero_bits(self):
        m = parse_model("var P:{ready} init ready;")
        assert encode(m).total_bits == 0

    def test_interleaved_indices(self):
        m = parse_model("var X:{a,b} init a; var Y:{a,b} init a;")
        vm = encode(m)
        assert vm.by_name["X"].bits == ((0, 1),)
        assert vm.by_name["Y"].bits == ((2, 3),)
        assert set(vm.cur_levels).isdisjoint(vm.next_levels)

    def test_order_override(self):
        m = parse_model("var X:{a,b} init a; var Y:{a,b} init a;")
        vm = encode(m, order=["Y", "X"])
        assert vm.by_name["Y"].bits == ((0, 1),)

    def test_bad_order_rejected(self):
        m = parse_model("var X:{a,b} init a;")
        with pytest.raises(ValueError):
            encode(m, order=["X", "Zed"])

    def test_decode_round_trip(self):
        m = parse_model("var X:{a,b,c} init a; event E;")
        sm = SymbolicModel(m)
        for state in states_of(sm.model):
            cube = sm.state_bdd(state).pick_cube()
            full = {lvl: cube.get(lvl, False) for lvl in sm.vm.cur_levels}
            assert sm.decode_state(full) == state

    def test_invalid_pattern_excluded(self):
        m = parse_model("var X:{a,b,c} init a;")
        sm = SymbolicModel(m)
        bits = sm.vm.by_name["X"].bits
        bad = sm.table.var(bits[0][0]) & sm.table.var(bits[1][0])
        assert (sm.domain_cur & bad).is_false


class TestBlockRelations:
    def image(self, sm, rel, src):
        hit = src.and_exists(rel, sm.vm.cur_levels)
        return hit.rename(sm.vm.next_to_cur)

    def test_two_state_toggle(self):
        m = parse_model("var X:{a,b} init a; block t {guard X=a; X:=b;}")
        sm = SymbolicModel(m)
        img = self.image(sm, sm.relations["t"], sm.state_bdd({"X": "a"}))
        assert img == sm.state_bdd({"X": "b"})
        assert self.image(sm, sm.relations["t"], sm.state_bdd({"X": "b"})).is_false

    def test_stutter_is_identity_on_its_guard(self):
        m = parse_model("var X:{a,b} init a; block t {guard X=a; X:=b;}")
        sm = SymbolicModel(m)
        rel = sm.relations[STUTTER_BLOCK]
        img = self.image(sm, rel, sm.state_bdd({"X": "b"}))
        assert img == sm.state_bdd({"X": "b"})

    def random_model_text(self, rng):
        lines = ["var A:{a0,a1,a2} init a0;", "var B:{b0,b1} init b0;", "event F;"]
        values = {"A": ["a0", "a1", "a2"], "B": ["b0", "b1"], "F": ["false", "true"]}
        for i in range(4):
            var1 = rng.choice(["A", "B", "F"])
            var2 = rng.choice(["A", "B"])
            guard = f"{var1} = {rng.choice(values[var1])}"
            if rng.random() < 0.5:
                guard += f" | !({var2} = {rng.choice(values[var2])})"
            target = rng.choice(["A", "B"])
            lines.append(
                f"block t{i} {{guard {guard}; {target} := {rng.choice(values[target])};}}")
        return "\n".join(lines)

    def test_image_matches_explicit_enumeration(self):
        rng = random.Random(23)
        for _ in range(10):
            m = complete_model(parse_model(self.random_model_text(rng)))
            sm = SymbolicModel(m)
            for block in m.blocks:
                rel = sm.relations[block.name]
                for state in states_of(m):
                    expect = explicit_successors(m, block, state)
                    got = self.image(sm, rel, sm.state_bdd(state))
                    if expect is None:
                        assert got.is_false
                    else:
                        assert got == sm.state_bdd(expect)


class TestInvariants:
    def make(self, text):
        return SymbolicModel(parse_model(text))

    def test_flags_monotone(self):
        sm = self.make(
            "var X:{a,b} init a; event F; event G;\n"
            "block t {guard F; X:=b;}\nblock u {guard X=b & G; X:=a;}")
        for name, rel in sm.relations.items():
            for flag, level in sm.flag_levels.items():
                cur = sm.table.var(level)
                nxt = sm.table.var(sm.vm.cur_to_next[level])
                assert rel.implies(cur.implies(nxt)).is_true, (name, flag)

    def test_blocks_deterministic(self):
        sm = self.make(
            "var X:{a,b,c} init a; event F;\n"
            "block t {guard X=a | F; X:=b;}\nblock u {guard X=b; X:=c;}")
        for state in states_of(sm.model):
            for block in sm.model.blocks:
                succ = explicit_successors(sm.model, block, state)
                img = TestBlockRelations().image(
                    sm, sm.relations[block.name], sm.state_bdd(state))
                if succ is None:
                    assert img.is_false
                else:
                    assert img == sm.state_bdd(succ)

    def test_completed_model_total_symbolically(self):
        sm = self.make("var X:{a,b,c} init a; block t {guard X=a; X:=b;}")
        union = sm.table.false
        for rel in sm.relations.values():
            union = union | rel
        has_succ = union.exists(sm.vm.next_levels)
        assert sm.domain_cur.implies(has_succ).is_true
