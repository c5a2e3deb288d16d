import itertools

import pytest
from hypothesis import given, settings

from conftest import load_file
from gen import random_pair, seeds
from oracle import compare_composition
from sociable import Manager, compile_interface, compose
from sociable.composition import (
    CompositionError, IncompatibleError, build_composite, compatible_states, product,
)
from sociable.parser import parse, pretty_print
from sociable import validate


def test_fire_guard_composite(fire):
    comp = compose(fire["Fire"], fire["Guard"])
    assert comp.name == "Fire_Guard"
    assert comp.output_alphabet == ("fire",) and comp.input_alphabet == ("fire",)
    text = pretty_print(comp.to_ast())
    assert "s = 0 ==> s' := 1, alarm' := true, seen' := true;" in text


def test_fire_variant_incompatible():
    mods = load_file("fire_variant.si")
    with pytest.raises(IncompatibleError) as exc:
        compose(mods["Fire"], mods["Guard"])
    w = exc.value.witness
    assert (w.emitter, w.action, w.listener) == ("Fire", "fire", "Guard")
    assert w.rejected_update == {"alarm": True}
    assert len(w) == 1 and w.steps[0].label == "init"


def test_optimistic_pruning():
    mods = load_file("optimism.si")
    m = Manager()
    prod = product(compile_interface(mods["Sender"], m), compile_interface(mods["Receiver"], m))
    comp = build_composite(prod)
    # an armed sender that has not sent yet is an error state
    bad = prod.enc.state({"armed": True, "done": False, "v": 0, "got": 0})
    assert not (bad & prod.err).is_false
    assert (bad & comp.compatible).is_false
    # the composite only accepts arm once the send has happened
    si = compile_interface(comp.interface, Manager())
    start = {"armed": False, "done": False, "v": 0, "got": 0}
    assert si.in_accepts(start, "arm", {"v": 0}) == set()
    done = dict(start, done=True, v=1, got=1)
    assert si.in_accepts(done, "arm", {"v": 1}) == {(True, True, 1)}


def test_clashing_locals(fire):
    with pytest.raises(CompositionError):
        compose(fire["Fire"], fire["Fire"])


def test_global_domain_mismatch():
    a, b = (validate(m) for m in parse(
        "module A:\n  global var g: bool\n  init: true\n"
        "module B:\n  global var g: [0..1]\n  init: true\n"))
    with pytest.raises(CompositionError):
        compose(a, b)


def test_different_managers(fire):
    with pytest.raises(CompositionError):
        product(compile_interface(fire["Fire"], Manager()), compile_interface(fire["Guard"], Manager()))


def test_composite_is_parseable_and_validates(corpus):
    comp = compose(*(corpus["handshake.si"][n] for n in ("Client", "Server")))
    again = validate(parse(pretty_print(comp.to_ast()))[0])
    assert again == comp


def _corpus_pairs(corpus):
    for modules in corpus.values():
        for a, b in itertools.permutations(modules.values(), 2):
            yield a, b


def test_corpus_pairs_match_oracle(corpus):
    checked = 0
    for p, q in _corpus_pairs(corpus):
        try:
            bad, _ = compare_composition(p, q)
        except CompositionError:
            continue
        assert bad == [], bad
        checked += 1
    assert checked >= 10


@settings(max_examples=40, deadline=None)
@given(seeds())
def test_random_pairs_match_oracle(rng):
    p, q = random_pair(rng)
    bad, _ = compare_composition(p, q)
    assert bad == []


def test_composite_relations_avoid_err(fire):
    m = Manager()
    prod = product(compile_interface(fire["Fire"], m), compile_interface(fire["Guard"], m))
    comp = build_composite(prod)
    w = compatible_states(prod)
    assert (comp.init & ~w).is_false
    assert (w & prod.err).is_false
