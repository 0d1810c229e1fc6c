from conftest import CORPUS
from hypothesis import given, settings
from hypothesis import strategies as st

from lfcore.ast import (
    BOOL_T,
    INT64_T,
    STAR,
    Forall,
    KArrow,
    TVar,
    alpha_equal,
    fn,
    free_type_vars,
    substitute_type,
    synthesize_archive,
)
from lfcore.parser import parse_package, pretty_package


def test_substitute_under_binder():
    t = Forall("b", STAR, fn(TVar("a"), TVar("b")))
    assert substitute_type(t, "a", INT64_T) == Forall("b", STAR, fn(INT64_T, TVar("b")))


def test_substitute_identity_frame():
    assert substitute_type(TVar("a"), "a", BOOL_T) == BOOL_T


def test_substitute_shadowed():
    t = Forall("a", STAR, TVar("a"))
    assert substitute_type(t, "a", INT64_T) == t


def test_substitute_avoids_capture():
    # (forall b. a -> b)[a := b] must not capture the free b
    t = Forall("b", STAR, fn(TVar("a"), TVar("b")))
    out = substitute_type(t, "a", TVar("b"))
    assert isinstance(out, Forall) and out.var != "b"
    assert alpha_equal(out, Forall("c", STAR, fn(TVar("b"), TVar("c"))))
    assert free_type_vars(out) == {"b"}


def test_alpha_equal():
    assert alpha_equal(Forall("a", STAR, TVar("a")), Forall("b", STAR, TVar("b")))
    assert not alpha_equal(Forall("a", STAR, TVar("a")), Forall("b", KArrow(STAR, STAR), TVar("b")))
    assert not alpha_equal(Forall("a", STAR, TVar("c")), Forall("b", STAR, TVar("b")))


def _templates():
    pkg = parse_package((CORPUS / "iou.lf").read_text())
    return {t.name: t for t in pkg.module("Iou").templates}


def test_archive_simple_iou():
    t = _templates()["SimpleIou"]
    a = synthesize_archive(t)
    assert a.consuming and a.name == "Archive" and a.controllers == t.signatories
    assert t.choice("Archive") == a


def test_archive_iou_has_both_signatories():
    t = _templates()["Iou"]
    a = t.choice("Archive")
    assert a.controllers == t.signatories and len(a.controllers.args) == 2


def test_archive_for_every_corpus_template():
    for t in _templates().values():
        assert [c.name for c in t.all_choices()].count("Archive") == 1
        assert t.choice("Archive").consuming


def test_hash_is_deterministic_and_sensitive():
    text = (CORPUS / "iou.lf").read_text()
    a, b = parse_package(text), parse_package(text)
    assert a.id == b.id and len(a.id) == 64 and a.id == a.id.lower()
    changed = parse_package(text.replace("0.0))", "1.0))", 1))
    assert changed.id != a.id
    assert parse_package(pretty_package(a)).id == a.id


def test_hash_injective_on_corpus():
    from conftest import FIXTURES
    ids = [parse_package(p.read_text()).id for p in [*CORPUS.glob("*.lf"), *FIXTURES.glob("*.lf")]]
    assert len(set(ids)) == len(ids)


@settings(max_examples=200)
@given(st.integers(min_value=0, max_value=10**6))
def test_hash_tracks_literal_changes(n):
    src = f"(package P (module M (value v Int64 {n})))"
    other = f"(package P (module M (value v Int64 {n + 1})))"
    assert parse_package(src).id != parse_package(other).id
