import itertools

import pytest
from helpers import RFUM2_FIXTURES, fixture, fixture_names

from ultrashift import boundary as bd
from ultrashift import dynamics as dy


def cycle_points(ug, max_len=6):
    return [bd.periodic((), c.path.edges) for c in dy.find_cycles(ug, max_len) if c.simple]


def test_shift_on_each_point_kind():
    ug = fixture("stabilizer_example.json")
    x = bd.periodic(("a1", "a2", "a3"), ("b", "c"))
    assert dy.shift_n(x, 3) == bd.periodic((), ("b", "c"))
    assert dy.shift_n(x, 4) == bd.periodic((), ("c", "b"))
    p = bd.FinitePoint(bd.Ultrapath(("a1",), ug.range("a1")))
    assert dy.shift(p) == bd.FinitePoint(bd.Ultrapath((), ug.range("a1")))
    with pytest.raises(dy.LengthTooShort):
        dy.shift_n(p, 2)
    r = bd.FamilyRay((), "E", 4)
    assert dy.shift(r) == bd.FamilyRay((), "E", 5)


def test_cycle_example_simple_cycle_and_exit():
    ug = fixture("cycle_example.json")
    c = dy.make_cycle(ug, ("e", "f1"))
    assert c.simple
    assert str(c) == "(e f1,{v0})"
    assert dy.has_exit(ug, c) == (True, "(e,{v2})")
    assert not dy.is_simple(ug, ("e", "f1", "e", "f1"))


def test_stabilizer_graph_cycles():
    ug = fixture("stabilizer_example.json")
    simple = {c.path.edges for c in dy.find_cycles(ug, 6, up_to_rotation=True) if c.simple}
    assert simple == {("b", "c"), ("d", "e", "f")}
    assert dy.has_exit(ug, ("b", "c"))[0]
    assert not dy.has_exit(ug, ("d", "e", "f"))[0]


def test_stabilizers_on_the_example_graph():
    ug = fixture("stabilizer_example.json")
    x = bd.periodic(("a1", "a2", "a3"), ("b", "c"))
    y = bd.periodic(("a1", "a2", "a3", "b", "c"), ("d", "e", "f"))
    assert dy.stabilizers(ug, x).as_tuple() == ("2Z", 2, "{0}", "inf")
    assert dy.stabilizers(ug, y).as_tuple() == ("3Z", 3, "3Z", 3)


@pytest.mark.parametrize("name", RFUM2_FIXTURES)
def test_essential_stabilizer_is_smaller(name):
    ug = fixture(name)
    for p in dy.enumerate_points(ug, 3, cycle_max=4, prefix_max=2):
        s = dy.stabilizers(ug, p)
        # subgroup inclusion ess Z <= stab Z means stab divides ess
        if s.stab_ess:
            assert s.stab and s.stab_ess % s.stab == 0
        if s.stab_ess_min is not None:
            assert s.stab_min is not None and s.stab_min <= s.stab_ess_min


@pytest.mark.parametrize("name", fixture_names())
def test_isolation_iff_no_exit(name):
    ug = fixture(name)
    for p in cycle_points(ug):
        iso = dy.classify_isolated(ug, p)
        assert iso.isolated == (not dy.has_exit(ug, p.cycle)[0])


def test_isolated_points_of_the_example():
    ug = fixture("isolated_example.json")
    ray = bd.FamilyRay((), "E", 4)
    assert dy.classify_isolated(ug, ray).isolated
    mu = bd.periodic(("mu1", "mu2", "mu3"), ("gamma1", "gamma2", "gamma3", "gamma4"))
    r = dy.classify_isolated(ug, mu)
    assert r.isolated and r.reason == "exitless-cycle"
    sink_end = bd.FinitePoint(bd.Ultrapath(("e1", "e2"), ug.singleton("s1")))
    assert dy.classify_isolated(ug, sink_end).reason == "eventual-sink"


def test_non_isolated_points():
    ug = fixture("cycle_example.json")
    p = bd.periodic((), ("e", "f1"))
    r = dy.classify_isolated(ug, p)
    assert not r.isolated and r.witness == "(e,{v2})"
    fan = fixture("emitter_fan.json")
    q = bd.FinitePoint(bd.Ultrapath(("h", "e1"), fan.range("e1")))
    assert not dy.classify_isolated(fan, q).isolated


def test_condition_l_verdicts():
    loop = fixture("exitless_loop.json")
    res = dy.check_condition_L(loop, 4)
    assert isinstance(res, dy.Verified) and not res.holds
    assert res.witness.path.edges == ("l",)
    ok = dy.check_condition_L(fixture("cycle_example.json"), 6)
    assert isinstance(ok, dy.Verified) and ok.holds
    fam = dy.check_condition_L(fixture("example_sink.json"), 6)
    assert isinstance(fam, dy.UnknownBeyondBound)


@pytest.mark.parametrize("name", fixture_names())
def test_condition_l_is_monotone_in_the_bounds(name):
    ug = fixture(name)
    base = ug.max_explicit_index()
    grid = list(itertools.product(range(1, 7), range(base, base + 3)))
    fails = {b: (lambda r: isinstance(r, dy.Verified) and not r.holds)(dy.check_condition_L(ug, *b))
             for b in grid}
    for small, large in itertools.product(grid, repeat=2):
        if small[0] <= large[0] and small[1] <= large[1] and fails[small]:
            assert fails[large]


def test_groupoid_laws():
    ug = fixture("stabilizer_example.json")
    x = bd.periodic(("a1", "a2", "a3"), ("b", "c"))
    y = bd.periodic((), ("b", "c"))
    z = bd.periodic((), ("c", "b"))
    g1 = dy.groupoid_element(x, y, 3, 0)
    g2 = dy.groupoid_element(y, z, 1, 0)
    g3 = dy.groupoid_element(z, y, 1, 0)
    left = dy.groupoid_compose(dy.groupoid_compose(g1, g2), g3)
    right = dy.groupoid_compose(g1, dy.groupoid_compose(g2, g3))
    assert (left.x, left.k, left.y) == (right.x, right.k, right.y)
    inv = dy.groupoid_compose(g1, dy.groupoid_inverse(g1))
    assert (inv.x, inv.k, inv.y) == (x, 0, x)
    with pytest.raises(dy.CertificateError):
        dy.groupoid_element(x, y, 0, 0)


def test_groupoid_associativity_on_fixture_triples():
    ug = fixture("cycle_example.json")
    pts = [bd.periodic(p, ("e", "f1")) for p in [(), ("f1",), ("e", "f1")]]
    pts += [bd.periodic((), ("f1", "e"))]
    elems = []
    for a, b in itertools.product(pts, repeat=2):
        for m, n in itertools.product(range(4), repeat=2):
            try:
                elems.append(dy.groupoid_element(a, b, m, n))
            except dy.CertificateError:
                pass
    assert elems
    key = lambda g: (g.x, g.k, g.y)
    for g1, g2, g3 in itertools.product(elems[:12], repeat=3):
        if g1.y != g2.x or g2.y != g3.x:
            continue
        a = dy.groupoid_compose(dy.groupoid_compose(g1, g2), g3)
        b = dy.groupoid_compose(g1, dy.groupoid_compose(g2, g3))
        assert key(a) == key(b)


def test_normal_form_element():
    ug = fixture("cycle_example.json")
    y = bd.periodic((), ("e", "f1"))
    g = dy.normal_form_element(ug, ("e", "f1"), (), ug.singleton("v0"), y)
    assert g.k == 2 and g.y == y


def test_identity_map_passes():
    ug = fixture("bouquet.json")
    rep = dy.check_orbit_equivalence(dy.identity_map(ug), samples=100, depth=8)
    assert rep["samples"]["source"] == 100
    for check in ("coe_identities", "stab_preservation", "eq1_eq2", "eventual_conjugacy"):
        assert rep[check]["pass"], rep[check]["witnesses"][:3]


def test_block_map_rejects_missing_rules():
    ug = fixture("bouquet.json")
    h = dy.BlockMap(ug, ug, edges={"a": ("a",)}, vertices={"v": "v"}, k={"*": 0}, l={"*": 1})
    with pytest.raises(dy.RuleGap):
        h.apply(bd.periodic((), ("b",)))
