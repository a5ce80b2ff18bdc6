import json
import random
from fractions import Fraction

import pytest
from helpers import RFUM2_FIXTURES, fixture, fixture_text, input_path, kms_points, mix

from ultrashift import boundary as bd
from ultrashift import kms
from ultrashift.document import from_dict
from ultrashift.ultragraph import NotRfum2


def sink_graph(N="2"):
    data = json.loads(fixture_text("example_sink.json"))
    data["weights"] = {"e": str(N)}
    return from_dict(data)


def test_power_exactness():
    assert kms.power(2, 1) == (Fraction(1, 2), True)
    assert kms.power(Fraction(9, 4), Fraction(1, 2)) == (Fraction(2, 3), True)
    val, exact = kms.power(2, Fraction(1, 2))
    assert not exact
    assert abs(val - Fraction(2 ** -0.5)) < Fraction(1, 10 ** 15)
    assert kms.power(3, 0) == (Fraction(1), True)


@pytest.mark.parametrize("N, beta, M", [
    (2, 1, Fraction(1, 2)), (2, 2, Fraction(1, 4)), (3, 1, Fraction(1, 3)),
    (Fraction(5, 2), 3, Fraction(8, 125)), (4, Fraction(1, 2), Fraction(1, 2)),
])
def test_sink_example_matches_closed_form(N, beta, M):
    # m(v0) = M m(r(e)) and m(v0) + m(r(e)) = 1 give m(r(e)) = 1 / (1 + M)
    ug = sink_graph(N)
    sol = kms.solve(ug, beta)
    assert sol.exact
    assert sol.m(ug.range("e")) == 1 / (1 + M)
    assert sol.m.vertex("v0") == M / (1 + M)


def test_sink_example_at_beta_zero():
    sol = kms.solve(sink_graph(), 0)
    assert sol.m.vertex("v0") == Fraction(1, 2)


def test_inexact_beta_is_flagged():
    sol = kms.solve(sink_graph(), Fraction(1, 2))
    assert not sol.exact
    M = 2 ** -0.5
    assert abs(float(sol.m(sink_graph().range("e"))) - 1 / (1 + M)) < 1e-12


def test_geometric_family_is_accepted():
    ug = sink_graph()
    m = kms.m_from_document(ug, open(input_path("sink_geometric_m.json")).read())
    assert kms.verify_m(ug, m, 1, 0) == []
    assert m(ug.range("e")) == Fraction(2, 3)


@pytest.mark.parametrize("beta", [Fraction(1, 2), 1, 2, Fraction(37, 10)])
@pytest.mark.parametrize("N", ["2", "3", "5/2"])
def test_literal_ground_claim_violates_m2_once(beta, N):
    ug = sink_graph(N)
    m = kms.m_from_document(ug, open(input_path("sink_claimed_ground_m.json")).read())
    viol = kms.verify_m(ug, m, beta)
    assert {(v["condition"], v["set"]) for v in viol} == {("m2", "{v0}")}


@pytest.mark.parametrize("name", RFUM2_FIXTURES)
def test_solutions_pass_verification(name):
    ug = fixture(name)
    res = kms.solve(ug, 1)
    if isinstance(res, kms.Infeasible):
        return
    assert kms.verify_m(ug, res.m, 1, 0) == []
    assert res.dimension >= 0


def test_exitless_loop_has_no_state_at_positive_beta():
    ug = fixture("exitless_loop.json")
    assert isinstance(kms.solve(ug, 1), kms.Infeasible)
    assert isinstance(kms.solve(ug, 0), kms.KmsSolution)


def test_non_rfum2_is_refused():
    with pytest.raises(NotRfum2):
        kms.build_constraints(fixture("nested_ranges.json"), 1)


def test_ground_state_of_the_sink_example():
    ug = sink_graph()
    system = kms.build_constraints(ug, None, mode="ground")
    sol = kms.solve_kms(system)
    assert sol.m.vertex("v0") == 0
    assert sol.m(ug.range("e")) == 1
    forced = kms.forced_values(system)
    assert all(v is not None for v in forced.values())
    for name, value in forced.items():
        if name.startswith("m("):
            assert value == 0


@pytest.mark.parametrize("name", ["example_sink.json", "emitter_fan.json", "isolated_example.json",
                                  "cycle_example.json"])
def test_ground_kills_finite_regular_sets(name):
    ug = fixture(name)
    sol = kms.solve_ground(ug)
    if isinstance(sol, kms.Infeasible):
        return
    for v in sol.m.layout.heads:
        if ug.is_regular(v):
            assert sol.m.vertex(v) == 0


def test_edge_zero_ground_variant_keeps_sinks_free():
    ug = sink_graph()
    sol = kms.solve_ground(ug, variant="edge-zero")
    assert sol.m.vertex("v0") == 0
    assert sol.dimension > 0
    with pytest.raises(kms.KmsError):
        kms.solve_ground(ug, variant="other")


def test_convex_combinations_stay_feasible():
    ug = fixture("example_sink.json")
    system, pts = kms_points(ug, 1, None, 5, seed=1)
    rng = random.Random(2)
    for _ in range(5):
        a, b = rng.choice(pts), rng.choice(pts)
        for lam in (Fraction(0), Fraction(1, 3), Fraction(1)):
            m = kms.MFunction(ug, system.layout.T, mix(a, b, lam))
            assert kms.verify_m(ug, m, 1, 0) == []


def test_measure_of_the_whole_space_is_one():
    ug = sink_graph()
    sol = kms.solve(ug, 1)
    T = sol.m.layout.T
    region = bd.region_Xc(ug, bd.GroupWord(), T)
    assert kms.mu(ug, region, sol.m, 1) == 1


def test_kappa_detects_negative_mass():
    ug = sink_graph()
    m = kms.m_from_document(ug, {"truncation": 4, "vertices": {"v0": "1"},
                                 "minimal": [{"set": "R(e)", "value": "0"}]})
    c = bd.cylinder(ug, (), ug.singleton("v0"))
    kms.kappa(ug, c, m, 1)
    bad = kms.m_from_document(ug, {"truncation": 4, "vertices": {"v0": "1/3", "V[1]": "1"},
                                   "minimal": [{"set": "R(e)", "value": "2/3"}]})
    with pytest.raises(kms.NegativeMass):
        kms.kappa(ug, bd.cylinder(ug, ("e",), ug.range("e"), S=[("V", 1)]), bad, 1)


def test_m_file_errors():
    ug = sink_graph()
    with pytest.raises(kms.KmsError):
        kms.m_from_document(ug, {"truncation": 4, "vertices": {"V[9]": "0"}})
    with pytest.raises(kms.KmsError):
        kms.m_from_document(ug, {"minimal": [{"set": "FINITE([v0])", "value": "0"}]})


def test_beta_sweep():
    rows = kms.beta_sweep(sink_graph(), ["2", "1/2", "1"])
    assert [r["beta"] for r in rows] == [Fraction(1, 2), 1, 2]
    assert all(r["feasible"] for r in rows)
    assert [r["exact"] for r in rows] == [False, True, True]
    loop = kms.beta_sweep(fixture("exitless_loop.json"), ["1"])
    assert loop[0]["feasible"] is False


def test_missing_weight_is_an_error():
    data = json.loads(fixture_text("example_sink.json"))
    del data["weights"]
    with pytest.raises(kms.KmsError):
        kms.solve(from_dict(data), 1)
