import itertools

import httpx
import numpy as np
import pytest

from crashnet import solver
from crashnet.errors import ParameterError, ParseError, RemoteError, ResourceError
from crashnet.hubo import BinaryPolynomial
from crashnet.reduction import Qubo, boolean_to_spin, quadratize
from crashnet.solver import (
    Sample,
    SampleSet,
    decompose_solve,
    default_schedule,
    exhaustive_solve,
    majority_vote,
    read_qubo_file,
    remote_sample,
    simulated_annealing,
    tabu_solve,
    write_qubo_file,
)

from conftest import random_multilinear


def random_qubo(rng, size, density=0.4):
    quadratic = {}
    for i in range(size):
        for j in range(i + 1, size):
            if rng.random() < density:
                quadratic[(i, j)] = float(rng.normal())
    return Qubo(size=size, linear=rng.normal(size=size), quadratic=quadratic)


# -- Exhaustive --------------------------------------------------------------

def test_exhaustive_hand_checked():
    # energies: 00 -> 0, 10 -> 1, 01 -> -1, 11 -> -3
    q = Qubo(size=2, linear=np.array([1.0, -1.0]), quadratic={(0, 1): -3.0})
    result = exhaustive_solve(q)
    assert result.best_sample.assignment == (1, 1)
    assert result.best_sample.energy == -3.0
    assert result.metadata["n_evaluated"] == 4


def test_exhaustive_reports_all_ties():
    q = Qubo(size=3, linear=np.zeros(3), quadratic={})
    result = exhaustive_solve(q)
    assert len(result.samples) == 8
    assert all(s.energy == 0.0 for s in result.samples)


def test_exhaustive_size_cap():
    with pytest.raises(ResourceError):
        exhaustive_solve(Qubo(size=26, linear=np.zeros(26), quadratic={}))


# -- Heuristics vs oracle ----------------------------------------------------

@pytest.mark.parametrize("seed", range(8))
def test_sa_and_tabu_reach_exhaustive_optimum(seed):
    rng = np.random.default_rng(seed)
    q = random_qubo(rng, 12)
    oracle = exhaustive_solve(q).best_sample.energy
    sa = simulated_annealing(q, default_schedule(q, sweeps=300, reads=8),
                             seed=seed)
    tb = tabu_solve(q, seed=seed)
    assert abs(sa.best_sample.energy - oracle) < 1e-9
    assert abs(tb.best_sample.energy - oracle) < 1e-9


def test_sa_is_deterministic_per_seed():
    q = random_qubo(np.random.default_rng(0), 15)
    a = simulated_annealing(q, default_schedule(q, sweeps=100, reads=4), seed=7)
    b = simulated_annealing(q, default_schedule(q, sweeps=100, reads=4), seed=7)
    assert [s.assignment for s in a.samples] == [s.assignment for s in b.samples]
    assert [s.energy for s in a.samples] == [s.energy for s in b.samples]


def test_sampleset_energies_are_recomputed_and_sorted():
    q = random_qubo(np.random.default_rng(1), 10)
    result = simulated_annealing(q, default_schedule(q, sweeps=50, reads=6),
                                 seed=0)
    energies = [s.energy for s in result.samples]
    assert energies == sorted(energies)
    for s in result.samples:
        assert abs(q.energy(s.assignment) - s.energy) < 1e-12
    assert result.best == 0


def test_schedule_validation():
    with pytest.raises(ParameterError):
        solver.AnnealSchedule(1.0, 2.0)
    with pytest.raises(ParameterError):
        solver.AnnealSchedule(1.0, 0.1, sweeps=0)
    temps = solver.AnnealSchedule(10.0, 0.1, sweeps=5).temperatures()
    assert temps[0] == 10.0 and abs(temps[-1] - 0.1) < 1e-12
    assert np.all(np.diff(temps) < 0)


def test_tabu_respects_initial_state():
    q = Qubo(size=4, linear=np.array([1.0, 1.0, 1.0, 1.0]), quadratic={})
    result = tabu_solve(q, seed=0, initial=[1, 1, 1, 1])
    assert result.best_sample.assignment == (0, 0, 0, 0)


# -- Decomposition -----------------------------------------------------------

def test_decompose_on_small_problem_matches_oracle():
    rng = np.random.default_rng(5)
    q = random_qubo(rng, 18)
    oracle = exhaustive_solve(q).best_sample.energy
    result = decompose_solve(q, subproblem_size=8, reads=6, seed=1)
    assert abs(result.best_sample.energy - oracle) < 1e-9
    assert result.metadata["solver"] == "decompose"


def test_decompose_finds_gadget_qubo_ground_state():
    # quadratized higher-order objective: the ground state over logical
    # bits is known exactly from the 2^n relaxed-ancilla enumeration
    rng = np.random.default_rng(11)
    p = random_multilinear(rng, 6, 4, density=0.4)
    q = quadratize(boolean_to_spin(p))
    assert q.size > 60
    direct = {
        bits: p.evaluate(list(bits))
        for bits in itertools.product((0, 1), repeat=6)
    }
    target = min(direct.values())
    result = decompose_solve(q, subproblem_size=30, reads=8, seed=0)
    decoded = result.best_sample.assignment[: q.num_logical]
    assert abs(direct[tuple(decoded)] - target) < 1e-8


def test_decompose_is_deterministic():
    q = random_qubo(np.random.default_rng(2), 40)
    a = decompose_solve(q, subproblem_size=15, reads=3, seed=9)
    b = decompose_solve(q, subproblem_size=15, reads=3, seed=9)
    assert [s.assignment for s in a.samples] == [s.assignment for s in b.samples]


def test_decompose_rejects_tiny_subproblems():
    q = random_qubo(np.random.default_rng(0), 6)
    with pytest.raises(ParameterError):
        decompose_solve(q, subproblem_size=1)


# -- Majority vote -----------------------------------------------------------

def test_majority_vote_weighted_and_tie_broken():
    samples = SampleSet(
        samples=[
            Sample((0, 1, 0), -5.0, num_occurrences=2),
            Sample((1, 1, 1), -3.0, num_occurrences=1),
            Sample((1, 0, 0), -1.0, num_occurrences=1),
        ],
        best=0,
    )
    # var 0: 2 zeros vs 2 ones -> tie -> best sample's 0
    # var 1: 3 ones; var 2: 3 zeros
    assert majority_vote(samples) == (0, 1, 0)
    assert majority_vote(samples, [1]) == (1,)
    with pytest.raises(ParameterError):
        majority_vote(SampleSet(samples=[], best=0))


# -- .qubo format ------------------------------------------------------------

GOLDEN = """c offset 0
p qubo 0 2 2 1
0 0 1
1 1 1
0 1 -2
"""


def test_qubo_file_golden_fixture(tmp_path):
    q = Qubo(size=2, linear=np.array([1.0, 1.0]), quadratic={(0, 1): -2.0})
    path = tmp_path / "p.qubo"
    write_qubo_file(q, path)
    assert path.read_text() == GOLDEN
    back = read_qubo_file(path)
    assert back.size == 2
    np.testing.assert_array_equal(back.linear, q.linear)
    assert back.quadratic == q.quadratic
    # second write is byte-identical
    path2 = tmp_path / "p2.qubo"
    write_qubo_file(back, path2)
    assert path2.read_bytes() == path.read_bytes()


def test_qubo_file_full_precision_round_trip(tmp_path):
    q = random_qubo(np.random.default_rng(13), 9)
    path = tmp_path / "r.qubo"
    write_qubo_file(q, path)
    back = read_qubo_file(path)
    np.testing.assert_array_equal(back.linear, q.linear)  # %.17g is lossless
    assert back.quadratic == q.quadratic


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("0 0 1\n", "header"),
        ("p qubo 0 2 2 0\n0 0 1\n", "declares 2 nodes"),
        ("p qubo 0 2 2 1\n0 0 1\n1 1 1\n", "declares 1 couplers"),
        ("p qubo 0 2 2 1\n0 0 1\n1 1 1\n1 0 -2\n", "i < j"),
        ("p qubo 0 2 2 1\n0 0 one\n1 1 1\n0 1 -2\n", "line 2"),
        ("p qubo 0 2 2 1\n0 0 1\n5 5 1\n0 1 -2\n", "out of range"),
    ],
)
def test_qubo_file_parse_errors(tmp_path, text, fragment):
    path = tmp_path / "bad.qubo"
    path.write_text(text)
    with pytest.raises(ParseError, match=fragment):
        read_qubo_file(path)


# -- Remote sampler client ---------------------------------------------------

def _service_client():
    from fastapi.testclient import TestClient

    from crashnet.service.app import create_app

    return TestClient(create_app())


def test_remote_sample_loopback_matches_local():
    q = random_qubo(np.random.default_rng(4), 10)
    remote = remote_sample("http://testserver", q, reads=5, seed=3,
                           client=_service_client())
    local = simulated_annealing(q, default_schedule(q, reads=5), seed=3)
    assert [s.assignment for s in remote.samples] == [
        s.assignment for s in local.samples
    ]
    assert remote.best_sample.energy == local.best_sample.energy
    for s in remote.samples:
        assert abs(q.energy(s.assignment) - s.energy) < 1e-12


def test_remote_sample_rejects_corrupted_energies():
    q = Qubo(size=2, linear=np.array([1.0, -1.0]), quadratic={(0, 1): -3.0})

    def handler(request):
        return httpx.Response(200, json={
            "samples": [[1, 1]], "energies": [123.0], "occurrences": [1],
        })

    client = httpx.Client(transport=httpx.MockTransport(handler))
    with pytest.raises(RemoteError, match="energy mismatch"):
        remote_sample("http://x", q, client=client)


def test_remote_sample_rejects_malformed_response():
    q = Qubo(size=2, linear=np.zeros(2), quadratic={})

    def handler(request):
        return httpx.Response(200, json={"samples": [[0, 0]]})

    client = httpx.Client(transport=httpx.MockTransport(handler))
    with pytest.raises(RemoteError, match="missing field"):
        remote_sample("http://x", q, client=client)


def test_remote_sample_transport_failure():
    q = Qubo(size=2, linear=np.zeros(2), quadratic={})

    def handler(request):
        raise httpx.ConnectError("refused")

    client = httpx.Client(transport=httpx.MockTransport(handler))
    with pytest.raises(RemoteError, match="transport"):
        remote_sample("http://x", q, client=client)
