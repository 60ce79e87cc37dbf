"""Worker population: initialization, invariants, aggregates, roster files."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from knowflow import (
    Population,
    WorkforceError,
    average_competence,
    competence_bank,
    init_workers,
    read_roster,
    write_roster,
)


def make_population(n=6, m=4, seed=0, density=0.5):
    return init_workers(
        n_workers=n,
        n_competences=m,
        competence_range=(0.0, 10.0),
        mask_density=density,
        cognitive_range=(0.3, 0.7),
        social_range=(0.3, 0.7),
        forgetting=0.006,
        rng=np.random.default_rng(seed),
    )


def test_init_shapes_and_ranges():
    pop = make_population(n=40, m=10)
    assert pop.competences.shape == (40, 10)
    assert pop.masks.shape == (40, 10)
    assert np.all((pop.competences >= 0.0) & (pop.competences <= 10.0))
    assert set(np.unique(pop.masks)) <= {0.0, 1.0}
    assert np.all((pop.cognitive >= 0.3) & (pop.cognitive <= 0.7))
    assert np.all((pop.social >= 0.3) & (pop.social <= 0.7))
    assert np.all(pop.forgetting == 0.006)
    assert len(pop) == 40
    assert pop.n_competences == 10


def test_init_deterministic_per_seed():
    a = make_population(seed=9)
    b = make_population(seed=9)
    assert np.array_equal(a.competences, b.competences)
    assert np.array_equal(a.masks, b.masks)
    assert np.array_equal(a.cognitive, b.cognitive)
    c = make_population(seed=10)
    assert not np.array_equal(a.competences, c.competences)


def test_mask_density_extremes():
    assert np.all(make_population(density=0.0).masks == 0.0)
    assert np.all(make_population(density=1.0).masks == 1.0)


def test_init_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(WorkforceError):
        init_workers(0, 3, (0, 1), 0.5, (0, 1), (0, 1), 0.0, rng)
    with pytest.raises(WorkforceError):
        init_workers(3, 0, (0, 1), 0.5, (0, 1), (0, 1), 0.0, rng)
    with pytest.raises(WorkforceError):
        init_workers(3, 3, (0, 1), 1.5, (0, 1), (0, 1), 0.0, rng)
    with pytest.raises(WorkforceError):
        init_workers(3, 3, (0, 1), 0.5, (0, 1), (0, 1), 1.0, rng)  # forgetting < 1 required
    with pytest.raises(WorkforceError):
        init_workers(3, 3, (5, 2), 0.5, (0, 1), (0, 1), 0.0, rng)
    with pytest.raises(WorkforceError):
        init_workers(3, 3, (0, 1), 0.5, (0, 1.2), (0, 1), 0.0, rng)  # abilities capped at 1


def test_population_invariants_enforced():
    ones = np.ones((2, 3))
    half = np.full(2, 0.5)
    with pytest.raises(WorkforceError):
        Population(-ones, ones, half, half, half)
    with pytest.raises(WorkforceError):
        Population(ones, ones * 0.5, half, half, half)  # masks must be 0/1
    with pytest.raises(WorkforceError):
        Population(ones, ones, half * 3, half, half)
    with pytest.raises(WorkforceError):
        Population(ones, np.ones((3, 3)), half, half, half)


def test_worker_rows_are_views():
    pop = make_population()
    w = pop.worker(2)
    assert w.id == 2
    w.competences[0] = 99.0
    assert pop.competences[2, 0] == 99.0  # shared storage, not a copy
    with pytest.raises(WorkforceError):
        pop.worker(len(pop))


def test_population_sequence_protocol():
    pop = make_population(n=4)
    assert [w.id for w in pop] == [0, 1, 2, 3]
    assert pop[3].id == 3


def test_copy_detaches_storage():
    pop = make_population()
    dup = pop.copy()
    dup.competences[0, 0] += 1.0
    assert pop.competences[0, 0] != dup.competences[0, 0]


def test_competence_bank_is_elementwise_max():
    pop = make_population(n=12, m=5)
    profile = competence_bank(pop, core=[1, 3])
    assert np.array_equal(profile.bank, pop.competences.max(axis=0))
    assert profile.core == (1, 3)
    with pytest.raises(WorkforceError):
        competence_bank(pop, core=[5])


def test_average_competence_full_and_masked():
    pop = make_population(n=10, m=4)
    assert average_competence(pop) == pytest.approx(pop.competences.mean())
    mask = np.array([1.0, 0.0, 0.0, 1.0])
    assert average_competence(pop, mask) == pytest.approx(pop.competences[:, [0, 3]].mean())
    with pytest.raises(WorkforceError):
        average_competence(pop, np.array([1.0, 0.0]))
    with pytest.raises(WorkforceError):
        average_competence(pop, np.array([0.5, 0, 0, 1]))
    with pytest.raises(WorkforceError):
        average_competence(pop, np.zeros(4))


def test_average_competence_accepts_worker_iterables():
    pop = make_population(n=5)
    assert average_competence(list(pop)) == pytest.approx(average_competence(pop))


def test_roster_round_trip(tmp_path):
    pop = make_population(n=9, m=6, seed=4)
    p = tmp_path / "roster.txt"
    write_roster(pop, p)
    back = read_roster(p)
    assert np.array_equal(back.competences, pop.competences)
    assert np.array_equal(back.masks, pop.masks)
    assert np.array_equal(back.cognitive, pop.cognitive)
    assert np.array_equal(back.social, pop.social)
    assert np.array_equal(back.forgetting, pop.forgetting)


def test_roster_diagnostics(tmp_path):
    p = tmp_path / "r.txt"
    p.write_text("0,0.0,0.5,0.5,1.0,1\n")
    with pytest.raises(WorkforceError, match="header"):
        read_roster(p)
    p.write_text("# workers=2 competences=1\n0,0.0,0.5,0.5,1.0,1\n")
    with pytest.raises(WorkforceError, match="2 workers"):
        read_roster(p)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 1.0))
def test_mask_density_is_respected_on_average(seed, density):
    pop = init_workers(60, 8, (0, 1), density, (0, 1), (0, 1), 0.0, np.random.default_rng(seed))
    observed = pop.masks.mean()
    assert abs(observed - density) < 0.25  # loose: 480 Bernoulli draws
