import itertools

import numpy as np
import pytest

from qotomo.core import partial_trace, random_density, stokes_from_density, trace_distance
from qotomo.exact import IncompleteScheduleError, full_schedule, setting_matches, sign_pattern
from qotomo.measurement import exact_dataset, normalize_counts
from qotomo.qot import (
    Divide,
    all_pairs,
    generate_divides,
    pair_records,
    pair_stokes,
    qot_schedule,
    reconstruct_pairs,
)
from qotomo.source import NoiseSpec, ghz_state, simulate_dataset
from qotomo.core import pure_density


def test_divides_n4():
    groups = [d.groups() for d in generate_divides(4)]
    assert groups == [((0, 2), (1, 3)), ((0, 1), (2, 3))]


def test_divides_n2():
    assert [d.groups() for d in generate_divides(2)] == [((0,), (1,))]


@pytest.mark.parametrize("n", range(2, 9))
def test_every_pair_separated(n):
    divides = generate_divides(n)
    assert len(divides) == int(np.ceil(np.log2(n)))
    for a, b in itertools.combinations(range(n), 2):
        assert any(d.separates(a, b) for d in divides)


@pytest.mark.parametrize("n", range(2, 9))
def test_schedule_count(n):
    sched = qot_schedule(n)
    assert len(sched) == 3 + 6 * int(np.ceil(np.log2(n)))
    assert len(set(sched)) == len(sched)


def test_schedule_examples():
    assert len(qot_schedule(4)) == 15
    assert len(qot_schedule(6)) == 21
    assert sorted(qot_schedule(2)) == sorted(full_schedule(2))
    # relabeling of {X,X,Y,Y} / {X,Y,X,Y}: both patterns appear
    s4 = set(qot_schedule(4))
    assert {"XYXY", "XXYY"} <= s4


def test_divide_and_schedule_errors():
    with pytest.raises(ValueError):
        generate_divides(1)
    with pytest.raises(ValueError):
        qot_schedule(1)
    with pytest.raises(ValueError):
        Divide((0, 0, 0))


def test_pair_stokes_ghz(ghz4):
    data = exact_dataset(ghz4, qot_schedule(4).settings)
    assert pair_stokes(data, (0, 1))[3, 3] == pytest.approx(-1, abs=1e-10)
    assert pair_stokes(data, (0, 2))[3, 3] == pytest.approx(1, abs=1e-10)
    for pair in all_pairs(4):
        s = pair_stokes(data, pair)
        assert s[3, 0] == pytest.approx(0, abs=1e-10) and s[0, 3] == pytest.approx(0, abs=1e-10)


def test_pair_stokes_rejects_incomplete(ghz4):
    data = exact_dataset(ghz4, qot_schedule(4).settings[:-1])
    with pytest.raises(IncompleteScheduleError):
        pair_stokes(data, (0, 1))
    with pytest.raises(ValueError):
        pair_stokes(exact_dataset(ghz4, qot_schedule(4).settings), (2, 2))


def test_reconstruct_pairs_ghz(ghz4):
    pairs = reconstruct_pairs(exact_dataset(ghz4, qot_schedule(4).settings))
    assert sorted(pairs) == all_pairs(4)
    for p, rec in pairs.items():
        assert np.max(np.abs(rec.raw - partial_trace(ghz4, p))) < 1e-6


def test_reconstruct_pairs_random_states(rng):
    for _ in range(5):
        rho = random_density(4, rng)
        pairs = reconstruct_pairs(exact_dataset(rho, qot_schedule(4).settings))
        for p, rec in pairs.items():
            assert trace_distance(rec.raw, partial_trace(rho, p)) < 1e-6


def test_qualifying_settings_agree(rng):
    rho = random_density(5, rng)
    sched = qot_schedule(5).settings
    data = exact_dataset(rho, sched)
    for a, b in all_pairs(5):
        for i1, i2 in itertools.product(range(1, 4), repeat=2):
            word = [0] * 5
            word[a], word[b] = i1, i2
            vals = [sign_pattern(word) @ normalize_counts(data[s]) for s in sched
                    if setting_matches(word, s)]
            assert vals and np.ptp(vals) < 1e-10


def test_ghz6_fifteen_pairs():
    rho = pure_density(ghz_state(6))
    data = simulate_dataset(rho, qot_schedule(6).settings, NoiseSpec(700, 0.0, 2))
    assert len(reconstruct_pairs(data)) == 15


def test_pair_records_marginalize(ghz4):
    data = simulate_dataset(ghz4, qot_schedule(4).settings, NoiseSpec(1000, 0.0, 4))
    recs = pair_records(data, (1, 3))
    assert len(recs) == 15
    for rec, s in zip(recs, qot_schedule(4).settings):
        assert rec.setting == s[1] + s[3] and rec.total == 1000


def test_pair_stokes_matches_stokes_of_partial_trace(rng):
    rho = random_density(4, rng)
    data = exact_dataset(rho, qot_schedule(4).settings)
    for p in all_pairs(4):
        assert np.allclose(pair_stokes(data, p), stokes_from_density(partial_trace(rho, p)), atol=1e-9)
