import numpy as np
import pytest

from subgsp.errors import (
    DegenerateReference,
    InvalidBandwidth,
    InvalidParams,
    ZeroNoise,
    ZeroSignal,
)
from subgsp.graphs import generate, graph_from_edges, hop_distances
from subgsp.operators import ANY_LAPLACIAN, SubgraphOperator, from_params
from subgsp.tasks import (
    TaskConfig,
    add_noise_snr,
    anomaly_score,
    bandlimited,
    compress,
    denoise,
    detect,
    detect_consecutive,
    error_ratio,
    gft,
    high_band_start,
    igft,
    perturb_one,
    si_timestamps,
)

from conftest import weighted_er


def _laplacian_op(edges, n):
    g = graph_from_edges(n, edges)
    a = g.adjacency()
    return SubgraphOperator(ANY_LAPLACIAN, np.diag(a.sum(axis=1)) - a)


def test_gft_two_path_constant():
    op = _laplacian_op([(0, 1, 1.0)], 2)
    c = gft(op, np.array([1.0, 1.0]))
    assert np.allclose(c.values, [np.sqrt(2), 0.0])


def test_gft_basis_vector_gives_unit_coordinate():
    gen = np.random.default_rng(0)
    m = gen.standard_normal((6, 6))
    op = SubgraphOperator("free", (m + m.T) / 2)
    from subgsp.operators import eigenbasis_magnitude_ordered

    _, vecs = eigenbasis_magnitude_ordered(op)
    for k in (0, 3, 5):
        c = gft(op, vecs[:, k])
        e = np.zeros(6)
        e[k] = 1.0
        assert np.allclose(c.values, e, atol=1e-12)


def test_gft_igft_round_trip_and_parseval():
    gen = np.random.default_rng(1)
    g = weighted_er(9, 0.5, seed=120)
    a = g.adjacency()
    op = SubgraphOperator(ANY_LAPLACIAN, np.diag(a.sum(axis=1)) - a)
    for _ in range(100):
        x = gen.standard_normal(9)
        c = gft(op, x)
        assert np.linalg.norm(igft(c) - x) <= 1e-9 * np.linalg.norm(x)
        assert np.isclose(np.linalg.norm(c.values), np.linalg.norm(x))


def test_compress_full_retention():
    op = _laplacian_op([(0, 1, 1.0), (1, 2, 1.0)], 3)
    x = np.array([0.3, -1.0, 2.0])
    xc, err = compress(gft(op, x), 1.0)
    assert err == 0.0
    assert np.allclose(xc, x)


def test_compress_first_mode_signal():
    op = _laplacian_op([(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)], 4)
    from subgsp.operators import eigenbasis_magnitude_ordered

    _, vecs = eigenbasis_magnitude_ordered(op)
    x = 2.5 * vecs[:, 0]
    _, err = compress(gft(op, x), 0.3)  # keep floor(1.2) = 1 coefficient
    assert err < 1e-12


def test_compress_error_monotone_in_theta():
    gen = np.random.default_rng(2)
    g = weighted_er(12, 0.4, seed=121)
    a = g.adjacency()
    op = SubgraphOperator(ANY_LAPLACIAN, np.diag(a.sum(axis=1)) - a)
    x = gen.standard_normal(12)
    c = gft(op, x)
    errs = [compress(c, th)[1] for th in (0.2, 0.4, 0.6, 0.8, 1.0)]
    assert all(errs[i] >= errs[i + 1] - 1e-12 for i in range(len(errs) - 1))


def test_compress_rejects_zero_signal():
    op = _laplacian_op([(0, 1, 1.0)], 2)
    with pytest.raises(ZeroSignal):
        compress(gft(op, np.zeros(2)), 0.5)


def test_anomaly_band_index_arithmetic():
    assert high_band_start(10, 0.35) == 4  # ceil(3.5)
    vals = np.arange(10.0)
    op = SubgraphOperator("free", np.eye(10))
    # identity basis keeps coordinates; band max over indices 4..9
    c = gft(op, vals)
    assert anomaly_score(c, 0.35) == max(abs(c.values[i]) for i in range(4, 10))


def test_detect_ratio_rule():
    assert not detect(1.0, 1.0, 1.1)
    assert detect(1.0, 1.2, 1.1)
    with pytest.raises(DegenerateReference):
        detect(0.0, 1.0, 1.1)
    with pytest.raises(InvalidParams):
        detect(1.0, 1.0, 0.9)


def test_detect_consecutive_series():
    flags = detect_consecutive([1.0, 1.0, 2.0, 1.0], 1.5)
    assert flags == [False, True, False]


def test_anomaly_ratio_scale_invariant():
    g = weighted_er(10, 0.4, seed=122)
    a = g.adjacency()
    op = SubgraphOperator(ANY_LAPLACIAN, np.diag(a.sum(axis=1)) - a)
    gen = np.random.default_rng(3)
    x = gen.standard_normal(10)
    xa = perturb_one(x, 0.7, seed=5)
    r1 = anomaly_score(gft(op, xa), 0.3) / anomaly_score(gft(op, x), 0.3)
    c = 7.3
    r2 = anomaly_score(gft(op, c * xa), 0.3) / anomaly_score(gft(op, c * x), 0.3)
    assert np.isclose(r1, r2)


def test_anomaly_detection_rate_grows_with_p():
    g = weighted_er(20, 0.25, seed=123)
    # analyze in the basis of a different graph so the reference band is
    # leakage, not exactly zero
    other = weighted_er(20, 0.25, seed=321)
    a = other.adjacency()
    op = SubgraphOperator(ANY_LAPLACIAN, np.diag(a.sum(axis=1)) - a)
    rates = []
    for p in (0.05, 1.0, 4.0):
        hits = 0
        for t in range(60):
            x = bandlimited(g, 4, seed=800 + t)
            m_ref = anomaly_score(gft(op, x), 0.35)
            xa = perturb_one(x, p, seed=900 + t)
            m_test = anomaly_score(gft(op, xa), 0.35)
            hits += m_test / m_ref > 1.1
        rates.append(hits / 60)
    assert rates[0] <= rates[1] <= rates[2]
    assert rates[2] > rates[0]


def test_denoise_identity_cases():
    g = weighted_er(10, 0.4, seed=124)
    a = g.adjacency()
    op = SubgraphOperator(ANY_LAPLACIAN, np.diag(a.sum(axis=1)) - a)
    gen = np.random.default_rng(4)
    x = gen.standard_normal(10)
    c = gft(op, x)
    assert np.allclose(denoise(c, 0.2, 1.0), x, atol=1e-12)
    assert np.allclose(denoise(c, 1.0, 0.0), x, atol=1e-12)  # empty band


def test_denoise_exact_separation():
    op = _laplacian_op([(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)], 4)
    from subgsp.operators import eigenbasis_magnitude_ordered

    _, vecs = eigenbasis_magnitude_ordered(op)
    signal = 1.5 * vecs[:, 0]          # kept band (floor(0.3*4) = 1 coefficient)
    noise = 0.4 * vecs[:, 3]           # scaled band
    c = gft(op, signal + noise)
    recovered = denoise(c, 0.3, 0.0)
    assert np.allclose(recovered, signal, atol=1e-12)
    assert error_ratio(signal, signal + noise, recovered) < 1e-12


def test_error_ratio_one_when_untouched():
    x = np.array([1.0, 2.0])
    noisy = np.array([1.5, 1.5])
    assert error_ratio(x, noisy, noisy) == 1.0
    with pytest.raises(ZeroNoise):
        error_ratio(x, x, x)


def test_bandlimited_constant_at_bandwidth_one():
    g = weighted_er(12, 0.4, seed=125)
    y = bandlimited(g, 1, seed=7)
    assert np.abs(y - y.mean()).max() < 1e-9
    with pytest.raises(InvalidBandwidth):
        bandlimited(g, 0, seed=7)
    with pytest.raises(InvalidBandwidth):
        bandlimited(g, 13, seed=7)


def test_add_noise_snr_exact():
    gen = np.random.default_rng(5)
    x = gen.standard_normal(40)
    for target in (-5.0, 0.0, 8.0):
        noisy = add_noise_snr(x, target, seed=11)
        realized = 10 * np.log10(np.linalg.norm(x) ** 2 /
                                 np.linalg.norm(noisy - x) ** 2)
        assert abs(realized - target) < 0.1
    with pytest.raises(ZeroSignal):
        add_noise_snr(np.zeros(5), 8.0, seed=1)


def test_si_rate_one_is_hop_distance():
    g = generate("lattice", {"rows": 4, "cols": 5})
    times = si_timestamps(g, seed=13, rate=1.0)
    src = int(np.argmin(times))
    assert np.array_equal(times, hop_distances(g, [src]))


def test_si_deterministic_and_complete():
    g = weighted_er(25, 0.2, seed=126)
    t1 = si_timestamps(g, seed=3, rate=0.3)
    t2 = si_timestamps(g, seed=3, rate=0.3)
    assert np.array_equal(t1, t2)
    assert (t1 >= 0).all()
    assert (t1 == 0).sum() == 1


def test_perturb_one_single_site():
    gen = np.random.default_rng(6)
    x = gen.standard_normal(15)
    xa = perturb_one(x, 0.8, seed=21)
    diff = xa - x
    hit = np.flatnonzero(diff)
    assert hit.size == 1
    assert np.isclose(abs(diff[hit[0]]), 0.8)


def test_task_config_validation():
    TaskConfig()
    with pytest.raises(InvalidParams):
        TaskConfig(theta_c=0.0)
    with pytest.raises(InvalidParams):
        TaskConfig(s_d=1.0)
    with pytest.raises(InvalidParams):
        TaskConfig(tau=1.0)
