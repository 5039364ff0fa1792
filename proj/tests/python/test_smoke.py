import json
import os

import numpy as np
import pytest

import ifmix

DATA_DIR = os.environ.get("IFMIX_DATA_DIR", "")
HAVE_MUTAG = os.path.exists(os.path.join(DATA_DIR, "MUTAG", "MUTAG_A.txt"))


def two_graphs():
    v1 = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
    e1 = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)
    v2 = np.array([[0.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    e2 = np.array([[0, 0, 1], [0, 0, 1], [1, 1, 0]], dtype=float)
    return ifmix.Graph(v1, e1), ifmix.Graph(v2, e2)


def test_mix_and_recover_round_trip():
    a, b = two_graphs()
    mixed = ifmix.mix_pair(a, b, 0.7)
    assert np.allclose(mixed.weights, 0.7 * a.weights + 0.3 * b.weights)
    basis = ifmix.feature_vocabulary([a, b])
    rec = ifmix.recover_pair(mixed, basis)
    # Recovery reports the ordering with the smaller weight first.
    assert rec.lam == pytest.approx(0.3, abs=1e-9)
    assert rec.a == b and rec.b == a


def test_invalid_graph_rejected():
    with pytest.raises(ValueError):
        ifmix.Graph(np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_labels_and_beta():
    y = ifmix.mix_labels(np.array([1.0, 0.0]), np.array([0.0, 1.0]), 0.25)
    assert np.allclose(y, [0.25, 0.75])
    p = ifmix.BetaParams(2.0, 2.0)
    assert ifmix.beta_pdf(p, 0.5) == pytest.approx(1.5)
    draws = ifmix.sample_lambda(p, seed=3, count=5)
    assert draws == ifmix.sample_lambda(p, seed=3, count=5)
    assert all(0.0 < x < 1.0 for x in draws)
    with pytest.raises(ValueError):
        ifmix.BetaParams(0.0, 1.0)


def test_independence():
    ok, rank = ifmix.check_linear_independence(np.eye(3))
    assert ok and rank == 3
    ok, rank = ifmix.check_linear_independence(np.array([[1.0, 1.0], [2.0, 2.0]]))
    assert not ok and rank == 1


def test_cli_usage_error():
    code, _, err = ifmix.run_command(["no-such-command"])
    assert code == 2
    assert err


@pytest.mark.skipif(not HAVE_MUTAG, reason="MUTAG not available")
def test_mutag_stats_and_audit():
    ds = ifmix.load_dataset(os.path.join(DATA_DIR, "MUTAG"), "MUTAG")
    assert len(ds) == 188
    stats = ifmix.dataset_stats(ds)
    assert stats["num_classes"] == 2
    assert stats["matches_reference"]
    report = ifmix.intrusion_audit(ds, 50, ifmix.BetaParams(20.0, 1.0), seed=1)
    assert report.assumption_satisfied
    assert report.collisions == 0 and report.recovery_failures == 0
    assert json.loads(report.to_json())["trials"] == 50
