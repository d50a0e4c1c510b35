import math

import pytest

import qens


def test_layout_counts():
    for L in range(2, 8):
        layout = qens.CodeLayout(L)
        n, m = layout.num_data_qubits, layout.num_stabilizers
        assert n == L * L + (L - 1) ** 2
        assert m == 2 * L * (L - 1)
        assert n + m == (2 * L - 1) ** 2
    with pytest.raises(ValueError):
        qens.CodeLayout(1)


def test_decoders_reproduce_syndromes():
    kit = qens.Toolkit(5)
    layout = kit.layout
    assert qens.decoder_names() == ["mwpm", "hdrg"]
    for index in range(50):
        error = qens.sample_error(layout, 0.1, seed=3, index=index)
        syndrome = qens.extract_syndrome(layout, error)
        for name in qens.decoder_names():
            recovery = kit.decode(name, syndrome)
            assert qens.extract_syndrome(layout, recovery) == syndrome
            assert qens.logical_outcome(layout, error, recovery) in "IXYZ"


def test_single_qubit_errors_are_corrected():
    kit = qens.Toolkit(3)
    n = kit.layout.num_data_qubits
    for q in range(n):
        for p in "XYZ":
            error = "I" * q + p + "I" * (n - q - 1)
            syndrome = qens.extract_syndrome(kit.layout, error)
            assert qens.logical_outcome(kit.layout, error, kit.decode("mwpm", syndrome)) == "I"


def test_contract_violation_is_raised():
    layout = qens.CodeLayout(3)
    with pytest.raises(qens.ContractViolation):
        qens.logical_outcome(layout, "X" + "I" * 12, "I" * 13)


def test_pseudo_threshold_and_curve_points():
    points = [qens.CurvePoint(0.08, 1000, 70), qens.CurvePoint(0.10, 1000, 115)]
    assert qens.pseudo_threshold(points) == pytest.approx(0.088)
    assert qens.pseudo_threshold([qens.CurvePoint(0.08, 10, 0), qens.CurvePoint(0.1, 10, 0)]) is None
    c = qens.CurvePoint(0.1, 100, 10)
    assert c.std_error == pytest.approx(0.03)
    assert len(qens.make_grid(0.04, 0.16, 0.01)) == 13
    assert [qens.oracle_selector(m) for m in (1, 2, 3)] == [0, 1, 0]


def test_pipeline_round_trip(tmp_path):
    kit = qens.Toolkit(3)
    data_path = str(tmp_path / "d.qesd")
    model_path = str(tmp_path / "m.qenn")
    stats = kit.generate_dataset(data_path, 0.1, 200, seed=4)
    assert stats["kept"] == 200
    assert 0.0 < stats["discard_fraction"] < 1.0
    data = qens.load_dataset(data_path)
    assert data["distance"] == 3 and data["decoders"] == ["mwpm", "hdrg"]
    for syndrome, mask, label in data["samples"]:
        assert len(syndrome) == 12
        assert mask in (1, 2) and label == qens.oracle_selector(mask)

    log = qens.train_model(data_path, model_path, seed=2, epochs=2, filters=4, dense=8)
    assert [e["epoch"] for e in log] == [1, 2]
    assert all(math.isfinite(e["loss"]) for e in log)

    kit.load_model(model_path)
    suite = kit.evaluate_suite(0.1, 2000, seed=5)
    assert set(suite) == {"mwpm", "hdrg", "ensemble", "oracle"}
    assert suite["oracle"].failures <= min(suite["mwpm"].failures, suite["hdrg"].failures)
    assert suite["ensemble"].failures >= suite["oracle"].failures
    assert kit.evaluate("mwpm", 0.1, 2000, seed=5).failures == suite["mwpm"].failures
    assert kit.select([0] * 12) in (0, 1)
