"""Smoke tests for the python module: model construction, the main
transforms, sampling determinism, and file round trips."""

import json
import os
import subprocess

import numpy as np
import pytest

import cmseq


def unit_random_walk():
    m = cmseq.MarkovModel(3, 1)
    one = np.eye(1)
    for k in (1, 2, 3):
        m.set_transition(k, one)
    for k in (0, 1, 2, 3):
        m.set_noise(k, one)
    return m


def test_induce_matches_hand_values():
    induced = cmseq.induce_cml_from_markov(unit_random_walk())
    assert induced.transition(1)[0, 0] == pytest.approx(2 / 3, abs=1e-13)
    assert induced.coupling(1)[0, 0] == pytest.approx(1 / 3, abs=1e-13)
    assert induced.noise(1)[0, 0] == pytest.approx(2 / 3, abs=1e-13)
    assert induced.transition(2)[0, 0] == pytest.approx(0.5, abs=1e-13)
    assert induced.boundary is None


def test_boundary_and_classification():
    m = unit_random_walk()
    induced = cmseq.induce_cml_from_markov(m)
    boundary = cmseq.markov_matching_boundary(m)
    assert boundary.cross_gain[0, 0] == pytest.approx(0.25)
    assert boundary.other_end_cov[0, 0] == pytest.approx(0.75)
    assert boundary.endpoint_cov[0, 0] == pytest.approx(4.0)

    induced.boundary = boundary
    assert cmseq.check_reciprocal_condition(induced).holds
    assert cmseq.check_markov_condition(induced).holds

    rep = cmseq.decompose_to_representation(induced)
    assert [g[0, 0] for g in rep.gamma] == pytest.approx([0.25, 0.5, 0.75])
    assert cmseq.classify_representation(rep).sequence_class == cmseq.SequenceClass.MARKOV

    precision = cmseq.assemble_precision(induced)
    cov = np.linalg.inv(precision.dense)
    expected = np.minimum.outer(np.arange(4), np.arange(4)) + 1.0
    assert np.allclose(cov, expected, atol=1e-10)

    report = cmseq.classify_sequence(cmseq.BlockMatrix(expected, 1))
    assert report.is_markov and report.is_reciprocal and report.windows_consistent


def test_recover_round_trip():
    m = unit_random_walk()
    induced = cmseq.induce_cml_from_markov(m)
    induced.boundary = cmseq.markov_matching_boundary(m)
    recovered = cmseq.recover_markov_from_reciprocal_cml(induced)
    for k in (1, 2, 3):
        assert recovered.transition(k)[0, 0] == pytest.approx(1.0, abs=1e-12)
        assert recovered.noise(k)[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_errors_surface_as_python_exceptions():
    bad = np.array([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(cmseq.NotPositiveDefinite):
        cmseq.PdFactor(bad)


def test_sampling_is_deterministic():
    m = unit_random_walk()
    a = cmseq.sample_trajectories(m, 256, 9)
    b = cmseq.sample_trajectories(m, 256, 9)
    assert a.model_digest == b.model_digest
    assert np.array_equal(a.data, b.data)
    c = cmseq.sample_trajectories(m, 256, 10)
    assert not np.array_equal(a.data, c.data)

    emp = cmseq.empirical_covariance(cmseq.sample_trajectories(m, 50000, 4))
    assert emp.dense[3, 3] == pytest.approx(4.0, abs=0.15)


def test_destination_directed_generation():
    joint = cmseq.EndpointJoint(np.eye(1), 0.01 * np.eye(1), np.zeros((1, 1)))
    model, batch = cmseq.destination_directed_generate(unit_random_walk(), joint, 2000, 0)
    assert model.boundary.endpoint_cov[0, 0] == pytest.approx(0.01)
    assert batch.data.shape == (2000, 4)
    assert np.var(batch.data[:, 3]) == pytest.approx(0.01, rel=0.2)


def test_file_round_trip(tmp_path):
    path = str(tmp_path / "rw3.json")
    cmseq.save_model(unit_random_walk(), path)
    loaded = cmseq.load_model(path)
    assert isinstance(loaded, cmseq.MarkovModel)
    assert loaded.horizon == 3
    with pytest.raises(cmseq.ParseError):
        cmseq.load_model(str(tmp_path / "missing.json"))


def test_in_process_cli(tmp_path):
    model_path = str(tmp_path / "rw3.json")
    out_path = str(tmp_path / "cml.json")
    cmseq.save_model(unit_random_walk(), model_path)
    status, _, _ = cmseq.cli_run(["induce", "--in", model_path, "--out", out_path])
    assert status == 0
    induced = cmseq.load_model(out_path)
    assert induced.coupling(2)[0, 0] == pytest.approx(0.5, abs=1e-13)

    status, _, err = cmseq.cli_run(["induce", "--in", str(tmp_path / "nope.json"), "--out", out_path])
    assert status == 1 and err


@pytest.mark.skipif("CMSEQ_CLI" not in os.environ, reason="CLI binary path not provided")
def test_cli_binary(tmp_path):
    model_path = tmp_path / "rw3.json"
    cmseq.save_model(unit_random_walk(), str(model_path))
    result = subprocess.run(
        [os.environ["CMSEQ_CLI"], "check", "--in", str(model_path)],
        capture_output=True, text=True, check=True,
    )
    report = json.loads(result.stdout)
    assert report["valid"] is True
