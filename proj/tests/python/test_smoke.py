import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import gausschan as gc

DATA = Path(os.environ.get("GAUSSCHAN_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def test_attenuation_semigroup():
    g = gc.Generator(gc.symplectic_form(1), np.eye(2), np.zeros((2, 2)))
    c = gc.evolve(g, 1.0)
    assert np.allclose(c.x, math.exp(-1) * np.eye(2), atol=1e-12)
    assert np.allclose(c.y, (1 - math.exp(-2)) * np.eye(2), atol=1e-12)
    assert np.allclose(gc.simple_form_anchor(g), np.eye(2), atol=1e-12)


def test_compose_and_cp():
    a = gc.GaussianChannel.beam_splitter(1, 0.3)
    b = gc.GaussianChannel.beam_splitter(1, 0.6)
    c = a @ b
    assert np.allclose(c.x, math.sqrt(0.18) * np.eye(2))
    assert gc.cp_check(c.x, c.y)
    assert not gc.cp_check(np.eye(2), -0.1 * np.eye(2))


def test_errors_carry_kind():
    with pytest.raises(gc.GausschanError) as info:
        gc.GaussianChannel(np.eye(2), -0.1 * np.eye(2))
    assert info.value.kind == "NotCP"
    with pytest.raises(ValueError):
        gc.divide(gc.GaussianChannel.identity(1))


def test_divide_and_p_map():
    d = gc.divide(gc.GaussianChannel.beam_splitter(1, 0.36), epsilon=0.5)
    assert d["branch"] == "positive-split"
    back = d["left"] @ d["right"]
    assert np.allclose(back.y, 0.64 * np.eye(2))
    p = gc.p_map(gc.GaussianChannel.beam_splitter(1, 0.4))
    c = gc.channel_from_positive(p)
    assert np.allclose(gc.p_map(c), p, atol=1e-12)


def test_embeddability_and_gauge():
    assert gc.embeddable_x(np.diag([-1.0, -2.0]))["status"] == "no"
    v = gc.embeddable_x(np.diag([2.0, 0.5]))
    assert v["status"] == "yes" and v["witness"] is not None
    cls = gc.gauge_classify(np.array([[0.8]]), np.array([[0.36]]))
    assert cls["case"] == "contractive-with-invariant-state"
    assert abs(cls["invariant_cov"][0, 0] - 1.0) < 1e-12


def test_cli_reports():
    report, code = gc.cli.classify(str(DATA / "channels" / "mirror.json"))
    assert code == 0
    assert json.loads(report)["infinitesimal_divisibility"]["necessary_condition"] is False
    report, code = gc.cli.check(str(DATA / "channels" / "invalid_negative_noise.json"))
    assert code == 1
    _, code = gc.cli.check(str(DATA / "channels" / "missing.json"))
    assert code == 2
    report, code = gc.cli.semigroup(str(DATA / "generators" / "squeezing.json"), [1.0])
    assert json.loads(report)["simple_form"]["exists"] is False
