import struct

import numpy as np
import pytest

import ifedit


def test_schedule_and_dispatch():
    steps = ifedit.make_schedule(8)
    assert [t for t, _, _ in steps] == [1 - i / 8 for i in range(8)]
    assert ifedit.expert_for(1.0) == "high"
    assert ifedit.expert_for(0.9) == "low"
    assert ifedit.snr(0.5) == pytest.approx(1.0)


def test_dropout_and_token_steps():
    assert ifedit.dropout_indices(9, 3) == [0, 3, 6, 8]
    assert ifedit.predicted_token_steps(9, 8, 0.9, 3) == (72, 37)
    with pytest.raises(ifedit.IfeditError):
        ifedit.dropout_indices(9, 0)


def test_ifed_round_trip():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((2, 3, 4)).astype(np.float32)
    blob = ifedit.encode_ifed(a)
    assert blob[:4] == b"IFED"
    assert struct.unpack("<III", blob[4:16]) == (1, 3, 2)
    np.testing.assert_array_equal(ifedit.decode_ifed(blob), a)
    with pytest.raises(ifedit.ProtocolError):
        ifedit.decode_ifed(b"NOPE")


def test_codec_round_trip():
    rng = np.random.default_rng(1)
    codec = ifedit.Codec()
    video = rng.random((9, 8, 6, 3), dtype=np.float32)
    latent = codec.encode(video)
    assert latent.shape == (48, 3, 4, 3)
    assert np.abs(codec.decode(latent) - video).max() <= 1e-5
    with pytest.raises(ifedit.ShapeError):
        codec.encode(video[:8])


def test_posterior_mean_closed_form():
    z = np.full((1, 1, 1, 1), 0.3, np.float32)
    mu = np.full((1, 1, 1, 1), -0.2, np.float32)
    alpha, sigma, tau = 0.4, 0.6, 0.5
    expected = -0.2 + alpha * tau**2 / (alpha**2 * tau**2 + sigma**2) * (0.3 - alpha * -0.2)
    assert ifedit.posterior_mean(z, mu, alpha, sigma, tau)[0, 0, 0, 0] == pytest.approx(expected, rel=1e-6)


def test_sharpness():
    flat = np.full((8, 8, 3), 0.4, np.float32)
    assert ifedit.laplacian_score(flat) == 0.0
    noisy = np.random.default_rng(2).random((8, 8, 3), dtype=np.float32)
    index, scores = ifedit.select_sharpest([flat, noisy, flat])
    assert index == 1
    assert scores[0] == 0.0


def test_prompt_helpers():
    p = ifedit.fallback_prompt("turn the cup red")
    assert p["source"] == "fallback"
    assert "turn the cup red" in p["temporal_prompt"]
    e = ifedit.embed("turn the cup red")
    assert e.shape == (64,)
    assert np.array_equal(e, ifedit.embed("turn the cup red"))


def test_edit_end_to_end():
    image, instruction = ifedit.synthetic_case(3, 16)
    a = ifedit.edit(image, instruction)
    b = ifedit.edit(image, instruction)
    assert a["frame"].shape == (16, 16, 3)
    assert a["hash"] == b["hash"]
    assert a["edit_token_steps"] == 37 * 64
    assert a["provenance"][0] == "refine"
    assert a["ledger_csv"].startswith("step,t,expert,frames,token_steps")


def test_edit_oracle_config():
    image, _ = ifedit.synthetic_case(4, 16)
    out = ifedit.edit(image, "keep it", {"backend": {"tau": 0.0, "identity_motion": True}})
    assert np.abs(out["frame"] - image).max() <= 1e-4


def test_edit_config_errors():
    image, _ = ifedit.synthetic_case(5, 16)
    with pytest.raises(ifedit.ConfigError):
        ifedit.edit(image, "x", {"strides": 2})
    with pytest.raises(ifedit.ConfigError):
        ifedit.edit(image, "x", {"frames": 32})
    assert ifedit.default_config()["k"] == 3
