"""Seeded generators: shapes, formulas, determinism."""

import itertools

import numpy as np
import pytest

from figs.synthetic import KINDS, GenSpec, generate, regression_function


def test_default_widths_and_names():
    for kind, d in [("toy", 3), ("linear", 50), ("single_interaction", 50),
                    ("poly_sum", 50), ("lss", 50), ("friedman1", 10)]:
        data, clean = generate(GenSpec(kind=kind, n=25, seed=1))
        assert data.features.shape == (25, d)
        assert data.feature_names == [f"x{j}" for j in range(d)]
        assert clean.shape == (25,)


def test_same_spec_is_byte_identical():
    a, ca = generate(GenSpec(kind="friedman1", n=100, noise_sd=0.3, seed=9))
    b, cb = generate(GenSpec(kind="friedman1", n=100, noise_sd=0.3, seed=9))
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.targets, b.targets)
    assert np.array_equal(ca, cb)
    c, _ = generate(GenSpec(kind="friedman1", n=100, noise_sd=0.3, seed=10))
    assert not np.array_equal(a.targets, c.targets)


def test_feature_ranges():
    toy, _ = generate(GenSpec(kind="toy", n=500, seed=2))
    assert toy.features.min() >= -1.0 and toy.features.max() <= 1.0
    assert toy.features.min() < 0.0  # genuinely signed
    box, _ = generate(GenSpec(kind="lss", n=500, seed=2))
    assert box.features.min() >= 0.0 and box.features.max() <= 1.0


def test_toy_formula():
    x = np.array([
        [0.5, 0.5, 0.5],    # both terms
        [0.5, -0.5, 0.5],   # first term only
        [-0.5, 0.5, 0.5],   # second term only
        [-0.5, -0.5, -0.5], # neither
    ])
    assert regression_function("toy", x).tolist() == [2.0, 1.0, 1.0, 0.0]


def test_balanced_toy_enumerates_corners():
    data, clean = generate(GenSpec(kind="toy", n=80, seed=5, balanced=True))
    assert set(np.unique(data.features)) == {-0.5, 0.5}
    patterns, counts = np.unique(data.features, axis=0, return_counts=True)
    assert patterns.shape == (8, 3)
    assert counts.tolist() == [10] * 8
    # target takes only the three step levels
    assert set(np.unique(clean)) == {0.0, 1.0, 2.0}


def test_balanced_toy_requires_multiple_of_eight():
    with pytest.raises(ValueError):
        generate(GenSpec(kind="toy", n=100, seed=0, balanced=True))


def test_linear_formula_and_moments():
    data, clean = generate(GenSpec(kind="linear", n=200_000, d=25, seed=3))
    assert np.array_equal(clean, data.features[:, :20].sum(axis=1))
    # sum of 20 independent U(0,1): mean 10, variance 20/12
    assert float(clean.mean()) == pytest.approx(10.0, rel=0.01)
    assert float(clean.var()) == pytest.approx(20.0 / 12.0, rel=0.01)
    assert regression_function("linear", np.full((1, 25), 0.5))[0] == 10.0


def test_single_interaction_formula():
    x = np.full((3, 10), 0.9)
    x[1, 3] = 0.1   # at the boundary: strict > fails
    x[2, 7] = 0.05
    assert regression_function("single_interaction", x).tolist() == [1.0, 0.0, 0.0]


def test_poly_sum_formula():
    rng = np.random.default_rng(0)
    x = rng.random((50, 15))
    want = sum(x[:, 3 * k] * x[:, 3 * k + 1] * x[:, 3 * k + 2] for k in range(5))
    assert np.allclose(regression_function("poly_sum", x), want, atol=1e-15)


def test_lss_formula():
    rng = np.random.default_rng(1)
    x = rng.random((50, 15))
    want = sum(
        (x[:, 3 * k] > 0.5) & (x[:, 3 * k + 1] > 0.5) & (x[:, 3 * k + 2] > 0.5)
        for k in range(5)
    ).astype(float)
    assert np.array_equal(regression_function("lss", x), want)


def test_friedman1_formula():
    rng = np.random.default_rng(2)
    x = rng.random((40, 10))
    want = (10.0 * np.sin(np.pi * x[:, 0] * x[:, 1])
            + 20.0 * (x[:, 2] - 0.5) ** 2 + 10.0 * x[:, 3] + 5.0 * x[:, 4])
    assert np.array_equal(regression_function("friedman1", x), want)
    # features beyond the first five are pure noise
    x2 = x.copy()
    x2[:, 5:] = 0.0
    assert np.array_equal(regression_function("friedman1", x2), want)


def test_block_additive_formula_and_width():
    components = (((0,), lambda z: 2.0 * z[:, 0]),
                  ((2, 3), lambda z: z[:, 0] * z[:, 1]))
    spec = GenSpec(kind="block_additive", n=30, seed=4, components=components)
    assert spec.resolved_d() == 4
    data, clean = generate(spec)
    assert data.features.shape == (30, 4)
    want = 2.0 * data.features[:, 0] + data.features[:, 2] * data.features[:, 3]
    assert np.allclose(clean, want, atol=1e-15)


def test_noise_is_additive_with_stated_scale():
    spec = GenSpec(kind="friedman1", n=100_000, noise_sd=0.7, seed=11)
    data, clean = generate(spec)
    noise = data.targets - clean
    assert float(noise.std()) == pytest.approx(0.7, rel=0.02)
    assert float(np.abs(noise.mean())) < 0.01
    quiet, clean2 = generate(GenSpec(kind="friedman1", n=100, seed=11))
    assert np.array_equal(quiet.targets, clean2)


def test_validation_errors():
    with pytest.raises(ValueError):
        generate(GenSpec(kind="mystery", n=10))
    with pytest.raises(ValueError):
        generate(GenSpec(kind="toy", n=0))
    with pytest.raises(ValueError):
        generate(GenSpec(kind="linear", n=10, noise_sd=-1.0))
    with pytest.raises(ValueError):
        generate(GenSpec(kind="lss", n=10, d=10))  # below the minimum width
    with pytest.raises(ValueError):
        generate(GenSpec(kind="block_additive", n=10, d=3))
    with pytest.raises(ValueError):
        generate(GenSpec(kind="block_additive", n=10, d=2,
                         components=(((5,), lambda z: z[:, 0]),)))
    with pytest.raises(ValueError):
        regression_function("toy", np.zeros(3))


def test_spec_serialization():
    spec = GenSpec(kind="lss", n=50, noise_sd=0.2, seed=8)
    doc = spec.to_dict()
    assert doc == {"kind": "lss", "n": 50, "d": 50, "noise_sd": 0.2,
                   "seed": 8, "balanced": False}
    assert GenSpec(**doc).to_dict() == doc
    with pytest.raises(ValueError):
        GenSpec(kind="block_additive", n=10,
                components=(((0,), lambda z: z[:, 0]),)).to_dict()


def test_every_kind_is_generable():
    for kind in KINDS:
        if kind == "block_additive":
            continue
        n = 16 if kind == "toy" else 20
        data, clean = generate(GenSpec(kind=kind, n=n, seed=0))
        assert data.n_samples == n
        assert np.all(np.isfinite(clean))
