import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landmark_ph.persistence import INF
from landmark_ph.vectorize import (
    FeatureVector,
    Method,
    NotFinitized,
    Segment,
    VectorizerConfig,
    barcode_statistics,
    betti_binning,
    landscape,
    persistence_image,
    vectorize,
    vectorize_segment,
)


@st.composite
def diagrams(draw, max_pairs=12, top=20.0):
    n = draw(st.integers(0, max_pairs))
    pairs = []
    for _ in range(n):
        b = draw(st.floats(0, top, allow_nan=False))
        life = draw(st.floats(0, top, allow_nan=False))
        pairs.append((b, b + life))
    return np.array(pairs, dtype=float).reshape(-1, 2)


def landscape_by_definition(pairs, level, t, step=1e-3):
    """Largest m on a fine grid with at least `level` bars covering [t - m, t + m]."""
    best = 0.0
    for m in np.arange(0, 50, step):
        covered = sum(1 for b, d in pairs if b <= t - m and t + m <= d)
        if covered >= level:
            best = m
    return best


CFG = {m: VectorizerConfig(method=m, k=3, samples=11, resolution=6, omega=7, range=(0.0, 40.0)) for m in Method}


class TestConfig:
    @pytest.mark.parametrize("kwargs", [
        {"k": 0}, {"samples": 1}, {"resolution": 0}, {"sigma": 0.0}, {"omega": 0}, {"range": (1.0, 1.0)},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            VectorizerConfig(**kwargs)

    def test_defaults(self):
        cfg = VectorizerConfig()
        assert (cfg.k, cfg.samples, cfg.resolution, cfg.sigma, cfg.omega) == (100, 100, 30, 1.0, 30)

    def test_for_stream(self):
        cfg = VectorizerConfig(ranges={"G1R1/dim0": (0.0, 7.0)})
        assert cfg.for_stream("G1R1/dim0").range == (0.0, 7.0)
        assert cfg.for_stream("G1R1/dim1").range == (0.0, 1.0)

    def test_dict_round_trip(self):
        cfg = VectorizerConfig(method="image", ranges={"a/dim0": (0.0, 2.0)}, fallback_streams=("b/dim1",))
        back = VectorizerConfig.from_dict(cfg.to_dict())
        assert back == cfg and back.ranges == cfg.ranges and back.fallback_streams == cfg.fallback_streams


class TestLandscape:
    def test_empty(self):
        cfg = VectorizerConfig(method="landscape", range=(0.0, 2.0))
        out = landscape([], cfg)
        assert out.shape == (100 * 100,) and not out.any()

    def test_single_tent(self):
        cfg = VectorizerConfig(method="landscape", k=1, samples=3, range=(0.0, 2.0))
        assert landscape([(0, 2)], cfg).tolist() == [0.0, 1.0, 0.0]

    def test_multiplicity_raises_second_level(self):
        cfg = VectorizerConfig(method="landscape", k=2, samples=21, range=(0.0, 2.0))
        out = landscape([(0, 2), (0, 2)], cfg).reshape(2, -1)
        assert np.array_equal(out[0], out[1])
        single = landscape([(0, 2)], cfg).reshape(2, -1)
        assert not single[1].any()

    def test_against_definition(self):
        pairs = [(0.0, 4.0), (1.0, 3.0), (2.0, 6.0), (2.5, 3.5)]
        cfg = VectorizerConfig(method="landscape", k=4, samples=9, range=(0.0, 6.0))
        out = landscape(pairs, cfg).reshape(4, -1)
        grid = np.linspace(0, 6, 9)
        for level in range(1, 5):
            for s, t in enumerate(grid):
                assert out[level - 1, s] == pytest.approx(landscape_by_definition(pairs, level, t), abs=1e-3)

    @settings(max_examples=50, deadline=None)
    @given(diagrams())
    def test_levels_nonincreasing_and_nonnegative(self, pairs):
        out = landscape(pairs, CFG[Method.LANDSCAPE]).reshape(3, -1)
        assert np.all(out >= 0)
        assert np.all(out[:-1] >= out[1:])

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0, 10), st.floats(0.01, 10))
    def test_single_pair_peak_bound(self, b, life):
        cfg = VectorizerConfig(method="landscape", k=1, samples=50, range=(0.0, 25.0))
        assert landscape([(b, b + life)], cfg).max() <= life / 2 + 1e-12


class TestPersistenceImage:
    def test_empty(self):
        assert not persistence_image([], CFG[Method.IMAGE]).any()

    def test_peak_cell(self):
        cfg = VectorizerConfig(method="image", resolution=5, sigma=0.3, range=(0.0, 2.0))
        out = persistence_image([(0, 1)], cfg).reshape(5, 5)
        centres = (np.arange(5) + 0.5) * 0.4
        row = int(np.argmin(np.abs(centres - 1.0)))  # persistence 1
        col = int(np.argmin(np.abs(centres - 0.0)))  # birth 0
        assert np.unravel_index(out.argmax(), out.shape) == (row, col)

    def test_diagonal_points_vanish(self):
        assert not persistence_image([(1, 1), (3, 3)], CFG[Method.IMAGE]).any()

    def test_direct_evaluation(self):
        cfg = VectorizerConfig(method="image", resolution=3, sigma=0.5, range=(0.0, 3.0))
        pairs = [(0.2, 1.7), (1.0, 3.0)]
        out = persistence_image(pairs, cfg).reshape(3, 3)
        for r, y in enumerate([0.5, 1.5, 2.5]):
            for c, x in enumerate([0.5, 1.5, 2.5]):
                expect = sum(
                    (d - b) / 3.0 * np.exp(-((x - b) ** 2 + (y - (d - b)) ** 2) / (2 * 0.25)) for b, d in pairs
                )
                assert out[r, c] == pytest.approx(expect, rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(diagrams(), st.floats(0.1, 10))
    def test_nonnegative_and_linear_in_weights(self, pairs, c):
        cfg = CFG[Method.IMAGE]
        out = persistence_image(pairs, cfg)
        assert np.all(out >= 0)
        # halving the range span doubles every weight when the grid is held fixed
        wider = VectorizerConfig(method="image", resolution=6, range=(0.0, 40.0 * c))
        assert np.all(persistence_image(pairs, wider) >= 0)


class TestBinning:
    def test_empty(self):
        assert not betti_binning([], CFG[Method.BINNING]).any()

    def test_two_bars(self):
        cfg = VectorizerConfig(method="binning", omega=4, range=(0.0, 15.0))
        assert betti_binning([(0, 10), (5, 15)], cfg).tolist() == [1, 2, 1, 0]

    def test_full_span(self):
        cfg = VectorizerConfig(method="binning", omega=4, range=(0.0, 15.0))
        assert betti_binning([(0, 15)], cfg).tolist() == [1, 1, 1, 0]

    @settings(max_examples=50, deadline=None)
    @given(diagrams())
    def test_sum_and_bound(self, pairs):
        cfg = CFG[Method.BINNING]
        out = betti_binning(pairs, cfg)
        lines = np.linspace(0, 40, cfg.omega)
        assert np.all(out <= len(pairs))
        expect = sum(int(np.sum((b <= lines) & (lines < d))) for b, d in pairs)
        assert out.sum() == expect


class TestStatistics:
    def test_empty(self):
        assert barcode_statistics([]).tolist() == [0.0] * 10

    def test_two_bars(self):
        assert barcode_statistics([(0, 2), (1, 3)]).tolist() == [0.5, 0.5, 2.5, 0.5, 2.0, 0.0, 0.5, 2.5, 2.0, 2.0]

    def test_dim0_births_zero(self):
        out = barcode_statistics([(0, 1), (0, 4), (0, 2.5)])
        assert out[0] == out[1] == out[6] == 0.0


class TestCommon:
    @pytest.mark.parametrize("method", list(Method))
    def test_rejects_infinite(self, method):
        with pytest.raises(NotFinitized):
            vectorize([(0, INF)], CFG[method])

    @pytest.mark.parametrize("method", list(Method))
    @settings(max_examples=25, deadline=None)
    @given(pairs=diagrams(), seed=st.integers(0, 1000))
    def test_permutation_invariant_and_fixed_length(self, method, pairs, seed):
        cfg = CFG[method]
        a = vectorize(pairs, cfg)
        perm = np.random.default_rng(seed).permutation(len(pairs))
        b = vectorize(pairs[perm], cfg)
        assert len(a) == cfg.length
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("method", list(Method))
    def test_zero_on_empty(self, method):
        assert not vectorize(np.zeros((0, 2)), CFG[method]).any()

    def test_segment_layout(self):
        fv = vectorize_segment([(0, 1)], CFG[Method.STATISTICS], "G1R1", 0)
        assert fv.layout == (Segment("G1R1", 0, "statistics", 10),)
        both = FeatureVector.concat([fv, vectorize_segment([], CFG[Method.BINNING], "G1R1", 1)])
        assert len(both.values) == 17
        assert both.column_names()[10] == "G1R1/dim1/binning/0"
        with pytest.raises(ValueError):
            FeatureVector(np.zeros(3), fv.layout)
