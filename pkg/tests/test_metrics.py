import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mpctv.errors import DimensionError, SingularityError
from mpctv.metrics import PROFILES, evaluate, mssim, snr, ssim_diff, ssim_map

pairs = st.integers(8, 20).flatmap(
    lambda n: st.tuples(
        arrays(np.float64, (n, n), elements=st.floats(0, 255, width=64)),
        arrays(np.float64, (n, n), elements=st.floats(0, 255, width=64)),
    )
)


def test_snr_hand_example():
    u = np.array([[1.0, 3], [1, 3]])
    clean = np.array([[1.0, 3], [1, 2]])
    assert snr(u, clean) == pytest.approx(6.0206, abs=1e-4)


def test_snr_identical_raises():
    with pytest.raises(SingularityError):
        snr(np.ones((3, 3)), np.ones((3, 3)))


def test_snr_constant_offset(rng):
    clean = rng.uniform(0, 255, size=(16, 16))
    c = 7.0
    want = 10 * np.log10(np.sum((clean - clean.mean()) ** 2) / (clean.size * c * c))
    assert snr(clean + c, clean) == pytest.approx(want, rel=1e-12)


def test_snr_uncentered():
    u = np.array([[1.0, 3], [1, 3]])
    clean = np.array([[1.0, 3], [1, 2]])
    assert snr(u, clean, centered=False) == pytest.approx(10 * np.log10(20.0))


def test_snr_constant_result_gives_minus_inf():
    assert snr(np.array([[5.0, 5.0]]), np.array([[1.0, 2.0]])) == -np.inf


def test_snr_shape_mismatch():
    with pytest.raises(DimensionError):
        snr(np.zeros((3, 3)), np.zeros((3, 2)))


@settings(max_examples=40, deadline=None)
@given(pairs, st.floats(-500, 500))
def test_snr_shift_invariant(ab, c):
    a, b = ab
    # near-identical pairs are dominated by cancellation in a - b
    if np.sum((a - b) ** 2) < 1e-3 * a.size or np.ptp(a) < 1e-3:
        return
    assert snr(a + c, b + c) == pytest.approx(snr(a, b), rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("window", ["box", "gaussian"])
def test_ssim_identity_is_exactly_one(rng, window):
    u = rng.uniform(0, 255, size=(20, 17))
    assert np.all(ssim_map(u, u, window=window) == 1.0)
    assert mssim(u, u, window=window) == 1.0
    assert mssim(u, u, squared=False, window=window) == 1.0


def test_ssim_near_identity_constant():
    a = np.full((10, 10), 100.0)
    assert ssim_map(a, a + 1e-6).min() == pytest.approx(1.0, abs=1e-9)


def test_ssim_black_vs_white():
    a = np.zeros((10, 10))
    b = np.full((10, 10), 255.0)
    c1 = (0.01 * 255) ** 2
    np.testing.assert_allclose(ssim_map(a, b), c1 / (255 ** 2 + c1), rtol=1e-12)
    assert ssim_map(a, b)[0, 0] == pytest.approx(1e-4, rel=0.01)


def _three_factor_oracle(a, b):
    # separate luminance, contrast and structure factors, box window, top-left anchored
    c1, c2 = (0.01 * 255) ** 2, (0.03 * 255) ** 2
    c3 = c2 / 2
    h, w = a.shape
    pa = np.pad(a, ((0, 7), (0, 7)), mode="edge")
    pb = np.pad(b, ((0, 7), (0, 7)), mode="edge")
    out = np.empty_like(a)
    for i in range(h):
        for j in range(w):
            x = pa[i:i + 8, j:j + 8]
            y = pb[i:i + 8, j:j + 8]
            mx, my = x.mean(), y.mean()
            sx, sy = x.std(), y.std()
            sxy = ((x - mx) * (y - my)).mean()
            lum = (2 * mx * my + c1) / (mx * mx + my * my + c1)
            con = (2 * sx * sy + c2) / (sx * sx + sy * sy + c2)
            struct = (sxy + c3) / (sx * sy + c3)
            out[i, j] = lum * con * struct
    return out


def test_ssim_matches_three_factor_oracle(rng):
    a = rng.uniform(0, 255, size=(12, 14))
    b = np.clip(a + rng.normal(0, 30, size=a.shape), 0, 255)
    np.testing.assert_allclose(ssim_map(a, b), _three_factor_oracle(a, b), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(pairs)
def test_ssim_symmetric_and_bounded(ab):
    a, b = ab
    for window in ("box", "gaussian"):
        m = ssim_map(a, b, window=window)
        np.testing.assert_array_equal(m, ssim_map(b, a, window=window))
        assert m.min() >= -1 - 1e-12 and m.max() <= 1 + 1e-12
    assert 0 <= mssim(a, b) <= 1


def test_ssim_too_small_for_box():
    with pytest.raises(DimensionError):
        ssim_map(np.zeros((5, 5)), np.zeros((5, 5)))
    with pytest.raises(ValueError):
        ssim_map(np.zeros((9, 9)), np.zeros((9, 9)), window="hann")


def test_ssim_diff_examples():
    a = np.full((4, 4), 1.0)
    assert not ssim_diff(a, a).any()
    np.testing.assert_array_equal(ssim_diff(a, np.full((4, 4), 0.5)), np.full((4, 4), 0.5))
    with pytest.raises(DimensionError):
        ssim_diff(a, np.zeros((3, 3)))


def test_evaluate_profiles(rng):
    a = rng.uniform(0, 255, size=(16, 16))
    b = a + rng.normal(0, 10, size=a.shape)
    for name in PROFILES:
        rep = evaluate(b, a, name)
        assert np.isfinite(rep.snr_db) and 0 <= rep.mssim <= 1
    lit = evaluate(b, a, "literal")
    assert lit.snr_db == pytest.approx(snr(b, a))
    assert lit.mssim == pytest.approx(mssim(b, a))
    with pytest.raises(ValueError):
        evaluate(b, a, "nope")


def test_noised_lena_reported_profile(lena_clean):
    from mpctv.noise import NoiseSpec, add_gaussian

    noisy = add_gaussian(lena_clean, NoiseSpec("gaussian", variance=300, seed=0))
    rep = evaluate(noisy, lena_clean)
    assert rep.snr_db == pytest.approx(17.72, abs=0.3)
    assert rep.mssim == pytest.approx(0.3918, abs=0.02)
