import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinflow.field_grid import (LatticeField, backward_array, divergence, divergence_array, forward_array,
                                 gradient_array, laplacian, laplacian_array, load_snapshot, save_snapshot,
                                 volume_integral)
from spinflow.matrix_core import InputError


@pytest.mark.parametrize("n,h,m", [(16, 1.0, 1), (32, 0.25, 3), (9, 0.7, 2)])
def test_laplacian_of_cosine_is_discrete_eigenvalue(n, h, m):
    x = np.arange(n) * h
    k = 2 * np.pi * m / (n * h)
    f = np.cos(k * x)
    lam = -(4 / h ** 2) * np.sin(k * h / 2) ** 2
    np.testing.assert_allclose(laplacian_array(f, (h,)), lam * f, atol=1e-12)


def test_laplacian_by_loop_on_2d_grid(rng):
    v = rng.normal(size=(5, 4))
    h = (0.5, 2.0)
    want = np.zeros_like(v)
    for i in range(5):
        for j in range(4):
            want[i, j] = ((v[(i + 1) % 5, j] + v[i - 1, j] - 2 * v[i, j]) / 0.25
                          + (v[i, (j + 1) % 4] + v[i, j - 1] - 2 * v[i, j]) / 4.0)
    np.testing.assert_allclose(laplacian_array(v, h), want, atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3))
def test_backward_of_forward_is_laplacian(seed, nd):
    rng = np.random.default_rng(seed)
    shape = tuple(rng.integers(3, 7, size=nd))
    h = tuple(rng.uniform(0.3, 2.0, size=nd))
    v = rng.normal(size=shape + (2, 2))
    acc = sum(backward_array(forward_array(v, h, ax), h, ax) for ax in range(nd))
    np.testing.assert_allclose(acc, laplacian_array(v, h), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["link", "site"]))
def test_divergence_sums_to_zero(seed, centering):
    rng = np.random.default_rng(seed)
    h = (0.4, 1.3)
    fluxes = [rng.normal(size=(6, 5, 3)) for _ in h]
    div = divergence_array(fluxes, h, centering)
    np.testing.assert_allclose(div.sum(axis=(0, 1)), 0, atol=1e-12)


def test_central_gradient_of_linear_ramp_interior():
    v = np.arange(8.0) * 3.0
    g = gradient_array(v, (1.0,), 0)
    np.testing.assert_allclose(g[1:-1], 3.0)


def test_lattice_field_wrappers(rng):
    f = LatticeField(rng.normal(size=(6, 3, 3)) + 0j, (0.5,))
    assert f.kind == "matrix"
    assert f.payload_shape == (3, 3)
    np.testing.assert_array_equal(laplacian(f).values, laplacian_array(f.values, (0.5,)))
    assert volume_integral(f).shape == (3, 3)
    d = divergence([f], "link")
    np.testing.assert_array_equal(d.values, backward_array(f.values, (0.5,), 0))


@pytest.mark.parametrize("shape,spacing", [((2,), (1.0,)), ((4, 2), (1.0, 1.0))])
def test_too_small_grid_is_rejected(shape, spacing):
    with pytest.raises(InputError):
        LatticeField(np.zeros(shape), spacing)


def test_bad_arguments_are_rejected():
    with pytest.raises(InputError):
        LatticeField(np.zeros(5), (-1.0,))
    with pytest.raises(InputError):
        gradient_array(np.zeros(5), (1.0,), 1)
    with pytest.raises(InputError):
        divergence_array([np.zeros(5)], (1.0,), "corner")
    with pytest.raises(InputError):
        divergence_array([np.zeros(5)], (1.0, 1.0))


def test_snapshot_round_trip_is_bit_exact(tmp_path, rng):
    fields = {"g": rng.normal(size=(4, 5, 3, 3)) + 1j * rng.normal(size=(4, 5, 3, 3)),
              "n": rng.normal(size=(4, 5, 3))}
    p = tmp_path / "a.bin"
    save_snapshot(p, fields, (0.5, 1.5), time=1.25, step=7, extra={"case": "X"})
    header, back = load_snapshot(p)
    assert header["shape"] == [4, 5]
    assert header["spacing"] == [0.5, 1.5]
    assert header["time"] == 1.25 and header["step"] == 7
    assert header["extra"] == {"case": "X"}
    for k, v in fields.items():
        assert back[k].dtype == v.dtype
        np.testing.assert_array_equal(back[k], v)


def test_snapshot_bytes_are_deterministic(tmp_path, rng):
    fields = {"s": rng.normal(size=(8, 3))}
    save_snapshot(tmp_path / "a.bin", fields, (1.0,), time=2.0, step=3)
    save_snapshot(tmp_path / "b.bin", dict(fields), (1.0,), time=2.0, step=3)
    assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()


def test_loading_foreign_file_fails(tmp_path):
    p = tmp_path / "junk.bin"
    p.write_bytes(b"not a snapshot at all")
    with pytest.raises(InputError):
        load_snapshot(p)
