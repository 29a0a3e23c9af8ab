import itertools
import math

import numpy as np
import pytest

from ptlab.errors import ArgumentError, ConfigError
from ptlab.matrices import (
    ComplexMatrix,
    EnsembleSpec,
    WordSpec,
    apply_symbol,
    dump_matrix,
    haar_from_ginibre,
    load_matrix,
    mc_word_moment,
    mc_word_moments,
    sample,
    sample_gue,
    sample_haar_unitary,
    sample_wishart,
    stream,
    trace_cumulant_estimate,
    unitary_invariance_probe,
    word_trace,
    word_trace_sigma,
)
from ptlab.partitions import Permutation


def psi(a, b_, d):
    # 1-based block index pair to 0-based row index
    return (a - 1) * d + (b_ - 1)


def symbol_oracle(A, b, d, symbol):
    out = np.empty_like(A)
    for a1, b1, a2, b2 in itertools.product(range(1, b + 1), range(1, d + 1), range(1, b + 1), range(1, d + 1)):
        src = {
            "I": (psi(a1, b1, d), psi(a2, b2, d)),
            "G": (psi(a1, b2, d), psi(a2, b1, d)),
            "L": (psi(a2, b1, d), psi(a1, b2, d)),
            "T": (psi(a2, b2, d), psi(a1, b1, d)),
        }[symbol]
        out[psi(a1, b1, d), psi(a2, b2, d)] = A[src]
    return out


def random_matrix(b, d, seed=0):
    rng = np.random.default_rng(seed)
    M = b * d
    return ComplexMatrix(rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M)), b, d)


# --- symbols ----------------------------------------------------------------


@pytest.mark.parametrize("b,d", [(2, 2), (2, 3), (3, 2), (1, 4)])
@pytest.mark.parametrize("symbol", "IGLT")
def test_symbol_entry_rule(b, d, symbol):
    A = random_matrix(b, d, 1)
    assert np.array_equal(apply_symbol(A, symbol).data, symbol_oracle(A.data, b, d, symbol))


def test_gamma_small_example():
    A = np.arange(16, dtype=complex).reshape(4, 4)
    G = apply_symbol(A, "G", b=2, d=2)
    assert G[0, 1] == A[1, 0]
    # each 2x2 inner block is transposed in place
    for i in (0, 2):
        for j in (0, 2):
            assert np.array_equal(G[i:i + 2, j:j + 2], A[i:i + 2, j:j + 2].T)


def test_klein_four_group():
    A = random_matrix(3, 2, 2)
    compose = {("G", "G"): "I", ("L", "L"): "I", ("G", "L"): "T", ("L", "G"): "T", ("T", "T"): "I",
               ("G", "T"): "L", ("T", "G"): "L"}
    for (x, y), z in compose.items():
        assert np.array_equal(apply_symbol(apply_symbol(A, x), y).data, apply_symbol(A, z).data)


def test_adjoint_commutes_with_symbols():
    A = random_matrix(2, 3, 3)
    star = A.with_data(A.data.conj().T)
    for s in "IGLT":
        assert np.array_equal(apply_symbol(A, s, adjoint=True).data, apply_symbol(star, s).data)
    assert np.isclose(np.trace(apply_symbol(A, "G").data), np.trace(A.data), rtol=0, atol=1e-12)


def test_symbol_errors():
    with pytest.raises(ArgumentError):
        apply_symbol(np.eye(4), "G")
    with pytest.raises(ArgumentError):
        apply_symbol(np.eye(4), "G", b=3, d=2)
    with pytest.raises(ArgumentError):
        ComplexMatrix(np.eye(3), 2, 2)
    with pytest.raises(ArgumentError):
        ComplexMatrix(np.full((1, 1), np.nan), 1, 1)


def test_matrix_is_read_only():
    A = random_matrix(2, 2)
    with pytest.raises(ValueError):
        A.data[0, 0] = 1


# --- words and traces -----------------------------------------------------


def test_word_parse():
    w = WordSpec.parse("A:G A:G* B:T A*")
    assert [str(x) for x in w.letters] == ["A:G", "A:G*", "B:T", "A*"]
    assert w.as_tuples()[1] == ("A", "G", "*")
    assert w.matrices() == ["A", "B"]
    assert WordSpec.parse("A:Γ").letters[0].symbol == "G"
    with pytest.raises(ArgumentError):
        WordSpec.parse("")
    with pytest.raises(ArgumentError):
        WordSpec.parse(":G")


def test_word_trace_examples():
    b = d = 3
    eye = ComplexMatrix(np.eye(9), b, d)
    assert word_trace("A", {"A": eye}) == 1
    A = random_matrix(b, d, 4)
    mats = {"A": A}
    lhs = word_trace("A:G A:G*", mats)
    manual = np.trace(apply_symbol(A, "G").data @ apply_symbol(A.with_data(A.data.conj().T), "G").data) / 9
    assert abs(lhs - manual) < 1e-10
    w = WordSpec.parse("A:G A A:L* A:T")
    ref = word_trace(w, mats)
    for k in range(1, 4):
        assert abs(word_trace(w.rotate(k), mats) - ref) < 1e-12 * max(1, abs(ref))
    with pytest.raises(ArgumentError):
        word_trace("A B", {"A": A, "B": random_matrix(2, 2)})


def test_word_trace_sigma():
    A, B = random_matrix(2, 2, 5), random_matrix(2, 2, 6)
    tr = lambda x: np.trace(x) / 4  # noqa: E731
    assert np.isclose(word_trace_sigma(Permutation.identity(2), [A, B]), tr(A.data) * tr(B.data))
    assert np.isclose(word_trace_sigma(Permutation((2, 1)), [A, B]), tr(A.data @ B.data))
    with pytest.raises(ArgumentError):
        word_trace_sigma(Permutation.identity(3), [A, B])


# --- samplers -------------------------------------------------------------


def test_haar_unitary_properties():
    u = sample_haar_unitary(1, stream(0, 0, 0))
    assert u.shape == (1, 1) and abs(abs(u[0, 0]) - 1) < 1e-12
    U = sample_haar_unitary(16, stream(1, 0, 0))
    assert np.max(np.abs(U.conj().T @ U - np.eye(16))) <= 1e-12


def test_phase_correction_makes_r_diagonal_positive():
    z = np.random.default_rng(0).standard_normal((6, 6)) + 1j * np.random.default_rng(1).standard_normal((6, 6))
    U = haar_from_ginibre(z)
    # U^* z is upper triangular with a positive diagonal
    R = U.conj().T @ z
    assert np.allclose(np.tril(R, -1), 0, atol=1e-10)
    assert np.all(np.diag(R).real > 0) and np.allclose(np.diag(R).imag, 0, atol=1e-10)


def test_haar_u11_second_moment():
    est = mc_word_moment_entry(8, 20000)
    assert abs(est[0] - 1 / 8) <= 4 * est[1]


def mc_word_moment_entry(M, n):
    vals = np.array([abs(sample_haar_unitary(M, stream(3, k, 0))[0, 0]) ** 2 for k in range(n)])
    return vals.mean(), vals.std(ddof=1) / math.sqrt(n)


def test_wishart_properties():
    W = sample_wishart(2, 3, 10, stream(0, 0, 0))
    assert np.max(np.abs(W - W.conj().T)) <= 1e-12
    assert np.min(np.linalg.eigvalsh(W)) > -1e-12
    G = sample_gue(6, stream(0, 0, 0))
    assert np.max(np.abs(G - G.conj().T)) <= 1e-12


def test_wishart_moments():
    spec = EnsembleSpec("wishart", 16, 16, 1024)
    ests = mc_word_moments(["A", "A A"], spec, 16, 5)
    M = 256
    assert abs(ests[0].mean - 1) <= 4 * ests[0].std_error + 2 / M
    assert abs(ests[1].mean - 1.25) <= 4 * ests[1].std_error + 2 / M


def test_gamma_mean_of_wishart():
    spec = EnsembleSpec("wishart", 8, 8, 256)
    est = mc_word_moment("A:G", spec, 8, 1)
    assert abs(est.mean - 1) <= 4 * est.std_error + 2 / 64


def test_ensemble_spec_validation():
    with pytest.raises(ConfigError):
        EnsembleSpec("nope", 2, 2)
    with pytest.raises(ConfigError):
        EnsembleSpec("wishart", 2, 2)
    with pytest.raises(ConfigError):
        EnsembleSpec("deterministic", 2, 2, matrix=np.eye(3))
    with pytest.raises(ConfigError):
        EnsembleSpec.from_dict({"kind": "wishart"}, 2, 2)
    spec = EnsembleSpec.from_dict({"kind": "wishart", "lam": 0.25}, 4, 4)
    assert spec.n == 64 and spec.lam == 0.25
    spec = EnsembleSpec.from_dict({"kind": "deterministic", "diag": [1, 2, 3, 4]}, 2, 2)
    assert np.array_equal(spec.matrix, np.diag([1, 2, 3, 4]).astype(complex))
    spec = EnsembleSpec.from_dict({"kind": "haar-conjugated", "inner": {"kind": "gue"}}, 2, 2)
    assert spec.inner.kind == "gue"


# --- Monte Carlo ------------------------------------------------------------


def test_deterministic_moment_exact():
    D = np.diag(np.arange(1, 5)).astype(complex)
    spec = EnsembleSpec("deterministic", 2, 2, matrix=D)
    est = mc_word_moment("A A", spec, 4, 0)
    assert est.mean == (1 + 4 + 9 + 16) / 4 and est.std_error == 0


def test_unitary_moment_exact_each_sample():
    spec = EnsembleSpec("haar-unitary", 2, 3)
    est = mc_word_moment("U U*", spec, 6, 0)
    assert abs(est.mean - 1) < 1e-12 and est.std_error < 1e-12


def test_reproducible_across_threads():
    spec = EnsembleSpec("ginibre", 3, 3)
    a = mc_word_moments(["A A*", "A:G A"], spec, 20, 42, threads=1)
    b = mc_word_moments(["A A*", "A:G A"], spec, 20, 42, threads=4)
    assert a == b
    c = mc_word_moments(["A A*"], spec, 20, 43)
    assert c[0] != a[0]


def test_independent_matrices_get_independent_streams():
    spec = EnsembleSpec("gue", 2, 2)
    est = mc_word_moment("A B", {"A": spec, "B": spec}, 8, 0)
    same = mc_word_moment("A A", spec, 8, 0)
    assert est.mean != same.mean


def test_invariance_probe():
    wish = EnsembleSpec("wishart", 3, 3, 36)
    assert unitary_invariance_probe(wish, "A A", 300, 1).agrees
    D = np.diag(np.arange(1, 17)).astype(complex)
    det = EnsembleSpec("deterministic", 4, 4, matrix=D)
    assert not unitary_invariance_probe(det, "A:G A:T", 50, 1).agrees
    assert unitary_invariance_probe(det, "A A", 50, 1).agrees
    haar = EnsembleSpec("haar-unitary", 2, 2)
    rep = unitary_invariance_probe(haar, "U U*", 10, 1)
    assert rep.agrees and abs(rep.difference) < 1e-12


def test_trace_cumulants():
    spec = EnsembleSpec("wishart", 4, 4, 64)
    k1 = trace_cumulant_estimate(spec, ["A"], 1, 200, 0)
    assert abs(k1.value - 16) <= 4 * k1.std_error
    # Var Tr W = M / n stays bounded along the ladder
    k2s = [trace_cumulant_estimate(EnsembleSpec("wishart", b, b, 4 * b * b), ["A"], 2, 200, 0).value.real
           for b in (4, 8, 16)]
    assert all(abs(k - 0.25) < 0.15 for k in k2s)
    det = EnsembleSpec("deterministic", 2, 2, matrix=np.eye(4))
    assert trace_cumulant_estimate(det, ["A"], 2, 5, 0).value == 0
    with pytest.raises(ArgumentError):
        trace_cumulant_estimate(spec, ["A"], 3, 5, 0)


def test_dump_round_trip(tmp_path):
    A = sample(EnsembleSpec("ginibre", 2, 3), stream(0, 0, 0))
    path = tmp_path / "a.fptm"
    dump_matrix(A, path)
    raw = path.read_bytes()
    assert raw[:4] == b"FPTM" and len(raw) == 16 + 16 * 36
    B = load_matrix(path)
    assert np.array_equal(A.data, B.data) and (B.b, B.d) == (2, 3)
    path.write_bytes(raw[:20])
    with pytest.raises(ArgumentError):
        load_matrix(path)
