"""scikit-learn style wrappers around the entropy, magic and orbit tools.

Each row of ``X`` is one sample: a state vector of length ``2**n`` for
:class:`EntropyVectorizer` and :class:`OrbitClassifier`, or a nonnegative
Schmidt spectrum for :class:`SpectrumMagicTransformer`.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .entropy_lab import representative_subsets
from .graph_atlas import batch_entropy_vectors
from .group_engine import close_subgroup, orbit_size
from .magic_kit import Spectrum, anti_flatness, m2_bounds
from .state_space import DenseState

__all__ = ["EntropyVectorizer", "SpectrumMagicTransformer", "OrbitClassifier"]


def _check_states(X, n_qubits: int | None = None) -> np.ndarray:
    """Validate a 2-D stack of complex amplitudes and normalize each row."""
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("expected a non-empty 2-D array of state vectors")
    arr = arr.astype(complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("state amplitudes must be finite")
    dim = arr.shape[1]
    n = dim.bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise ValueError(f"state length {dim} is not a power of two")
    if n_qubits is not None and n != n_qubits:
        raise ValueError(f"expected {n_qubits}-qubit states, got {n}")
    norms = np.linalg.norm(arr, axis=1)
    if np.any(norms < 1e-12):
        raise ValueError("zero state vector")
    return arr / norms[:, None]


class EntropyVectorizer(TransformerMixin, BaseEstimator):
    """Map pure states to entropy vectors over the representative subsets.

    ``decimals`` rounds the output, which is handy when the vectors feed
    a set or a groupby; ``None`` keeps full precision. Entropies are in bits.
    """

    def __init__(self, decimals: int | None = None, threads: int = 1):
        self.decimals = decimals
        self.threads = threads

    def fit(self, X, y=None):
        arr = _check_states(X)
        self.n_qubits_ = arr.shape[1].bit_length() - 1
        self.subsets_ = representative_subsets(self.n_qubits_)
        self.n_features_in_ = arr.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_qubits_")
        arr = _check_states(X, self.n_qubits_)
        out = batch_entropy_vectors(arr, self.n_qubits_, self.threads)
        return out if self.decimals is None else np.round(out, self.decimals)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "subsets_")
        return np.array(["S_" + "".join(map(str, s)) for s in self.subsets_], dtype=object)


class SpectrumMagicTransformer(TransformerMixin, BaseEstimator):
    """Per-spectrum magic features.

    Columns: the ordered-spectrum M2 estimate, the ``2 S_2`` bound, the
    anti-flatness, and the permutation average (NaN when the padded
    spectrum has more than 16 entries).
    """

    feature_names = ("m2_estimate", "upper_2s2", "anti_flatness", "m2_averaged")

    def __init__(self, normalize: bool = True):
        self.normalize = normalize

    def _spectra(self, X) -> list[Spectrum]:
        arr = check_array(X, dtype=float, ensure_2d=True)
        if np.any(arr < -1e-12):
            raise ValueError("spectra must be nonnegative")
        return [Spectrum.from_values(row[row > 0], normalize=self.normalize) for row in arr]

    def fit(self, X, y=None):
        arr = check_array(X, dtype=float, ensure_2d=True)
        self.n_features_in_ = arr.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        rows = []
        for sp in self._spectra(X):
            b = m2_bounds(sp)
            avg = np.nan if b.averaged is None else b.averaged
            rows.append([b.estimate, b.upper_2s2, anti_flatness(sp), avg])
        return np.array(rows, dtype=float)

    def get_feature_names_out(self, input_features=None):
        return np.array(self.feature_names, dtype=object)


class OrbitClassifier(ClassifierMixin, BaseEstimator):
    """Predict the orbit size of a state under a two-qubit Clifford subgroup.

    ``fit`` only enumerates the subgroup named by ``generators`` (acting on
    qubits 1 and 2); the labels ``y`` are optional and, when given, are
    used to populate ``classes_``. ``predict`` returns ``|G| / |Stab(psi)|``.
    """

    def __init__(self, generators: str = "H1,H2,C12,C21", tolerance: float = 1e-9):
        self.generators = generators
        self.tolerance = tolerance

    def fit(self, X, y=None):
        arr = _check_states(X)
        if arr.shape[1] < 4:
            raise ValueError("orbits need at least two qubits")
        gens = [g.strip() for g in self.generators.split(",") if g.strip()]
        self.table_ = close_subgroup(gens, mod_phase=True)
        self.n_features_in_ = arr.shape[1]
        self.group_order_ = self.table_.order
        labels = self.predict(arr) if y is None else np.asarray(y)
        self.classes_ = np.unique(labels)
        return self

    def predict(self, X):
        check_is_fitted(self, "table_")
        arr = _check_states(X)
        if arr.shape[1] != self.n_features_in_:
            raise ValueError("state length differs from the fitted one")
        return np.array(
            [orbit_size(self.table_, DenseState.from_unnormalized(row), self.tolerance) for row in arr], dtype=int
        )
