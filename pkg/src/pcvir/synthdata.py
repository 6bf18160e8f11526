"""Latent-factor generator for multicollinear tables with planted importance.

Each group draws standard-normal latent factors; features are linear
combinations of the latents plus Gaussian noise and the binary label follows
a logistic model on the latents. The implied sign of every feature's
association with the label is known exactly.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import DataError
from .glm import LabelCoding, expit
from .table import FeatureTable


@dataclass(frozen=True)
class GeneratorSpec:
    n_features: int
    n_rows_per_group: int
    n_groups: int
    latent_dim: int
    planted_effects: tuple  # log-odds per latent
    loading_pattern: tuple  # feature x latent
    noise_sd: float = 0.5
    seed: int = 0
    intercept: float = 0.0

    def __post_init__(self):
        effects = np.asarray(self.planted_effects, dtype=float)
        loadings = np.asarray(self.loading_pattern, dtype=float)
        object.__setattr__(self, "planted_effects", tuple(effects.tolist()))
        object.__setattr__(self, "loading_pattern", tuple(map(tuple, loadings.tolist())))
        if min(self.n_features, self.n_rows_per_group, self.n_groups, self.latent_dim) < 1:
            raise DataError("feature, row, group and latent counts must be positive")
        if self.latent_dim > self.n_features:
            raise DataError("latent_dim must not exceed n_features")
        if effects.shape != (self.latent_dim,):
            raise DataError(f"planted_effects must have length {self.latent_dim}")
        if loadings.shape != (self.n_features, self.latent_dim):
            raise DataError(
                f"loading_pattern must be {self.n_features} x {self.latent_dim}, "
                f"got {loadings.shape}")
        if not self.noise_sd > 0:
            raise DataError("noise_sd must be positive")
        if not np.any(loadings):
            raise DataError("loading_pattern is all zero")

    @property
    def loadings(self):
        return np.asarray(self.loading_pattern, dtype=float)

    @property
    def effects(self):
        return np.asarray(self.planted_effects, dtype=float)

    def feature_names(self):
        width = len(str(self.n_features))
        return tuple(f"x{j + 1:0{width}d}" for j in range(self.n_features))

    def group_names(self):
        return [f"g{g + 1}" for g in range(self.n_groups)]

    def true_signs(self):
        """Sign of each feature's model-implied association with the label."""
        return np.sign(self.loadings @ self.effects).astype(int)

    def implied_correlation(self):
        cov = self.loadings @ self.loadings.T + self.noise_sd ** 2 * np.eye(self.n_features)
        sd = np.sqrt(np.diag(cov))
        return cov / np.outer(sd, sd)

    def implied_prevalence(self, nodes=80):
        """P(label = 1) by Gauss-Hermite quadrature over the linear predictor."""
        scale = float(np.linalg.norm(self.effects))
        if scale == 0:
            return float(expit(np.array([self.intercept]))[0])
        x, w = np.polynomial.hermite_e.hermegauss(nodes)
        return float(np.sum(w * expit(self.intercept + scale * x)) / np.sqrt(2 * np.pi))

    def to_dict(self):
        d = asdict(self)
        d["planted_effects"] = list(self.planted_effects)
        d["loading_pattern"] = [list(r) for r in self.loading_pattern]
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass(frozen=True)
class SyntheticTable:
    table: FeatureTable
    spec: GeneratorSpec
    true_signs: np.ndarray

    def ground_truth(self):
        return {
            "spec": self.spec.to_dict(),
            "feature_names": list(self.table.feature_names),
            "true_signs": self.true_signs.tolist(),
            "implied_prevalence": self.spec.implied_prevalence(),
        }


def generate(spec):
    """Draw a grouped table from ``spec``; one independent PCG64 stream per group."""
    streams = np.random.SeedSequence(spec.seed).spawn(spec.n_groups)
    loadings, effects = spec.loadings, spec.effects
    rows, labels, groups = [], [], []
    for gid, ss in zip(spec.group_names(), streams):
        rng = np.random.Generator(np.random.PCG64(ss))
        n = spec.n_rows_per_group
        latent = rng.standard_normal((n, spec.latent_dim))
        noise = rng.standard_normal((n, spec.n_features))
        x = latent @ loadings.T + spec.noise_sd * noise
        prob = expit(spec.intercept + latent @ effects)
        y = (rng.random(n) < prob).astype(int)
        rows.append(x)
        labels.append(y)
        groups.extend([gid] * n)
    table = FeatureTable(spec.feature_names(), np.vstack(rows), np.concatenate(labels),
                         LabelCoding("0", "1"), np.array(groups, dtype=object))
    return SyntheticTable(table, spec, spec.true_signs())


def acoustic_like_spec(n_rows_per_group=500, n_groups=6, seed=0,
                       effects=(1.0, -0.12, 0.0), noise_sd=0.6):
    """20 features on 3 latents with mixed-sign loadings.

    With the default effects at 500 rows per group, features of latent 1 are
    strongly important, those of latent 2 moderately, and the rest not at all.

    Features 1-6 load on latent 1, 7-11 on latent 2, 12-16 on latent 3
    (some with secondary cross-loadings) and 17-20 are pure noise.
    """
    L = np.zeros((20, 3))
    L[0:6, 0] = [0.9, 0.85, -0.8, 0.75, -0.9, 0.7]
    L[6:11, 1] = [0.85, -0.8, 0.9, 0.7, -0.75]
    L[11:16, 2] = [0.9, 0.8, -0.85, 0.75, 0.8]
    L[5, 1] = 0.3
    L[10, 2] = 0.3
    L[15, 0] = -0.25
    return GeneratorSpec(20, n_rows_per_group, n_groups, 3, tuple(effects), L,
                         noise_sd, seed)


def strongest_latent_features(spec):
    """Indices of features whose dominant loading is on the latent with the largest |effect|."""
    L = spec.loadings
    k = int(np.argmax(np.abs(spec.effects)))
    dominant = np.argmax(np.abs(L), axis=1)
    return np.flatnonzero((dominant == k) & (np.abs(L[:, k]) > 0))


def pure_noise_features(spec):
    return np.flatnonzero(~np.any(spec.loadings, axis=1))
