from __future__ import annotations
from dataclasses import dataclass, field
from typing import List, Tuple
import numpy as np
from scipy.stats import norm

VARIANCE_FLOOR = 1e-6


@dataclass
class BimodalGMM:
    """
    A two-component 1-D Gaussian mixture. Component 0 is the voiced one (the larger mean along the
    energy-aligned projection axis), component 1 is unvoiced.
    """
    means:np.ndarray
    variances:np.ndarray
    weights:np.ndarray
    log_likelihoods:List[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=np.float64)
        self.variances = np.asarray(self.variances, dtype=np.float64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.means.shape != (2,) or self.variances.shape != (2,) or self.weights.shape != (2,):
            raise ValueError('BimodalGMM needs exactly two components')
        if np.any(self.variances <= 0):
            raise ValueError(f'GMM variances must be positive, got {list(self.variances)}')
        if np.any(self.weights <= 0) or np.any(self.weights >= 1) or not np.isclose(self.weights.sum(), 1.0):
            raise ValueError(f'GMM weights must lie in (0,1) and sum to 1, got {list(self.weights)}')

    @property
    def iterations(self)->int:
        return max(0, len(self.log_likelihoods) - 1)

    def weighted_log_densities(self, x)->Tuple[np.ndarray, np.ndarray]:
        """
        ``log(w_k * N(x; mu_k, var_k))`` for the voiced and the unvoiced component.
        """
        x = np.asarray(x, dtype=np.float64)
        stds = np.sqrt(self.variances)
        log_voiced = np.log(self.weights[0]) + norm.logpdf(x, self.means[0], stds[0])
        log_unvoiced = np.log(self.weights[1]) + norm.logpdf(x, self.means[1], stds[1])
        return log_voiced, log_unvoiced

    def swapped(self)->BimodalGMM:
        """
        The same mixture with the voiced/unvoiced roles exchanged.
        """
        return BimodalGMM(self.means[::-1], self.variances[::-1], self.weights[::-1], list(self.log_likelihoods))
