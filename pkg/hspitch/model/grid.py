from dataclasses import dataclass
import numpy as np


@dataclass(frozen=True)
class GeometricLagGrid:
    """
    Log-uniformly spaced lags between ``l_min`` and ``l_max``, ``U`` points per integer lag on
    average. Equal steps on this grid are equal frequency ratios, so a ±1-step constraint bounds
    the relative pitch slew.
    """
    lags:np.ndarray
    U:int

    @classmethod
    def build(cls, l_min:int, l_max:int, U:int)->'GeometricLagGrid':
        if U < 1:
            raise ValueError(f'Upsampling factor must be positive, got {U}')
        if not 0 < l_min < l_max:
            raise ValueError(f'Invalid grid lag range: {l_min}..{l_max}')
        steps = U * (l_max - l_min)
        t = np.arange(steps + 1) / steps
        lags = l_min * (l_max / l_min) ** t
        # pin the endpoints exactly
        lags[0] = l_min
        lags[-1] = l_max
        return cls(lags, U)

    def __len__(self):
        return len(self.lags)

    @property
    def l_min(self)->float:
        return float(self.lags[0])

    @property
    def l_max(self)->float:
        return float(self.lags[-1])

    @property
    def octaves_per_step(self)->float:
        """
        Pitch change, in octaves, between neighbouring grid states.
        """
        return float(np.log2(self.lags[-1] / self.lags[0]) / (len(self.lags) - 1))
