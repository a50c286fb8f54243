import numpy as np
from ..model.errors import ParameterError
from ..model.params import RectifyParams


def rectify(scores, params:RectifyParams)->np.ndarray:
    """
    Lift transient likelihood dips inside voiced runs.

    Scanning left to right, ``c`` counts consecutive frames above ``max(scores)/2``. When a frame at
    or below that threshold arrives while ``c >= S``, it and the next ``J`` frames are blended
    toward the mean of the ``S`` scores before it: ``alpha*phi + (1-alpha)*phi_avg``, with the
    average fixed at the dip. Smoothed frames then feed the counter like any other frame.

    Frames outside smoothing windows are returned unchanged.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if len(scores) == 0:
        raise ParameterError('rectify needs at least one score')
    out = scores.copy()
    threshold = np.max(scores) / 2
    run = 0
    i = 0
    n = len(out)
    while i < n:
        if out[i] > threshold:
            run += 1
            i += 1
            continue
        if run < params.S:
            run = 0
            i += 1
            continue
        average = np.mean(out[i - params.S:i])
        end = min(i + params.J, n - 1)
        for j in range(i, end + 1):
            out[j] = params.alpha * out[j] + (1 - params.alpha) * average
            run = run + 1 if out[j] > threshold else 0
        i = end + 1
    return out
