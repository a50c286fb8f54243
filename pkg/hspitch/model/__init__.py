from .audio import AudioBuffer, FrameView, LagRange
from .config import TrackerConfig, Component, ViterbiCostMode, VoicingOrientation, load_config
from .errors import ParameterError, AudioFormatError, ConfigError, ReferenceFormatError
from .gmm import BimodalGMM
from .grid import GeometricLagGrid
from .lattice import Stage, LikelihoodColumn, LikelihoodLattice
from .params import HarmonicWeights, RectifyParams, ToleranceMode
from .track import StatePath, PitchTrack, ReferenceTrack, EvalReport
