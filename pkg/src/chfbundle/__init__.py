"""Base, neural and hybrid CHF models with a simplified subchannel solver."""
__version__ = "0.1.0"

from .correlations import Bowring, ChfModel, LocalState, ValidityEnvelope, W3, check_envelope
from .hybrid import HybridModel, build_residual_dataset, hybrid_predict
from .lut import DiameterCorrection, LookupTable, LutModel, load_lut
from .mlp import MlpModel, PureMlModel, Standardizer, TrainConfig, forward, train
from .props import PropertyTable, SatProps, equilibrium_quality, load_property_table, saturation
