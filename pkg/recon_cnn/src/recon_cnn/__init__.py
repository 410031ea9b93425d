"""CNN reconstruction of compressed hyperspectral cubes.

Consumes the hscodec compressor's .raw/.hdr interchange files and keeps
every corrected sample inside its quantization bin (the same clipping
contract as the compressor's TV baseline).
"""

from .clip import clip_bounds, clip_layer
from .data import TrainSpec, extract_patches, extract_patches_multi
from .infer import reconstruct, window_counts
from .model import ReconModel, load_model, save_model
from .rawio import read_cube, write_cube
from .train import train

__version__ = "0.1.0"
