"""Design automation for inductively degenerated cascode CMOS LNAs."""

from .devices import MosGeometry, MosOpPoint, Technology, default_technology
from .errors import LnaSynthError
from .netlist import Netlist, NetlistBuilder
from .synthesis import DesignSpec, LnaNetwork, synthesize
from .twoport import TwoPortParams

__all__ = [
    "DesignSpec",
    "LnaNetwork",
    "LnaSynthError",
    "MosGeometry",
    "MosOpPoint",
    "Netlist",
    "NetlistBuilder",
    "Technology",
    "TwoPortParams",
    "default_technology",
    "synthesize",
]
__version__ = "0.1.0"
