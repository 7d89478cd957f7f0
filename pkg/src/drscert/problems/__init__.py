"""Problem data, the worked-example gallery, SDP instance generation and file I/O."""

from ..cones import smat, svec
from .core import CASES, ConicProblem, SdpInstance
from .gallery import GALLERY_IDS, canonical_example, gallery
from .io import ProblemFormatError, problem_from_dict, problem_to_dict, read_problem, write_problem
from .sdp import apply_messy, generate_weakly_infeasible_sdp, messy_transform, sample_invertible

__all__ = [
    "CASES",
    "ConicProblem",
    "SdpInstance",
    "GALLERY_IDS",
    "canonical_example",
    "gallery",
    "ProblemFormatError",
    "problem_from_dict",
    "problem_to_dict",
    "read_problem",
    "write_problem",
    "apply_messy",
    "generate_weakly_infeasible_sdp",
    "messy_transform",
    "sample_invertible",
    "svec",
    "smat",
]
