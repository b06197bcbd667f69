"""lgpsc: spectral clustering with PCA blending and mean-point Laplacians.

Models, metrics and a benchmark harness; see ``bench --help``.
"""

from .bench import ResultRecord, Summary, emit_reports, read_records, run_benchmark, summarize
from .config import BenchmarkSpec, ModelConfig, load_spec
from .data import LabeledDataset, gen_blobs, gen_two_moons, load_builtin, load_delimited
from .errors import LgpscError
from .kmeans import KMeansConfig, kmeans_fit
from .metrics import ari, nmi
from .models import MODELS, cosine_sc_fit, get_model, multilevel_fit, sc_fit, scpca_fit

__version__ = "0.1.0"
__all__ = [
    "MODELS",
    "BenchmarkSpec",
    "KMeansConfig",
    "LabeledDataset",
    "LgpscError",
    "ModelConfig",
    "ResultRecord",
    "Summary",
    "ari",
    "cosine_sc_fit",
    "emit_reports",
    "gen_blobs",
    "gen_two_moons",
    "get_model",
    "kmeans_fit",
    "load_builtin",
    "load_delimited",
    "load_spec",
    "multilevel_fit",
    "nmi",
    "read_records",
    "run_benchmark",
    "sc_fit",
    "scpca_fit",
    "summarize",
]
