"""mpskit: tensor compression to per-sample core matrices, plus a Tucker
baseline and a classification benchmark harness."""

from .classify import (
    FeatureMatrix,
    LdaModel,
    PcaTransform,
    center_data,
    csr,
    knn1_classify,
    lda_classify,
    lda_fit,
    pca_fit_transform,
    vectorize_cores,
)
from .data import (
    Dataset,
    holdout_split,
    load_dataset,
    save_dataset,
    stack_samples,
    synth_dataset,
)
from .errors import DegenerateInputError, FormatError
from .linalg import SvdDiagnostics, TruncatedSvd, svd_diagnostics, truncated_svd
from .mps import (
    CompressionConfig,
    MpsModel,
    load_mps_model,
    mps_compress_test,
    mps_train,
    plan_permutation,
    save_mps_model,
    truncate_cores,
)
from .pipeline import RunReport, report_to_json, run_pipeline
from .tensor import (
    PermutationPlan,
    as_tensor,
    frobenius_norm,
    matricize,
    matricize_prefix,
    mode_n_product,
    permute_modes,
    refold,
)
from .tucker import (
    TuckerModel,
    hooi_train,
    load_tucker_model,
    save_tucker_model,
    truncate_tucker,
    tucker_compress_test,
    tucker_compress_train,
)

__version__ = "0.1.0"
