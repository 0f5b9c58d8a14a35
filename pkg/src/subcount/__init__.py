"""Sound adversarial attacks and exact graphlet counting for black-box
subgraph-count regressors."""

from .attack import (
    AttackConfig,
    AttackResult,
    PerturbationSpace,
    Verdict,
    adversarial_loss,
    beam_attack,
    classify_adversarial,
    transfer_eval,
)
from .counting import (
    CountVector,
    OccurrenceSet,
    count_all,
    count_bruteforce,
    count_induced,
    enumerate_bruteforce,
    enumerate_induced,
)
from .datasets import (
    Dataset,
    DatasetSpec,
    ErSpec,
    SbmSpec,
    build_dataset,
    gen_er,
    gen_sbm,
    load_dataset,
    save_dataset,
)
from .graph import (
    Graph,
    GraphError,
    diameter,
    edge_flip,
    egonet,
    induced_subgraph,
    is_isomorphic_small,
    new_graph,
)
from .metrics import (
    ShiftReport,
    SuccessCurve,
    auc_normalized,
    mae,
    mae_count_norm,
    shift_report,
    success_curve,
    welch_ttest,
)
from .models import (
    ExternalModel,
    FeatureRegressor,
    ModelProtocolError,
    Predictor,
    external_model_client,
    noisy_oracle,
    oracle_model,
    train_feature_regressor,
)
from .patterns import ALL_PATTERNS, Pattern
from .perturb import (
    EdgeEdit,
    EditOp,
    LocalPatch,
    apply_edit,
    gen_P1,
    gen_P1_count_preserving,
    gen_P1_subgraph_preserving,
    local_count_delta,
    sample_edits_degree_weighted,
)

__version__ = "0.1.0"
