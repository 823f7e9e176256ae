"""Neural samplers for distributions known only through their characteristic function."""

from . import _backend
from .baselines import (
    UnivStableParams,
    project_stable_params,
    sample_gaussian_mixture,
    sample_stable_discrete_spectral,
    sample_stable_univ,
)
from .charfn import (
    CharFn,
    EmpiricalCF,
    GaussianMixtureSpec,
    PointMassCF,
    StableSpec,
    eval_empirical_cf,
    eval_gaussian_mixture_cf,
    eval_stable_cf,
    standard_normal_spec,
)
from .kernel import (
    FrequencyBatch,
    KernelSpec,
    closed_form_kernel,
    estimate_cp,
    mmd2_u_cf,
    mmd2_u_twosample,
    sample_frequencies,
)
from .loss import LossReport, loss_grad_outputs, loss_report, loss_value
from .net import AdamState, MlpParams, NetArch, adam_step, backward, forward, init_mlp
from .numkit import RngStream, sample_matrix, seed_stream
from .trainer import TrainConfig, TrainLog, generate, train

__version__ = "0.1.0"
backend = _backend.name
