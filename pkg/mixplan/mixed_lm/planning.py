"""
Per-step plan scores and the mixture of item-conditioned next-token distributions.
"""
from dataclasses import dataclass
from typing import List, Sequence, Union

import torch

from ..error_codes import ErrorCode
from ..error_handler import DistributionError, NumericError
from .model import MixedLMModel, PlanScorer

def sum_tolerance(tensor: torch.Tensor) -> float:
    """Allowed |sum - 1| for a distribution of this dtype, its sum taken in float64."""
    return 1e-9 if tensor.dtype == torch.float64 else 1e-6

@dataclass
class StepPlanScores:
    """Raw scores e [N] and plan distribution d = softmax(e) [N] for one step."""
    scores: torch.Tensor
    distribution: torch.Tensor

    def to_list(self) -> List[float]:
        return [float(x) for x in self.distribution]

def plan_scores(
    model: Union[MixedLMModel, PlanScorer], summaries: torch.Tensor, states: torch.Tensor
) -> StepPlanScores:
    """
    Score every item at one step from its summary h_i and its own decoder state s_it.

    Args:
        model: The model or its plan scorer
        summaries: [N, H]
        states: [N, H]
    """
    scorer = model.plan_scorer if isinstance(model, MixedLMModel) else model
    if summaries.shape != states.shape or summaries.dim() != 2 or summaries.shape[-1] != scorer.hidden_size:
        raise NumericError(
            ErrorCode.DIMENSION_MISMATCH,
            details=f"summaries {tuple(summaries.shape)} vs states {tuple(states.shape)}, hidden size {scorer.hidden_size}",
        )
    scores = scorer(summaries, states)
    return StepPlanScores(scores=scores, distribution=torch.softmax(scores, dim=-1))

def mixture_step(
    distributions: Union[torch.Tensor, Sequence[torch.Tensor]],
    plan: Union[StepPlanScores, torch.Tensor],
) -> torch.Tensor:
    """
    p(v) = sum_i d_i p_i(v).

    Args:
        distributions: [N, V] per-item next-token probabilities, each row summing to 1
        plan: StepPlanScores or the distribution d itself, [N]

    Raises:
        NumericError: d and the distributions disagree in length
        DistributionError: A per-item distribution is not normalized
    """
    if not isinstance(distributions, torch.Tensor):
        distributions = torch.stack(list(distributions))
    weights = plan.distribution if isinstance(plan, StepPlanScores) else plan
    if weights.shape[0] != distributions.shape[0]:
        raise NumericError(
            ErrorCode.DIMENSION_MISMATCH,
            details=f"{weights.shape[0]} plan weights for {distributions.shape[0]} distributions",
        )
    tolerance = sum_tolerance(distributions)
    totals = distributions.sum(dim=-1, dtype=torch.float64)
    worst = int(torch.argmax((totals - 1).abs()))
    if abs(float(totals[worst]) - 1.0) > tolerance:
        raise DistributionError(ErrorCode.NOT_NORMALIZED, total=float(totals[worst]), tolerance=tolerance)
    return weights.to(distributions.dtype) @ distributions
