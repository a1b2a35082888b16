"""Analytic multiply-accumulate accounting for the pipeline.

One MAC is one fused multiply-add; a linear layer applied to a batch of B
vectors costs exactly B * d_in * d_out. Pruning changes no multiplies by
itself (sorting and thresholding are comparisons, reported separately),
but shrinks the transformer's per-edge work from M^2 to sum_i (k_i* + 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["linear_macs", "MacReport", "count_macs", "parameter_count"]


def linear_macs(batch: int, d_in: int, d_out: int) -> int:
    return batch * d_in * d_out


@dataclass
class MacReport:
    per_module: dict          # module name -> MACs
    aip_comparisons: int      # compare/sort ops, not MACs
    rt_attention_dense: int   # per-edge RT work with no pruning
    rt_attention_pruned: int  # same work over kept edges + self
    mean_k_star: float

    @property
    def total(self) -> int:
        return sum(self.per_module.values())

    def lines(self) -> list[str]:
        out = [f"{name:24s} {macs:>14,d}" for name, macs in self.per_module.items()]
        out.append(f"{'total':24s} {self.total:>14,d}")
        out.append(f"{'aip comparisons (non-MAC)':24s} {self.aip_comparisons:>10,d}")
        out.append(
            f"rt per-edge work: dense {self.rt_attention_dense:,d} MACs, "
            f"pruned {self.rt_attention_pruned:,d} MACs "
            f"(mean k* = {self.mean_k_star:.2f})"
        )
        return out


def count_macs(d: int, heads: int, layers: int, k: int,
               m: int, t_h: int, t_f: int,
               k_star: np.ndarray | None = None) -> MacReport:
    """MAC counts for one scene of M agents. k_star, when given, is the
    per-agent retained-neighbor count measured after pruning; otherwise the
    dense M-1 is assumed."""
    if k_star is None:
        k_star = np.full(m, m - 1)
    k_star = np.asarray(k_star)
    edges_pruned = int(k_star.sum()) + m          # kept neighbors + self
    edges_dense = m * (m - 1) + m

    per = {}
    per["embed"] = linear_macs(m * t_h, 2, d)
    per["targ_qkv"] = 3 * linear_macs(m * t_h, d, d)
    per["targ_attention"] = m * m * t_h * d       # same-time q.k dots, all heads
    per["targ_aggregate"] = m * m * t_h * d       # score-weighted value sums
    per["targ_proj"] = linear_macs(m * m, d, d)
    per["targ_edge_score"] = linear_macs(m * m, 2 * d, 1)

    # relational transformer, per layer, over kept edges only
    rt = 0
    rt += 3 * linear_macs(m, d, d)                # node q/k/v
    rt += 2 * edges_pruned * d * d                # edge key/value projections
    rt += 2 * edges_pruned * d                    # logit dots + value weighting
    rt += linear_macs(m, d, 4 * d) + linear_macs(m, 4 * d, d)   # ffn
    rt += edges_pruned * (linear_macs(1, 4 * d, d) + linear_macs(1, d, d))  # edge mlp
    per["rt"] = layers * rt

    per["heads"] = k * (2 * linear_macs(m, 2 * d, 2 * d)
                        + linear_macs(m, 2 * d, t_f * 2))

    # the per-edge RT terms above, dense vs pruned, for the reduction factor
    def edge_work(edges: int) -> int:
        return layers * (2 * edges * d * d + 2 * edges * d
                         + edges * (4 * d * d + d * d))

    return MacReport(
        per_module=per,
        aip_comparisons=m * (m - 1),
        rt_attention_dense=edge_work(edges_dense),
        rt_attention_pruned=edge_work(edges_pruned),
        mean_k_star=float(k_star.mean()) if m > 0 else 0.0,
    )


def parameter_count(params) -> int:
    return int(sum(p.data.size for p in params))
