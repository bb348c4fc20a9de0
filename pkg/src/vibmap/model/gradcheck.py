"""Finite-difference verification of the analytic gradients.

Samples parameter coordinates across every tensor (each tensor is hit at
least once), perturbs them one at a time in float64, and compares the
central difference of the loss against autograd. Training-mode batch
statistics are part of the differentiated function; the running-stat
side effects do not influence the loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from ..errors import GradMismatch


@dataclass
class GradCheckReport:
    n_checked: int
    max_rel_err: float
    worst_param: str
    failures: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def grad_check(
    model: torch.nn.Module,
    loss_fn,
    inputs: tuple,
    n_params: int = 200,
    epsilon: float = 1e-6,
    tolerance: float = 1e-3,
    seed: int = 0,
    raise_on_failure: bool = True,
) -> GradCheckReport:
    """Compare autograd gradients with central finite differences.

    ``loss_fn(model, *inputs)`` must return a scalar loss. The model is
    converted to float64 in place. Raises GradMismatch (listing offending
    parameters) when any sampled coordinate exceeds the tolerance, unless
    ``raise_on_failure`` is false.
    """
    model.double()
    inputs = tuple(
        t.double() if torch.is_floating_point(t) else t for t in inputs
    )
    named = [(name, p) for name, p in model.named_parameters() if p.requires_grad]
    if not named:
        raise ValueError("model has no trainable parameters")

    model.zero_grad()
    loss = loss_fn(model, *inputs)
    loss.backward()
    grads = {name: p.grad.detach().clone() for name, p in named}

    rng = np.random.default_rng(seed)
    coords: list[tuple[str, int]] = []
    for name, p in named:                      # cover every tensor once
        coords.append((name, int(rng.integers(p.numel()))))
    sizes = np.array([p.numel() for _, p in named])
    probs = sizes / sizes.sum()
    while len(coords) < n_params:
        t = int(rng.choice(len(named), p=probs))
        name, p = named[t]
        coords.append((name, int(rng.integers(p.numel()))))

    params = dict(named)
    failures: list[dict] = []
    max_rel = 0.0
    worst = ""
    with torch.no_grad():
        for name, flat_idx in coords:
            p = params[name]
            view = p.view(-1)
            orig = view[flat_idx].item()
            view[flat_idx] = orig + epsilon
            up = float(loss_fn(model, *inputs))
            view[flat_idx] = orig - epsilon
            down = float(loss_fn(model, *inputs))
            view[flat_idx] = orig
            fd = (up - down) / (2.0 * epsilon)
            an = float(grads[name].view(-1)[flat_idx])
            scale = max(abs(fd), abs(an))
            if scale < 1e-10:
                rel = 0.0
            else:
                rel = abs(fd - an) / scale
            if rel > max_rel:
                max_rel, worst = rel, f"{name}[{flat_idx}]"
            if rel > tolerance:
                failures.append(
                    {"param": f"{name}[{flat_idx}]", "analytic": an,
                     "finite_diff": fd, "rel_err": rel}
                )
    report = GradCheckReport(
        n_checked=len(coords), max_rel_err=max_rel, worst_param=worst, failures=failures
    )
    if failures and raise_on_failure:
        raise GradMismatch(
            f"{len(failures)}/{len(coords)} parameters exceed tolerance "
            f"{tolerance} (worst {worst}: {max_rel:.2e})",
            failures=failures,
        )
    return report
