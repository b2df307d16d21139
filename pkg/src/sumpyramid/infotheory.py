"""Entropy-gain probes for staged versus mixed fine-tuning.

Models the alignment argument numerically: random variables Y and Z
(generic and personalized summary data) and three model states J1, J2,
J3 (before, after stage one, after stage two) get a joint distribution,
and the uncertainty reductions of one mixed stage (g_hybrid) versus two
chained stages (g_hierarchical) are compared. The module never claims a
proof; it measures how often the assumed inequality system holds, how
often the staged gain wins under it, and how large the derivation's
implicit steps actually are.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import NotNormalized, UnknownVariable
from .jsonl import digest_obj
from .validation import check_positive_int

VARIABLES = ("Y", "Z", "J1", "J2", "J3")

NORM_TOL = 1e-9
SHARD_SIZE = 512
COUNTEREXAMPLE_JOINT_CAP = 16


@dataclass(frozen=True)
class JointDistribution:
    names: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != len(self.names):
            raise ValueError(f"{len(self.names)} names but probs has {probs.ndim} axes")
        if np.any(probs < 0):
            raise NotNormalized("probabilities must be nonnegative")
        total = probs.sum()
        if abs(total - 1.0) > NORM_TOL:
            raise NotNormalized(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "probs", probs)

    def _axes(self, names: tuple[str, ...]) -> tuple[int, ...]:
        try:
            return tuple(self.names.index(n) for n in names)
        except ValueError:
            unknown = [n for n in names if n not in self.names]
            raise UnknownVariable(f"no such variable(s): {unknown}") from None

    def marginal(self, names: tuple[str, ...] | list[str]) -> np.ndarray:
        names = tuple(names)
        if len(set(names)) != len(names):
            raise UnknownVariable(f"duplicate variables in {names}")
        keep = self._axes(names)
        drop = tuple(i for i in range(len(self.names)) if i not in keep)
        reduced = self.probs.sum(axis=drop) if drop else self.probs
        # sum() keeps surviving axes in original order; reorder to request
        kept_order = [i for i in range(len(self.names)) if i in keep]
        perm = [kept_order.index(a) for a in keep]
        return np.transpose(reduced, perm)

    def digest(self) -> str:
        return digest_obj(self.probs.flatten().tolist())


def entropy(probs) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    p = np.asarray(probs, dtype=float).ravel()
    if np.any(p < 0):
        raise NotNormalized("probabilities must be nonnegative")
    total = p.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise NotNormalized(f"probabilities sum to {total!r}, not 1")
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def joint_entropy(joint: JointDistribution, names) -> float:
    return entropy(joint.marginal(tuple(names)))


def conditional_entropy(joint: JointDistribution, target, given=()) -> float:
    """H(target | given) = H(target, given) - H(given)."""
    target = tuple(target) if not isinstance(target, str) else (target,)
    given = tuple(given) if not isinstance(given, str) else (given,)
    if not given:
        return joint_entropy(joint, target)
    return joint_entropy(joint, target + given) - joint_entropy(joint, given)


def sample_joint(rng: np.random.Generator, alphabet: int = 3) -> JointDistribution:
    """Symmetric Dirichlet(1) draw over the full product space."""
    check_positive_int(alphabet, "alphabet")
    cells = alphabet ** len(VARIABLES)
    probs = rng.dirichlet(np.ones(cells)).reshape((alphabet,) * len(VARIABLES))
    probs = probs / probs.sum()
    return JointDistribution(VARIABLES, probs)


def check_assumption(joint: JointDistribution) -> dict:
    """Strict inequality system: lower-level data leaves more residual
    uncertainty. Returns the per-inequality breakdown."""
    h_z = {j: conditional_entropy(joint, "Z", j) for j in ("J1", "J2", "J3")}
    h_y = {j: conditional_entropy(joint, "Y", j) for j in ("J1", "J2", "J3")}
    breakdown = {
        "inequality_1": h_z["J1"] > h_z["J2"] > h_z["J3"],
        "inequality_2": h_y["J1"] > h_y["J2"],
        "inequality_3": h_y["J2"] < h_y["J3"],
    }
    breakdown["satisfied"] = all(breakdown.values())
    return breakdown


@dataclass(frozen=True)
class GainReport:
    g_hybrid: float
    g_hierarchical: float
    assumption_satisfied: bool
    hierarchical_wins: bool


def gains(joint: JointDistribution) -> GainReport:
    """g_hybrid: one mixed stage's joint-uncertainty reduction.
    g_hierarchical: the summed per-stage reductions of the chained plan.
    """
    g_hy = abs(
        conditional_entropy(joint, ("Y", "Z"), "J3") - conditional_entropy(joint, ("Y", "Z"), "J1")
    )
    g_hi = abs(conditional_entropy(joint, "Y", "J2") - conditional_entropy(joint, "Y", "J1")) + abs(
        conditional_entropy(joint, "Z", "J3") - conditional_entropy(joint, "Z", "J2")
    )
    satisfied = check_assumption(joint)["satisfied"]
    return GainReport(
        g_hybrid=g_hy,
        g_hierarchical=g_hi,
        assumption_satisfied=satisfied,
        hierarchical_wins=g_hi > g_hy,
    )


def identity_audit(joint: JointDistribution) -> list[dict]:
    """Evaluate each step of the staged-beats-mixed derivation.

    Entries with exact=True are unconditional chain-rule identities and
    must vanish on every joint; the rest are the derivation's implicit
    steps, reported as signed differences rather than asserted.
    """
    h_yz_j1 = conditional_entropy(joint, ("Y", "Z"), "J1")
    h_yz_j3 = conditional_entropy(joint, ("Y", "Z"), "J3")
    h_y_j1 = conditional_entropy(joint, "Y", "J1")
    h_y_j2 = conditional_entropy(joint, "Y", "J2")
    h_z_j2 = conditional_entropy(joint, "Z", "J2")
    h_z_j3 = conditional_entropy(joint, "Z", "J3")
    h_z_yj1 = conditional_entropy(joint, "Z", ("Y", "J1"))
    h_y_zj3 = conditional_entropy(joint, "Y", ("Z", "J3"))
    report = gains(joint)

    entries = [
        {
            "name": "chain_rule_J1",
            "lhs": h_yz_j1 - h_y_j1,
            "rhs": h_z_yj1,
            "exact": True,
        },
        {
            "name": "chain_rule_J3",
            "lhs": h_yz_j3 - h_z_j3,
            "rhs": h_y_zj3,
            "exact": True,
        },
        {
            # dropping the absolute values per the assumed signs, plus the
            # unstated premise that J3 conditions Y,Z at least as strongly
            # as J1
            "name": "abs_resolution",
            "lhs": report.g_hybrid - report.g_hierarchical,
            "rhs": (h_yz_j1 - h_yz_j3) + (h_y_j2 - h_y_j1) + (h_z_j3 - h_z_j2),
            "exact": False,
        },
        {
            # the derivation silently treats these as equal
            "name": "implicit_step",
            "lhs": h_z_yj1,
            "rhs": h_z_j2,
            "exact": False,
        },
        {
            # the derivation's closing claim is lhs - rhs < 0
            "name": "final_term",
            "lhs": h_y_j2,
            "rhs": h_y_zj3,
            "exact": False,
        },
    ]
    for entry in entries:
        entry["delta"] = entry["lhs"] - entry["rhs"]
    return entries


def _run_shard(seed: int, shard_index: int, count: int, alphabet: int) -> dict:
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(shard_index,)))
    out = {
        "n": count,
        "n_assumption_satisfied": 0,
        "n_hierarchical_wins": 0,
        "counterexamples": [],
        "counterexample_joints": [],
        "final_term_negative": 0,
        "implicit_step_abs_sum": 0.0,
    }
    for _ in range(count):
        joint = sample_joint(rng, alphabet)
        report = gains(joint)
        audit = {e["name"]: e for e in identity_audit(joint)}
        if audit["final_term"]["delta"] < 0:
            out["final_term_negative"] += 1
        out["implicit_step_abs_sum"] += abs(audit["implicit_step"]["delta"])
        if report.assumption_satisfied:
            out["n_assumption_satisfied"] += 1
            if report.hierarchical_wins:
                out["n_hierarchical_wins"] += 1
            else:
                out["counterexamples"].append(joint.digest())
                out["counterexample_joints"].append(joint.probs.flatten().tolist())
    return out


def monte_carlo(
    n_samples: int, seed: int = 0, alphabet: int = 3, jobs: int = 1
) -> dict:
    """Sample random joints and report how the staged-versus-mixed
    comparison comes out. The shard layout is fixed by n_samples alone,
    so results are identical for any worker count."""
    check_positive_int(n_samples, "n_samples")
    check_positive_int(jobs, "jobs")
    shards = [
        (seed, i, min(SHARD_SIZE, n_samples - i * SHARD_SIZE), alphabet)
        for i in range((n_samples + SHARD_SIZE - 1) // SHARD_SIZE)
    ]
    if jobs == 1:
        results = [_run_shard(*args) for args in shards]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda a: _run_shard(*a), shards))

    counterexamples: list[str] = []
    counterexample_joints: list[list[float]] = []
    n_satisfied = 0
    n_wins = 0
    final_negative = 0
    implicit_abs = 0.0
    for res in results:
        n_satisfied += res["n_assumption_satisfied"]
        n_wins += res["n_hierarchical_wins"]
        final_negative += res["final_term_negative"]
        implicit_abs += res["implicit_step_abs_sum"]
        counterexamples.extend(res["counterexamples"])
        counterexample_joints.extend(res["counterexample_joints"])
    return {
        "n_samples": n_samples,
        "seed": seed,
        "alphabet": alphabet,
        "n_assumption_satisfied": n_satisfied,
        "n_hierarchical_wins": n_wins,
        "counterexamples": counterexamples,
        "counterexample_joints": counterexample_joints[:COUNTEREXAMPLE_JOINT_CAP],
        "final_term_negative_fraction": (final_negative / n_samples),
        "implicit_step_mean_abs_delta": (implicit_abs / n_samples),
    }
