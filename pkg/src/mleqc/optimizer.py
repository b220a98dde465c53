"""Gate-fidelity functionals and a seeded genetic search over control fields.

Fidelity conventions
--------------------
For a multilevel-encoded qubit the propagated unitary is viewed in the
2x2 block form [[A, B], [C, D]] with n x n blocks (logical factor slow).
A logical X member has A = D = 0 and unitary off-diagonal blocks with
B = C; a logical Z member has B = C = 0 and D = -A.  The functionals

    F_x = 1 - sqrt(|BB' - 1|^2 / n + |B - C|^2 / (4n))
    F_z = 1 - sqrt(|AA' - 1|^2 / n + |A + D|^2 / (4n))

(|.| the Frobenius norm, ' the adjoint) equal 1 exactly on class
members.  For arbitrary unitaries the radicand can exceed 1, so values
are clamped to [0, 1] and clamps are counted rather than hidden.

For the single-level encoding the computational states are the first
and third physical levels, giving the matrix-element functionals
F'_x = |U_13 + U_31| / 2 and F'_z = |U_11 - U_33| / 2.

Genetic algorithm
-----------------
Genes are the field component amplitudes and phases, plus carrier
frequencies when ``frequency_deviation`` > 0 (free within that
fractional band around the field-free gaps; pinned otherwise).
Selection is tournament-of-2 with elitism; crossover happens at child
level (a 50/50 uniform gene mix at ``crossover_rate``, otherwise the
child clones its first parent); mutation adds Gaussian steps whose
per-child scale spans several decades, which keeps coarse search and
fine tuning simultaneously alive in the population.

Every child draws from its own generator seeded by (seed, generation,
index), so the outcome is independent of evaluation order and exactly
reproducible.  Fitness for a whole generation is evaluated in one
vectorized batch through the tabulated step propagator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Unitary, matrix_norm
from .dynamics import (
    MIN_STEPS_PER_PERIOD,
    ControlField,
    FieldComponent,
    ModelSystem,
    propagate_population,
)

_KINDS = ("mle_x", "mle_z", "sle_x", "sle_z", "generic_norm")

#: Fitness resolution, in steps per period of the fastest field-free gap.
#: The midpoint rule's discretization error acts as spurious fitness the
#: search will happily exploit: at 20 steps/period an optimizer can "gain"
#: several 1e-2 of fictitious fidelity.  At 160 the residual bias on
#: optimized fields is ~1e-3 (second-order scaling, confirmed by the
#: step-halving study), small against the acceptance margins.
FITNESS_STEPS_PER_PERIOD = 160

#: Resolution of the final reported unitary.  Chosen so that halving the
#: step changes the propagated gate by well under 1e-6 in Frobenius norm
#: even for fields with every amplitude at the clip bound, i.e. the
#: recorded gate is converged to more digits than any downstream error
#: metric resolves.
FINAL_STEPS_PER_PERIOD = 40960


def _as_batch(u) -> np.ndarray:
    a = u.matrix if isinstance(u, Unitary) else np.asarray(u, dtype=complex)
    return a[None, :, :] if a.ndim == 2 else a


def _frob2_batch(m: np.ndarray) -> np.ndarray:
    """Squared Frobenius norm over the trailing two axes."""
    return np.einsum("...ij,...ij->...", m, np.conj(m)).real


def _mle_blocks(u: np.ndarray, n: int):
    d = u.shape[-1]
    if d != 2 * n:
        raise ValueError(f"unitary dimension {d} does not match encoding dim n={n}")
    return u[..., :n, :n], u[..., :n, n:], u[..., n:, :n], u[..., n:, n:]


def _clamp(raw: np.ndarray):
    clamped = np.clip(raw, 0.0, 1.0)
    return clamped, int(np.count_nonzero(raw != clamped))


def mle_x_raw(u, n: int) -> np.ndarray:
    """Unclamped F_x for a (batch of) unitaries; exposed for headroom checks."""
    ub = _as_batch(u)
    _, b, c, _ = _mle_blocks(ub, n)
    eye = np.eye(n)
    t1 = _frob2_batch(b @ np.conj(np.swapaxes(b, -1, -2)) - eye) / n
    t2 = _frob2_batch(b - c) / (4 * n)
    return 1.0 - np.sqrt(t1 + t2)


def mle_z_raw(u, n: int) -> np.ndarray:
    ub = _as_batch(u)
    a, _, _, d = _mle_blocks(ub, n)
    eye = np.eye(n)
    t1 = _frob2_batch(a @ np.conj(np.swapaxes(a, -1, -2)) - eye) / n
    t2 = _frob2_batch(a + d) / (4 * n)
    return 1.0 - np.sqrt(t1 + t2)


def fidelity_mle_x(u, n: int) -> float:
    """Block fidelity toward the logical-X gate class; clamped to [0, 1]."""
    return float(np.clip(mle_x_raw(u, n), 0.0, 1.0)[0])


def fidelity_mle_z(u, n: int) -> float:
    return float(np.clip(mle_z_raw(u, n), 0.0, 1.0)[0])


def _check_sle_dim(u: np.ndarray):
    if u.shape[-1] < 3:
        raise ValueError("single-level functionals need at least 3 physical levels")


def fidelity_sle_x(u) -> float:
    """|U_13 + U_31| / 2 with levels 1 and 3 as the computational pair."""
    ub = _as_batch(u)
    _check_sle_dim(ub)
    return float(np.abs(ub[0, 0, 2] + ub[0, 2, 0]) / 2)


def fidelity_sle_z(u) -> float:
    ub = _as_batch(u)
    _check_sle_dim(ub)
    return float(np.abs(ub[0, 0, 0] - ub[0, 2, 2]) / 2)


@dataclass
class FidelityFunctional:
    """Callable fitness objective; counts clamp events across evaluations."""

    kind: str
    n: int = 2
    target: Unitary | None = None
    clamp_count: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown functional kind {self.kind!r}")
        if self.kind == "generic_norm" and self.target is None:
            raise ValueError("generic_norm requires a target unitary")

    def evaluate_batch(self, u_batch: np.ndarray) -> np.ndarray:
        if self.kind == "mle_x":
            raw = mle_x_raw(u_batch, self.n)
        elif self.kind == "mle_z":
            raw = mle_z_raw(u_batch, self.n)
        elif self.kind == "sle_x":
            _check_sle_dim(u_batch)
            raw = np.abs(u_batch[:, 0, 2] + u_batch[:, 2, 0]) / 2
        elif self.kind == "sle_z":
            _check_sle_dim(u_batch)
            raw = np.abs(u_batch[:, 0, 0] - u_batch[:, 2, 2]) / 2
        else:
            diff = u_batch - self.target.matrix[None, :, :]
            raw = 1.0 - np.sqrt(_frob2_batch(diff))
            return raw
        out, nclamp = _clamp(raw)
        self.clamp_count += nclamp
        return out

    def __call__(self, u) -> float:
        return float(self.evaluate_batch(_as_batch(u))[0])


@dataclass(frozen=True)
class GAConfig:
    """Hyperparameters of the genetic search.

    ``anneal_decades`` slides the mutation-scale window downward over
    the run: per-child scales span span*10^-u with u uniform in
    [a*frac, decades + a*frac] where frac = g/(generations-1).  Zero
    keeps the window fixed at [0, decades].
    """

    population_size: int = 200
    generations: int = 100
    crossover_rate: float = 0.3
    mutation_rate: float = 0.3
    elite_count: int = 2
    seed: int = 0
    amplitude_max: float = 0.01
    frequency_deviation: float = 0.0
    mutation_scale_decades: float = 4.0
    anneal_decades: float = 0.0
    selection: str = "tournament"
    steps_per_period: int = FITNESS_STEPS_PER_PERIOD

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if not 0 <= self.elite_count < self.population_size:
            raise ValueError("elite_count must be in [0, population_size)")
        if self.generations < 1:
            raise ValueError("generations must be positive")
        if self.amplitude_max <= 0:
            raise ValueError("amplitude_max must be positive")
        if not 0.0 <= self.frequency_deviation < 0.5:
            raise ValueError("frequency_deviation must lie in [0, 0.5)")
        if self.selection not in ("tournament", "rank"):
            raise ValueError(f"unknown selection scheme {self.selection!r}")
        if self.steps_per_period < MIN_STEPS_PER_PERIOD:
            raise ValueError(
                f"steps_per_period must be >= {MIN_STEPS_PER_PERIOD}"
            )


@dataclass(frozen=True)
class OptimizationRecord:
    best_fidelity: np.ndarray
    mean_fidelity: np.ndarray
    best_field: ControlField
    final_unitary: Unitary
    total_propagations: int
    clamp_count: int


def _rank_pick(order: np.ndarray, u: float) -> np.ndarray:
    """Linear-rank selection: rank r (0 = best) gets weight pop - r."""
    pop = len(order)
    cum = np.cumsum(np.arange(pop, 0, -1))
    r = int(np.searchsorted(cum, u * cum[-1], side="right"))
    return order[min(r, pop - 1)]


def ga_optimize(
    system: ModelSystem,
    template: ControlField,
    functional: FidelityFunctional,
    config: GAConfig,
) -> OptimizationRecord:
    """Maximize the functional over field parameters; deterministic per seed.

    The template fixes the gene layout: one amplitude and phase gene per
    component, plus a frequency gene per component when
    ``frequency_deviation`` > 0.  Template amplitudes/phases are not
    used as a starting point — the initial population is drawn from the
    gene bounds, with amplitudes log-uniform over three decades below
    ``amplitude_max`` so that weak and strong pulses both appear.
    Returns the running-best fidelity series (exactly nondecreasing),
    the best field found, and that field's unitary re-propagated at the
    convergence resolution (FINAL_STEPS_PER_PERIOD), where the step-
    halving drift is far below every downstream error metric.
    """
    if functional.kind.startswith("mle") and system.dim != 2 * functional.n:
        raise ValueError(
            f"functional expects dimension {2 * functional.n}, system has {system.dim}"
        )
    m = len(template.components)
    if m == 0:
        raise ValueError("template must have at least one field component")
    base_freqs = template.frequencies()
    t_final = template.t_final
    pop = config.population_size
    gens = config.generations
    dev = config.frequency_deviation
    freq_free = dev > 0
    a_max = config.amplitude_max
    seed = config.seed

    period = 2 * np.pi / max(system.spectral_spread(), float(np.abs(base_freqs).max()))
    dt = period / config.steps_per_period
    # One eps-table serves every generation: amplitudes are clipped to
    # [0, a_max], so the field magnitude never exceeds m * a_max.
    eps_bound = 1.001 * m * a_max + 1e-12

    rng0 = np.random.default_rng([seed, 0])
    amps = a_max * 10.0 ** (-3.0 * rng0.random((pop, m)))
    phases = rng0.random((pop, m)) * 2 * np.pi
    cols = [amps, phases]
    if freq_free:
        cols.append(base_freqs[None, :] * (1 + dev * (2 * rng0.random((pop, m)) - 1)))
    genes = np.concatenate(cols, axis=1)
    ng = genes.shape[1]
    span = np.concatenate(
        ([a_max] * m, [2 * np.pi] * m) + ((2 * dev * np.abs(base_freqs),) if freq_free else ())
    )

    best_series = np.empty(gens)
    mean_series = np.empty(gens)
    best_fit = -np.inf
    best_genes = genes[0]
    for g in range(gens):
        freqs = genes[:, 2 * m :] if freq_free else np.broadcast_to(base_freqs, (pop, m))
        u_batch = propagate_population(
            system, template.envelope, genes[:, :m], genes[:, m : 2 * m], freqs,
            t_final, dt, eps_max=eps_bound,
        )
        fit = functional.evaluate_batch(u_batch)
        order = np.argsort(fit)[::-1]
        if fit[order[0]] > best_fit:
            best_fit = fit[order[0]]
            best_genes = genes[order[0]].copy()
        best_series[g] = best_fit
        mean_series[g] = fit.mean()
        if g == gens - 1:
            break

        frac = g / max(gens - 1, 1)
        u_lo = config.anneal_decades * frac
        u_hi = config.mutation_scale_decades + u_lo
        new = [genes[order[j]].copy() for j in range(config.elite_count)]
        for i in range(config.elite_count, pop):
            r = np.random.default_rng([seed, g + 1, i])
            if config.selection == "tournament":
                a, b = r.integers(pop, size=2), r.integers(pop, size=2)
                p1 = genes[a[0]] if fit[a[0]] >= fit[a[1]] else genes[a[1]]
                p2 = genes[b[0]] if fit[b[0]] >= fit[b[1]] else genes[b[1]]
            else:
                p1 = genes[_rank_pick(order, r.random())]
                p2 = genes[_rank_pick(order, r.random())]
            if r.random() < config.crossover_rate:
                child = np.where(r.random(ng) < 0.5, p2, p1)
            else:
                child = p1.copy()
            mask = r.random(ng) < config.mutation_rate
            child = child + mask * r.normal(0, 1, ng) * span * 10.0 ** (
                -(u_lo + (u_hi - u_lo) * r.random())
            )
            child[:m] = np.clip(child[:m], 0, a_max)
            child[m : 2 * m] = np.mod(child[m : 2 * m], 2 * np.pi)
            if freq_free:
                child[2 * m :] = np.clip(
                    child[2 * m :], base_freqs * (1 - dev), base_freqs * (1 + dev)
                )
            new.append(child)
        genes = np.array(new)

    comps = tuple(
        FieldComponent(
            best_genes[j],
            best_genes[2 * m + j] if freq_free else base_freqs[j],
            best_genes[m + j],
        )
        for j in range(m)
    )
    best_field = ControlField(template.envelope, comps, t_final)
    # The reported gate is re-propagated at the convergence resolution so
    # that downstream error metrics see the field's true action, not the
    # fitness grid's discretization of it.
    u_final = propagate_population(
        system, template.envelope,
        best_genes[None, :m], best_genes[None, m : 2 * m],
        (best_genes[None, 2 * m :] if freq_free else base_freqs[None, :]),
        t_final, period / FINAL_STEPS_PER_PERIOD, eps_max=eps_bound,
    )[0]
    # Millions of chained table steps leave a ~1e-10 unitarity defect;
    # report the nearest unitary (polar factor) instead.
    w, _, vh = np.linalg.svd(u_final)
    u_final = w @ vh
    return OptimizationRecord(
        best_fidelity=best_series,
        mean_fidelity=mean_series,
        best_field=best_field,
        final_unitary=Unitary(u_final),
        total_propagations=pop * gens + 1,
        clamp_count=functional.clamp_count,
    )


#: Documented per-target optimization setups reproducing the benchmark
#: fidelities.  Frequencies are freed within +/-5% of the field-free
#: gaps for all four targets; the X-type searches benefit most because
#: the two near-degenerate transitions can detune away from cross-talk.
TARGET_PRESETS = {
    "mle-x": dict(
        kind="mle_x", t_final=5e4, population_size=100, generations=400,
        frequency_deviation=0.05, anneal_decades=2.0, seed=7,
    ),
    "mle-z": dict(
        kind="mle_z", t_final=5e4, population_size=100, generations=400,
        frequency_deviation=0.05, anneal_decades=0.0, seed=7,
    ),
    "sle-x": dict(
        kind="sle_x", t_final=2e4, population_size=100, generations=200,
        frequency_deviation=0.05, anneal_decades=0.0, seed=7,
    ),
    "sle-z": dict(
        kind="sle_z", t_final=2e4, population_size=100, generations=200,
        frequency_deviation=0.05, anneal_decades=0.0, seed=7,
    ),
}


def preset_run(system: ModelSystem, target: str, **overrides) -> OptimizationRecord:
    """Run one of the documented target presets (seeds included)."""
    if target not in TARGET_PRESETS:
        raise ValueError(f"unknown target {target!r}; choose from {sorted(TARGET_PRESETS)}")
    p = dict(TARGET_PRESETS[target])
    p.update(overrides)
    kind = p.pop("kind")
    t_final = p.pop("t_final")
    template = ControlField.template(system, t_final=t_final)
    functional = FidelityFunctional(kind, n=system.dim // 2)
    config = GAConfig(**p)
    return ga_optimize(system, template, functional, config)
